#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sceneret/config.hpp"
#include "sceneret/stores.hpp"
#include "sceneret/vocabulary.hpp"

namespace sceneret {

/// File locations under the output directory.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path descriptors() const { return root / "descriptors.bin"; }
    std::filesystem::path vocabulary(VocabularyKind kind) const;
    std::filesystem::path feature_store(Representation rep) const;
    std::filesystem::path index(Representation rep) const;
    std::filesystem::path cov_text(Representation rep) const;
    std::filesystem::path predicted_annotations(RegionApproach approach) const;
    std::filesystem::path report() const { return root / "report"; }
};

/// Loads the cached descriptors, extracting (in parallel) those of images
/// not yet cached, and saves the cache when it changed. Images that fail to
/// decode are logged and left out; an error is raised if none decode.
DescriptorStore ensure_descriptors(const RunConfig& config, const DatasetManifest& manifest, std::ostream& log);

/// kind: universal, integrated, halves (upper and lower) or all.
void cmd_build_vocab(const RunConfig& config, std::string_view kind, std::ostream& log);

/// Encodes every manifest image under each requested whole-image approach,
/// adding missing records to the approach's feature store.
void cmd_encode(const RunConfig& config, std::ostream& log);

/// Ground-truth mode: concept occurrence vectors straight from the region
/// annotations. Otherwise every image is annotated by half-specific
/// annotators trained on the images outside its query fold.
void cmd_annotate(const RunConfig& config, bool use_ground_truth, std::ostream& log);

/// Builds a retrieval index file from each requested feature store.
void cmd_index(const RunConfig& config, std::ostream& log);

struct QueryRequest {
    std::filesystem::path image;
    std::string approach;
    std::optional<std::size_t> top;
    std::filesystem::path regions;  // annotation of the query image, ground-truth COV queries only
};

/// Prints the ranked list for one query image.
void cmd_query(const RunConfig& config, const QueryRequest& request, std::ostream& out, std::ostream& log);

/// Runs the fold protocol over the requested stores, writes the report
/// and prints each approach's accuracy.
void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Rewrites the PR-curve files of a saved report.
void cmd_export_pr(const RunConfig& config, const std::filesystem::path& report_dir, std::ostream& log);

}  // namespace sceneret
