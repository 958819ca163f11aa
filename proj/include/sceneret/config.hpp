#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sceneret/concepts.hpp"
#include "sceneret/dataset.hpp"
#include "sceneret/keypoints.hpp"
#include "sceneret/representation.hpp"

namespace sceneret {

/// Every setting of a pipeline run. Stored as flat `key = value` text.
struct RunConfig {
    std::filesystem::path dataset;
    std::filesystem::path annotations;  // empty: the dataset root
    std::filesystem::path out = "out";
    GridShape grid;
    int words_per_category = 200;
    int pyramid_level = 2;  // top level of the weighted colour pyramid; only 2 is valid
    std::vector<double> level_weights = {0.25, 0.25, 0.5};
    DetectorParams detector;
    int knn_k = kDefaultNeighbours;
    AnnotatorKind annotator = AnnotatorKind::Knn;
    RegionApproach region_approach = RegionApproach::IBOW_ColHist;
    std::uint64_t seed = 0;
    std::vector<std::string> approaches;  // representation names; empty: all fourteen
    int folds = 10;
    unsigned threads = 1;
    std::size_t max_descriptors = 500000;
    int kmeans_max_iter = 100;
    double kmeans_rel_tol = 1e-4;

    std::filesystem::path annotation_dir() const { return annotations.empty() ? dataset : annotations; }
    bool operator==(const RunConfig&) const = default;
};

std::string format_config(const RunConfig& config);
/// Applies the keys in `text` on top of `base`. Unknown keys and malformed
/// values are usage errors.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Sets one key from its text form; the same parser the file format uses.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Checks value ranges (grid, K, folds, weights, ...).
void validate_config(const RunConfig& config);

/// Representation names to process: config.approaches, or all fourteen
/// whole-image approaches when empty.
std::vector<Representation> requested_representations(const RunConfig& config);

}  // namespace sceneret
