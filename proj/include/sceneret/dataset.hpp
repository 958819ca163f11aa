#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sceneret/concept_label.hpp"

namespace sceneret {

struct ManifestEntry {
    std::string image_id;
    std::filesystem::path path;
    std::string category;

    bool operator==(const ManifestEntry&) const = default;
};

/// Category-labelled image collection. Categories are sorted
/// lexicographically; entries are sorted by (category, image_id).
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> categories;

    std::size_t category_count() const { return categories.size(); }
    /// Position of `category` in the sorted category list; throws if absent.
    std::size_t category_index(std::string_view category) const;
    /// Entries of one category, in manifest order.
    std::vector<const ManifestEntry*> members(std::string_view category) const;
    const ManifestEntry& find(std::string_view image_id) const;
};

/// Loads `<root>/manifest.tsv` when present, otherwise one sub-directory per
/// category holding png/jpg files. Image ids are file stems and must be
/// unique across the whole collection.
DatasetManifest load_manifest(const std::filesystem::path& root);

/// Builds a manifest from explicit entries, validating and ordering them
/// exactly like load_manifest.
DatasetManifest make_manifest(std::vector<ManifestEntry> entries);

// ---------------------------------------------------------------------------
// Region annotations

struct GridShape {
    int rows = 10;
    int cols = 10;

    bool operator==(const GridShape&) const = default;
};

/// Concept weights for one grid cell; a cell holds one concept at weight 1
/// or two concepts at 0.5 each.
struct CellAnnotation {
    std::vector<std::pair<ConceptLabel, double>> weights;

    bool operator==(const CellAnnotation&) const = default;
    /// The first listed concept; used as the hard training label.
    ConceptLabel primary() const { return weights.front().first; }
};

struct RegionAnnotation {
    GridShape grid;
    std::vector<CellAnnotation> cells;  // row-major, rows*cols

    const CellAnnotation& at(int row, int col) const { return cells[static_cast<std::size_t>(row * grid.cols + col)]; }
};

using RegionAnnotationMap = std::map<std::string, RegionAnnotation>;

/// Parses one `.regions.txt` body: exactly grid.rows lines of grid.cols
/// whitespace-separated tokens, each `concept` or `concept/concept`.
RegionAnnotation parse_region_annotation(std::string_view text, GridShape grid);
std::string format_region_annotation(const RegionAnnotation& annotation);

/// Reads every `<image_id>.regions.txt` file in `dir`.
RegionAnnotationMap load_region_annotations(const std::filesystem::path& dir, GridShape grid = {});

inline constexpr std::string_view kRegionsSuffix = ".regions.txt";

// ---------------------------------------------------------------------------
// Fold plans

struct FoldCategory {
    std::string category;
    std::vector<std::string> queries;
    std::vector<std::string> database;

    bool operator==(const FoldCategory&) const = default;
};

struct Fold {
    std::vector<FoldCategory> categories;  // in manifest category order

    bool operator==(const Fold&) const = default;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;

    bool operator==(const FoldPlan&) const = default;
};

/// Shuffles each category under a seeded generator and cuts it into
/// n_folds near-equal parts (remainder to the earliest folds); fold i
/// queries with part i and retrieves from the rest.
FoldPlan split_folds(const DatasetManifest& manifest, int n_folds, std::uint64_t seed);

/// Text export: `fold<TAB>category<TAB>query|db<TAB>image_id` per line.
std::string format_fold_plan(const FoldPlan& plan);

}  // namespace sceneret
