#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sceneret/global_features.hpp"
#include "sceneret/imaging.hpp"
#include "sceneret/keypoints.hpp"
#include "sceneret/representation.hpp"
#include "sceneret/vocabulary.hpp"

namespace sceneret {

/// Word counts of the keypoints falling inside `bounds`.
struct BowHistogram {
    Eigen::VectorXd counts;
    CellBounds bounds;
};

/// Quantizes the keypoints inside `bounds` against `vocab`.
BowHistogram bow_histogram(const LocalFeatures& features, const Vocabulary& vocab, const CellBounds& bounds);

/// Histogram from pre-quantized word ids (words[i] belongs to keypoints[i]).
Eigen::VectorXd bow_counts(std::span<const Keypoint> keypoints, std::span<const int> words, int n_words,
                           const CellBounds& bounds);

/// Per-cell histograms over pyramid_cells(width, height, max_level),
/// concatenated: n_words * cell_count values.
Eigen::VectorXd pyramid_bow(const LocalFeatures& features, const Vocabulary& vocab, int width, int height, int max_level);
Eigen::VectorXd pyramid_bow_counts(std::span<const Keypoint> keypoints, std::span<const int> words, int n_words,
                                   int width, int height, int max_level);

// ---------------------------------------------------------------------------
// Composition

enum class PartKind : std::uint8_t {
    ColHist,
    ColMom,
    DWT,
    PColMom_L0,
    PColMom_L2,
    UBOW,
    IBOW,
    PUBOW_L1,
    PUBOW_L2,
    PIBOW_L1,
    PIBOW_L2,
};

std::string_view part_kind_name(PartKind kind);

/// One raw ingredient of a representation.
struct Part {
    PartKind kind;
    Eigen::VectorXd values;
};

/// Ingredients of an approach in concatenation order (BOW part first,
/// colour part second). `weighted_color` marks the weighted-pyramid variant.
struct Recipe {
    std::vector<PartKind> parts;
    bool weighted_color = false;
};

Recipe recipe_of(Approach approach);

/// Unit-normalized whole-image vector. `is_zero` flags the degenerate
/// all-zero case (e.g. no keypoints for a BOW-only approach).
struct FeatureVector {
    Approach approach = Approach::ColHist;
    Eigen::VectorXd values;
    bool is_zero = false;

    Eigen::Index dim() const { return values.size(); }
};

struct ComposeOptions {
    /// Level weights applied to the colour part of weighted approaches.
    std::vector<double> level_weights = {0.25, 0.25, 0.5};
};

/// L2-normalizes each part on its own (zero parts stay zero), concatenates
/// them, and L2-normalizes the result.
template <typename Range>
Eigen::VectorXd normalize_and_concatenate(const Range& parts) {
    Eigen::Index dim = 0;
    for (const auto& p : parts) dim += p.size();
    Eigen::VectorXd out(dim);
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
        const double n = p.norm();
        if (n > 0.0)
            out.segment(offset, p.size()) = p / n;
        else
            out.segment(offset, p.size()).setZero();
        offset += p.size();
    }
    const double total = out.norm();
    if (total > 0.0) out /= total;
    return out;
}

/// Validates parts against the approach's recipe, applies pyramid weights
/// to the colour part of weighted approaches, then normalizes.
FeatureVector compose_representation(Approach approach, std::span<const Part> parts, const ComposeOptions& options = {});

/// Expected dimension of an approach for a channel count (1 or 3) and
/// universal / integrated vocabulary sizes.
int approach_dim(Approach approach, int channels, int universal_words, int integrated_words);

// ---------------------------------------------------------------------------
// End-to-end encoding

/// Decoded image plus everything the extractors need.
struct ImageData {
    Image image;
    std::optional<HsvImage> hsv;  // colour inputs only
    LocalFeatures features;

    int width() const { return image.width; }
    int height() const { return image.height; }
    int channels() const { return image.channels(); }
    /// HSV planes for colour images, the grey plane otherwise. The
    /// ImageData must outlive the returned view.
    ColorPlanes color() const { return hsv ? ColorPlanes(*hsv) : ColorPlanes(image); }
};

ImageData prepare_image(Image image, const LocalFeatures& features);
ImageData prepare_image(Image image, const DetectorParams& params);

/// Vocabularies available to the encoders; entries may be null when no
/// requested approach needs them.
struct VocabularySet {
    const Vocabulary* universal = nullptr;
    const Vocabulary* integrated = nullptr;
    const Vocabulary* upper = nullptr;
    const Vocabulary* lower = nullptr;
};

bool approach_uses(Approach approach, VocabularyKind kind);

/// Computes every part of the approach's recipe from the image and composes them.
FeatureVector encode_image(Approach approach, const ImageData& data, const VocabularySet& vocabs,
                           const ComposeOptions& options = {});

}  // namespace sceneret
