#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sceneret/bow.hpp"
#include "sceneret/concept_label.hpp"
#include "sceneret/dataset.hpp"
#include "sceneret/imaging.hpp"
#include "sceneret/representation.hpp"
#include "sceneret/vocabulary.hpp"

namespace sceneret {

/// Normalized concept frequencies, indexed by ConceptLabel.
using ConceptOccurrenceVector = Eigen::Matrix<double, static_cast<int>(kConceptCount), 1>;

/// One hard label per grid cell, row-major.
struct LabelGrid {
    GridShape grid;
    std::vector<ConceptLabel> labels;

    ConceptLabel at(int row, int col) const { return labels[static_cast<std::size_t>(row * grid.cols + col)]; }
    bool operator==(const LabelGrid&) const = default;
};

/// Sum of cell weights per concept divided by the cell count.
ConceptOccurrenceVector cov_from_annotations(const RegionAnnotation& annotation);
ConceptOccurrenceVector cov_from_annotations(const LabelGrid& grid);

/// Hard labels as a region annotation (weight 1 per cell), for export.
RegionAnnotation to_annotation(const LabelGrid& grid);
/// First-listed concept of every cell.
LabelGrid primary_labels(const RegionAnnotation& annotation);

/// `image_id<TAB>v1 ... v9` per line, 9 decimal places, ordered by id.
std::string format_covs(const std::map<std::string, ConceptOccurrenceVector>& covs);
std::map<std::string, ConceptOccurrenceVector> parse_covs(std::string_view text);

// ---------------------------------------------------------------------------
// Region representations

/// Vocabularies used for regions: the universal one for UBOW variants and
/// the half-specific integrated ones for IBOW variants.
struct RegionVocabularies {
    const Vocabulary* universal = nullptr;
    const Vocabulary* upper = nullptr;
    const Vocabulary* lower = nullptr;
};

/// Encodes regions of one image. Descriptors are quantized once per
/// vocabulary on construction, so encoding all grid cells stays cheap.
class RegionEncoder {
public:
    RegionEncoder(const ImageData& data, RegionApproach approach, const RegionVocabularies& vocabs);

    /// Blocks of the approach over `region` (BOW first, then colour
    /// histogram or moments, then wavelet texture), each L2-normalized,
    /// concatenated and normalized again.
    Eigen::VectorXd encode(const CellBounds& region, Half half) const;

private:
    const ImageData& data_;
    RegionApproach approach_;
    RegionVocabularies vocabs_;
    std::vector<int> universal_words_;
    std::vector<int> upper_words_;
    std::vector<int> lower_words_;
};

Eigen::VectorXd region_representation(const ImageData& data, const CellBounds& region, Half half,
                                      RegionApproach approach, const RegionVocabularies& vocabs);

/// Expected region vector dimension for a channel count and vocabulary sizes.
int region_approach_dim(RegionApproach approach, int channels, int universal_words, int half_words);

bool region_approach_uses_universal(RegionApproach approach);
bool region_approach_uses_halves(RegionApproach approach);

// ---------------------------------------------------------------------------
// Annotators

enum class AnnotatorKind : std::uint8_t { Knn, NearestCentroid };

std::string_view annotator_kind_name(AnnotatorKind kind);
std::optional<AnnotatorKind> parse_annotator_kind(std::string_view name);

struct LabeledRegion {
    Eigen::VectorXd vector;
    ConceptLabel label;
};

/// Memorized exemplars of one image half. Knn takes a majority vote over
/// the k nearest exemplars (ties between classes go to the class of the
/// nearest tied neighbour, equal distances to the lower exemplar index);
/// NearestCentroid picks the class with the closest mean exemplar.
struct AnnotatorModel {
    Half half = Half::Upper;
    RegionApproach approach = RegionApproach::ColHist;
    AnnotatorKind kind = AnnotatorKind::Knn;
    int k = 5;
    int channels = 3;
    Eigen::MatrixXd exemplars;  // dim x n
    std::vector<ConceptLabel> labels;
    Eigen::MatrixXd centroids;  // dim x classes (NearestCentroid only)
    std::vector<ConceptLabel> centroid_labels;

    Eigen::Index dim() const { return exemplars.rows(); }
    ConceptLabel predict(const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

inline constexpr int kDefaultNeighbours = 5;

AnnotatorModel train_annotator(std::span<const LabeledRegion> regions, Half half, RegionApproach approach, int k,
                               AnnotatorKind kind = AnnotatorKind::Knn, int channels = 3);

/// Labels every grid cell: cells in the upper half of the image (see
/// half_of_cell) use `upper`, the rest `lower`.
LabelGrid annotate_image(const ImageData& data, const AnnotatorModel& upper, const AnnotatorModel& lower, GridShape grid,
                         const RegionVocabularies& vocabs);

/// Training exemplars of one image: every grid cell's region vector with the
/// cell's first-listed concept, split by half.
struct HalfExemplars {
    std::vector<LabeledRegion> upper;
    std::vector<LabeledRegion> lower;
};
HalfExemplars collect_exemplars(const ImageData& data, const RegionAnnotation& annotation, RegionApproach approach,
                                const RegionVocabularies& vocabs);

}  // namespace sceneret
