#include "sceneret/concepts.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sceneret/error.hpp"
#include "sceneret/global_features.hpp"
#include "sceneret/io_util.hpp"

namespace sceneret {

ConceptOccurrenceVector cov_from_annotations(const RegionAnnotation& annotation) {
    ConceptOccurrenceVector cov = ConceptOccurrenceVector::Zero();
    for (const CellAnnotation& cell : annotation.cells)
        for (const auto& [label, weight] : cell.weights) cov[static_cast<Eigen::Index>(concept_index(label))] += weight;
    if (!annotation.cells.empty()) cov /= static_cast<double>(annotation.cells.size());
    return cov;
}

ConceptOccurrenceVector cov_from_annotations(const LabelGrid& grid) {
    ConceptOccurrenceVector cov = ConceptOccurrenceVector::Zero();
    for (ConceptLabel label : grid.labels) cov[static_cast<Eigen::Index>(concept_index(label))] += 1.0;
    if (!grid.labels.empty()) cov /= static_cast<double>(grid.labels.size());
    return cov;
}

RegionAnnotation to_annotation(const LabelGrid& grid) {
    RegionAnnotation out;
    out.grid = grid.grid;
    out.cells.reserve(grid.labels.size());
    for (ConceptLabel label : grid.labels) out.cells.push_back(CellAnnotation{{{label, 1.0}}});
    return out;
}

LabelGrid primary_labels(const RegionAnnotation& annotation) {
    LabelGrid out;
    out.grid = annotation.grid;
    for (const CellAnnotation& cell : annotation.cells) out.labels.push_back(cell.primary());
    return out;
}

std::string format_covs(const std::map<std::string, ConceptOccurrenceVector>& covs) {
    std::string out;
    for (const auto& [id, cov] : covs) {
        out += id;
        for (Eigen::Index i = 0; i < cov.size(); ++i) {
            out += '\t';
            out += io::fixed(cov[i], 9);
        }
        out += '\n';
    }
    return out;
}

std::map<std::string, ConceptOccurrenceVector> parse_covs(std::string_view text) {
    std::map<std::string, ConceptOccurrenceVector> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string id;
        fields >> id;
        ConceptOccurrenceVector cov;
        for (Eigen::Index i = 0; i < cov.size(); ++i)
            if (!(fields >> cov[i])) throw Error("COV line " + std::to_string(line_no) + ": expected 9 values");
        std::string extra;
        if (fields >> extra) throw Error("COV line " + std::to_string(line_no) + ": too many values");
        out[id] = cov;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct RegionRecipe {
    bool ubow = false;
    bool ibow = false;
    bool colhist = false;
    bool colmom = false;
    bool dwt = false;
};

RegionRecipe region_recipe(RegionApproach a) {
    using R = RegionApproach;
    switch (a) {
        case R::ColHist: return {false, false, true, false, false};
        case R::ColMom: return {false, false, false, true, false};
        case R::DWT: return {false, false, false, false, true};
        case R::ColHist_DWT: return {false, false, true, false, true};
        case R::UBOW: return {true, false, false, false, false};
        case R::IBOW: return {false, true, false, false, false};
        case R::UBOW_ColHist: return {true, false, true, false, false};
        case R::UBOW_ColMom: return {true, false, false, true, false};
        case R::UBOW_DWT: return {true, false, false, false, true};
        case R::UBOW_ColHist_DWT: return {true, false, true, false, true};
        case R::IBOW_ColHist: return {false, true, true, false, false};
        case R::IBOW_ColMom: return {false, true, false, true, false};
        case R::IBOW_DWT: return {false, true, false, false, true};
        case R::IBOW_ColHist_DWT: return {false, true, true, false, true};
    }
    throw Error("unknown region approach");
}

}  // namespace

bool region_approach_uses_universal(RegionApproach approach) { return region_recipe(approach).ubow; }
bool region_approach_uses_halves(RegionApproach approach) { return region_recipe(approach).ibow; }

int region_approach_dim(RegionApproach approach, int channels, int universal_words, int half_words) {
    const RegionRecipe r = region_recipe(approach);
    int dim = 0;
    if (r.ubow) dim += universal_words;
    if (r.ibow) dim += half_words;
    if (r.colhist) dim += block_dim(BlockKind::ColHist, channels);
    if (r.colmom) dim += block_dim(BlockKind::ColMom, channels);
    if (r.dwt) dim += block_dim(BlockKind::DWT, channels);
    return dim;
}

RegionEncoder::RegionEncoder(const ImageData& data, RegionApproach approach, const RegionVocabularies& vocabs)
    : data_(data), approach_(approach), vocabs_(vocabs) {
    const RegionRecipe r = region_recipe(approach);
    const std::string name(region_approach_name(approach));
    if (r.ubow) {
        if (!vocabs.universal) throw Error("region approach " + name + " needs the universal vocabulary");
        universal_words_ = vocabs.universal->assign_all(data.features.descriptors);
    }
    if (r.ibow) {
        if (!vocabs.upper || !vocabs.lower)
            throw Error("region approach " + name + " needs the upper and lower integrated vocabularies");
        if (vocabs.upper->size() != vocabs.lower->size())
            throw Error("upper and lower vocabularies differ in size");
        upper_words_ = vocabs.upper->assign_all(data.features.descriptors);
        lower_words_ = vocabs.lower->assign_all(data.features.descriptors);
    }
}

Eigen::VectorXd RegionEncoder::encode(const CellBounds& region, Half half) const {
    if (region.empty()) throw Error("empty region");
    const RegionRecipe r = region_recipe(approach_);
    const ColorPlanes color = data_.color();
    std::vector<Eigen::VectorXd> parts;
    if (r.ubow) parts.push_back(bow_counts(data_.features.keypoints, universal_words_, vocabs_.universal->size(), region));
    if (r.ibow) {
        const bool upper = half == Half::Upper;
        parts.push_back(bow_counts(data_.features.keypoints, upper ? upper_words_ : lower_words_,
                                   (upper ? vocabs_.upper : vocabs_.lower)->size(), region));
    }
    if (r.colhist) parts.push_back(color_histogram(color, region).values);
    if (r.colmom) parts.push_back(color_moments(color, region).values);
    if (r.dwt) parts.push_back(dwt_texture(color, region).values);
    return normalize_and_concatenate(parts);
}

Eigen::VectorXd region_representation(const ImageData& data, const CellBounds& region, Half half,
                                      RegionApproach approach, const RegionVocabularies& vocabs) {
    return RegionEncoder(data, approach, vocabs).encode(region, half);
}

// ---------------------------------------------------------------------------

std::string_view annotator_kind_name(AnnotatorKind kind) {
    return kind == AnnotatorKind::Knn ? "knn" : "nearest-centroid";
}

std::optional<AnnotatorKind> parse_annotator_kind(std::string_view name) {
    if (name == "knn") return AnnotatorKind::Knn;
    if (name == "nearest-centroid" || name == "centroid") return AnnotatorKind::NearestCentroid;
    return std::nullopt;
}

AnnotatorModel train_annotator(std::span<const LabeledRegion> regions, Half half, RegionApproach approach, int k,
                               AnnotatorKind kind, int channels) {
    if (k < 1) throw Error("annotator k must be at least 1");
    if (regions.size() < static_cast<std::size_t>(k))
        throw Error("too few exemplars: " + std::to_string(regions.size()) + " for k=" + std::to_string(k));
    const Eigen::Index dim = regions.front().vector.size();
    AnnotatorModel model;
    model.half = half;
    model.approach = approach;
    model.kind = kind;
    model.k = k;
    model.channels = channels;
    model.exemplars.resize(dim, static_cast<Eigen::Index>(regions.size()));
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].vector.size() != dim) throw Error("exemplars have mixed dimensions");
        model.exemplars.col(static_cast<Eigen::Index>(i)) = regions[i].vector;
        model.labels.push_back(regions[i].label);
    }
    if (kind == AnnotatorKind::NearestCentroid) {
        std::array<int, kConceptCount> counts{};
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(kConceptCount));
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const std::size_t c = concept_index(regions[i].label);
            sums.col(static_cast<Eigen::Index>(c)) += regions[i].vector;
            ++counts[c];
        }
        for (std::size_t c = 0; c < kConceptCount; ++c) {
            if (counts[c] == 0) continue;
            model.centroids.conservativeResize(dim, model.centroids.cols() + 1);
            model.centroids.col(model.centroids.cols() - 1) = sums.col(static_cast<Eigen::Index>(c)) / counts[c];
            model.centroid_labels.push_back(static_cast<ConceptLabel>(c));
        }
    }
    return model;
}

ConceptLabel AnnotatorModel::predict(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    if (v.size() != dim())
        throw Error("region vector has dimension " + std::to_string(v.size()) + ", annotator expects " +
                    std::to_string(dim()));
    if (kind == AnnotatorKind::NearestCentroid) {
        const Eigen::VectorXd d = (centroids.colwise() - v).colwise().squaredNorm().transpose();
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < d.size(); ++i)
            if (d[i] < d[best]) best = i;
        return centroid_labels[static_cast<std::size_t>(best)];
    }
    const Eigen::VectorXd d = (exemplars.colwise() - v).colwise().squaredNorm().transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto kk = static_cast<std::ptrdiff_t>(std::min<std::size_t>(static_cast<std::size_t>(k), order.size()));
    std::partial_sort(order.begin(), order.begin() + kk, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
    std::array<int, kConceptCount> votes{};
    for (std::ptrdiff_t i = 0; i < kk; ++i) ++votes[concept_index(labels[static_cast<std::size_t>(order[i])])];
    const int top = *std::max_element(votes.begin(), votes.end());
    // The nearest neighbour whose class has the top vote count decides ties.
    for (std::ptrdiff_t i = 0; i < kk; ++i) {
        const ConceptLabel label = labels[static_cast<std::size_t>(order[i])];
        if (votes[concept_index(label)] == top) return label;
    }
    return labels[static_cast<std::size_t>(order[0])];
}

LabelGrid annotate_image(const ImageData& data, const AnnotatorModel& upper, const AnnotatorModel& lower, GridShape grid,
                         const RegionVocabularies& vocabs) {
    if (upper.half != Half::Upper || lower.half != Half::Lower) throw Error("annotator models are for the wrong halves");
    if (upper.approach != lower.approach) throw Error("upper and lower annotators use different region approaches");
    for (const AnnotatorModel* m : {&upper, &lower})
        if (m->channels != data.channels())
            throw Error("annotator was trained on " + std::to_string(m->channels) + "-channel images, got " +
                        std::to_string(data.channels()) + " channels");
    const RegionEncoder encoder(data, upper.approach, vocabs);
    const auto cells = grid_partition(data.width(), data.height(), grid.rows, grid.cols);
    LabelGrid out;
    out.grid = grid;
    out.labels.reserve(cells.size());
    for (const CellBounds& cell : cells) {
        const Half half = half_of_cell(cell, data.height());
        const AnnotatorModel& model = half == Half::Upper ? upper : lower;
        out.labels.push_back(model.predict(encoder.encode(cell, half)));
    }
    return out;
}

HalfExemplars collect_exemplars(const ImageData& data, const RegionAnnotation& annotation, RegionApproach approach,
                                const RegionVocabularies& vocabs) {
    const RegionEncoder encoder(data, approach, vocabs);
    const auto cells = grid_partition(data.width(), data.height(), annotation.grid.rows, annotation.grid.cols);
    HalfExemplars out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Half half = half_of_cell(cells[i], data.height());
        LabeledRegion region{encoder.encode(cells[i], half), annotation.cells[i].primary()};
        (half == Half::Upper ? out.upper : out.lower).push_back(std::move(region));
    }
    return out;
}

}  // namespace sceneret
