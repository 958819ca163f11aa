#include "sceneret/bow.hpp"

#include <string>

#include "sceneret/error.hpp"

namespace sceneret {

Eigen::VectorXd bow_counts(std::span<const Keypoint> keypoints, std::span<const int> words, int n_words,
                           const CellBounds& bounds) {
    if (keypoints.size() != words.size()) throw Error("bow_counts: keypoint/word count mismatch");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_words);
    for (std::size_t i = 0; i < keypoints.size(); ++i)
        if (bounds.contains(keypoints[i].x, keypoints[i].y)) counts[words[i]] += 1.0;
    return counts;
}

BowHistogram bow_histogram(const LocalFeatures& features, const Vocabulary& vocab, const CellBounds& bounds) {
    if (features.size() > 0 && features.descriptors.rows() != vocab.dim())
        throw Error("descriptor dimension does not match vocabulary");
    std::vector<Eigen::Index> columns;
    for (std::size_t i = 0; i < features.keypoints.size(); ++i)
        if (bounds.contains(features.keypoints[i].x, features.keypoints[i].y)) columns.push_back(static_cast<Eigen::Index>(i));
    BowHistogram out{Eigen::VectorXd::Zero(vocab.size()), bounds};
    for (Eigen::Index c : columns) out.counts[vocab.assign(features.descriptors.col(c))] += 1.0;
    return out;
}

Eigen::VectorXd pyramid_bow_counts(std::span<const Keypoint> keypoints, std::span<const int> words, int n_words,
                                   int width, int height, int max_level) {
    const auto cells = pyramid_cells(width, height, max_level);
    Eigen::VectorXd out(static_cast<Eigen::Index>(cells.size()) * n_words);
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.segment(static_cast<Eigen::Index>(i) * n_words, n_words) = bow_counts(keypoints, words, n_words, cells[i]);
    return out;
}

Eigen::VectorXd pyramid_bow(const LocalFeatures& features, const Vocabulary& vocab, int width, int height, int max_level) {
    const std::vector<int> words = vocab.assign_all(features.descriptors);
    return pyramid_bow_counts(features.keypoints, words, vocab.size(), width, height, max_level);
}

// ---------------------------------------------------------------------------

std::string_view part_kind_name(PartKind kind) {
    switch (kind) {
        case PartKind::ColHist: return "ColHist";
        case PartKind::ColMom: return "ColMom";
        case PartKind::DWT: return "DWT";
        case PartKind::PColMom_L0: return "PColMom_L0";
        case PartKind::PColMom_L2: return "PColMom_L2";
        case PartKind::UBOW: return "UBOW";
        case PartKind::IBOW: return "IBOW";
        case PartKind::PUBOW_L1: return "PUBOW_L1";
        case PartKind::PUBOW_L2: return "PUBOW_L2";
        case PartKind::PIBOW_L1: return "PIBOW_L1";
        case PartKind::PIBOW_L2: return "PIBOW_L2";
    }
    return "?";
}

Recipe recipe_of(Approach approach) {
    using P = PartKind;
    switch (approach) {
        case Approach::ColHist: return {{P::ColHist}};
        case Approach::PColMom_L0: return {{P::PColMom_L0}};
        case Approach::DWT: return {{P::DWT}};
        case Approach::ColHist_DWT: return {{P::ColHist, P::DWT}};
        case Approach::PColMom_L2: return {{P::PColMom_L2}};
        case Approach::UBOW: return {{P::UBOW}};
        case Approach::IBOW: return {{P::IBOW}};
        case Approach::PUBOW_L1: return {{P::PUBOW_L1}};
        case Approach::PUBOW_L2: return {{P::PUBOW_L2}};
        case Approach::PUBOW_L2_PColMom_L2: return {{P::PUBOW_L2, P::PColMom_L2}};
        case Approach::PIBOW_L1: return {{P::PIBOW_L1}};
        case Approach::PIBOW_L2: return {{P::PIBOW_L2}};
        case Approach::PIBOW_L2_PColMom_L2: return {{P::PIBOW_L2, P::PColMom_L2}};
        case Approach::PIBOW_L2_WPColMom_L2: return {{P::PIBOW_L2, P::PColMom_L2}, true};
    }
    throw Error("unknown approach");
}

namespace {

// Channel count implied by a colour part's dimension, 0 for BOW parts, -1 if invalid.
int implied_channels(PartKind kind, Eigen::Index dim) {
    auto pick = [dim](Eigen::Index hsv, Eigen::Index grey) { return dim == hsv ? 3 : dim == grey ? 1 : -1; };
    switch (kind) {
        case PartKind::ColHist: return pick(84, 36);
        case PartKind::ColMom:
        case PartKind::PColMom_L0: return pick(6, 2);
        case PartKind::DWT: return pick(18, 6);
        case PartKind::PColMom_L2: return pick(126, 42);
        case PartKind::UBOW:
        case PartKind::IBOW: return dim > 0 ? 0 : -1;
        case PartKind::PUBOW_L1:
        case PartKind::PIBOW_L1: return dim > 0 && dim % 5 == 0 ? 0 : -1;
        case PartKind::PUBOW_L2:
        case PartKind::PIBOW_L2: return dim > 0 && dim % 21 == 0 ? 0 : -1;
    }
    return -1;
}

}  // namespace

FeatureVector compose_representation(Approach approach, std::span<const Part> parts, const ComposeOptions& options) {
    const Recipe recipe = recipe_of(approach);
    if (parts.size() != recipe.parts.size())
        throw Error(std::string(approach_name(approach)) + ": expected " + std::to_string(recipe.parts.size()) +
                    " parts, got " + std::to_string(parts.size()));
    int channels = 0;
    std::vector<Eigen::VectorXd> values;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].kind != recipe.parts[i])
            throw Error(std::string(approach_name(approach)) + ": part " + std::to_string(i) + " must be " +
                        std::string(part_kind_name(recipe.parts[i])) + ", got " +
                        std::string(part_kind_name(parts[i].kind)));
        const int ch = implied_channels(parts[i].kind, parts[i].values.size());
        if (ch < 0)
            throw Error(std::string(approach_name(approach)) + ": " + std::string(part_kind_name(parts[i].kind)) +
                        " part has invalid dimension " + std::to_string(parts[i].values.size()));
        if (ch > 0) {
            if (channels != 0 && channels != ch) throw Error(std::string(approach_name(approach)) + ": colour parts disagree on channel count");
            channels = ch;
        }
        if (recipe.weighted_color && parts[i].kind == PartKind::PColMom_L2) {
            const FeatureBlock weighted = weight_pyramid({BlockKind::PColMom_L2, parts[i].values}, options.level_weights);
            values.push_back(weighted.values);
        } else {
            values.push_back(parts[i].values);
        }
    }
    FeatureVector out;
    out.approach = approach;
    out.values = normalize_and_concatenate(values);
    out.is_zero = out.values.isZero(0.0);
    return out;
}

int approach_dim(Approach approach, int channels, int universal_words, int integrated_words) {
    int dim = 0;
    for (PartKind p : recipe_of(approach).parts) {
        switch (p) {
            case PartKind::ColHist: dim += block_dim(BlockKind::ColHist, channels); break;
            case PartKind::ColMom: dim += block_dim(BlockKind::ColMom, channels); break;
            case PartKind::DWT: dim += block_dim(BlockKind::DWT, channels); break;
            case PartKind::PColMom_L0: dim += block_dim(BlockKind::PColMom_L0, channels); break;
            case PartKind::PColMom_L2: dim += block_dim(BlockKind::PColMom_L2, channels); break;
            case PartKind::UBOW: dim += universal_words; break;
            case PartKind::IBOW: dim += integrated_words; break;
            case PartKind::PUBOW_L1: dim += universal_words * pyramid_cell_count(1); break;
            case PartKind::PUBOW_L2: dim += universal_words * pyramid_cell_count(2); break;
            case PartKind::PIBOW_L1: dim += integrated_words * pyramid_cell_count(1); break;
            case PartKind::PIBOW_L2: dim += integrated_words * pyramid_cell_count(2); break;
        }
    }
    return dim;
}

// ---------------------------------------------------------------------------

ImageData prepare_image(Image image, const LocalFeatures& features) {
    ImageData data;
    data.image = std::move(image);
    if (data.image.channels() == 3) data.hsv = to_hsv(data.image);
    data.features = features;
    return data;
}

ImageData prepare_image(Image image, const DetectorParams& params) {
    LocalFeatures features = extract_local_features(image, params);
    return prepare_image(std::move(image), features);
}

bool approach_uses(Approach approach, VocabularyKind kind) {
    for (PartKind p : recipe_of(approach).parts) {
        switch (p) {
            case PartKind::UBOW:
            case PartKind::PUBOW_L1:
            case PartKind::PUBOW_L2:
                if (kind == VocabularyKind::Universal) return true;
                break;
            case PartKind::IBOW:
            case PartKind::PIBOW_L1:
            case PartKind::PIBOW_L2:
                if (kind == VocabularyKind::Integrated) return true;
                break;
            default: break;
        }
    }
    return false;
}

FeatureVector encode_image(Approach approach, const ImageData& data, const VocabularySet& vocabs,
                           const ComposeOptions& options) {
    const Recipe recipe = recipe_of(approach);
    const ColorPlanes color = data.color();
    const CellBounds whole{0, 0, data.width(), data.height(), 0};

    auto words_for = [&](const Vocabulary* vocab, std::string_view what) {
        if (!vocab) throw Error(std::string(approach_name(approach)) + " needs the " + std::string(what) + " vocabulary");
        return vocab->assign_all(data.features.descriptors);
    };

    std::vector<Part> parts;
    for (PartKind kind : recipe.parts) {
        Part part{kind, {}};
        switch (kind) {
            case PartKind::ColHist: part.values = color_histogram(color, whole).values; break;
            case PartKind::ColMom: part.values = color_moments(color, whole).values; break;
            case PartKind::DWT: part.values = dwt_texture(color, whole).values; break;
            case PartKind::PColMom_L0: part.values = pyramidal_color_moments(color, 0).values; break;
            case PartKind::PColMom_L2: part.values = pyramidal_color_moments(color, 2).values; break;
            case PartKind::UBOW:
            case PartKind::PUBOW_L1:
            case PartKind::PUBOW_L2: {
                const int level = kind == PartKind::UBOW ? 0 : kind == PartKind::PUBOW_L1 ? 1 : 2;
                const auto words = words_for(vocabs.universal, "universal");
                part.values = pyramid_bow_counts(data.features.keypoints, words, vocabs.universal->size(), data.width(),
                                                 data.height(), level);
                break;
            }
            case PartKind::IBOW:
            case PartKind::PIBOW_L1:
            case PartKind::PIBOW_L2: {
                const int level = kind == PartKind::IBOW ? 0 : kind == PartKind::PIBOW_L1 ? 1 : 2;
                const auto words = words_for(vocabs.integrated, "integrated");
                part.values = pyramid_bow_counts(data.features.keypoints, words, vocabs.integrated->size(), data.width(),
                                                 data.height(), level);
                break;
            }
        }
        parts.push_back(std::move(part));
    }
    return compose_representation(approach, parts, options);
}

}  // namespace sceneret
