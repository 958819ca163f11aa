#include "sceneret/vocabulary.hpp"

#include <algorithm>
#include <numeric>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"
#include "sceneret/rng.hpp"

namespace sceneret {

namespace {
constexpr std::uint16_t kVocabularyVersion = 1;
}

std::string_view vocabulary_kind_name(VocabularyKind kind) {
    switch (kind) {
        case VocabularyKind::Universal: return "universal";
        case VocabularyKind::Integrated: return "integrated";
        case VocabularyKind::UpperIntegrated: return "upper";
        case VocabularyKind::LowerIntegrated: return "lower";
    }
    return "?";
}

Vocabulary::Vocabulary(VocabularyKind kind, int words_per_category, std::vector<std::string> category_order,
                       Eigen::MatrixXd centroids)
    : kind_(kind), k_(words_per_category), categories_(std::move(category_order)), centroids_(std::move(centroids)) {
    if (k_ < 1) throw Error("vocabulary needs at least one word per category");
    const int m = kind_ == VocabularyKind::Universal ? 1 : static_cast<int>(categories_.size());
    if (kind_ == VocabularyKind::Universal && !categories_.empty())
        throw Error("universal vocabularies carry no category order");
    if (m < 1) throw Error("integrated vocabulary without categories");
    if (centroids_.cols() != static_cast<Eigen::Index>(k_) * m)
        throw Error("vocabulary has " + std::to_string(centroids_.cols()) + " words, expected " +
                    std::to_string(static_cast<long>(k_) * m));
    if (centroids_.hasNaN()) throw Error("vocabulary centroid is NaN");
}

int Vocabulary::assign(const Eigen::Ref<const Eigen::VectorXd>& descriptor) const {
    if (descriptor.size() != centroids_.rows())
        throw Error("descriptor dimension " + std::to_string(descriptor.size()) + " does not match vocabulary dimension " +
                    std::to_string(centroids_.rows()));
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < centroids_.cols(); ++j) {
        const double d = (centroids_.col(j) - descriptor).squaredNorm();
        if (d < best) {
            best = d;
            best_j = static_cast<int>(j);
        }
    }
    return best_j;
}

std::vector<int> Vocabulary::assign_all(const Eigen::Ref<const Eigen::MatrixXd>& descriptors, unsigned threads) const {
    if (descriptors.cols() == 0) return {};
    if (descriptors.rows() != centroids_.rows())
        throw Error("descriptor dimension " + std::to_string(descriptors.rows()) + " does not match vocabulary dimension " +
                    std::to_string(centroids_.rows()));
    std::vector<int> labels;
    std::vector<double> dist;
    nearest_centroids(descriptors, centroids_, labels, dist, threads);
    return labels;
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (cap == 0 || n <= cap) return idx;
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::MatrixXd subsample_columns(const Eigen::MatrixXd& m, std::size_t cap, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(m.cols());
    if (cap == 0 || n <= cap) return m;
    const std::vector<std::size_t> idx = subsample_indices(n, cap, seed);
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cap));
    for (std::size_t i = 0; i < cap; ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

namespace {

Eigen::MatrixXd cluster(const Eigen::MatrixXd& descriptors, const VocabularyOptions& options, const std::string& what) {
    const int K = options.words_per_category;
    if (descriptors.cols() < K)
        throw Error("insufficient descriptors for " + what + ": " + std::to_string(descriptors.cols()) + " < K=" +
                    std::to_string(K));
    const Eigen::MatrixXd train =
        subsample_columns(descriptors, options.max_descriptors, derive_seed(options.seed, "subsample"));
    return kmeans<double>(train, K, options.seed, options.kmeans).centroids;
}

}  // namespace

Vocabulary build_universal_vocabulary(const Eigen::MatrixXd& descriptors, const VocabularyOptions& options) {
    return Vocabulary(VocabularyKind::Universal, options.words_per_category, {},
                      cluster(descriptors, options, "universal vocabulary"));
}

Vocabulary build_integrated_vocabulary(const std::map<std::string, Eigen::MatrixXd>& per_category,
                                       const VocabularyOptions& options, VocabularyKind kind) {
    if (kind == VocabularyKind::Universal) throw Error("build_integrated_vocabulary: universal kind requested");
    if (per_category.empty()) throw Error("integrated vocabulary needs at least one category");
    const int K = options.words_per_category;
    Eigen::Index dim = 0;
    for (const auto& [category, descriptors] : per_category)
        if (descriptors.cols() > 0) {
            dim = descriptors.rows();
            break;
        }
    Eigen::MatrixXd centroids(dim, static_cast<Eigen::Index>(K) * static_cast<Eigen::Index>(per_category.size()));
    std::vector<std::string> order;
    Eigen::Index block = 0;
    for (const auto& [category, descriptors] : per_category) {  // std::map iterates lexicographically
        if (descriptors.rows() != dim && descriptors.cols() > 0) throw Error("descriptor dimension differs across categories");
        centroids.middleCols(block * K, K) =
            cluster(descriptors, options, std::string(vocabulary_kind_name(kind)) + " vocabulary, category '" + category + "'");
        order.push_back(category);
        ++block;
    }
    return Vocabulary(kind, K, std::move(order), std::move(centroids));
}

std::pair<Vocabulary, Vocabulary> build_half_vocabularies(const std::map<std::string, HalfDescriptors>& per_category,
                                                          const VocabularyOptions& options) {
    std::map<std::string, Eigen::MatrixXd> upper, lower;
    for (const auto& [category, halves] : per_category) {
        upper.emplace(category, halves.upper);
        lower.emplace(category, halves.lower);
    }
    Vocabulary up = build_integrated_vocabulary(upper, options, VocabularyKind::UpperIntegrated);
    Vocabulary low = build_integrated_vocabulary(lower, options, VocabularyKind::LowerIntegrated);
    return {std::move(up), std::move(low)};
}

std::vector<char> serialize_vocabulary(const Vocabulary& vocab) {
    io::ByteWriter out;
    out.bytes("VOCB");
    out.u16(kVocabularyVersion);
    out.u8(static_cast<std::uint8_t>(vocab.kind()));
    out.u32(static_cast<std::uint32_t>(vocab.words_per_category()));
    out.u32(static_cast<std::uint32_t>(vocab.category_count()));
    out.u32(static_cast<std::uint32_t>(vocab.dim()));
    for (const auto& name : vocab.category_order()) out.str(name);
    const Eigen::MatrixXd& c = vocab.centroids();
    for (Eigen::Index w = 0; w < c.cols(); ++w)
        for (Eigen::Index d = 0; d < c.rows(); ++d) out.f64(c(d, w));
    return std::move(out.buffer());
}

Vocabulary deserialize_vocabulary(std::span<const char> bytes) {
    io::ByteReader in(bytes, "vocabulary file");
    if (in.bytes(4) != "VOCB") throw Error("not a vocabulary file (bad magic)");
    const std::uint16_t version = in.u16();
    if (version != kVocabularyVersion) throw Error("unsupported vocabulary version " + std::to_string(version));
    const std::uint8_t kind_tag = in.u8();
    if (kind_tag > static_cast<std::uint8_t>(VocabularyKind::LowerIntegrated)) throw Error("unknown vocabulary kind");
    const auto kind = static_cast<VocabularyKind>(kind_tag);
    const std::uint32_t K = in.u32();
    const std::uint32_t M = in.u32();
    const std::uint32_t dim = in.u32();
    std::vector<std::string> names;
    if (kind != VocabularyKind::Universal)
        for (std::uint32_t i = 0; i < M; ++i) names.push_back(in.str());
    const Eigen::Index words = static_cast<Eigen::Index>(K) * M;
    Eigen::MatrixXd c(dim, words);
    for (Eigen::Index w = 0; w < words; ++w)
        for (Eigen::Index d = 0; d < dim; ++d) c(d, w) = in.f64();
    if (!in.at_end()) throw Error("vocabulary file has trailing bytes");
    return Vocabulary(kind, static_cast<int>(K), std::move(names), std::move(c));
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    io::write_file_atomic(path, std::span<const char>(serialize_vocabulary(vocab)));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    const std::vector<char> bytes = io::read_file(path);
    try {
        return deserialize_vocabulary(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace sceneret
