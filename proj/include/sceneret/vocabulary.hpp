#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sceneret/kmeans.hpp"

namespace sceneret {

enum class VocabularyKind : std::uint8_t { Universal, Integrated, UpperIntegrated, LowerIntegrated };

std::string_view vocabulary_kind_name(VocabularyKind kind);

/// Visual words as columns of `centroids` (dim x n_words). Integrated kinds
/// hold M blocks of K words, block b belonging to category_order[b].
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(VocabularyKind kind, int words_per_category, std::vector<std::string> category_order,
               Eigen::MatrixXd centroids);

    VocabularyKind kind() const { return kind_; }
    int words_per_category() const { return k_; }
    int category_count() const { return kind_ == VocabularyKind::Universal ? 1 : static_cast<int>(categories_.size()); }
    const std::vector<std::string>& category_order() const { return categories_; }
    const Eigen::MatrixXd& centroids() const { return centroids_; }
    int size() const { return static_cast<int>(centroids_.cols()); }
    int dim() const { return static_cast<int>(centroids_.rows()); }

    /// Nearest word by Euclidean distance, lowest id on ties.
    int assign(const Eigen::Ref<const Eigen::VectorXd>& descriptor) const;
    /// assign() for every column of `descriptors`.
    std::vector<int> assign_all(const Eigen::Ref<const Eigen::MatrixXd>& descriptors, unsigned threads = 1) const;
    /// Category block of a word id (0 for universal vocabularies).
    int category_of_word(int word) const { return word / k_; }

private:
    VocabularyKind kind_ = VocabularyKind::Universal;
    int k_ = 0;
    std::vector<std::string> categories_;
    Eigen::MatrixXd centroids_;
};

struct VocabularyOptions {
    int words_per_category = 200;
    std::uint64_t seed = 0;
    KMeansOptions kmeans;
    /// Larger training sets are uniformly subsampled (seeded) to this many
    /// columns, with seed derive_seed(seed, "subsample").
    std::size_t max_descriptors = 500000;
};

/// Descriptors are columns.
Vocabulary build_universal_vocabulary(const Eigen::MatrixXd& descriptors, const VocabularyOptions& options);

/// One k-means run per category, blocks concatenated in lexicographic
/// category order. Every category uses the same seed.
Vocabulary build_integrated_vocabulary(const std::map<std::string, Eigen::MatrixXd>& per_category,
                                       const VocabularyOptions& options,
                                       VocabularyKind kind = VocabularyKind::Integrated);

struct HalfDescriptors {
    Eigen::MatrixXd upper;
    Eigen::MatrixXd lower;
};

/// Integrated vocabularies restricted to keypoints of the upper and lower
/// image halves respectively.
std::pair<Vocabulary, Vocabulary> build_half_vocabularies(const std::map<std::string, HalfDescriptors>& per_category,
                                                          const VocabularyOptions& options);

/// Sorted seeded uniform sample of `cap` indices from [0, n); all of them
/// when n <= cap or cap == 0.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed);
/// Seeded uniform subsample of columns, original order preserved.
Eigen::MatrixXd subsample_columns(const Eigen::MatrixXd& m, std::size_t cap, std::uint64_t seed);

/// File layout: "VOCB", version u16, kind u8, K u32, M u32, dim u32, M
/// length-prefixed category names (integrated kinds only), then the words
/// as rows of little-endian f64.
std::vector<char> serialize_vocabulary(const Vocabulary& vocab);
Vocabulary deserialize_vocabulary(std::span<const char> bytes);
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace sceneret
