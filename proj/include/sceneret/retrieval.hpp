#pragma once

#include <filesystem>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sceneret/error.hpp"
#include "sceneret/representation.hpp"

namespace sceneret {

/// Above this dimension distances accumulate with Kahan compensation.
inline constexpr Eigen::Index kCompensatedDim = 10000;

template <typename A, typename B>
double euclidean(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.size() != b.size())
        throw Error("euclidean: dimension mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    if (a.size() <= kCompensatedDim) return (a.template cast<double>() - b.template cast<double>()).norm();
    double sum = 0.0, carry = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.coeff(i)) - static_cast<double>(b.coeff(i));
        const double y = d * d - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return std::sqrt(sum);
}

struct IndexedVector {
    std::string image_id;
    std::string category;
    Eigen::VectorXd values;
};

/// Exhaustive-search index; vectors are the columns of `vectors()`.
class RetrievalIndex {
public:
    RetrievalIndex() = default;

    Representation representation() const { return rep_; }
    Eigen::Index dim() const { return vectors_.rows(); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& image_ids() const { return ids_; }
    const std::vector<std::string>& categories() const { return categories_; }
    const Eigen::MatrixXd& vectors() const { return vectors_; }

    friend RetrievalIndex build_index(Representation rep, std::vector<IndexedVector> items);

private:
    Representation rep_;
    std::vector<std::string> ids_;
    std::vector<std::string> categories_;
    Eigen::MatrixXd vectors_;
};

/// Errors on empty input, mixed dimensions, or a repeated image id.
RetrievalIndex build_index(Representation rep, std::vector<IndexedVector> items);

struct RankedItem {
    std::string image_id;
    std::string category;
    double distance = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<RankedItem> items;
};

/// Every entry by ascending distance, ties by image id; truncated to `top`.
RankedList query(const RetrievalIndex& index, const Eigen::Ref<const Eigen::VectorXd>& q,
                 std::optional<std::size_t> top = std::nullopt, unsigned threads = 1, std::string query_id = {});

/// `rank<TAB>image_id<TAB>category<TAB>distance` lines, ranks from 1.
std::string format_ranked_list(const RankedList& list);

std::vector<char> serialize_index(const RetrievalIndex& index);
RetrievalIndex deserialize_index(std::span<const char> bytes);
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace sceneret
