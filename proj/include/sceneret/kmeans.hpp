#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "sceneret/error.hpp"
#include "sceneret/parallel.hpp"
#include "sceneret/rng.hpp"

namespace sceneret {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct KMeansOptions {
    int max_iter = 100;
    double rel_tol = 1e-4;
    unsigned threads = 1;
};

/// Centroids are stored one per column, like the input points.
template <typename Scalar>
struct KMeansResult {
    MatrixX<Scalar> centroids;
    std::vector<int> assignments;
    double distortion = 0.0;
    int iterations = 0;
    /// Distortion after the seeding assignment and after every Lloyd step.
    std::vector<double> distortion_history;
};

/// Exact nearest-centroid search (lowest index wins ties). Squared
/// distances are screened in bulk with the ||x||^2 + ||c||^2 - 2<x,c>
/// expansion, then every candidate within the expansion's rounding bound is
/// re-scored by direct differences, so the result matches a brute-force scan.
template <typename PointsDerived, typename CentroidsDerived>
void nearest_centroids(const Eigen::MatrixBase<PointsDerived>& points, const Eigen::MatrixBase<CentroidsDerived>& centroids,
                       std::vector<int>& labels, std::vector<double>& sq_dist, unsigned threads = 1) {
    if (points.rows() != centroids.rows()) throw Error("nearest_centroids: dimension mismatch");
    if (centroids.cols() == 0) throw Error("nearest_centroids: no centroids");
    const Eigen::Index n = points.cols();
    const Eigen::Index k = centroids.cols();
    labels.assign(static_cast<std::size_t>(n), 0);
    sq_dist.assign(static_cast<std::size_t>(n), 0.0);

    const Eigen::MatrixXd C = centroids.template cast<double>();
    const Eigen::VectorXd c_norm = C.colwise().squaredNorm().transpose();
    const double c_norm_max = c_norm.maxCoeff();
    constexpr Eigen::Index kBlock = 1024;
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;

    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlock;
        const Eigen::Index len = std::min(kBlock, n - begin);
        const Eigen::MatrixXd X = points.middleCols(begin, len).template cast<double>();
        const Eigen::MatrixXd G = C.transpose() * X;  // k x len
        for (Eigen::Index i = 0; i < len; ++i) {
            const double x_norm = X.col(i).squaredNorm();
            double approx_min = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < k; ++j) approx_min = std::min(approx_min, x_norm + c_norm[j] - 2.0 * G(j, i));
            const double slack = 1e-9 * (x_norm + c_norm_max) + 1e-300;
            double best = std::numeric_limits<double>::infinity();
            int best_j = 0;
            for (Eigen::Index j = 0; j < k; ++j) {
                if (x_norm + c_norm[j] - 2.0 * G(j, i) > approx_min + slack) continue;
                const double d = (C.col(j) - X.col(i)).squaredNorm();
                if (d < best) {
                    best = d;
                    best_j = static_cast<int>(j);
                }
            }
            labels[static_cast<std::size_t>(begin + i)] = best_j;
            sq_dist[static_cast<std::size_t>(begin + i)] = best;
        }
    });
}

/// Lloyd's k-means with k-means++ seeding. Points are columns. Iterates
/// until the relative distortion improvement drops below rel_tol or
/// max_iter updates ran. Empty clusters are re-seeded with the point
/// farthest from its centroid. Output is independent of `threads`.
template <typename Scalar>
KMeansResult<Scalar> kmeans(const MatrixX<Scalar>& points, int k, std::uint64_t seed, const KMeansOptions& options = {}) {
    const Eigen::Index n = points.cols();
    const Eigen::Index dim = points.rows();
    if (k < 1) throw Error("kmeans: k must be at least 1");
    if (n < k) throw Error("kmeans: " + std::to_string(n) + " points is fewer than k=" + std::to_string(k));

    Rng rng(seed);
    KMeansResult<Scalar> result;
    result.centroids.resize(dim, k);

    // k-means++ seeding.
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    result.centroids.col(0) = points.col(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    for (int c = 1; c < k; ++c) {
        const Eigen::Matrix<double, Eigen::Dynamic, 1> last = result.centroids.col(c - 1).template cast<double>();
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = (points.col(i).template cast<double>() - last).squaredNorm();
            auto& slot = d2[static_cast<std::size_t>(i)];
            slot = std::min(slot, d);
            total += slot;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0)  // rounding at the tail of the cumulative sum
                for (Eigen::Index i = n - 1; i >= 0 && pick < 0; --i)
                    if (d2[static_cast<std::size_t>(i)] > 0.0) pick = i;
        } else {
            for (Eigen::Index i = 0; i < n && pick < 0; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) pick = i;
        }
        chosen[static_cast<std::size_t>(pick)] = 1;
        result.centroids.col(c) = points.col(pick);
    }

    std::vector<double> dist;
    auto assign_step = [&] {
        nearest_centroids(points, result.centroids, result.assignments, dist, options.threads);
        double total = 0.0;
        for (double d : dist) total += d;
        result.distortion = total;
        result.distortion_history.push_back(total);
    };
    assign_step();

    for (int it = 0; it < options.max_iter && result.distortion > 0.0; ++it) {
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(result.assignments[static_cast<std::size_t>(i)])] < 2) continue;
                if (far < 0 || dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
            }
            if (far < 0) break;
            --counts[static_cast<std::size_t>(result.assignments[static_cast<std::size_t>(far)])];
            result.assignments[static_cast<std::size_t>(far)] = c;
            dist[static_cast<std::size_t>(far)] = 0.0;
            counts[static_cast<std::size_t>(c)] = 1;
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
        for (Eigen::Index i = 0; i < n; ++i)
            sums.col(result.assignments[static_cast<std::size_t>(i)]) += points.col(i).template cast<double>();
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                result.centroids.col(c) = (sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)])).template cast<Scalar>();

        const double previous = result.distortion;
        assign_step();
        ++result.iterations;
        if (previous - result.distortion <= options.rel_tol * previous) break;
    }
    return result;
}

}  // namespace sceneret
