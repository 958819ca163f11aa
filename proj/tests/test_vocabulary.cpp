#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <set>

#include "sceneret/error.hpp"
#include "sceneret/kmeans.hpp"
#include "sceneret/vocabulary.hpp"
#include "test_support.hpp"

using namespace sceneret;

namespace {

Eigen::MatrixXd random_points(int dim, int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(dim, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    return m;
}

double distortion_of(const Eigen::MatrixXd& x, const Eigen::MatrixXd& c) {
    double total = 0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < c.cols(); ++j) best = std::min(best, (x.col(i) - c.col(j)).squaredNorm());
        total += best;
    }
    return total;
}

/// Within-cluster sum of squares of a labelling with centroids at the means.
double labelling_cost(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        sums.col(labels[static_cast<std::size_t>(i)]) += x.col(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    double cost = 0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        cost += (x.col(i) - sums.col(l) / counts[static_cast<std::size_t>(l)]).squaredNorm();
    }
    return cost;
}

}  // namespace

TEST_CASE("k-means recovers two point locations exactly") {
    Eigen::MatrixXd x(2, 10);
    for (int i = 0; i < 10; ++i) x.col(i) = i % 2 ? Eigen::Vector2d(5, 5) : Eigen::Vector2d(-1, 2);
    const auto r = kmeans<double>(x, 2, 4);
    CHECK(r.distortion == doctest::Approx(0.0));
    std::set<std::pair<double, double>> centres;
    for (int j = 0; j < 2; ++j) centres.insert({r.centroids(0, j), r.centroids(1, j)});
    CHECK(centres == std::set<std::pair<double, double>>{{-1, 2}, {5, 5}});
}

TEST_CASE("k-means with k=1 is the mean") {
    const Eigen::MatrixXd x = random_points(5, 40, 1);
    const auto r = kmeans<double>(x, 1, 0);
    CHECK((r.centroids.col(0) - x.rowwise().mean()).norm() < 1e-12);
    for (int a : r.assignments) CHECK(a == 0);
}

TEST_CASE("k-means beats random labellings and its history never rises") {
    const Eigen::MatrixXd x = random_points(3, 60, 9);
    const int k = 4;
    const auto r = kmeans<double>(x, k, 2);
    REQUIRE_FALSE(r.distortion_history.empty());
    for (std::size_t i = 1; i < r.distortion_history.size(); ++i)
        CHECK(r.distortion_history[i] <= r.distortion_history[i - 1] * (1 + 1e-12));
    CHECK(r.distortion == doctest::Approx(distortion_of(x, r.centroids)).epsilon(1e-10));

    Rng rng(77);
    double best_random = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> labels(60);
        for (int i = 0; i < 60; ++i) labels[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng.below(k));
        best_random = std::min(best_random, labelling_cost(x, labels, k));
    }
    CHECK(r.distortion <= best_random);
}

TEST_CASE("final assignments are nearest centroids") {
    const Eigen::MatrixXd x = random_points(8, 200, 5);
    const auto r = kmeans<double>(x, 7, 3);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double own = (x.col(i) - r.centroids.col(r.assignments[static_cast<std::size_t>(i)])).squaredNorm();
        for (Eigen::Index j = 0; j < r.centroids.cols(); ++j) CHECK(own <= (x.col(i) - r.centroids.col(j)).squaredNorm());
    }
}

TEST_CASE("k-means is deterministic per seed and thread count") {
    const Eigen::MatrixXd x = random_points(6, 300, 8);
    const auto a = kmeans<double>(x, 5, 11);
    KMeansOptions threaded;
    threaded.threads = 3;
    const auto b = kmeans<double>(x, 5, 11, threaded);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignments == b.assignments);
    CHECK_THROWS_AS(kmeans<double>(x, 0, 1), Error);
    CHECK_THROWS_AS(kmeans<double>(random_points(2, 3, 1), 4, 1), Error);
}

TEST_CASE("nearest_centroids matches a brute-force scan") {
    const Eigen::MatrixXd x = random_points(16, 500, 21);
    const Eigen::MatrixXd c = random_points(16, 30, 22);
    std::vector<int> labels;
    std::vector<double> d;
    nearest_centroids(x, c, labels, d, 2);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        Eigen::Index best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            const double dd = (x.col(i) - c.col(j)).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = j;
            }
        }
        CHECK(labels[static_cast<std::size_t>(i)] == best);
        CHECK(d[static_cast<std::size_t>(i)] == doctest::Approx(bd));
    }
}

TEST_CASE("vocabulary sizes and block layout") {
    VocabularyOptions opt;
    opt.words_per_category = 3;
    std::map<std::string, Eigen::MatrixXd> per;
    per["b_forest"] = random_points(4, 20, 1);
    per["a_coast"] = random_points(4, 25, 2);
    const Vocabulary v = build_integrated_vocabulary(per, opt);
    CHECK(v.size() == 6);
    CHECK(v.dim() == 4);
    CHECK(v.category_count() == 2);
    CHECK(v.category_order() == std::vector<std::string>{"a_coast", "b_forest"});
    CHECK(v.category_of_word(2) == 0);
    CHECK(v.category_of_word(3) == 1);
    // Each block is the category's own clustering.
    const Vocabulary coast = build_universal_vocabulary(per["a_coast"], opt);
    CHECK(v.centroids().leftCols(3) == coast.centroids());

    const Vocabulary u = build_universal_vocabulary(random_points(4, 50, 3), opt);
    CHECK(u.size() == 3);
    CHECK(u.category_count() == 1);
}

TEST_CASE("a single-category integrated vocabulary equals the universal one") {
    VocabularyOptions opt;
    opt.words_per_category = 5;
    opt.seed = 42;
    const Eigen::MatrixXd d = random_points(8, 80, 4);
    const Vocabulary u = build_universal_vocabulary(d, opt);
    const Vocabulary i = build_integrated_vocabulary({{"only", d}}, opt);
    CHECK(u.centroids() == i.centroids());
}

TEST_CASE("assignment picks the nearest word, lowest id on ties") {
    Eigen::MatrixXd c(2, 3);
    c << 0, 1, 1,
         0, 0, 0;
    const Vocabulary v(VocabularyKind::Universal, 3, {}, c);
    CHECK(v.assign(Eigen::Vector2d(0.9, 0.3)) == 1);
    CHECK(v.assign(Eigen::Vector2d(0.5, 0.0)) == 0);
    CHECK(v.assign(Eigen::Vector2d(-4, 0)) == 0);
    Eigen::MatrixXd q(2, 3);
    q << 0.9, 0.5, -4,
         0.3, 0.0, 0;
    CHECK(v.assign_all(q) == std::vector<int>{1, 0, 0});
    CHECK_THROWS_AS(v.assign(Eigen::Vector3d(0, 0, 0)), Error);
}

TEST_CASE("vocabulary construction errors") {
    VocabularyOptions opt;
    opt.words_per_category = 10;
    CHECK_THROWS_AS(build_universal_vocabulary(random_points(4, 9, 1), opt), Error);
    std::map<std::string, HalfDescriptors> halves;
    halves["coast"] = {random_points(4, 30, 1), random_points(4, 4, 2)};
    try {
        build_half_vocabularies(halves, opt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("coast") != std::string::npos);
    }
    CHECK_THROWS_AS(build_integrated_vocabulary({}, opt), Error);
    CHECK_THROWS_AS(build_integrated_vocabulary({{"x", random_points(4, 30, 1)}}, opt, VocabularyKind::Universal), Error);
}

TEST_CASE("half vocabularies have their own kinds") {
    VocabularyOptions opt;
    opt.words_per_category = 2;
    std::map<std::string, HalfDescriptors> halves;
    halves["a"] = {random_points(3, 10, 1), random_points(3, 10, 2)};
    halves["b"] = {random_points(3, 10, 3), random_points(3, 10, 4)};
    const auto [up, low] = build_half_vocabularies(halves, opt);
    CHECK(up.kind() == VocabularyKind::UpperIntegrated);
    CHECK(low.kind() == VocabularyKind::LowerIntegrated);
    CHECK(up.size() == 4);
    CHECK(up.centroids() != low.centroids());
}

TEST_CASE("subsampling is seeded, sorted and bounded") {
    const auto a = subsample_indices(1000, 50, 3);
    CHECK(a.size() == 50);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 50);
    CHECK(a.back() < 1000);
    CHECK(a == subsample_indices(1000, 50, 3));
    CHECK(a != subsample_indices(1000, 50, 4));
    CHECK(subsample_indices(10, 50, 3).size() == 10);
    CHECK(subsample_indices(10, 0, 3).size() == 10);
    const Eigen::MatrixXd m = random_points(2, 100, 1);
    const Eigen::MatrixXd s = subsample_columns(m, 7, 9);
    const auto idx = subsample_indices(100, 7, 9);
    for (int i = 0; i < 7; ++i) CHECK(s.col(i) == m.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)])));
}

TEST_CASE("vocabulary save and load round trip") {
    testing::TempDir dir;
    VocabularyOptions opt;
    opt.words_per_category = 2;
    const Vocabulary v = build_integrated_vocabulary({{"x", random_points(3, 10, 1)}, {"y", random_points(3, 10, 2)}}, opt);
    save_vocabulary(v, dir / "v.vocb");
    const Vocabulary back = load_vocabulary(dir / "v.vocb");
    CHECK(back.kind() == v.kind());
    CHECK(back.category_order() == v.category_order());
    CHECK(back.centroids() == v.centroids());
    auto bytes = serialize_vocabulary(v);
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize_vocabulary(bytes), Error);
    bytes = serialize_vocabulary(v);
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize_vocabulary(bytes), Error);
    CHECK_THROWS_AS(load_vocabulary(dir / "missing.vocb"), Error);
}
