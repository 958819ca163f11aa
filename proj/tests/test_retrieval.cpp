#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "sceneret/error.hpp"
#include "sceneret/retrieval.hpp"
#include "test_support.hpp"

using namespace sceneret;

namespace {

std::vector<IndexedVector> random_items(int n, int dim, std::uint64_t seed, bool normalize = false) {
    Rng rng(seed);
    std::vector<IndexedVector> items;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(dim);
        for (int d = 0; d < dim; ++d) v[d] = rng.uniform() - 0.5;
        if (normalize) v.normalize();
        char id[16];
        std::snprintf(id, sizeof id, "img%03d", (i * 37) % n);
        items.push_back({id, "cat" + std::to_string(i % 3), v});
    }
    return items;
}

Eigen::VectorXd random_query(int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v[d] = rng.uniform() - 0.5;
    return v;
}

}  // namespace

TEST_CASE("euclidean distance") {
    CHECK(euclidean(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)) == 5.0);
    CHECK_THROWS_AS(euclidean(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), Error);
    // The compensated path agrees with a long-double reference.
    const int dim = 25326;
    const Eigen::VectorXd a = random_query(dim, 1), b = random_query(dim, 2);
    long double ref = 0;
    for (int i = 0; i < dim; ++i) ref += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(euclidean(a, b) - std::sqrt(static_cast<double>(ref))) <= 1e-12 * std::sqrt(static_cast<double>(ref)));
}

TEST_CASE("self query ranks first at distance zero") {
    auto items = random_items(20, 8, 3);
    const Eigen::VectorXd q = items[5].values;
    const std::string id = items[5].image_id;
    const RetrievalIndex index = build_index(Representation::of(Approach::ColHist), items);
    const RankedList list = query(index, q, std::nullopt, 1, id);
    REQUIRE(list.items.size() == 20);
    CHECK(list.items[0].image_id == id);
    CHECK(list.items[0].distance == 0.0);
    CHECK(list.query_id == id);
}

TEST_CASE("full ranking is a sorted permutation matching an oracle") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int n = 2 + static_cast<int>(seed * 2 % 49);
        auto items = random_items(n, 6, seed);
        const RetrievalIndex index = build_index(Representation::of(Approach::DWT), items);
        const Eigen::VectorXd q = random_query(6, seed + 100);
        const RankedList list = query(index, q, std::nullopt, 2);
        REQUIRE(list.items.size() == static_cast<std::size_t>(n));
        std::set<std::string> seen;
        for (const auto& it : list.items) seen.insert(it.image_id);
        CHECK(seen.size() == static_cast<std::size_t>(n));

        std::vector<std::pair<double, std::string>> oracle;
        for (const auto& it : items) oracle.push_back({(it.values - q).norm(), it.image_id});
        std::sort(oracle.begin(), oracle.end());
        for (int i = 0; i < n; ++i) {
            CHECK(list.items[static_cast<std::size_t>(i)].image_id == oracle[static_cast<std::size_t>(i)].second);
            CHECK(list.items[static_cast<std::size_t>(i)].distance == doctest::Approx(oracle[static_cast<std::size_t>(i)].first));
            if (i > 0) CHECK(list.items[static_cast<std::size_t>(i)].distance >= list.items[static_cast<std::size_t>(i - 1)].distance);
        }
    }
}

TEST_CASE("euclidean and cosine rankings agree on unit vectors") {
    auto items = random_items(40, 12, 9, true);
    const Eigen::VectorXd q = random_query(12, 10).normalized();
    const RetrievalIndex index = build_index(Representation::of(Approach::UBOW), items);
    const RankedList list = query(index, q);
    std::vector<std::pair<double, std::string>> by_cos;
    for (const auto& it : items) by_cos.push_back({-it.values.dot(q), it.image_id});
    std::sort(by_cos.begin(), by_cos.end());
    for (std::size_t i = 0; i < items.size(); ++i) CHECK(list.items[i].image_id == by_cos[i].second);
}

TEST_CASE("ties go to the lower image id and top truncates") {
    std::vector<IndexedVector> items = {{"zeta", "a", Eigen::Vector2d(1, 0)},
                                        {"alpha", "b", Eigen::Vector2d(0, 1)},
                                        {"mid", "a", Eigen::Vector2d(-1, 0)},
                                        {"far", "c", Eigen::Vector2d(5, 5)}};
    const RetrievalIndex index = build_index(Representation::of(Approach::ColHist), items);
    const RankedList list = query(index, Eigen::Vector2d(0, 0));
    CHECK(list.items[0].image_id == "alpha");
    CHECK(list.items[1].image_id == "mid");
    CHECK(list.items[2].image_id == "zeta");
    CHECK(list.items[3].image_id == "far");
    CHECK(query(index, Eigen::Vector2d(0, 0), 2).items.size() == 2);
    CHECK(query(index, Eigen::Vector2d(0, 0), 10).items.size() == 4);

    const RetrievalIndex big = build_index(Representation::of(Approach::ColHist), random_items(30, 4, 1));
    CHECK(query(big, random_query(4, 2), 10).items.size() == 10);
}

TEST_CASE("index construction and query errors") {
    const auto rep = Representation::of(Approach::ColHist);
    CHECK_THROWS_AS(build_index(rep, {}), Error);
    CHECK_THROWS_AS(build_index(rep, {{"a", "x", Eigen::Vector2d(1, 0)}, {"b", "x", Eigen::Vector3d(1, 0, 0)}}), Error);
    CHECK_THROWS_AS(build_index(rep, {{"a", "x", Eigen::Vector2d(1, 0)}, {"a", "y", Eigen::Vector2d(0, 1)}}), Error);
    const RetrievalIndex index = build_index(rep, {{"a", "x", Eigen::Vector2d(1, 0)}});
    CHECK_THROWS_AS(query(index, Eigen::Vector3d(1, 0, 0)), Error);
}

TEST_CASE("ranked list text format") {
    const RetrievalIndex index =
        build_index(Representation::of(Approach::ColHist), {{"b", "coast", Eigen::Vector2d(3, 4)}, {"a", "forest", Eigen::Vector2d(0, 0)}});
    const std::string text = format_ranked_list(query(index, Eigen::Vector2d(0, 0)));
    CHECK(text == "1\ta\tforest\t0.000000000\n2\tb\tcoast\t5.000000000\n");
}

TEST_CASE("index save and load round trip") {
    testing::TempDir dir;
    const RetrievalIndex index = build_index(Representation::predicted_cov(RegionApproach::IBOW_ColHist), random_items(15, 9, 4));
    save_index(index, dir / "i.idx");
    const RetrievalIndex back = load_index(dir / "i.idx");
    CHECK(back.representation() == index.representation());
    CHECK(back.image_ids() == index.image_ids());
    CHECK(back.categories() == index.categories());
    CHECK(back.vectors() == index.vectors());
    auto bytes = serialize_index(index);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(deserialize_index(bytes), Error);
}
