#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sceneret/concepts.hpp"
#include "sceneret/error.hpp"
#include "test_support.hpp"

using namespace sceneret;
using C = ConceptLabel;

namespace {

RegionAnnotation uniform_annotation(GridShape grid, C label) {
    RegionAnnotation a;
    a.grid = grid;
    a.cells.assign(static_cast<std::size_t>(grid.rows * grid.cols), CellAnnotation{{{label, 1.0}}});
    return a;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

// Exhaustive sort by (distance, index); majority vote; ties go to the class
// seen first in that order.
C knn_oracle(const std::vector<LabeledRegion>& ex, const Eigen::VectorXd& q, int k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < ex.size(); ++i) d.push_back({(ex[i].vector - q).norm(), i});
    std::sort(d.begin(), d.end());
    std::array<int, kConceptCount> votes{};
    for (int i = 0; i < k; ++i) ++votes[concept_index(ex[d[static_cast<std::size_t>(i)].second].label)];
    const int best = *std::max_element(votes.begin(), votes.end());
    for (int i = 0; i < k; ++i) {
        const C c = ex[d[static_cast<std::size_t>(i)].second].label;
        if (votes[concept_index(c)] == best) return c;
    }
    return C::Sky;
}

}  // namespace

TEST_CASE("COV of a grid with 47.5 sky cells") {
    std::string text;
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 10; ++c) {
            const int i = r * 10 + c;
            text += i < 47 ? "sky" : i == 47 ? "sky/water" : "grass";
            text += c < 9 ? " " : "\n";
        }
    }
    const ConceptOccurrenceVector cov = cov_from_annotations(parse_region_annotation(text, GridShape{10, 10}));
    CHECK(std::abs(cov[concept_index(C::Sky)] - 0.475) <= 1e-12);
    CHECK(std::abs(cov[concept_index(C::Water)] - 0.005) <= 1e-12);
    CHECK(std::abs(cov[concept_index(C::Grass)] - 0.52) <= 1e-12);
    CHECK(std::abs(cov.sum() - 1.0) <= 1e-12);
}

TEST_CASE("COV simple cases and simplex property") {
    const auto all_sky = cov_from_annotations(uniform_annotation({10, 10}, C::Sky));
    ConceptOccurrenceVector e = ConceptOccurrenceVector::Zero();
    e[0] = 1.0;
    CHECK(all_sky == e);

    LabelGrid g{{10, 10}, {}};
    for (int i = 0; i < 100; ++i) g.labels.push_back(i < 50 ? C::Grass : C::Field);
    const auto half = cov_from_annotations(g);
    CHECK(half[concept_index(C::Grass)] == 0.5);
    CHECK(half[concept_index(C::Field)] == 0.5);

    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        RegionAnnotation a;
        a.grid = {4, 7};
        for (int i = 0; i < 28; ++i) {
            const auto c1 = static_cast<C>(rng.below(kConceptCount));
            const auto c2 = static_cast<C>(rng.below(kConceptCount));
            if (rng.uniform() < 0.3 && c1 != c2)
                a.cells.push_back(CellAnnotation{{{c1, 0.5}, {c2, 0.5}}});
            else
                a.cells.push_back(CellAnnotation{{{c1, 1.0}}});
        }
        const auto cov = cov_from_annotations(a);
        CHECK(cov.minCoeff() >= 0.0);
        CHECK(std::abs(cov.sum() - 1.0) <= 1e-9);
    }
}

TEST_CASE("primary labels and hard annotation export") {
    RegionAnnotation a = uniform_annotation({2, 2}, C::Rocks);
    a.cells[1] = CellAnnotation{{{C::Sand, 0.5}, {C::Water, 0.5}}};
    const LabelGrid g = primary_labels(a);
    CHECK(g.labels == std::vector<C>{C::Rocks, C::Sand, C::Rocks, C::Rocks});
    CHECK(g.at(0, 1) == C::Sand);
    const RegionAnnotation back = to_annotation(g);
    CHECK(primary_labels(back) == g);
    CHECK(cov_from_annotations(back) == cov_from_annotations(g));
}

TEST_CASE("COV text round trip") {
    std::map<std::string, ConceptOccurrenceVector> covs;
    covs["b"] = cov_from_annotations(uniform_annotation({10, 10}, C::Flowers));
    ConceptOccurrenceVector v = ConceptOccurrenceVector::Zero();
    v[1] = 0.125;
    v[8] = 0.875;
    covs["a"] = v;
    const std::string text = format_covs(covs);
    CHECK(text.rfind("a\t0.000000000\t0.125000000", 0) == 0);
    const auto back = parse_covs(text);
    REQUIRE(back.size() == 2);
    CHECK(back.at("a") == covs["a"]);
    CHECK(back.at("b") == covs["b"]);
    CHECK_THROWS_AS(parse_covs("x\t1 2 3\n"), Error);
}

TEST_CASE("KNN small cases") {
    const std::vector<LabeledRegion> ex = {
        {vec({0.0}), C::Sky}, {vec({1.0}), C::Water}, {vec({0.2}), C::Sky}, {vec({0.35}), C::Water}};
    CHECK(train_annotator(ex, Half::Upper, RegionApproach::ColHist, 1).predict(vec({1.0})) == C::Water);
    // neighbours of 0.1: sky(0.1), sky(0.1), water(0.25)
    CHECK(train_annotator(ex, Half::Upper, RegionApproach::ColHist, 3).predict(vec({0.1})) == C::Sky);
    // neighbours of 0.3: water at 0.05, sky at 0.1 -> tie, nearest wins
    CHECK(train_annotator(ex, Half::Upper, RegionApproach::ColHist, 2).predict(vec({0.3})) == C::Water);
    // sky at 0.1, water at 0.2 -> sky
    const std::vector<LabeledRegion> pair = {{vec({0.2}), C::Water}, {vec({-0.1}), C::Sky}};
    CHECK(train_annotator(pair, Half::Upper, RegionApproach::ColHist, 2).predict(vec({0.0})) == C::Sky);
}

TEST_CASE("KNN agrees with a brute-force oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<LabeledRegion> ex;
        const int n = 20 + static_cast<int>(rng.below(180));
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd v(5);
            // Coarse values produce plenty of exact distance ties.
            for (int d = 0; d < 5; ++d) v[d] = static_cast<double>(rng.below(3));
            ex.push_back({v, static_cast<C>(rng.below(4))});
        }
        const int k = 1 + static_cast<int>(rng.below(9));
        const AnnotatorModel m = train_annotator(ex, Half::Lower, RegionApproach::DWT, k);
        for (int q = 0; q < 30; ++q) {
            Eigen::VectorXd v(5);
            for (int d = 0; d < 5; ++d) v[d] = rng.uniform() * 2.0;
            CHECK(m.predict(v) == knn_oracle(ex, v, k));
        }
    }
}

TEST_CASE("nearest-centroid annotator") {
    const std::vector<LabeledRegion> ex = {
        {vec({0.0, 0.0}), C::Sky}, {vec({0.0, 2.0}), C::Sky}, {vec({5.0, 1.0}), C::Sand}, {vec({7.0, 1.0}), C::Sand}};
    const AnnotatorModel m = train_annotator(ex, Half::Upper, RegionApproach::ColHist, 1, AnnotatorKind::NearestCentroid);
    CHECK(m.predict(vec({2.9, 1.0})) == C::Sky);
    CHECK(m.predict(vec({3.1, 1.0})) == C::Sand);
    CHECK(parse_annotator_kind("nearest-centroid") == AnnotatorKind::NearestCentroid);
    CHECK(parse_annotator_kind("knn") == AnnotatorKind::Knn);
    CHECK_FALSE(parse_annotator_kind("svm"));
}

TEST_CASE("annotator training errors") {
    const std::vector<LabeledRegion> ex = {{vec({0.0}), C::Sky}, {vec({1.0}), C::Water}};
    CHECK_THROWS_AS(train_annotator(ex, Half::Upper, RegionApproach::ColHist, 3), Error);
    CHECK_THROWS_AS(train_annotator(ex, Half::Upper, RegionApproach::ColHist, 0), Error);
    const std::vector<LabeledRegion> mixed = {{vec({0.0}), C::Sky}, {vec({1.0, 2.0}), C::Water}};
    CHECK_THROWS_AS(train_annotator(mixed, Half::Upper, RegionApproach::ColHist, 1), Error);
    const AnnotatorModel m = train_annotator(ex, Half::Upper, RegionApproach::ColHist, 1);
    CHECK_THROWS_AS(m.predict(vec({0.0, 1.0})), Error);
}

TEST_CASE("annotating a training image with k=1 recovers its grid") {
    const ImageData data = prepare_image(testing::random_image(100, 100, 3, 8), LocalFeatures{});
    RegionAnnotation truth;
    truth.grid = {10, 10};
    Rng rng(2);
    for (int i = 0; i < 100; ++i) truth.cells.push_back(CellAnnotation{{{static_cast<C>(rng.below(kConceptCount)), 1.0}}});
    const HalfExemplars ex = collect_exemplars(data, truth, RegionApproach::ColHist_DWT, {});
    CHECK(ex.upper.size() == 50);
    CHECK(ex.lower.size() == 50);
    const auto upper = train_annotator(ex.upper, Half::Upper, RegionApproach::ColHist_DWT, 1);
    const auto lower = train_annotator(ex.lower, Half::Lower, RegionApproach::ColHist_DWT, 1);
    const LabelGrid g = annotate_image(data, upper, lower, truth.grid, {});
    CHECK(g.labels.size() == 100);
    CHECK(g == primary_labels(truth));
    CHECK(cov_from_annotations(g) == cov_from_annotations(truth));
}

TEST_CASE("rows above the midline use the upper model") {
    const ImageData data = prepare_image(testing::random_image(60, 100, 3, 4), LocalFeatures{});
    const ImageData other = prepare_image(testing::random_image(60, 100, 3, 5), LocalFeatures{});
    const auto ex = collect_exemplars(other, uniform_annotation({10, 10}, C::Sky), RegionApproach::ColMom, {});
    std::vector<LabeledRegion> lower_ex = ex.lower;
    for (auto& r : lower_ex) r.label = C::Water;
    const auto upper = train_annotator(ex.upper, Half::Upper, RegionApproach::ColMom, 3);
    const auto lower = train_annotator(lower_ex, Half::Lower, RegionApproach::ColMom, 3);
    const LabelGrid g = annotate_image(data, upper, lower, {10, 10}, {});
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) CHECK(g.at(r, c) == (r < 5 ? C::Sky : C::Water));

    CHECK_THROWS_AS(annotate_image(data, lower, upper, {10, 10}, {}), Error);
    const ImageData grey = prepare_image(testing::random_image(60, 100, 1, 4), LocalFeatures{});
    CHECK_THROWS_AS(annotate_image(grey, upper, lower, {10, 10}, {}), Error);
    auto other_approach = lower;
    other_approach.approach = RegionApproach::ColHist;
    CHECK_THROWS_AS(annotate_image(data, upper, other_approach, {10, 10}, {}), Error);
}

TEST_CASE("region vector dimensions and vocabulary needs") {
    const int K = 4, M = 3;
    Rng rng(1);
    Eigen::MatrixXd cu(kDescriptorDim, K), ch(kDescriptorDim, K * M);
    for (Eigen::Index i = 0; i < cu.size(); ++i) cu.data()[i] = rng.uniform();
    for (Eigen::Index i = 0; i < ch.size(); ++i) ch.data()[i] = rng.uniform();
    const std::vector<std::string> cats = {"a", "b", "c"};
    const Vocabulary u(VocabularyKind::Universal, K, {}, cu);
    const Vocabulary up(VocabularyKind::UpperIntegrated, K, cats, ch);
    const Vocabulary low(VocabularyKind::LowerIntegrated, K, cats, ch * 0.5);
    const RegionVocabularies vocabs{&u, &up, &low};
    const ImageData data = prepare_image(testing::blob_image(80, 80, 3, 6), DetectorParams{});
    const CellBounds region{0, 0, 40, 40, 0};
    for (RegionApproach a : kAllRegionApproaches) {
        CAPTURE(region_approach_name(a));
        const Eigen::VectorXd v = region_representation(data, region, Half::Upper, a, vocabs);
        CHECK(v.size() == region_approach_dim(a, 3, K, K * M));
    }
    CHECK(region_approach_dim(RegionApproach::ColHist, 3, K, K * M) == 84);
    CHECK(region_approach_dim(RegionApproach::IBOW_ColHist_DWT, 3, 200, 1200) == 1200 + 84 + 18);
    CHECK_THROWS_AS(region_representation(data, region, Half::Upper, RegionApproach::IBOW, {&u, nullptr, nullptr}), Error);
    CHECK_THROWS_AS(region_representation(data, region, Half::Upper, RegionApproach::UBOW, {}), Error);
    CHECK_THROWS_AS(region_representation(data, CellBounds{5, 5, 5, 9, 0}, Half::Upper, RegionApproach::ColHist, {}), Error);
    CHECK(region_approach_uses_halves(RegionApproach::IBOW_DWT));
    CHECK_FALSE(region_approach_uses_halves(RegionApproach::UBOW_DWT));
    CHECK(region_approach_uses_universal(RegionApproach::UBOW_DWT));
}

TEST_CASE("IBOW regions use the vocabulary of their half") {
    const int K = 3;
    Rng rng(4);
    Eigen::MatrixXd a(kDescriptorDim, K), b(kDescriptorDim, K);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform();
    const Vocabulary up(VocabularyKind::UpperIntegrated, K, {"x"}, a);
    const Vocabulary low(VocabularyKind::LowerIntegrated, K, {"x"}, b);
    const ImageData data = prepare_image(testing::blob_image(96, 96, 3, 9), DetectorParams{});
    REQUIRE(data.features.size() > 0);
    const CellBounds whole{0, 0, 96, 96, 0};
    const Eigen::VectorXd vu = region_representation(data, whole, Half::Upper, RegionApproach::IBOW, {nullptr, &up, &low});
    const Eigen::VectorXd vl = region_representation(data, whole, Half::Lower, RegionApproach::IBOW, {nullptr, &up, &low});
    const Eigen::VectorXd expect_u = bow_histogram(data.features, up, whole).counts.normalized();
    const Eigen::VectorXd expect_l = bow_histogram(data.features, low, whole).counts.normalized();
    CHECK((vu - expect_u).norm() < 1e-12);
    CHECK((vl - expect_l).norm() < 1e-12);
}
