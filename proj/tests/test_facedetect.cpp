#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fer/facedetect.hpp"
#include "oracles.hpp"

using namespace fer;
using namespace fer::detect;

namespace {

// Region sums at the base scale, straight from the pixels.
double brute_haar(const GrayImage& img, const HaarFeature& f, int wx, int wy) {
    const int x = wx + f.x, y = wy + f.y;
    auto s = [&](int x0, int y0, int w, int h) { return oracle::brute_sum(img, x0, y0, x0 + w, y0 + h); };
    switch (f.kind) {
    case HaarKind::TwoHorizontal: return s(x, y, f.w / 2, f.h) - s(x + f.w / 2, y, f.w / 2, f.h);
    case HaarKind::TwoVertical: return s(x, y, f.w, f.h / 2) - s(x, y + f.h / 2, f.w, f.h / 2);
    case HaarKind::Three: {
        const int t = f.w / 3;
        return s(x, y, t, f.h) + s(x + 2 * t, y, t, f.h) - 2 * s(x + t, y, t, f.h);
    }
    case HaarKind::Four: {
        const int a = f.w / 2, b = f.h / 2;
        return s(x, y, a, b) + s(x + a, y + b, a, b) - s(x + a, y, a, b) - s(x, y + b, a, b);
    }
    }
    return 0;
}

HaarFeature random_feature(Rng& rng, int base) {
    const auto pool = feature_pool(base, 1000000);
    return pool[rng.index(pool.size())];
}

// Best weighted error over every feature, threshold and polarity.
double exhaustive_stump_error(const FeatureTable& t, const std::vector<int>& labels, const std::vector<double>& w) {
    double best = 1e9;
    for (std::size_t f = 0; f < t.features(); ++f) {
        std::vector<double> vals(t.column(f), t.column(f) + t.samples());
        std::vector<double> cuts{*std::min_element(vals.begin(), vals.end()) - 1,
                                 *std::max_element(vals.begin(), vals.end()) + 1};
        for (double a : vals)
            for (double b : vals)
                if (a < b) cuts.push_back(0.5 * (a + b));
        for (double c : cuts)
            for (int pol : {1, -1}) {
                double e = 0;
                for (std::size_t i = 0; i < t.samples(); ++i)
                    if ((pol * vals[i] < pol * c ? 1 : -1) != labels[i]) e += w[i];
                best = std::min(best, e);
            }
    }
    return best;
}

GrayImage split_patch(double left, double right) {
    std::vector<double> d(24 * 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) d[y * 24 + x] = x < 12 ? left : right;
    return GrayImage(24, 24, d);
}

}  // namespace

TEST_CASE("Haar features") {
    const IntegralImage flat(GrayImage(30, 30, 0.6));
    for (const auto& f : feature_pool(24, 300)) CHECK(std::abs(haar_value(flat, f, {2, 3, 24})) <= 1e-9);

    const IntegralImage half(split_patch(1.0, 0.0));
    CHECK(haar_value(half, {HaarKind::TwoHorizontal, 0, 0, 24, 24}, {0, 0, 24}) == doctest::Approx(24 * 24 / 2.0));

    Rng rng(3);
    const GrayImage img = oracle::random_image(64, 64, rng);
    const IntegralImage ii(img);
    for (int t = 0; t < 400; ++t) {
        const HaarFeature f = random_feature(rng, 24);
        const int wx = static_cast<int>(rng.index(41)), wy = static_cast<int>(rng.index(41));
        CHECK(std::abs(haar_value(ii, f, {wx, wy, 24}) - brute_haar(img, f, wx, wy)) <= 1e-9);
    }
    // At twice the size each region covers four times the pixels.
    for (int t = 0; t < 100; ++t) {
        const HaarFeature f = random_feature(rng, 12);
        const int wx = static_cast<int>(rng.index(41)), wy = static_cast<int>(rng.index(41));
        HaarFeature big = f;
        big.x *= 2, big.y *= 2, big.w *= 2, big.h *= 2;
        CHECK(std::abs(haar_value(ii, f, {wx, wy, 24}, 12) - brute_haar(img, big, wx, wy) / 4) <= 1e-9);
    }
    CHECK_THROWS_AS(haar_value(ii, {HaarKind::TwoHorizontal, 0, 0, 3, 1}, {0, 0, 24}), Error);
    CHECK_THROWS_AS(haar_value(ii, {HaarKind::TwoHorizontal, 0, 0, 2, 1}, {50, 0, 24}), Error);
}

TEST_CASE("feature pool") {
    const auto all = feature_pool(24, 10000000);
    for (const auto& f : feature_pool(24, 5000)) CHECK(f.fits(24));
    CHECK(feature_pool(24, 5000).size() <= 5000);
    CHECK(all.size() > 100000);
    for (HaarKind k : {HaarKind::TwoHorizontal, HaarKind::TwoVertical, HaarKind::Three, HaarKind::Four})
        CHECK(parse_haar_kind(to_string(k)) == k);
}

TEST_CASE("Adaboost on separable 1D data") {
    FeatureTable t(2, 1);
    t.at(0, 0) = -1;
    t.at(1, 0) = 1;
    AdaboostParams p;
    p.alpha_max = 7.5;
    const auto stumps = adaboost_train(t, {-1, 1}, 1, p);
    REQUIRE(stumps.size() == 1);
    CHECK(stumps[0].error == 0.0);
    CHECK(stumps[0].alpha == 7.5);
    CHECK(strong_error(stumps, t, {-1, 1}) == 0.0);
}

TEST_CASE("Adaboost on an XOR-like set") {
    // (0,0) twice and (1,1) positive, (0,1) and (1,0) negative.
    FeatureTable t(5, 2);
    const double pts[5][2] = {{0, 0}, {0, 0}, {1, 1}, {0, 1}, {1, 0}};
    for (int i = 0; i < 5; ++i)
        for (int f = 0; f < 2; ++f) t.at(i, f) = pts[i][f];
    const std::vector<int> labels{1, 1, 1, -1, -1};
    const std::vector<double> uniform(5, 0.2);
    AdaboostTrainer tr(t, labels);
    for (int r = 0; r < 3; ++r) {
        const std::vector<double> w = tr.weights();
        const Stump& s = tr.step();
        CHECK(s.error == doctest::Approx(exhaustive_stump_error(t, labels, w)).epsilon(1e-12));
        CHECK(s.error < 0.5);
        double sum = 0;
        for (double v : tr.weights()) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    CHECK(strong_error(tr.stumps(), t, labels) < exhaustive_stump_error(t, labels, uniform));
}

TEST_CASE("Adaboost selection matches an exhaustive search") {
    Rng rng(5);
    FeatureTable t(40, 6);
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        labels.push_back(i % 3 == 0 ? 1 : -1);
        for (int f = 0; f < 6; ++f) t.at(i, f) = rng.normal() + (labels.back() == 1 ? 0.4 * f : 0.0);
    }
    AdaboostTrainer tr(t, labels);
    for (int r = 0; r < 12; ++r) {
        const std::vector<double> w = tr.weights();
        const Stump& s = tr.step();
        CHECK(s.error == doctest::Approx(exhaustive_stump_error(t, labels, w)).epsilon(1e-9));
        CHECK(s.error < 0.5);
    }
    FeatureTable flat(4, 1);
    CHECK_THROWS_AS(adaboost_train(flat, {1, -1, 1, -1}, 1), Error);
    CHECK_THROWS_AS(AdaboostTrainer(flat, {1, 1, 1, 1}), Error);
}

TEST_CASE("cascade on a trivially separable set") {
    std::vector<GrayImage> pos, neg;
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        pos.push_back(split_patch(0.9, 0.1 + 0.05 * rng.uniform()));
        neg.push_back(split_patch(0.1 + 0.05 * rng.uniform(), 0.9));
    }
    CascadeParams p;
    p.max_features = 500;
    CascadeTrainingLog log;
    const Cascade c = cascade_build(pos, neg, p, {}, &log);
    REQUIRE(c.stages.size() == 1);
    CHECK(c.stages[0].weak.size() == 1);
    for (const auto& img : pos) CHECK(evaluate_window(c, WindowSource(img), {0, 0, 24}).accepted);
    for (const auto& img : neg) CHECK_FALSE(evaluate_window(c, WindowSource(img), {0, 0, 24}).accepted);
}

TEST_CASE("boxes") {
    CHECK(iou({0, 0, 10}, {0, 0, 10}) == 1.0);
    CHECK(iou({0, 0, 10}, {20, 20, 10}) == 0.0);
    CHECK(iou({0, 0, 10}, {5, 0, 10}) == doctest::Approx(50.0 / 150.0));
    const std::vector<DetectionBox> raw{{10, 10, 20, 1}, {11, 10, 20, 1}, {12, 11, 20, 2}, {80, 80, 20, 1}};
    const auto m = merge_boxes(raw, 120, 120, 0.3, 1);
    REQUIRE(m.size() == 2);
    CHECK(m[0].score == doctest::Approx(4.0));
    CHECK(m[0].x == 11);
    CHECK(merge_boxes(raw, 120, 120, 0.3, 2).size() == 1);
    DetectParams dp;
    CHECK(window_count(20, 20, dp) == 0);
    CHECK(window_count(24, 24, dp) == 1);
}

TEST_CASE("small trained cascade") {
    const DetectorCorpus corpus = make_detector_corpus(150, 300, 5, 24, 4);
    CHECK(corpus.positives.size() == 150);
    CHECK(corpus.negatives.size() == 300);
    CascadeParams p;
    p.max_stages = 3;
    p.max_features = 3000;
    CascadeTrainingLog log;
    const Cascade c = cascade_build(corpus.positives, corpus.negatives, p, corpus.mining, &log);
    CHECK(c.stages.size() <= 3);
    CHECK(log.rounds_per_stage.size() == c.stages.size());
    REQUIRE(log.round_error.size() == c.stages.size());
    for (std::size_t s = 0; s < c.stages.size(); ++s) {
        CHECK(log.round_error[s].size() == static_cast<std::size_t>(log.rounds_per_stage[s]));
        CHECK(log.prefix_error[s].size() == log.round_error[s].size());
        for (double e : log.round_error[s]) CHECK(e < 0.5);
    }
    int hits = 0;
    for (const auto& img : corpus.positives) hits += evaluate_window(c, WindowSource(img), {0, 0, 24}).accepted;
    CHECK(hits >= 145);

    CHECK(detect::detect(GrayImage(20, 20, 0.5), c).empty());
    CHECK(scan(GrayImage(20, 20, 0.5), c).empty());

    SUBCASE("JSON round trip") {
        const Cascade back = cascade_from_json(cascade_to_json(c));
        CHECK(cascade_to_json(back) == cascade_to_json(c));
        const PlantedScene s = planted_scene(120, 40, 77);
        const auto a = scan(s.image, c), b = scan(s.image, back);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].score == b[i].score);
        const auto path = std::filesystem::temp_directory_path() / "fer_test_cascade.json";
        save_cascade(path.string(), c);
        CHECK(cascade_to_json(load_cascade(path.string())) == cascade_to_json(c));
        std::filesystem::remove(path);
    }
    SUBCASE("malformed cascades") {
        CHECK_THROWS_AS(cascade_from_json("{"), Error);
        CHECK_THROWS_AS(cascade_from_json(R"({"format":"fer-cascade","version":2,"base_window":24,"stages":[]})"), Error);
        CHECK_THROWS_AS(load_cascade("/nonexistent/cascade.json"), Error);
    }
}

TEST_CASE("synthetic corpus is seeded") {
    const DetectorCorpus a = make_detector_corpus(10, 10, 3, 24, 2), b = make_detector_corpus(10, 10, 3, 24, 2);
    for (int i = 0; i < 10; ++i) CHECK(a.positives[i] == b.positives[i]);
    CHECK(a.mining.images.size() == 2);
    const PlantedScene s = planted_scene(200, 48, 1);
    CHECK(s.image.width() == 200);
    CHECK(s.face.side == 48);
    CHECK(s.face.x + 48 <= 200);
}
