#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fer/imaging.hpp"
#include "fer/rng.hpp"

namespace fer::detect {

enum class HaarKind { TwoHorizontal, TwoVertical, Three, Four };

/// Bounding box inside the base window. TwoHorizontal: left minus right.
/// TwoVertical: top minus bottom. Three: outer columns minus twice the
/// middle column. Four: main diagonal quadrants minus the anti-diagonal.
struct HaarFeature {
    HaarKind kind = HaarKind::TwoHorizontal;
    int x = 0, y = 0, w = 2, h = 1;

    bool fits(int base) const;
};

struct DetectionBox {
    int x = 0, y = 0, side = 0;
    double score = 0.0;
};

/// Integral tables of a whole image; the squared table feeds window
/// variance normalization.
struct WindowSource {
    IntegralImage sum;
    IntegralImage sq;

    explicit WindowSource(const GrayImage& img);
};

/// Feature response on a window: rectangles scaled by side/base and rounded,
/// each rectangle sum rescaled to its base-window area.
double haar_value(const IntegralImage& ii, const HaarFeature& feature, const DetectionBox& window, int base = 24);

/// Feature pool over the base window, thinned by uniform stride to at most
/// max_features entries.
std::vector<HaarFeature> feature_pool(int base = 24, std::size_t max_features = 20000);

/// samples x features, stored feature-major for the stump scan.
class FeatureTable {
public:
    FeatureTable(std::size_t samples, std::size_t features)
        : samples_(samples), features_(features), values_(samples * features, 0.0) {}

    std::size_t samples() const { return samples_; }
    std::size_t features() const { return features_; }
    double& at(std::size_t sample, std::size_t feature) { return values_[feature * samples_ + sample]; }
    double at(std::size_t sample, std::size_t feature) const { return values_[feature * samples_ + sample]; }
    const double* column(std::size_t feature) const { return values_.data() + feature * samples_; }

private:
    std::size_t samples_, features_;
    std::vector<double> values_;
};

struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    int polarity = 1;  // votes +1 when polarity * value < polarity * threshold
    double alpha = 0.0;
    double error = 0.0;  // weighted error at selection time

    int predict(double value) const { return polarity * value < polarity * threshold ? 1 : -1; }
};

struct AdaboostParams {
    double alpha_max = 10.0;
};

/// Discrete Adaboost over a fixed table. Initial weights put half the mass
/// on each class.
class AdaboostTrainer {
public:
    AdaboostTrainer(const FeatureTable& table, std::vector<int> labels, AdaboostParams params = {});

    /// Selects, stores and returns the next stump; throws TrainingFailure if
    /// no stump reaches weighted error below 0.5.
    const Stump& step();
    const std::vector<Stump>& stumps() const { return stumps_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    const FeatureTable& table_;
    std::vector<int> labels_;
    AdaboostParams params_;
    std::vector<double> weights_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<Stump> stumps_;
};

std::vector<Stump> adaboost_train(const FeatureTable& table, const std::vector<int>& labels, int rounds,
                                  AdaboostParams params = {});

/// Sum of alpha * h over the first `prefix` stumps (all when prefix < 0).
double strong_score(const std::vector<Stump>& stumps, const FeatureTable& table, std::size_t sample, int prefix = -1);
/// Fraction misclassified by sign(score) with score >= 0 voting +1.
double strong_error(const std::vector<Stump>& stumps, const FeatureTable& table, const std::vector<int>& labels,
                    int prefix = -1);

struct WeakClassifier {
    HaarFeature feature;
    double threshold = 0.0;
    int polarity = 1;
    double alpha = 0.0;
};

struct Stage {
    std::vector<WeakClassifier> weak;
    double threshold = 0.0;
};

struct Cascade {
    int base_window = 24;
    std::vector<Stage> stages;

    void validate() const;
};

struct WindowResult {
    bool accepted = false;
    int stages_evaluated = 0;
    double score = 0.0;  // 1 + summed stage margins when accepted
};

/// Variance-normalized cascade evaluation with early exit.
WindowResult evaluate_window(const Cascade& cascade, const WindowSource& src, const DetectionBox& window);

struct DetectParams {
    double scale_step = 1.25;
    int min_window = 24;
    /// Window step as a fraction of the window side (at least one pixel).
    double stride_fraction = 1.0 / 12.0;
    double merge_iou = 0.3;
    /// Groups with fewer raw windows are dropped as sporadic hits.
    int min_neighbors = 3;
};

/// Number of windows scan() visits.
std::size_t window_count(int width, int height, const DetectParams& params, int base = 24);

struct StageTarget {
    double min_detection = 0.999;
    double max_false_positive = 0.4;
};

struct CascadeParams {
    int base_window = 24;
    std::size_t max_features = 20000;
    std::vector<StageTarget> targets{StageTarget{}};  // last entry repeats
    int max_stages = 10;
    int max_rounds_per_stage = 60;
    /// Training stops once the false-positive rate over scanned mining
    /// windows drops to this.
    double target_false_positive = 0.0;
    AdaboostParams adaboost;
    DetectParams mining_scan;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Background images for hard-negative mining. Windows overlapping an
/// excluded box by IoU >= 0.3 are skipped.
struct MiningSource {
    std::vector<GrayImage> images;
    std::vector<std::vector<DetectionBox>> excluded;
};

struct CascadeTrainingLog {
    std::vector<int> rounds_per_stage;
    /// Per stage, per round: weighted error of the chosen stump, and the
    /// sign(score) training error of the first r+1 stumps on that stage's set.
    std::vector<std::vector<double>> round_error;
    std::vector<std::vector<double>> prefix_error;
    std::vector<double> stage_false_positive;
    double mined_false_positive = 1.0;
};

/// positives/negatives are base-window sized patches.
Cascade cascade_build(const std::vector<GrayImage>& positives, const std::vector<GrayImage>& negatives,
                      const CascadeParams& params, const MiningSource& mining = {},
                      CascadeTrainingLog* log = nullptr);

double iou(const DetectionBox& a, const DetectionBox& b);
/// Raw accepted windows before grouping.
std::vector<DetectionBox> scan(const GrayImage& img, const Cascade& cascade, const DetectParams& params = {});
/// Groups boxes transitively by IoU and returns score-weighted averages.
std::vector<DetectionBox> merge_boxes(const std::vector<DetectionBox>& boxes, int width, int height,
                                      double min_iou = 0.3, int min_neighbors = 1);
std::vector<DetectionBox> detect(const GrayImage& img, const Cascade& cascade, const DetectParams& params = {});

std::string cascade_to_json(const Cascade& cascade);
Cascade cascade_from_json(const std::string& text);
void save_cascade(const std::string& path, const Cascade& cascade);
Cascade load_cascade(const std::string& path);

std::string to_string(HaarKind kind);
HaarKind parse_haar_kind(const std::string& s);

// ----- synthetic detector corpus -----

/// Smoothed noise with random bars and blobs.
GrayImage structured_noise(int width, int height, Rng& rng);
/// Draws a jittered face pattern (bright oval, dark eye band, dark mouth
/// bar) filling the square at (x, y, side).
void plant_face(RealGrid& canvas, int x, int y, int side, Rng& rng);
GrayImage face_patch(int side, Rng& rng);

struct DetectorCorpus {
    std::vector<GrayImage> positives;
    std::vector<GrayImage> negatives;
    MiningSource mining;
};

DetectorCorpus make_detector_corpus(int positives, int negatives, std::uint64_t seed, int base = 24,
                                    int mining_images = 12);

struct PlantedScene {
    GrayImage image;
    DetectionBox face;
};

PlantedScene planted_scene(int side, int face_side, std::uint64_t seed);

}  // namespace fer::detect
