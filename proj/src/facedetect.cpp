#include "fer/facedetect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace fer::detect {

namespace {

struct WeightedRect {
    int x, y, w, h;
    double weight;
};

// Rectangles making up a feature, in base-window coordinates.
int feature_rects(const HaarFeature& f, WeightedRect* out) {
    switch (f.kind) {
    case HaarKind::TwoHorizontal:
        out[0] = {f.x, f.y, f.w / 2, f.h, 1.0};
        out[1] = {f.x + f.w / 2, f.y, f.w / 2, f.h, -1.0};
        return 2;
    case HaarKind::TwoVertical:
        out[0] = {f.x, f.y, f.w, f.h / 2, 1.0};
        out[1] = {f.x, f.y + f.h / 2, f.w, f.h / 2, -1.0};
        return 2;
    case HaarKind::Three: {
        const int t = f.w / 3;
        out[0] = {f.x, f.y, t, f.h, 1.0};
        out[1] = {f.x + t, f.y, t, f.h, -2.0};
        out[2] = {f.x + 2 * t, f.y, t, f.h, 1.0};
        return 3;
    }
    case HaarKind::Four: {
        const int hw = f.w / 2, hh = f.h / 2;
        out[0] = {f.x, f.y, hw, hh, 1.0};
        out[1] = {f.x + hw, f.y, hw, hh, -1.0};
        out[2] = {f.x, f.y + hh, hw, hh, -1.0};
        out[3] = {f.x + hw, f.y + hh, hw, hh, 1.0};
        return 4;
    }
    }
    return 0;
}

double window_sd(const WindowSource& src, const DetectionBox& b) {
    const double n = static_cast<double>(b.side) * b.side;
    const double s = src.sum.rect_sum(b.x, b.y, b.x + b.side, b.y + b.side);
    const double q = src.sq.rect_sum(b.x, b.y, b.x + b.side, b.y + b.side);
    const double mean = s / n;
    const double var = q / n - mean * mean;
    const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    return sd > 1e-4 ? sd : 1.0;
}

// Mean region difference in units of the window's standard deviation.
double normalized_value(const WindowSource& src, const HaarFeature& f, const DetectionBox& b, int base, double sd) {
    return haar_value(src.sum, f, b, base) / (sd * base * base);
}

bool inside(const DetectionBox& b, int width, int height) {
    return b.side > 0 && b.x >= 0 && b.y >= 0 && b.x + b.side <= width && b.y + b.side <= height;
}

}  // namespace

std::size_t window_count(int width, int height, const DetectParams& params, int base) {
    std::size_t n = 0;
    const int limit = std::min(width, height);
    for (int side = std::max(params.min_window, base); side <= limit;
         side = std::max(side + 1, static_cast<int>(std::lround(side * params.scale_step)))) {
        const int stride = std::max(1, static_cast<int>(std::lround(side * params.stride_fraction)));
        n += static_cast<std::size_t>((width - side) / stride + 1) * ((height - side) / stride + 1);
    }
    return n;
}

bool HaarFeature::fits(int base) const {
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > base || y + h > base) return false;
    switch (kind) {
    case HaarKind::TwoHorizontal: return w % 2 == 0;
    case HaarKind::TwoVertical: return h % 2 == 0;
    case HaarKind::Three: return w % 3 == 0;
    case HaarKind::Four: return w % 2 == 0 && h % 2 == 0;
    }
    return false;
}

WindowSource::WindowSource(const GrayImage& img) : sum(img) {
    RealGrid g = img.to_grid();
    for (double& v : g.data) v *= v;
    sq = IntegralImage(g);
}

double haar_value(const IntegralImage& ii, const HaarFeature& feature, const DetectionBox& window, int base) {
    require(inside(window, ii.width(), ii.height()), "haar_value: window outside the image");
    require(window.side >= base, "haar_value: window smaller than the base window");
    require(feature.fits(base), "haar_value: feature does not fit the base window");
    const double s = static_cast<double>(window.side) / base;
    WeightedRect rects[4];
    const int n = feature_rects(feature, rects);
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
        const WeightedRect& r = rects[i];
        const int x0 = window.x + static_cast<int>(std::lround(r.x * s));
        const int y0 = window.y + static_cast<int>(std::lround(r.y * s));
        const int x1 = std::max(x0 + 1, window.x + static_cast<int>(std::lround((r.x + r.w) * s)));
        const int y1 = std::max(y0 + 1, window.y + static_cast<int>(std::lround((r.y + r.h) * s)));
        const double area = static_cast<double>(x1 - x0) * (y1 - y0);
        value += r.weight * ii.rect_sum(x0, y0, x1, y1) * (static_cast<double>(r.w) * r.h / area);
    }
    return value;
}

std::vector<HaarFeature> feature_pool(int base, std::size_t max_features) {
    require(base >= 4, "feature_pool: base window too small");
    require(max_features >= 1, "feature_pool: max_features must be >= 1");
    std::vector<HaarFeature> all;
    const HaarKind kinds[] = {HaarKind::TwoHorizontal, HaarKind::TwoVertical, HaarKind::Three, HaarKind::Four};
    for (HaarKind kind : kinds) {
        const int sx = kind == HaarKind::Three ? 3 : (kind == HaarKind::TwoVertical ? 1 : 2);
        const int sy = kind == HaarKind::TwoVertical || kind == HaarKind::Four ? 2 : 1;
        for (int w = sx; w <= base; w += sx)
            for (int h = sy; h <= base; h += sy)
                for (int y = 0; y + h <= base; ++y)
                    for (int x = 0; x + w <= base; ++x) all.push_back({kind, x, y, w, h});
    }
    const std::size_t stride = (all.size() + max_features - 1) / max_features;
    std::vector<HaarFeature> pool;
    for (std::size_t i = 0; i < all.size(); i += stride) pool.push_back(all[i]);
    return pool;
}

// ----- Adaboost -----

AdaboostTrainer::AdaboostTrainer(const FeatureTable& table, std::vector<int> labels, AdaboostParams params)
    : table_(table), labels_(std::move(labels)), params_(params) {
    require(labels_.size() == table_.samples(), "adaboost: label count mismatch");
    require(table_.features() >= 1, "adaboost: empty feature table");
    std::size_t pos = 0, neg = 0;
    for (int l : labels_) {
        require(l == 1 || l == -1, "adaboost: labels must be +1 or -1");
        (l == 1 ? pos : neg)++;
    }
    require(pos > 0 && neg > 0, "adaboost: both labels must be present");
    require(params_.alpha_max > 0.0, "adaboost: alpha_max must be positive");
    weights_.resize(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) weights_[i] = labels_[i] == 1 ? 0.5 / pos : 0.5 / neg;

    order_.resize(table_.features());
    for (std::size_t f = 0; f < table_.features(); ++f) {
        std::vector<std::uint32_t>& o = order_[f];
        o.resize(table_.samples());
        std::iota(o.begin(), o.end(), 0u);
        const double* col = table_.column(f);
        std::stable_sort(o.begin(), o.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
}

const Stump& AdaboostTrainer::step() {
    const std::size_t n = table_.samples();
    double total_pos = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += weights_[i];
        if (labels_[i] == 1) total_pos += weights_[i];
    }

    Stump best;
    best.error = std::numeric_limits<double>::infinity();
    const auto consider = [&](std::size_t f, double threshold, double err_plus) {
        const double err_minus = total - err_plus;
        if (err_plus < best.error) best = {f, threshold, 1, 0.0, err_plus};
        if (err_minus < best.error) best = {f, threshold, -1, 0.0, err_minus};
    };
    for (std::size_t f = 0; f < table_.features(); ++f) {
        const double* col = table_.column(f);
        const std::vector<std::uint32_t>& o = order_[f];
        // Threshold below every value: polarity +1 votes -1 everywhere.
        double err = total_pos;
        consider(f, col[o[0]] - 1.0, err);
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t i = o[k];
            err += labels_[i] == 1 ? -weights_[i] : weights_[i];
            if (k + 1 < n) {
                const double lo = col[i], hi = col[o[k + 1]];
                if (hi > lo) consider(f, 0.5 * (lo + hi), std::max(err, 0.0));
            } else {
                consider(f, col[i] + 1.0, std::max(err, 0.0));
            }
        }
    }
    const double eps = std::max(best.error / total, 0.0);
    if (!(eps < 0.5)) {
        fail(ErrorKind::TrainingFailure, "adaboost round " + std::to_string(stumps_.size() + 1) +
                                             ": no weak learner with weighted error below 0.5 (best " +
                                             std::to_string(eps) + ")");
    }
    best.error = eps;
    best.alpha = eps <= 0.0 ? params_.alpha_max : std::min(params_.alpha_max, 0.5 * std::log((1.0 - eps) / eps));

    const double* col = table_.column(best.feature);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weights_[i] *= std::exp(-best.alpha * labels_[i] * best.predict(col[i]));
        sum += weights_[i];
    }
    for (double& w : weights_) w /= sum;
    stumps_.push_back(best);
    return stumps_.back();
}

std::vector<Stump> adaboost_train(const FeatureTable& table, const std::vector<int>& labels, int rounds,
                                  AdaboostParams params) {
    require(rounds >= 1, "adaboost: rounds must be >= 1");
    AdaboostTrainer trainer(table, labels, params);
    for (int r = 0; r < rounds; ++r) trainer.step();
    return trainer.stumps();
}

double strong_score(const std::vector<Stump>& stumps, const FeatureTable& table, std::size_t sample, int prefix) {
    const std::size_t n = prefix < 0 ? stumps.size() : std::min<std::size_t>(prefix, stumps.size());
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += stumps[k].alpha * stumps[k].predict(table.at(sample, stumps[k].feature));
    return s;
}

double strong_error(const std::vector<Stump>& stumps, const FeatureTable& table, const std::vector<int>& labels,
                    int prefix) {
    require(labels.size() == table.samples(), "strong_error: label count mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int vote = strong_score(stumps, table, i, prefix) >= 0.0 ? 1 : -1;
        if (vote != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

// ----- cascade -----

void Cascade::validate() const {
    require(base_window >= 4, "cascade: base window too small");
    require(!stages.empty(), "cascade: at least one stage required");
    for (const Stage& s : stages) {
        require(!s.weak.empty(), "cascade: empty stage");
        for (const WeakClassifier& w : s.weak) {
            require(w.feature.fits(base_window), "cascade: feature outside the base window");
            require(w.polarity == 1 || w.polarity == -1, "cascade: polarity must be +1 or -1");
            require(w.alpha >= 0.0 && std::isfinite(w.alpha), "cascade: alpha must be finite and >= 0");
            require(std::isfinite(w.threshold), "cascade: non-finite threshold");
        }
        require(std::isfinite(s.threshold), "cascade: non-finite stage threshold");
    }
}

WindowResult evaluate_window(const Cascade& cascade, const WindowSource& src, const DetectionBox& window) {
    WindowResult res;
    const double sd = window_sd(src, window);
    double margin = 0.0;
    for (const Stage& stage : cascade.stages) {
        ++res.stages_evaluated;
        double score = 0.0;
        for (const WeakClassifier& w : stage.weak) {
            const double v = normalized_value(src, w.feature, window, cascade.base_window, sd);
            score += w.alpha * (w.polarity * v < w.polarity * w.threshold ? 1.0 : -1.0);
        }
        if (score < stage.threshold) return res;
        margin += score - stage.threshold;
    }
    res.accepted = true;
    res.score = 1.0 + margin;
    return res;
}

void CascadeParams::validate() const {
    require(base_window >= 4, "cascade: base window too small");
    require(max_features >= 1, "cascade: max_features must be >= 1");
    require(!targets.empty(), "cascade: at least one stage target required");
    for (const StageTarget& t : targets) {
        require(t.min_detection > 0.0 && t.min_detection <= 1.0, "cascade: stage detection target must lie in (0, 1]");
        require(t.max_false_positive >= 0.0 && t.max_false_positive < 1.0,
                "cascade: stage false-positive target must lie in [0, 1)");
    }
    require(max_stages >= 1, "cascade: max_stages must be >= 1");
    require(max_rounds_per_stage >= 1, "cascade: max_rounds_per_stage must be >= 1");
    require(target_false_positive >= 0.0 && target_false_positive < 1.0,
            "cascade: target false-positive rate must lie in [0, 1)");
}

Cascade cascade_build(const std::vector<GrayImage>& positives, const std::vector<GrayImage>& negatives,
                      const CascadeParams& params, const MiningSource& mining, CascadeTrainingLog* log) {
    params.validate();
    require(!positives.empty() && !negatives.empty(), "cascade_build: empty sample set");
    const int base = params.base_window;
    for (const auto* set : {&positives, &negatives})
        for (const GrayImage& p : *set)
            require(p.width() == base && p.height() == base, "cascade_build: samples must match the base window");
    require(mining.excluded.empty() || mining.excluded.size() == mining.images.size(),
            "cascade_build: mining exclusion list size mismatch");

    const std::vector<HaarFeature> pool = feature_pool(base, params.max_features);
    const DetectionBox whole{0, 0, base, 0.0};
    std::vector<GrayImage> pos = positives, neg = negatives;
    const std::size_t neg_target = negatives.size();
    Rng rng(params.seed);
    CascadeTrainingLog local;
    CascadeTrainingLog& out = log ? *log : local;
    out = {};

    Cascade cascade;
    cascade.base_window = base;
    for (int s = 0; s < params.max_stages && !neg.empty(); ++s) {
        const StageTarget& target = params.targets[std::min<std::size_t>(s, params.targets.size() - 1)];
        const std::size_t np = pos.size(), nn = neg.size();
        FeatureTable table(np + nn, pool.size());
        std::vector<int> labels(np + nn);
        for (std::size_t i = 0; i < np + nn; ++i) {
            const GrayImage& patch = i < np ? pos[i] : neg[i - np];
            labels[i] = i < np ? 1 : -1;
            const WindowSource src(patch);
            const double sd = window_sd(src, whole);
            for (std::size_t f = 0; f < pool.size(); ++f) table.at(i, f) = normalized_value(src, pool[f], whole, base, sd);
        }

        AdaboostTrainer trainer(table, labels, params.adaboost);
        double threshold = 0.0, fp = 1.0;
        bool met = false;
        std::vector<double> pos_scores(np);
        out.round_error.emplace_back();
        out.prefix_error.emplace_back();
        for (int r = 0; r < params.max_rounds_per_stage && !met; ++r) {
            out.round_error.back().push_back(trainer.step().error);
            out.prefix_error.back().push_back(strong_error(trainer.stumps(), table, labels));
            for (std::size_t i = 0; i < np; ++i) pos_scores[i] = strong_score(trainer.stumps(), table, i);
            std::vector<double> sorted = pos_scores;
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(target.min_detection * np - 1e-9)));
            threshold = std::min(0.0, sorted[std::min(keep, np) - 1]);
            std::size_t passed = 0;
            for (std::size_t i = np; i < np + nn; ++i)
                if (strong_score(trainer.stumps(), table, i) >= threshold) ++passed;
            fp = static_cast<double>(passed) / nn;
            met = fp <= target.max_false_positive;
        }
        if (!met) {
            fail(ErrorKind::TrainingFailure, "cascade stage " + std::to_string(s + 1) + ": false-positive rate " +
                                                 std::to_string(fp) + " above target after " +
                                                 std::to_string(params.max_rounds_per_stage) + " rounds");
        }

        Stage stage;
        stage.threshold = threshold;
        for (const Stump& st : trainer.stumps()) stage.weak.push_back({pool[st.feature], st.threshold, st.polarity, st.alpha});
        cascade.stages.push_back(std::move(stage));
        out.rounds_per_stage.push_back(static_cast<int>(trainer.stumps().size()));
        out.stage_false_positive.push_back(fp);

        const auto passes = [&](const GrayImage& p) { return evaluate_window(cascade, WindowSource(p), whole).accepted; };
        std::erase_if(pos, [&](const GrayImage& p) { return !passes(p); });
        std::erase_if(neg, [&](const GrayImage& p) { return !passes(p); });
        require(!pos.empty(), "cascade_build: every positive rejected");

        if (mining.images.empty()) continue;
        // Scan every mining image the way detect() would and keep the
        // windows that still pass, away from any planted face.
        std::vector<std::pair<std::size_t, DetectionBox>> hard;
        std::size_t windows = 0;
        for (std::size_t m = 0; m < mining.images.size(); ++m) {
            const GrayImage& img = mining.images[m];
            windows += window_count(img.width(), img.height(), params.mining_scan, base);
            for (const DetectionBox& b : scan(img, cascade, params.mining_scan)) {
                bool excluded = false;
                if (!mining.excluded.empty())
                    for (const DetectionBox& e : mining.excluded[m]) excluded = excluded || iou(b, e) >= 0.3;
                if (!excluded) hard.emplace_back(m, b);
            }
        }
        out.mined_false_positive = windows ? static_cast<double>(hard.size()) / windows : 0.0;
        rng.shuffle(hard);
        for (const auto& [m, b] : hard) {
            if (neg.size() >= neg_target) break;
            GrayImage patch = resize(crop(mining.images[m], b.x, b.y, b.side, b.side), base, base);
            if (passes(patch)) neg.push_back(std::move(patch));
        }
        if (out.mined_false_positive <= params.target_false_positive) break;
    }
    return cascade;
}

// ----- detection -----

double iou(const DetectionBox& a, const DetectionBox& b) {
    const int ix = std::max(0, std::min(a.x + a.side, b.x + b.side) - std::max(a.x, b.x));
    const int iy = std::max(0, std::min(a.y + a.side, b.y + b.side) - std::max(a.y, b.y));
    const double inter = static_cast<double>(ix) * iy;
    const double uni = static_cast<double>(a.side) * a.side + static_cast<double>(b.side) * b.side - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<DetectionBox> scan(const GrayImage& img, const Cascade& cascade, const DetectParams& params) {
    require(params.scale_step > 1.0, "detect: scale_step must exceed 1");
    require(params.stride_fraction > 0.0, "detect: stride fraction must be positive");
    cascade.validate();
    std::vector<DetectionBox> hits;
    const int limit = std::min(img.width(), img.height());
    int side = std::max(params.min_window, cascade.base_window);
    if (limit < side) return hits;
    const WindowSource src(img);
    while (side <= limit) {
        const int stride = std::max(1, static_cast<int>(std::lround(side * params.stride_fraction)));
        for (int y = 0; y + side <= img.height(); y += stride)
            for (int x = 0; x + side <= img.width(); x += stride) {
                const DetectionBox b{x, y, side, 0.0};
                const WindowResult r = evaluate_window(cascade, src, b);
                if (r.accepted) hits.push_back({x, y, side, r.score});
            }
        side = std::max(side + 1, static_cast<int>(std::lround(side * params.scale_step)));
    }
    return hits;
}

std::vector<DetectionBox> merge_boxes(const std::vector<DetectionBox>& boxes, int width, int height, double min_iou,
                                      int min_neighbors) {
    const std::size_t n = boxes.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (iou(boxes[i], boxes[j]) > min_iou) parent[find(j)] = find(i);

    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<DetectionBox> merged;
    for (const auto& g : groups) {
        if (g.empty() || static_cast<int>(g.size()) < min_neighbors) continue;
        double sw = 0.0, sx = 0.0, sy = 0.0, ss = 0.0;
        for (std::size_t i : g) {
            const DetectionBox& b = boxes[i];
            const double w = std::max(b.score, 1e-12);
            sw += w;
            sx += w * b.x;
            sy += w * b.y;
            ss += w * b.side;
        }
        DetectionBox m;
        m.side = std::clamp(static_cast<int>(std::lround(ss / sw)), 1, std::min(width, height));
        m.x = std::clamp(static_cast<int>(std::lround(sx / sw)), 0, width - m.side);
        m.y = std::clamp(static_cast<int>(std::lround(sy / sw)), 0, height - m.side);
        m.score = sw;
        merged.push_back(m);
    }
    std::sort(merged.begin(), merged.end(), [](const DetectionBox& a, const DetectionBox& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return merged;
}

std::vector<DetectionBox> detect(const GrayImage& img, const Cascade& cascade, const DetectParams& params) {
    return merge_boxes(scan(img, cascade, params), img.width(), img.height(), params.merge_iou, params.min_neighbors);
}

// ----- serialization -----

std::string to_string(HaarKind kind) {
    switch (kind) {
    case HaarKind::TwoHorizontal: return "two-rect-horizontal";
    case HaarKind::TwoVertical: return "two-rect-vertical";
    case HaarKind::Three: return "three-rect";
    case HaarKind::Four: return "four-rect";
    }
    return "two-rect-horizontal";
}

HaarKind parse_haar_kind(const std::string& s) {
    if (s == "two-rect-horizontal") return HaarKind::TwoHorizontal;
    if (s == "two-rect-vertical") return HaarKind::TwoVertical;
    if (s == "three-rect") return HaarKind::Three;
    if (s == "four-rect") return HaarKind::Four;
    fail(ErrorKind::InvalidInput, "unknown Haar feature kind '" + s + "'");
}

std::string cascade_to_json(const Cascade& cascade) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "fer-cascade";
    j["version"] = 1;
    j["base_window"] = cascade.base_window;
    ordered_json stages = ordered_json::array();
    for (const Stage& s : cascade.stages) {
        ordered_json weak = ordered_json::array();
        for (const WeakClassifier& w : s.weak) {
            weak.push_back({{"kind", to_string(w.feature.kind)},
                            {"x", w.feature.x}, {"y", w.feature.y}, {"w", w.feature.w}, {"h", w.feature.h},
                            {"threshold", w.threshold}, {"polarity", w.polarity}, {"alpha", w.alpha}});
        }
        stages.push_back({{"threshold", s.threshold}, {"weak", weak}});
    }
    j["stages"] = stages;
    return j.dump(1) + "\n";
}

Cascade cascade_from_json(const std::string& text) {
    Cascade c;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        if (j.at("format").get<std::string>() != "fer-cascade")
            fail(ErrorKind::InvalidInput, "cascade: not a cascade document");
        if (j.at("version").get<int>() != 1) fail(ErrorKind::InvalidInput, "cascade: unsupported version");
        c.base_window = j.at("base_window").get<int>();
        for (const auto& s : j.at("stages")) {
            Stage st;
            st.threshold = s.at("threshold").get<double>();
            for (const auto& w : s.at("weak")) {
                WeakClassifier wc;
                wc.feature = {parse_haar_kind(w.at("kind").get<std::string>()), w.at("x").get<int>(),
                              w.at("y").get<int>(), w.at("w").get<int>(), w.at("h").get<int>()};
                wc.threshold = w.at("threshold").get<double>();
                wc.polarity = w.at("polarity").get<int>();
                wc.alpha = w.at("alpha").get<double>();
                st.weak.push_back(wc);
            }
            c.stages.push_back(std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("cascade: malformed document: ") + e.what());
    }
    c.validate();
    return c;
}

void save_cascade(const std::string& path, const Cascade& cascade) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write cascade '" + path + "'");
    out << cascade_to_json(cascade);
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

Cascade load_cascade(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open cascade '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return cascade_from_json(ss.str());
}

}  // namespace fer::detect
