#include "fer/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fer/image_io.hpp"
#include "json.hpp"

namespace fer::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using Json = nlohmann::json;

namespace {

std::string read_text(const std::string& path, ErrorKind kind, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kind, "cannot open " + what + " '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(ErrorKind::InvalidInput, "config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(ErrorKind::InvalidInput, "config: unknown key '" + where + "." + key + "'");
    }
}

template <class T>
void get_to(const Json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

// Re-raises with the pipeline stage in front of the message.
template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(stage) + ": " + e.what());
    }
}

}  // namespace

// ----- config -----

void PipelineConfig::validate() const {
    gabor.validate();
    require(cbp.threshold >= 0.0 && std::isfinite(cbp.threshold), "config: cbp threshold must be finite and >= 0");
    require(features == FeatureMode::Gabor || gabor.face_side == 120,
            "config: LBP/CBP features need a 120-pixel face side");
    const PreprocessConfig& p = preprocess;
    require(p.mean_radius >= 0 && p.mean_radius <= 10, "config: mean_radius must lie in [0, 10]");
    require(p.homomorphic_params.low_gain > 0.0 && p.homomorphic_params.high_gain > 0.0,
            "config: homomorphic gains must be positive");
    require(p.homomorphic_params.cutoff > 0.0 && p.homomorphic_params.cutoff <= 0.5,
            "config: homomorphic cutoff must lie in (0, 0.5]");
    require(p.harris.window_sigma > 0.0, "config: harris sigma must be positive");
    require(p.harris.k > 0.0 && p.harris.k < 0.25, "config: harris k must lie in (0, 0.25)");
    require(p.harris.threshold >= 0.0 && p.harris.threshold < 1.0, "config: harris threshold must lie in [0, 1)");
    require(p.harris.nms_radius >= 1, "config: harris nms_radius must be >= 1");
    require(p.frame.side == gabor.face_side, "config: frame side must equal the face side");
    require(p.frame.left_x > 0.0 && p.frame.left_x < p.frame.right_x && p.frame.right_x < 1.0,
            "config: frame needs 0 < left_x < right_x < 1");
    require(p.frame.line_y > 0.0 && p.frame.line_y < 1.0, "config: frame line_y must lie in (0, 1)");
    const detect::DetectParams& d = detector.params;
    require(d.scale_step > 1.0 && d.scale_step <= 4.0, "config: detector scale_step must lie in (1, 4]");
    require(d.min_window >= 1, "config: detector min_window must be >= 1");
    require(d.stride_fraction > 0.0 && d.stride_fraction <= 1.0, "config: detector stride_fraction must lie in (0, 1]");
    require(d.merge_iou >= 0.0 && d.merge_iou < 1.0, "config: detector merge_iou must lie in [0, 1)");
    require(d.min_neighbors >= 1, "config: detector min_neighbors must be >= 1");
    require(!detector.enabled || !detector.cascade.empty(), "config: detector enabled without a cascade path");
    learner.validate();
    require(scheme.kind == eval::Scheme::Kind::LeaveOneOut || scheme.folds >= 2, "config: folds must be >= 2");
    require(!class_names.empty(), "config: class table must not be empty");
    std::set<std::string> seen;
    for (const auto& n : class_names) {
        require(!n.empty(), "config: empty class name");
        require(seen.insert(lower(n)).second, "config: duplicate class name '" + n + "'");
    }
}

PipelineConfig config_from_json(const std::string& text) {
    PipelineConfig c;
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("config: malformed JSON: ") + e.what());
    }
    try {
        check_keys(j, "", {"features", "gabor", "cbp", "preprocess", "detector", "learner", "scheme", "classes", "seed"});
        if (j.contains("features")) c.features = parse_feature_mode(j["features"].get<std::string>());
        if (j.contains("gabor")) {
            const Json& g = j["gabor"];
            check_keys(g, "gabor", {"orientations", "scales", "sigma", "k_max", "lambda", "template_side", "downsample",
                                    "face_side"});
            get_to(g, "orientations", c.gabor.orientations);
            get_to(g, "scales", c.gabor.scales);
            get_to(g, "sigma", c.gabor.sigma);
            get_to(g, "k_max", c.gabor.k_max);
            get_to(g, "lambda", c.gabor.lambda);
            get_to(g, "template_side", c.gabor.template_side);
            get_to(g, "downsample", c.gabor.downsample);
            get_to(g, "face_side", c.gabor.face_side);
            c.preprocess.frame.side = c.gabor.face_side;
        }
        if (j.contains("cbp")) {
            check_keys(j["cbp"], "cbp", {"threshold"});
            get_to(j["cbp"], "threshold", c.cbp.threshold);
        }
        if (j.contains("preprocess")) {
            const Json& p = j["preprocess"];
            check_keys(p, "preprocess", {"mean_radius", "equalize", "homomorphic", "low_gain", "high_gain", "cutoff",
                                         "geometry", "harris", "frame"});
            get_to(p, "mean_radius", c.preprocess.mean_radius);
            get_to(p, "equalize", c.preprocess.equalize);
            get_to(p, "homomorphic", c.preprocess.homomorphic);
            get_to(p, "low_gain", c.preprocess.homomorphic_params.low_gain);
            get_to(p, "high_gain", c.preprocess.homomorphic_params.high_gain);
            get_to(p, "cutoff", c.preprocess.homomorphic_params.cutoff);
            if (p.contains("geometry")) c.preprocess.geometry = parse_geometry_mode(p["geometry"].get<std::string>());
            if (p.contains("harris")) {
                const Json& h = p["harris"];
                check_keys(h, "preprocess.harris", {"sigma", "k", "threshold", "nms_radius"});
                get_to(h, "sigma", c.preprocess.harris.window_sigma);
                get_to(h, "k", c.preprocess.harris.k);
                get_to(h, "threshold", c.preprocess.harris.threshold);
                get_to(h, "nms_radius", c.preprocess.harris.nms_radius);
            }
            if (p.contains("frame")) {
                const Json& f = p["frame"];
                check_keys(f, "preprocess.frame", {"left_x", "right_x", "line_y"});
                get_to(f, "left_x", c.preprocess.frame.left_x);
                get_to(f, "right_x", c.preprocess.frame.right_x);
                get_to(f, "line_y", c.preprocess.frame.line_y);
            }
        }
        if (j.contains("detector")) {
            const Json& d = j["detector"];
            check_keys(d, "detector", {"enabled", "cascade", "scale_step", "min_window", "stride_fraction", "merge_iou",
                                       "min_neighbors"});
            get_to(d, "enabled", c.detector.enabled);
            get_to(d, "cascade", c.detector.cascade);
            get_to(d, "scale_step", c.detector.params.scale_step);
            get_to(d, "min_window", c.detector.params.min_window);
            get_to(d, "stride_fraction", c.detector.params.stride_fraction);
            get_to(d, "merge_iou", c.detector.params.merge_iou);
            get_to(d, "min_neighbors", c.detector.params.min_neighbors);
        }
        if (j.contains("learner")) {
            const Json& l = j["learner"];
            eval::LearnerConfig& lc = c.learner;
            check_keys(l, "learner", {"reduction", "dim", "sdle", "le", "classifier", "measure", "knn_k",
                                      "clusters_per_class", "feedback"});
            if (l.contains("reduction")) lc.reduction = eval::parse_reduction(l["reduction"].get<std::string>());
            get_to(l, "dim", lc.dim);
            if (l.contains("sdle")) {
                const Json& s = l["sdle"];
                check_keys(s, "learner.sdle", {"p", "a", "t", "penalty", "weight_map", "ridge"});
                get_to(s, "p", lc.sdle.p);
                get_to(s, "a", lc.sdle.a);
                get_to(s, "t", lc.sdle.t);
                if (s.contains("penalty") && !s["penalty"].is_null()) lc.sdle.penalty = s["penalty"].get<double>();
                if (s.contains("weight_map")) {
                    const std::string w = s["weight_map"].get<std::string>();
                    if (w == "intent") lc.sdle.weight_map = manifold::WeightMap::Intent;
                    else if (w == "literal") lc.sdle.weight_map = manifold::WeightMap::Literal;
                    else fail(ErrorKind::InvalidInput, "config: unknown weight_map '" + w + "'");
                }
                get_to(s, "ridge", lc.sdle.ridge);
            }
            if (l.contains("le")) {
                const Json& e = l["le"];
                check_keys(e, "learner.le", {"graph", "graph_param", "weights", "t", "dim"});
                if (e.contains("graph")) {
                    const std::string g = e["graph"].get<std::string>();
                    if (g == "knn") lc.le.graph = manifold::GraphMode::NearestNeighbors;
                    else if (g == "epsilon") lc.le.graph = manifold::GraphMode::Epsilon;
                    else fail(ErrorKind::InvalidInput, "config: unknown LE graph '" + g + "'");
                }
                get_to(e, "graph_param", lc.le.graph_param);
                get_to(e, "dim", lc.le.dim);
                if (e.contains("weights")) {
                    const std::string w = e["weights"].get<std::string>();
                    if (w == "heat") lc.le.weights = manifold::WeightScheme::Heat;
                    else if (w == "simple") lc.le.weights = manifold::WeightScheme::Simple;
                    else fail(ErrorKind::InvalidInput, "config: unknown LE weights '" + w + "'");
                }
                if (e.contains("t") && !e["t"].is_null()) lc.le.t = e["t"].get<double>();
            }
            if (l.contains("classifier")) lc.classifier = eval::parse_classifier(l["classifier"].get<std::string>());
            if (l.contains("measure")) lc.measure = classify::parse_measure(l["measure"].get<std::string>());
            get_to(l, "knn_k", lc.knn_k);
            get_to(l, "clusters_per_class", lc.clusters_per_class);
            if (l.contains("feedback")) {
                check_keys(l["feedback"], "learner.feedback", {"rate", "epochs"});
                get_to(l["feedback"], "rate", lc.feedback.rate);
                get_to(l["feedback"], "epochs", lc.feedback.epochs);
            }
        }
        if (j.contains("scheme")) {
            const Json& s = j["scheme"];
            check_keys(s, "scheme", {"kind", "folds"});
            if (s.contains("kind")) {
                const std::string k = s["kind"].get<std::string>();
                if (k == "kfold") c.scheme.kind = eval::Scheme::Kind::KFold;
                else if (k == "loo") c.scheme.kind = eval::Scheme::Kind::LeaveOneOut;
                else fail(ErrorKind::InvalidInput, "config: unknown scheme '" + k + "'");
            }
            get_to(s, "folds", c.scheme.folds);
        }
        get_to(j, "classes", c.class_names);
        get_to(j, "seed", c.seed);
    } catch (const Json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("config: wrong value type: ") + e.what());
    }
    c.learner.feedback.seed = c.seed;
    c.validate();
    return c;
}

std::string config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["features"] = to_string(c.features);
    j["gabor"] = {{"orientations", c.gabor.orientations}, {"scales", c.gabor.scales}, {"sigma", c.gabor.sigma},
                  {"k_max", c.gabor.k_max}, {"lambda", c.gabor.lambda}, {"template_side", c.gabor.template_side},
                  {"downsample", c.gabor.downsample}, {"face_side", c.gabor.face_side}};
    j["cbp"] = {{"threshold", c.cbp.threshold}};
    const PreprocessConfig& p = c.preprocess;
    j["preprocess"] = {{"mean_radius", p.mean_radius},
                       {"equalize", p.equalize},
                       {"homomorphic", p.homomorphic},
                       {"low_gain", p.homomorphic_params.low_gain},
                       {"high_gain", p.homomorphic_params.high_gain},
                       {"cutoff", p.homomorphic_params.cutoff},
                       {"geometry", to_string(p.geometry)},
                       {"harris", {{"sigma", p.harris.window_sigma}, {"k", p.harris.k},
                                   {"threshold", p.harris.threshold}, {"nms_radius", p.harris.nms_radius}}},
                       {"frame", {{"left_x", p.frame.left_x}, {"right_x", p.frame.right_x},
                                  {"line_y", p.frame.line_y}}}};
    const detect::DetectParams& d = c.detector.params;
    j["detector"] = {{"enabled", c.detector.enabled}, {"cascade", c.detector.cascade},
                     {"scale_step", d.scale_step}, {"min_window", d.min_window},
                     {"stride_fraction", d.stride_fraction}, {"merge_iou", d.merge_iou},
                     {"min_neighbors", d.min_neighbors}};
    const eval::LearnerConfig& l = c.learner;
    ordered_json sdle = {{"p", l.sdle.p}, {"a", l.sdle.a}, {"t", l.sdle.t}};
    sdle["penalty"] = l.sdle.penalty ? ordered_json(*l.sdle.penalty) : ordered_json(nullptr);
    sdle["weight_map"] = l.sdle.weight_map == manifold::WeightMap::Intent ? "intent" : "literal";
    sdle["ridge"] = l.sdle.ridge;
    ordered_json le = {{"graph", l.le.graph == manifold::GraphMode::NearestNeighbors ? "knn" : "epsilon"},
                       {"graph_param", l.le.graph_param},
                       {"weights", l.le.weights == manifold::WeightScheme::Heat ? "heat" : "simple"}};
    le["t"] = l.le.t ? ordered_json(*l.le.t) : ordered_json(nullptr);
    le["dim"] = l.le.dim;
    j["learner"] = {{"reduction", eval::to_string(l.reduction)},
                    {"dim", l.dim},
                    {"sdle", sdle},
                    {"le", le},
                    {"classifier", eval::to_string(l.classifier)},
                    {"measure", classify::to_string(l.measure)},
                    {"knn_k", l.knn_k},
                    {"clusters_per_class", l.clusters_per_class},
                    {"feedback", {{"rate", l.feedback.rate}, {"epochs", l.feedback.epochs}}}};
    j["scheme"] = {{"kind", c.scheme.kind == eval::Scheme::Kind::KFold ? "kfold" : "loo"}, {"folds", c.scheme.folds}};
    j["classes"] = c.class_names;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::string& path) {
    PipelineConfig c = config_from_json(read_text(path, ErrorKind::Io, "config"));
    if (!c.detector.cascade.empty() && fs::path(c.detector.cascade).is_relative())
        c.detector.cascade = (fs::path(path).parent_path() / c.detector.cascade).lexically_normal().string();
    return c;
}

// ----- manifest -----

std::vector<int> DatasetManifest::labels() const {
    std::vector<int> out;
    for (const auto& e : entries) out.push_back(e.label);
    return out;
}

int parse_label(const std::string& token, const std::vector<std::string>& class_names) {
    const std::string t = lower(trim(token));
    require(!t.empty(), "empty label");
    if (std::all_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
        const int idx = std::stoi(t);
        require(idx >= 0 && idx < static_cast<int>(class_names.size()), "label index " + t + " outside the class table");
        return idx;
    }
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        const std::string n = lower(class_names[i]);
        if (n == t || ((n == "calm" && t == "neutral") || (n == "neutral" && t == "calm"))) return static_cast<int>(i);
    }
    fail(ErrorKind::InvalidInput, "unknown label '" + trim(token) + "'");
}

DatasetManifest ingest_dataset(const std::string& root, const std::string& manifest_path,
                               const std::vector<std::string>& class_names) {
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorKind::Ingest, "cannot open manifest '" + manifest_path + "'");
    DatasetManifest m;
    m.class_names = class_names;
    std::string line;
    int row = 0;
    bool header = false, has_subject = false;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(t);
        for (std::string col; std::getline(ss, col, ',');) cols.push_back(trim(col));
        if (!header) {
            if (cols.size() < 2 || lower(cols[0]) != "path" || lower(cols[1]) != "label" ||
                (cols.size() == 3 && lower(cols[2]) != "subject") || cols.size() > 3)
                fail(ErrorKind::Ingest, "manifest row " + std::to_string(row) + ": header must be path,label[,subject]");
            header = true;
            has_subject = cols.size() == 3;
            continue;
        }
        const std::string where = "manifest row " + std::to_string(row);
        if (cols.size() < 2 || cols.size() > (has_subject ? 3u : 2u))
            fail(ErrorKind::Ingest, where + ": wrong column count");
        fs::path p(cols[0]);
        if (p.is_relative() && !root.empty()) p = fs::path(root) / p;
        const std::string resolved = p.lexically_normal().string();
        if (!fs::exists(resolved)) fail(ErrorKind::Ingest, where + ": missing file '" + resolved + "'");
        if (!seen.insert(resolved).second) fail(ErrorKind::Ingest, where + ": duplicate path '" + resolved + "'");
        try {
            read_image(resolved);
        } catch (const Error& e) {
            fail(ErrorKind::Ingest, where + ": unreadable image: " + e.what());
        }
        ManifestEntry entry;
        entry.path = resolved;
        try {
            entry.label = parse_label(cols[1], class_names);
        } catch (const Error& e) {
            fail(ErrorKind::Ingest, where + ": " + e.what());
        }
        if (has_subject && cols.size() == 3) entry.subject = cols[2];
        m.entries.push_back(std::move(entry));
    }
    if (!header) fail(ErrorKind::Ingest, "manifest '" + manifest_path + "' has no header");
    if (m.entries.empty()) fail(ErrorKind::Ingest, "manifest '" + manifest_path + "' lists no images");
    return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest, const std::string& root) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write manifest '" + path + "'");
    out << "path,label,subject\n";
    for (const auto& e : manifest.entries) {
        std::string p = e.path;
        if (!root.empty()) p = fs::path(e.path).lexically_relative(root).string();
        out << p << ',' << manifest.class_names.at(e.label) << ',' << e.subject << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

// ----- image chain -----

GrayImage normalize_face(const GrayImage& raw, const PipelineConfig& config, const detect::Cascade* cascade) {
    const PreprocessConfig& p = config.preprocess;
    GrayImage img = raw;
    img = staged("preprocess", [&] {
        GrayImage out = img;
        if (p.mean_radius > 0) out = mean_filter(out, p.mean_radius);
        if (p.equalize) out = hist_equalize(out);
        return out;
    });
    if (config.detector.enabled) {
        img = staged("detect", [&] {
            require(cascade != nullptr, "detector enabled but no cascade loaded");
            const auto boxes = detect::detect(img, *cascade, config.detector.params);
            if (boxes.empty())
                fail(ErrorKind::NormalizationFailure, "no face found; supply a pre-cropped face or disable the detector");
            const detect::DetectionBox& b = boxes.front();
            return crop(img, b.x, b.y, b.side, b.side);
        });
    }
    return staged("normalize", [&] {
        GrayImage out = img;
        if (p.homomorphic) out = homomorphic_filter(out, p.homomorphic_params);
        if (p.geometry == GeometryMode::Resize) return resize(out, config.face_side(), config.face_side());
        try {
            const ReferenceLine line = locate_reference_line(out, p.harris);
            return geometric_normalize(out, line, p.frame);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NormalizationFailure) throw;
            throw Error(e.kind(), std::string(e.what()) + " (hint: use pre-cropped faces with geometry \"resize\")");
        }
    });
}

std::vector<double> extract_features(const GrayImage& face, const PipelineConfig& config) {
    return staged("features", [&] {
        switch (config.features) {
        case FeatureMode::Gabor: return gabor::extract_gabor_features(face, config.gabor);
        case FeatureMode::Lbp: return lbp::extract_lbp_features(face, lbp::Mode::Lbp, config.cbp, config.face_side());
        case FeatureMode::Cbp: return lbp::extract_lbp_features(face, lbp::Mode::Cbp, config.cbp, config.face_side());
        }
        return std::vector<double>{};
    });
}

eval::FeatureMatrix build_features(const DatasetManifest& manifest, const PipelineConfig& config,
                                   const detect::Cascade* cascade) {
    require(!manifest.entries.empty(), "empty dataset");
    eval::FeatureMatrix data;
    const gabor::GaborBank bank = gabor::make_bank(config.gabor);
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        std::vector<double> f;
        try {
            const GrayImage face = normalize_face(read_image(e.path), config, cascade);
            f = config.features == FeatureMode::Gabor
                    ? staged("features", [&] { return gabor::extract_gabor_features(face, config.gabor, bank); })
                    : extract_features(face, config);
        } catch (const Error& err) {
            throw Error(err.kind(), e.path + ": " + err.what());
        }
        if (i == 0) data.x.resize(static_cast<Eigen::Index>(manifest.entries.size()), static_cast<Eigen::Index>(f.size()));
        data.x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const manifold::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
        data.labels.push_back(e.label);
    }
    return data;
}

// ----- train / predict / evaluate -----

ModelBundle train(const PipelineConfig& config, const DatasetManifest& manifest,
                  std::optional<detect::Cascade> cascade) {
    config.validate();
    const int n = static_cast<int>(manifest.entries.size());
    require(config.learner.reduction != eval::Reduction::Le,
            "train: Laplacian eigenmaps have no out-of-sample map; use reduction \"sdle\" or \"none\"");
    require(config.learner.reduction != eval::Reduction::Sdle || config.learner.dim <= n - 1,
            "train: target dimension " + std::to_string(config.learner.dim) + " exceeds n - 1 = " +
                std::to_string(n - 1));
    require(!config.detector.enabled || cascade.has_value(), "train: detector enabled but no cascade supplied");
    std::set<int> classes;
    for (const auto& e : manifest.entries) classes.insert(e.label);
    require(classes.size() >= 2, "train: at least two classes required");

    const eval::FeatureMatrix data = build_features(manifest, config, cascade ? &*cascade : nullptr);
    ModelBundle bundle;
    bundle.config = config;
    bundle.cascade = std::move(cascade);
    bundle.learner = staged("fit", [&] { return eval::fit_learner(data, config.learner, config.seed); });
    bundle.checksum = checksum_hex(bundle_payload(bundle));
    return bundle;
}

Prediction predict(const ModelBundle& bundle, const GrayImage& image) {
    const GrayImage face = normalize_face(image, bundle.config, bundle.cascade ? &*bundle.cascade : nullptr);
    const std::vector<double> f = extract_features(face, bundle.config);
    manifold::Matrix row(1, static_cast<Eigen::Index>(f.size()));
    row.row(0) = Eigen::Map<const manifold::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
    const manifold::Matrix embedded = staged("embed", [&] { return bundle.learner.embed(row); });
    const classify::Decision d = bundle.learner.decide(embedded.row(0).transpose());
    Prediction p;
    p.label = d.label;
    p.score = d.score;
    p.name = d.label >= 0 && d.label < static_cast<int>(bundle.config.class_names.size())
                 ? bundle.config.class_names[d.label]
                 : std::to_string(d.label);
    return p;
}

Prediction predict_file(const ModelBundle& bundle, const std::string& path) {
    return predict(bundle, read_image(path));
}

eval::EvalReport evaluate(const PipelineConfig& config, const DatasetManifest& manifest,
                          const detect::Cascade* cascade) {
    config.validate();
    const int n = static_cast<int>(manifest.entries.size());
    require(config.learner.reduction == eval::Reduction::None || config.learner.dim <= n - 1,
            "evaluate: target dimension exceeds n - 1");
    require(!config.detector.enabled || cascade != nullptr, "evaluate: detector enabled but no cascade supplied");
    // Fold-size preconditions are checked before feature extraction.
    if (config.scheme.kind == eval::Scheme::Kind::KFold) eval::stratified_folds(manifest.labels(), config.scheme.folds, config.seed);
    const eval::FeatureMatrix data = build_features(manifest, config, cascade);
    return eval::cross_validate(data, config.learner, config.scheme, config.seed, manifest.class_names);
}

// ----- bench -----

std::vector<StageTiming> bench(const PipelineConfig& config, const DatasetManifest& manifest,
                               const detect::Cascade* cascade) {
    config.validate();
    require(manifest.entries.size() >= 2, "bench: need at least two images");
    using clock = std::chrono::steady_clock;
    const auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

    std::optional<detect::Cascade> quick;
    if (cascade == nullptr) {
        const detect::DetectorCorpus corpus = detect::make_detector_corpus(150, 300, config.seed, 24, 4);
        detect::CascadeParams cp;
        cp.max_stages = 4;
        cp.max_features = 4000;
        cp.seed = config.seed;
        quick = detect::cascade_build(corpus.positives, corpus.negatives, cp, corpus.mining);
        cascade = &*quick;
    }

    PipelineConfig no_detect = config;
    no_detect.detector.enabled = false;
    double t_ada = 0, t_geo = 0, t_gabor = 0, t_lbp = 0;
    const gabor::GaborBank bank = gabor::make_bank(config.gabor);
    std::vector<std::vector<double>> gabor_rows;
    for (const ManifestEntry& e : manifest.entries) {
        const GrayImage raw = read_image(e.path);
        auto t0 = clock::now();
        const auto boxes = detect::detect(raw, *cascade, config.detector.params);
        t_ada += ms(clock::now() - t0);
        (void)boxes;
        t0 = clock::now();
        const GrayImage face = normalize_face(raw, no_detect);
        t_geo += ms(clock::now() - t0);
        t0 = clock::now();
        gabor_rows.push_back(gabor::extract_gabor_features(face, config.gabor, bank));
        t_gabor += ms(clock::now() - t0);
        t0 = clock::now();
        const auto codes = lbp::extract_lbp_features(face, lbp::Mode::Lbp, config.cbp, config.face_side());
        t_lbp += ms(clock::now() - t0);
        (void)codes;
    }
    const auto rows = static_cast<Eigen::Index>(gabor_rows.size());
    eval::FeatureMatrix data;
    data.x.resize(rows, static_cast<Eigen::Index>(gabor_rows[0].size()));
    for (Eigen::Index i = 0; i < rows; ++i)
        data.x.row(i) = Eigen::Map<const manifold::Vector>(gabor_rows[i].data(), data.x.cols());
    data.labels = manifest.labels();

    eval::LearnerConfig lc = config.learner;
    lc.reduction = eval::Reduction::Sdle;
    lc.dim = std::min(lc.dim, static_cast<int>(rows) - 1);
    const eval::FittedLearner learner = eval::fit_learner(data, lc, config.seed);
    double t_sdle = 0, t_cls = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        auto t0 = clock::now();
        const manifold::Matrix z = learner.embed(data.x.row(i));
        t_sdle += ms(clock::now() - t0);
        t0 = clock::now();
        const classify::Decision d = learner.decide(z.row(0).transpose());
        t_cls += ms(clock::now() - t0);
        (void)d;
    }
    const double n = static_cast<double>(rows);
    const auto pos = [](double v) { return std::max(v, 1e-6); };
    return {{"Ada", pos(t_ada / n)},   {"Geometric", pos(t_geo / n)}, {"Gabor", pos(t_gabor / n)},
            {"LBP", pos(t_lbp / n)},   {"SDLE", pos(t_sdle / n)},     {"Classifier", pos(t_cls / n)}};
}

std::string bench_table(const std::vector<StageTiming>& timings) {
    std::string out = "stage        ms/image\n";
    char line[96];
    for (const StageTiming& t : timings) {
        std::snprintf(line, sizeof line, "%-12s %10.4f\n", t.stage.c_str(), t.ms_per_image);
        out += line;
    }
    return out;
}

std::string to_string(FeatureMode m) {
    switch (m) {
    case FeatureMode::Gabor: return "gabor";
    case FeatureMode::Lbp: return "lbp";
    case FeatureMode::Cbp: return "cbp";
    }
    return "gabor";
}

FeatureMode parse_feature_mode(const std::string& s) {
    if (s == "gabor") return FeatureMode::Gabor;
    if (s == "lbp") return FeatureMode::Lbp;
    if (s == "cbp") return FeatureMode::Cbp;
    fail(ErrorKind::InvalidInput, "unknown feature mode '" + s + "'");
}

std::string to_string(GeometryMode m) { return m == GeometryMode::Resize ? "resize" : "locate"; }

GeometryMode parse_geometry_mode(const std::string& s) {
    if (s == "resize") return GeometryMode::Resize;
    if (s == "locate") return GeometryMode::Locate;
    fail(ErrorKind::InvalidInput, "unknown geometry mode '" + s + "'");
}

}  // namespace fer::pipeline
