#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fer/evalharness.hpp"
#include "fer/facedetect.hpp"
#include "fer/gabor.hpp"
#include "fer/imaging.hpp"
#include "fer/lbp.hpp"

namespace fer::pipeline {

enum class FeatureMode { Gabor, Lbp, Cbp };
enum class GeometryMode { Resize, Locate };

struct PreprocessConfig {
    int mean_radius = 1;  // 0 disables the mean filter
    bool equalize = true;
    bool homomorphic = true;
    HomomorphicParams homomorphic_params;
    GeometryMode geometry = GeometryMode::Resize;
    HarrisParams harris;
    CanonicalFrame frame;
};

struct DetectorConfig {
    bool enabled = false;
    std::string cascade;  // path; resolved relative to the config file
    detect::DetectParams params;
};

struct PipelineConfig {
    FeatureMode features = FeatureMode::Gabor;
    gabor::GaborParams gabor;
    lbp::CbpParams cbp;
    PreprocessConfig preprocess;
    DetectorConfig detector;
    eval::LearnerConfig learner;
    eval::Scheme scheme;
    std::vector<std::string> class_names = eval::default_class_names();
    std::uint64_t seed = 42;

    void validate() const;
    int face_side() const { return gabor.face_side; }
};

/// Unknown keys are rejected; absent keys keep their defaults.
PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);

struct ManifestEntry {
    std::string path;  // as resolved against the dataset root
    int label = 0;
    std::string subject;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> class_names;

    std::vector<int> labels() const;
};

/// Class lookup by name (case-insensitive, "neutral" == "calm") or index.
int parse_label(const std::string& token, const std::vector<std::string>& class_names);

/// Header row path,label[,subject]. Ingest errors name the offending row.
DatasetManifest ingest_dataset(const std::string& root, const std::string& manifest_path,
                               const std::vector<std::string>& class_names = eval::default_class_names());
void write_manifest(const std::string& path, const DatasetManifest& manifest, const std::string& root);

/// Preprocesses, optionally detects, and normalizes one image to the
/// canonical face frame.
GrayImage normalize_face(const GrayImage& raw, const PipelineConfig& config,
                         const detect::Cascade* cascade = nullptr);
std::vector<double> extract_features(const GrayImage& face, const PipelineConfig& config);

/// Reads every manifest image and stacks the feature rows.
eval::FeatureMatrix build_features(const DatasetManifest& manifest, const PipelineConfig& config,
                                   const detect::Cascade* cascade = nullptr);

struct ModelBundle {
    int version = 1;
    PipelineConfig config;
    std::optional<detect::Cascade> cascade;
    eval::FittedLearner learner;
    std::string checksum;  // FNV-1a 64 of the payload, hex
};

ModelBundle train(const PipelineConfig& config, const DatasetManifest& manifest,
                  std::optional<detect::Cascade> cascade = std::nullopt);

struct Prediction {
    int label = 0;
    std::string name;
    double score = 0.0;
};

Prediction predict(const ModelBundle& bundle, const GrayImage& image);
Prediction predict_file(const ModelBundle& bundle, const std::string& path);

eval::EvalReport evaluate(const PipelineConfig& config, const DatasetManifest& manifest,
                          const detect::Cascade* cascade = nullptr);

struct StageTiming {
    std::string stage;
    double ms_per_image = 0.0;
};

/// Mean wall-clock per image for Ada, Geometric, Gabor, LBP, SDLE and
/// Classifier. A small cascade is trained when none is supplied.
std::vector<StageTiming> bench(const PipelineConfig& config, const DatasetManifest& manifest,
                               const detect::Cascade* cascade = nullptr);
std::string bench_table(const std::vector<StageTiming>& timings);

// ----- bundle persistence -----

std::string bundle_payload(const ModelBundle& bundle);
std::string checksum_hex(const std::string& payload);
void save_bundle(const std::string& path, ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);
std::string serialize_bundle(ModelBundle& bundle);
ModelBundle parse_bundle(const std::string& text);

// ----- synthetic expression data -----

struct SynthParams {
    std::uint64_t seed = 42;
    int per_class = 14;
    int classes = 7;
    double noise = 0.14;
    int side = 120;

    void validate() const;
};

struct SynthSample {
    GrayImage image;
    int label = 0;
    int subject = 0;
};

/// Per-class parametric schematics (mouth bend and opening, eye aperture,
/// brow height and tilt) with per-subject geometry and additive noise.
std::vector<SynthSample> synth_samples(const SynthParams& params);
/// Writes PGM files plus manifest.csv under out_dir and returns the manifest.
DatasetManifest synth_dataset(const SynthParams& params, const std::string& out_dir);

std::string to_string(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);
std::string to_string(GeometryMode m);
GeometryMode parse_geometry_mode(const std::string& s);

}  // namespace fer::pipeline
