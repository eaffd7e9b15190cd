// fer: command-line front end for the expression pipeline.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "fer/image_io.hpp"
#include "fer/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fer;

namespace {

constexpr int kUsageExit = 2;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

pipeline::PipelineConfig resolve_config(const Globals& g) {
    pipeline::PipelineConfig c = g.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(g.config);
    if (g.seed) {
        c.seed = *g.seed;
        c.learner.feedback.seed = *g.seed;
    }
    c.validate();
    return c;
}

std::string out_path(const Globals& g, const std::string& name) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory '" + g.out + "': " + ec.message());
    return (fs::path(g.out) / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

pipeline::DatasetManifest load_manifest(const std::string& manifest, std::string root,
                                        const pipeline::PipelineConfig& config) {
    if (root.empty()) root = fs::path(manifest).parent_path().string();
    return pipeline::ingest_dataset(root, manifest, config.class_names);
}

std::optional<detect::Cascade> config_cascade(const pipeline::PipelineConfig& c, const std::string& override_path) {
    const std::string path = !override_path.empty() ? override_path : c.detector.cascade;
    if (path.empty()) return std::nullopt;
    return detect::load_cascade(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Facial expression recognition pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Pipeline configuration (JSON)");
    app.add_option("--seed", g.seed, "Seed overriding the configuration");
    app.add_option("--out", g.out, "Output directory");
    app.fallthrough();

    std::string manifest, root, bundle_path, cascade_path;
    std::vector<std::string> images;

    auto* ingest = app.add_subcommand("ingest", "Validate a dataset manifest");
    ingest->add_option("--manifest", manifest, "Manifest CSV (path,label,subject)")->required();
    ingest->add_option("--root", root, "Dataset root (default: manifest directory)");

    pipeline::SynthParams sp;
    auto* synth = app.add_subcommand("synth", "Generate the synthetic expression dataset");
    synth->add_option("--per-class", sp.per_class, "Images per class");
    synth->add_option("--classes", sp.classes, "Number of classes (1-7)");
    synth->add_option("--noise", sp.noise, "Additive noise level");

    auto* train = app.add_subcommand("train", "Fit a model bundle");
    train->add_option("--manifest", manifest, "Manifest CSV")->required();
    train->add_option("--root", root, "Dataset root");
    train->add_option("--cascade", cascade_path, "Cascade file when the detector is enabled");

    auto* predict = app.add_subcommand("predict", "Classify images with a bundle");
    predict->add_option("--bundle", bundle_path, "Model bundle")->required();
    predict->add_option("images", images, "Image files")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Cross-validate the configured pipeline");
    evaluate->add_option("--manifest", manifest, "Manifest CSV")->required();
    evaluate->add_option("--root", root, "Dataset root");
    evaluate->add_option("--cascade", cascade_path, "Cascade file when the detector is enabled");

    auto* bench = app.add_subcommand("bench", "Per-stage timing");
    bench->add_option("--manifest", manifest, "Manifest CSV")->required();
    bench->add_option("--root", root, "Dataset root");
    bench->add_option("--cascade", cascade_path, "Cascade used for the detection stage");

    int positives = 400, negatives = 800, mining = 24, max_stages = 10;
    auto* train_det = app.add_subcommand("train-detector", "Train a cascade on the synthetic pattern corpus");
    train_det->add_option("--positives", positives, "Positive patches");
    train_det->add_option("--negatives", negatives, "Initial negative patches");
    train_det->add_option("--mining-images", mining, "Background scenes for hard-negative mining");
    train_det->add_option("--max-stages", max_stages, "Stage budget");

    auto* det = app.add_subcommand("detect", "Run a cascade over images");
    det->add_option("--cascade", cascade_path, "Cascade file")->required();
    det->add_option("images", images, "Image files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageExit;
    }

    try {
        if (*ingest) {
            const auto c = resolve_config(g);
            const auto m = load_manifest(manifest, root, c);
            std::map<std::string, int> counts;
            for (const auto& e : m.entries) counts[m.class_names[e.label]]++;
            std::printf("%zu images\n", m.entries.size());
            for (const auto& [name, n] : counts) std::printf("  %-10s %d\n", name.c_str(), n);
        } else if (*synth) {
            if (g.seed) sp.seed = *g.seed;
            else if (!g.config.empty()) sp.seed = resolve_config(g).seed;
            const auto m = pipeline::synth_dataset(sp, g.out);
            std::printf("wrote %zu images and %s\n", m.entries.size(), out_path(g, "manifest.csv").c_str());
        } else if (*train) {
            const auto c = resolve_config(g);
            const auto m = load_manifest(manifest, root, c);
            auto casc = c.detector.enabled ? config_cascade(c, cascade_path) : std::nullopt;
            auto bundle = pipeline::train(c, m, casc);
            const std::string path = out_path(g, "model.ferbundle");
            pipeline::save_bundle(path, bundle);
            std::printf("bundle %s checksum %s\n", path.c_str(), bundle.checksum.c_str());
        } else if (*predict) {
            const auto bundle = pipeline::load_bundle(bundle_path);
            for (const auto& img : images) {
                const auto p = pipeline::predict_file(bundle, img);
                std::printf("%s\t%s\t%d\t%.6f\n", img.c_str(), p.name.c_str(), p.label, p.score);
            }
        } else if (*evaluate) {
            const auto c = resolve_config(g);
            const auto m = load_manifest(manifest, root, c);
            const auto casc = c.detector.enabled ? config_cascade(c, cascade_path) : std::nullopt;
            const auto report = pipeline::evaluate(c, m, casc ? &*casc : nullptr);
            const std::string path = out_path(g, "report.json");
            write_file(path, eval::report_json(report));
            std::fputs(eval::report_table(report).c_str(), stdout);
            std::printf("report %s\n", path.c_str());
        } else if (*bench) {
            const auto c = resolve_config(g);
            const auto m = load_manifest(manifest, root, c);
            const auto casc = config_cascade(c, cascade_path);
            const auto timings = pipeline::bench(c, m, casc ? &*casc : nullptr);
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            for (const auto& t : timings) j.push_back({{"stage", t.stage}, {"ms_per_image", t.ms_per_image}});
            write_file(out_path(g, "bench.json"), j.dump(2) + "\n");
            std::fputs(pipeline::bench_table(timings).c_str(), stdout);
        } else if (*train_det) {
            const std::uint64_t seed = g.seed ? *g.seed : (g.config.empty() ? 42 : resolve_config(g).seed);
            const auto corpus = detect::make_detector_corpus(positives, negatives, seed, 24, mining);
            detect::CascadeParams cp;
            cp.seed = seed;
            cp.max_stages = max_stages;
            detect::CascadeTrainingLog log;
            const auto casc = detect::cascade_build(corpus.positives, corpus.negatives, cp, corpus.mining, &log);
            const std::string path = out_path(g, "cascade.json");
            detect::save_cascade(path, casc);
            std::printf("cascade %s: %zu stages, mined false-positive rate %.3g\n", path.c_str(), casc.stages.size(),
                        log.mined_false_positive);
        } else if (*det) {
            const auto casc = detect::load_cascade(cascade_path);
            detect::DetectParams dp;
            if (!g.config.empty()) dp = resolve_config(g).detector.params;
            for (const auto& img : images) {
                const auto boxes = detect::detect(read_image(img), casc, dp);
                std::printf("%s\t%zu\n", img.c_str(), boxes.size());
                for (const auto& b : boxes) std::printf("  x=%d y=%d side=%d score=%.3f\n", b.x, b.y, b.side, b.score);
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
