// Synthetic expression schematics standing in for a portrait dataset.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <cstdio>

#include "fer/image_io.hpp"
#include "fer/pipeline.hpp"
#include "fer/rng.hpp"

namespace fer::pipeline {

namespace {

struct Expression {
    double bend;      // mouth corners: negative up (smile), positive down
    double width;     // mouth half width
    double open;      // mouth opening
    double aperture;  // eye opening
    double brow_raise;
    double brow_tilt;  // positive raises the inner ends
};

// happy, sad, fear, anger, surprise, disgust, calm
constexpr Expression kExpressions[] = {
    {-1.00, 0.17, 0.35, 0.75, 0.000, 0.0},
    {0.85, 0.12, 0.05, 0.65, 0.010, 0.7},
    {0.35, 0.13, 0.60, 1.45, 0.035, 0.5},
    {0.25, 0.11, 0.00, 0.55, -0.025, -0.9},
    {0.00, 0.07, 1.30, 1.65, 0.055, 0.0},
    {0.55, 0.14, 0.20, 0.45, -0.015, -0.3},
    {0.00, 0.14, 0.00, 1.00, 0.000, 0.0},
};

// Subject and sitting variation, kept small next to the expression templates.
constexpr double kSpread = 0.1;

struct Subject {
    double cx, cy, rx, ry, skin, eye_gap, eye_y, mouth_y;
};

Subject make_subject(std::uint64_t seed, int id, double spread) {
    Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(id) * 7919u + 1u);
    auto jitter = [&](double centre, double half) { return centre + spread * rng.uniform(-half, half); };
    Subject s;
    s.cx = jitter(0.5, 0.01);
    s.cy = jitter(0.52, 0.01);
    s.rx = 0.36 * jitter(1.0, 0.03);
    s.ry = 0.45 * jitter(1.0, 0.03);
    s.skin = jitter(0.73, 0.05);
    s.eye_gap = 0.15 * jitter(1.0, 0.04);
    s.eye_y = jitter(0.40, 0.01);
    s.mouth_y = jitter(0.72, 0.01);
    return s;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double t = std::clamp(((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
    return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

RealGrid render(const Subject& s, const Expression& e, int side) {
    RealGrid g(side, side, 0.25);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double u = (x + 0.5) / side, v = (y + 0.5) / side;
            const double fx = (u - s.cx) / s.rx, fy = (v - s.cy) / s.ry;
            if (fx * fx + fy * fy > 1.0) continue;
            double val = s.skin;
            // Eyes with a pupil.
            for (int k = -1; k <= 1; k += 2) {
                const double ex = s.cx + k * s.eye_gap;
                const double ax = (u - ex) / 0.065, ay = (v - s.eye_y) / (0.035 * e.aperture + 1e-3);
                if (ax * ax + ay * ay <= 1.0) val = 0.92;
                if (std::hypot(u - ex, v - s.eye_y) < 0.022 && std::abs(v - s.eye_y) < 0.035 * e.aperture) val = 0.1;
                // Brow: inner end toward the midline.
                const double by = s.eye_y - 0.075 - e.brow_raise;
                const double inner = s.cx + k * (s.eye_gap - 0.07), outer = s.cx + k * (s.eye_gap + 0.075);
                if (segment_distance(u, v, inner, by - 0.03 * e.brow_tilt, outer, by) < 0.013) val = 0.18;
            }
            // Nose.
            if (std::abs(u - s.cx) < 0.012 && v > s.eye_y + 0.05 && v < s.mouth_y - 0.09) val = 0.5;
            // Mouth: parabola with thickness growing with the opening.
            const double dx = (u - s.cx) / e.width;
            if (std::abs(dx) <= 1.0) {
                const double centre = s.mouth_y + 0.065 * e.bend * (dx * dx - 0.5);
                const double half = 0.012 + 0.035 * e.open * (1.0 - dx * dx);
                if (std::abs(v - centre) < half) val = e.open > 0.1 && std::abs(v - centre) < half - 0.01 ? 0.08 : 0.2;
            }
            g.at(x, y) = val;
        }
    return g;
}

// Mean over a (2r+1)^2 window with edge replication.
RealGrid box_blur(const RealGrid& in, int r) {
    RealGrid out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double sum = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) sum += in.clamped(x + dx, y + dy);
            out.at(x, y) = sum / ((2 * r + 1) * (2 * r + 1));
        }
    return out;
}

}  // namespace

void SynthParams::validate() const {
    require(per_class >= 1, "synth: per_class must be >= 1");
    require(classes >= 1 && classes <= 7, "synth: classes must lie in [1, 7]");
    require(noise >= 0.0 && noise <= 1.0, "synth: noise must lie in [0, 1]");
    require(side >= 32, "synth: side must be >= 32");
}

std::vector<SynthSample> synth_samples(const SynthParams& params) {
    params.validate();
    std::vector<SynthSample> out;
    Rng rng(params.seed);
    for (int c = 0; c < params.classes; ++c)
        for (int i = 0; i < params.per_class; ++i) {
            const Subject subj = make_subject(params.seed, i, kSpread);
            Expression e = kExpressions[c];
            // Each sitting varies a little in intensity.
            const double strength = 1.0 + kSpread * rng.uniform(-0.15, 0.15);
            e.bend *= strength;
            e.open *= strength;
            e.brow_raise *= strength;
            e.brow_tilt *= strength;
            e.aperture = 1.0 + (e.aperture - 1.0) * strength;
            RealGrid g = render(subj, e, params.side);
            if (params.noise > 0.0) {
                // White noise plus a blurred unit-variance field, so mean
                // filtering alone does not erase it.
                RealGrid white(params.side, params.side);
                for (double& v : white.data) v = rng.normal();
                const RealGrid coarse = box_blur(white, 3);
                for (std::size_t k = 0; k < g.data.size(); ++k)
                    g.data[k] += params.noise * (rng.normal() + 0.5 * 7.0 * coarse.data[k]);
            }
            out.push_back({GrayImage::from_clamped(g), c, i});
        }
    return out;
}

DatasetManifest synth_dataset(const SynthParams& params, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const std::vector<SynthSample> samples = synth_samples(params);
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "images", ec);
    if (ec) fail(ErrorKind::Io, "cannot create '" + out_dir + "': " + ec.message());
    DatasetManifest manifest;
    const auto& names = eval::default_class_names();
    manifest.class_names.assign(names.begin(), names.begin() + params.classes);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const SynthSample& s = samples[k];
        char name[64];
        std::snprintf(name, sizeof name, "images/%s_s%02d.pgm", manifest.class_names[s.label].c_str(), s.subject);
        write_pgm((fs::path(out_dir) / name).string(), s.image);
        manifest.entries.push_back({name, s.label, "s" + std::to_string(s.subject)});
    }
    write_manifest((fs::path(out_dir) / "manifest.csv").string(), manifest, "");
    return manifest;
}

}  // namespace fer::pipeline
