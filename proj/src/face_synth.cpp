// Stand-in detector corpus: schematic face patterns against structured
// background clutter.
#include <algorithm>
#include <cmath>

#include "fer/facedetect.hpp"

namespace fer::detect {

GrayImage structured_noise(int width, int height, Rng& rng) {
    require(width >= 1 && height >= 1, "structured_noise: empty size");
    RealGrid g(width, height);
    for (double& v : g.data) v = rng.uniform();
    GrayImage smooth = mean_filter(GrayImage::from_clamped(g), 2);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) g.at(x, y) = 0.5 + 2.0 * (smooth.at(x, y) - 0.5);

    const int area = width * height;
    const int rects = std::max(2, area / 600);
    for (int r = 0; r < rects; ++r) {
        const int w = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, width / 4))));
        const int h = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, height / 4))));
        const int x0 = static_cast<int>(rng.index(static_cast<std::size_t>(width)));
        const int y0 = static_cast<int>(rng.index(static_cast<std::size_t>(height)));
        const double delta = rng.uniform(-0.35, 0.35);
        for (int y = y0; y < std::min(height, y0 + h); ++y)
            for (int x = x0; x < std::min(width, x0 + w); ++x) g.at(x, y) += delta;
    }
    const int blobs = std::max(1, area / 1500);
    for (int b = 0; b < blobs; ++b) {
        const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
        const double rx = rng.uniform(2.0, std::max(3.0, width / 6.0));
        const double ry = rng.uniform(2.0, std::max(3.0, height / 6.0));
        const double delta = rng.uniform(-0.3, 0.3);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
                if (dx * dx + dy * dy <= 1.0) g.at(x, y) += delta;
            }
    }
    return GrayImage::from_clamped(g);
}

void plant_face(RealGrid& canvas, int x, int y, int side, Rng& rng) {
    require(side >= 4, "plant_face: face too small");
    const double cx = 0.5 + rng.uniform(-0.03, 0.03);
    const double cy = 0.5 + rng.uniform(-0.03, 0.03);
    const double scale = rng.uniform(0.95, 1.05);
    const double skin = rng.uniform(0.72, 0.9);
    const double eyes = rng.uniform(0.08, 0.28);
    const double mouth = rng.uniform(0.12, 0.32);
    const double eye_y = rng.uniform(0.34, 0.40);
    const double mouth_y = rng.uniform(0.70, 0.76);
    for (int py = std::max(0, y); py < std::min(canvas.height, y + side); ++py)
        for (int px = std::max(0, x); px < std::min(canvas.width, x + side); ++px) {
            const double u = (px - x + 0.5) / side, v = (py - y + 0.5) / side;
            const double du = (u - cx) / (0.42 * scale), dv = (v - cy) / (0.48 * scale);
            if (du * du + dv * dv > 1.0) continue;
            double val = skin;
            if (std::abs(v - eye_y) < 0.06 * scale && std::abs(u - cx) < 0.30 * scale) val = eyes;
            if (std::abs(v - mouth_y) < 0.04 * scale && std::abs(u - cx) < 0.16 * scale) val = mouth;
            canvas.at(px, py) = std::clamp(val + rng.uniform(-0.03, 0.03), 0.0, 1.0);
        }
}

GrayImage face_patch(int side, Rng& rng) {
    // Rendered at a random size with a small offset and scale error, then
    // area-resampled, which is what misaligned scaled windows see.
    const int rendered = side + static_cast<int>(rng.index(static_cast<std::size_t>(2 * side)));
    RealGrid canvas = structured_noise(rendered, rendered, rng).to_grid();
    const int face = static_cast<int>(std::lround(rendered * rng.uniform(0.9, 1.1)));
    const int slack = static_cast<int>(std::lround(0.06 * rendered));
    const int x = (rendered - face) / 2 + static_cast<int>(std::lround(rng.uniform(-slack, slack)));
    const int y = (rendered - face) / 2 + static_cast<int>(std::lround(rng.uniform(-slack, slack)));
    plant_face(canvas, x, y, face, rng);
    return resize(GrayImage::from_clamped(canvas), side, side);
}

DetectorCorpus make_detector_corpus(int positives, int negatives, std::uint64_t seed, int base, int mining_images) {
    require(positives >= 1 && negatives >= 1, "detector corpus: counts must be >= 1");
    require(mining_images >= 0, "detector corpus: mining image count must be >= 0");
    Rng rng(seed);
    DetectorCorpus corpus;
    for (int i = 0; i < positives; ++i) corpus.positives.push_back(face_patch(base, rng));

    std::vector<GrayImage> backgrounds;
    for (int i = 0; i < 8; ++i) backgrounds.push_back(structured_noise(160, 160, rng));
    for (int i = 0; i < negatives; ++i) {
        const GrayImage& bg = backgrounds[rng.index(backgrounds.size())];
        const int side = base + static_cast<int>(rng.index(static_cast<std::size_t>(bg.width() / 2 - base + 1)));
        const int x = static_cast<int>(rng.index(static_cast<std::size_t>(bg.width() - side + 1)));
        const int y = static_cast<int>(rng.index(static_cast<std::size_t>(bg.height() - side + 1)));
        corpus.negatives.push_back(resize(crop(bg, x, y, side, side), base, base));
    }

    // Half the mining scenes carry a planted face whose neighbourhood is
    // excluded, so partial-face windows become hard negatives.
    for (int i = 0; i < mining_images; ++i) {
        RealGrid canvas = structured_noise(200, 200, rng).to_grid();
        std::vector<DetectionBox> excluded;
        if (i % 2 == 1) {
            const int side = 32 + static_cast<int>(rng.index(48));
            const int x = static_cast<int>(rng.index(static_cast<std::size_t>(200 - side + 1)));
            const int y = static_cast<int>(rng.index(static_cast<std::size_t>(200 - side + 1)));
            plant_face(canvas, x, y, side, rng);
            excluded.push_back({x, y, side, 0.0});
        }
        corpus.mining.images.push_back(GrayImage::from_clamped(canvas));
        corpus.mining.excluded.push_back(std::move(excluded));
    }
    return corpus;
}

PlantedScene planted_scene(int side, int face_side, std::uint64_t seed) {
    require(face_side >= 4 && face_side <= side, "planted_scene: face must fit the scene");
    Rng rng(seed);
    RealGrid canvas = structured_noise(side, side, rng).to_grid();
    const int x = static_cast<int>(rng.index(static_cast<std::size_t>(side - face_side + 1)));
    const int y = static_cast<int>(rng.index(static_cast<std::size_t>(side - face_side + 1)));
    plant_face(canvas, x, y, face_side, rng);
    return {GrayImage::from_clamped(canvas), {x, y, face_side, 0.0}};
}

}  // namespace fer::detect
