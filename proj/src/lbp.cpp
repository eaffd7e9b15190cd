#include "fer/lbp.hpp"

#include <cmath>
#include <string>

namespace fer::lbp {

namespace {

template <class Bit>
int encode(const Patch& patch, Bit bit) {
    const double centre = patch[1][1];
    int code = 0;
    for (int n = 0; n < 8; ++n) {
        const auto [dx, dy] = kNeighbourOffsets[n];
        if (bit(patch[1 + dy][1 + dx] - centre)) code |= 1 << n;
    }
    return code;
}

}  // namespace

int lbp_code(const Patch& patch) {
    return encode(patch, [](double d) { return d > 0.0; });
}

int cbp_code(const Patch& patch, const CbpParams& params) {
    return encode(patch, [c = params.threshold](double d) { return std::abs(d) > c; });
}

GrayImage code_image(const GrayImage& img, Mode mode, const CbpParams& params) {
    require(img.width() >= 3 && img.height() >= 3, "code_image: image must be at least 3x3");
    require(params.threshold >= 0.0 && std::isfinite(params.threshold), "code_image: CBP threshold must be >= 0");
    const int w = img.width();
    const int h = img.height();
    std::vector<int> levels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) levels[static_cast<std::size_t>(y) * w + x] = img.level(x, y);
    const auto level = [&](int x, int y) {
        x = x < 0 ? 0 : (x >= w ? w - 1 : x);
        y = y < 0 ? 0 : (y >= h ? h - 1 : y);
        return static_cast<double>(levels[static_cast<std::size_t>(y) * w + x]);
    };

    std::vector<double> out(levels.size());
    Patch patch{};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) patch[r][c] = level(x + c - 1, y + r - 1);
            const int code = mode == Mode::Lbp ? lbp_code(patch) : cbp_code(patch, params);
            out[static_cast<std::size_t>(y) * w + x] = code / 255.0;
        }
    }
    return GrayImage(w, h, std::move(out));
}

std::vector<double> extract_lbp_features(const GrayImage& img, Mode mode, const CbpParams& params,
                                         int face_side) {
    require(img.width() == face_side && img.height() == face_side,
            "extract_lbp_features: expected a " + std::to_string(face_side) + "x" + std::to_string(face_side) +
                " normalized face");
    const GrayImage codes = code_image(img, mode, params);
    return {codes.data().begin(), codes.data().end()};
}

}  // namespace fer::lbp
