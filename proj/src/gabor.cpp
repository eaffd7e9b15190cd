#include "fer/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fer::gabor {

void GaborParams::validate() const {
    require(!orientations.empty() && !scales.empty(), "gabor: orientation and scale sets must be non-empty");
    for (int u : orientations) require(u >= 0 && u <= 7, "gabor: orientation index outside 0..7");
    for (int v : scales) require(v >= 0 && v <= 4, "gabor: scale index outside 0..4");
    const auto distinct = [](std::vector<int> s) {
        std::sort(s.begin(), s.end());
        return std::adjacent_find(s.begin(), s.end()) == s.end();
    };
    require(distinct(orientations) && distinct(scales), "gabor: orientation and scale indices must be distinct");
    require(template_side >= 3 && template_side % 2 == 1, "gabor: template side must be odd and >= 3");
    require(sigma > 0 && k_max > 0 && lambda > 0 && std::isfinite(sigma) && std::isfinite(k_max) &&
                std::isfinite(lambda),
            "gabor: sigma, k_max and lambda must be positive and finite");
    require(face_side > 0 && downsample > 0 && face_side % downsample == 0,
            "gabor: downsample side must divide the face side");
}

Kernel make_kernel(int u, int v, const GaborParams& params) {
    require(u >= 0 && u <= 7 && v >= 0 && v <= 4, "make_kernel: (u, v) outside the allowed range");
    require(params.template_side >= 3 && params.template_side % 2 == 1, "make_kernel: template side must be odd");
    const double kv = params.k_max / std::pow(params.lambda, v);
    const double phi = std::numbers::pi * u / 8.0;
    const double kx = kv * std::cos(phi);
    const double ky = kv * std::sin(phi);
    const double k2 = kv * kv;
    const double s2 = params.sigma * params.sigma;
    const double dc = std::exp(-s2 / 2.0);

    Kernel kernel;
    kernel.u = u;
    kernel.v = v;
    kernel.side = params.template_side;
    kernel.taps.resize(static_cast<std::size_t>(kernel.side) * kernel.side);
    const int r = kernel.radius();
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double z2 = dx * dx + dy * dy;
            const double envelope = (k2 / s2) * std::exp(-k2 * z2 / s2);
            const double phase = kx * dx + ky * dy;
            kernel.taps[static_cast<std::size_t>(dy + r) * kernel.side + dx + r] =
                envelope * Complex(std::cos(phase) - dc, std::sin(phase));
        }
    }
    return kernel;
}

GaborBank make_bank(const GaborParams& params) {
    params.validate();
    GaborBank bank;
    for (int v : params.scales)
        for (int u : params.orientations) bank.kernels.push_back(make_kernel(u, v, params));
    return bank;
}

RealGrid convolve_modulus(const RealGrid& img, const Kernel& kernel) {
    require(!img.empty(), "convolve: empty image");
    const int r = kernel.radius();
    const int w = img.width;
    const int h = img.height;
    // Replicated padding so the inner loop is branch-free.
    const int pw = w + 2 * r;
    std::vector<double> padded(static_cast<std::size_t>(pw) * (h + 2 * r));
    for (int y = -r; y < h + r; ++y)
        for (int x = -r; x < w + r; ++x)
            padded[static_cast<std::size_t>(y + r) * pw + x + r] = img.clamped(x, y);

    std::vector<double> re(kernel.taps.size()), im(kernel.taps.size());
    for (std::size_t i = 0; i < kernel.taps.size(); ++i) {
        re[i] = kernel.taps[i].real();
        im[i] = kernel.taps[i].imag();
    }

    RealGrid out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // G(p) = sum_q I(p - q) psi(q)
            double sr = 0.0, si = 0.0;
            for (int qy = -r; qy <= r; ++qy) {
                const double* row = &padded[static_cast<std::size_t>(y - qy + r) * pw + x + r];
                const std::size_t base = static_cast<std::size_t>(qy + r) * kernel.side + r;
                for (int qx = -r; qx <= r; ++qx) {
                    const double p = row[-qx];
                    sr += p * re[base + qx];
                    si += p * im[base + qx];
                }
            }
            out.at(x, y) = std::hypot(sr, si);
        }
    }
    return out;
}

std::vector<RealGrid> convolve_bank(const GrayImage& img, const GaborBank& bank, int face_side) {
    require(img.width() == face_side && img.height() == face_side,
            "convolve_bank: expected a " + std::to_string(face_side) + "x" + std::to_string(face_side) +
                " normalized face");
    const RealGrid grid = img.to_grid();
    std::vector<RealGrid> out;
    out.reserve(bank.kernels.size());
    for (const Kernel& k : bank.kernels) out.push_back(convolve_modulus(grid, k));
    return out;
}

RealGrid downsample_normalize(const RealGrid& grid, int out_side) {
    require(out_side > 0 && grid.width > 0 && grid.height > 0, "downsample_normalize: empty input");
    require(grid.width % out_side == 0 && grid.height % out_side == 0,
            "downsample_normalize: output side must divide the grid side");
    const int bx = grid.width / out_side;
    const int by = grid.height / out_side;
    RealGrid out(out_side, out_side);
    for (int oy = 0; oy < out_side; ++oy) {
        for (int ox = 0; ox < out_side; ++ox) {
            double acc = 0.0;
            for (int y = 0; y < by; ++y)
                for (int x = 0; x < bx; ++x) acc += grid.at(ox * bx + x, oy * by + y);
            out.at(ox, oy) = acc / (bx * by);
        }
    }
    const double n = static_cast<double>(out.data.size());
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : out.data) var += (v - mean) * (v - mean);
    var /= n;
    const double scale = std::max(std::abs(mean), 1.0);
    if (var <= 1e-24 * scale * scale) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    for (double& v : out.data) v = (v - mean) * inv_sd;
    return out;
}

std::vector<double> extract_gabor_features(const GrayImage& img, const GaborParams& params,
                                           const GaborBank& bank) {
    params.validate();
    std::vector<double> features;
    features.reserve(params.feature_dimension());
    for (const RealGrid& g : convolve_bank(img, bank, params.face_side)) {
        const RealGrid d = downsample_normalize(g, params.downsample);
        features.insert(features.end(), d.data.begin(), d.data.end());
    }
    return features;
}

std::vector<double> extract_gabor_features(const GrayImage& img, const GaborParams& params) {
    return extract_gabor_features(img, params, make_bank(params));
}

}  // namespace fer::gabor
