#pragma once
// Fixtures shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fer/imaging.hpp"
#include "fer/manifold.hpp"
#include "fer/rng.hpp"

namespace fixture {

inline fer::GrayImage square_image(int side, int lo, int hi) {
    std::vector<double> d(static_cast<std::size_t>(side) * side, 0.0);
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x) d[static_cast<std::size_t>(y) * side + x] = 1.0;
    return fer::GrayImage(side, side, d);
}

inline double nearest(const std::vector<fer::Point2D>& pts, fer::Point2D q) {
    double best = 1e9;
    for (const auto& p : pts) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    return best;
}

// Rotates img by `deg` about (cx, cy); output pixel q samples R^-1 (q - c) + c.
inline fer::GrayImage rotate(const fer::GrayImage& img, double deg, double cx, double cy) {
    const double t = deg * std::numbers::pi / 180.0, c = std::cos(t), s = std::sin(t);
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double dx = x - cx, dy = y - cy;
            out[static_cast<std::size_t>(y) * img.width() + x] =
                std::clamp(fer::sample_bilinear(img, cx + c * dx + s * dy, cy - s * dx + c * dy), 0.0, 1.0);
        }
    return fer::GrayImage(img.width(), img.height(), out);
}

inline fer::Point2D rotate_point(fer::Point2D p, double deg, double cx, double cy) {
    const double t = deg * std::numbers::pi / 180.0, c = std::cos(t), s = std::sin(t);
    return {cx + c * (p.x - cx) - s * (p.y - cy), cy + s * (p.x - cx) + c * (p.y - cy)};
}

// Random spanning tree plus extra edges, random positive weights.
inline fer::manifold::WeightMatrix random_connected(int n, fer::Rng& rng) {
    fer::manifold::Matrix w = fer::manifold::Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const int j = static_cast<int>(rng.index(i));
        w(i, j) = w(j, i) = rng.uniform(0.1, 1.0);
    }
    const int extra = static_cast<int>(rng.index(2 * n));
    for (int e = 0; e < extra; ++e) {
        const int i = static_cast<int>(rng.index(n)), j = static_cast<int>(rng.index(n));
        if (i != j) w(i, j) = w(j, i) = rng.uniform(0.1, 1.0);
    }
    return fer::manifold::WeightMatrix(w);
}

inline fer::manifold::Matrix laplacian(const fer::manifold::Matrix& w) {
    fer::manifold::Matrix l = -w;
    l.diagonal() += w.rowwise().sum();
    return l;
}

// Signs may flip per column; compare up to that.
inline double column_sign_distance(const fer::manifold::Matrix& a, const fer::manifold::Matrix& b) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        worst = std::max(worst, std::min((a.col(c) - b.col(c)).cwiseAbs().maxCoeff(),
                                         (a.col(c) + b.col(c)).cwiseAbs().maxCoeff()));
    return worst;
}

inline int oracle_code(const fer::GrayImage& img, int x, int y, bool cbp, double c) {
    int code = 0;
    const int ic = img.level(x, y);
    const int dxs[8] = {1, 1, 0, -1, -1, -1, 0, 1}, dys[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    for (int n = 0; n < 8; ++n) {
        const int d = img.level(x + dxs[n], y + dys[n]) - ic;
        if (cbp ? std::abs(d) > c : d > 0) code |= 1 << n;
    }
    return code;
}

inline int code_at(const fer::GrayImage& codes, int x, int y) { return static_cast<int>(std::lround(codes.at(x, y) * 255)); }

}  // namespace fixture
