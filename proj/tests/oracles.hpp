#pragma once
// Independent reference implementations for tests. Deliberately naive.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fer/imaging.hpp"
#include "fer/rng.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Cyclic Jacobi on a symmetric matrix. Returns ascending eigenvalues with
// matching eigenvector columns.
inline std::pair<Vec, Mat> jacobi_eigen(Mat a, int sweeps = 100) {
    const int n = static_cast<int>(a.rows());
    Mat v = Mat::Identity(n, n);
    for (int s = 0; s < sweeps; ++s) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
    Vec vals(n);
    Mat vecs(n, n);
    for (int i = 0; i < n; ++i) {
        vals(i) = a(idx[i], idx[i]);
        vecs.col(i) = v.col(idx[i]);
    }
    return {vals, vecs};
}

// L y = lambda D y for diagonal positive D via D^-1/2 L D^-1/2.
inline Vec generalized_diag_eigenvalues(const Mat& l, const Vec& d) {
    const Vec s = d.cwiseSqrt().cwiseInverse();
    return jacobi_eigen(s.asDiagonal() * l * s.asDiagonal()).first;
}

inline double brute_sum(const fer::GrayImage& img, int x0, int y0, int x1, int y1) {
    double s = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s += img.at(x, y);
    return s;
}

inline fer::GrayImage random_image(int w, int h, fer::Rng& rng) {
    std::vector<double> d(static_cast<std::size_t>(w) * h);
    for (double& v : d) v = rng.uniform();
    return fer::GrayImage(w, h, std::move(d));
}

// Quantized random image, so level() is exact.
inline fer::GrayImage random_levels(int w, int h, fer::Rng& rng) {
    std::vector<std::uint8_t> d(static_cast<std::size_t>(w) * h);
    for (auto& v : d) v = static_cast<std::uint8_t>(rng.index(256));
    return fer::GrayImage::from_levels(w, h, d);
}

// Between-class over within-class scatter traces.
inline double fisher_ratio(const Mat& x, const std::vector<int>& labels) {
    const Vec mu = x.colwise().mean().transpose();
    int classes = 0;
    for (int l : labels) classes = std::max(classes, l + 1);
    double sb = 0.0, sw = 0.0;
    for (int c = 0; c < classes; ++c) {
        Vec mc = Vec::Zero(x.cols());
        int nc = 0;
        for (int i = 0; i < x.rows(); ++i)
            if (labels[i] == c) {
                mc += x.row(i).transpose();
                ++nc;
            }
        if (nc == 0) continue;
        mc /= nc;
        sb += nc * (mc - mu).squaredNorm();
        for (int i = 0; i < x.rows(); ++i)
            if (labels[i] == c) sw += (x.row(i).transpose() - mc).squaredNorm();
    }
    return sb / sw;
}

// 3-class Gaussians in `base` dims, lifted linearly to `lifted` dims.
struct Lifted {
    Mat x;
    std::vector<int> labels;
};

inline Lifted gaussian_lift(int per_class, int base, int lifted, std::uint64_t seed, double spread = 1.0,
                            int classes = 3) {
    fer::Rng rng(seed);
    Mat centers(classes, base);
    for (int c = 0; c < classes; ++c)
        for (int j = 0; j < base; ++j) centers(c, j) = 3.0 * rng.normal();
    Mat lift(base, lifted);
    for (int i = 0; i < base; ++i)
        for (int j = 0; j < lifted; ++j) lift(i, j) = rng.normal() / std::sqrt(static_cast<double>(base));
    Lifted out;
    out.x.resize(classes * per_class, lifted);
    for (int c = 0; c < classes; ++c)
        for (int k = 0; k < per_class; ++k) {
            Vec p(base);
            for (int j = 0; j < base; ++j) p(j) = centers(c, j) + spread * rng.normal();
            out.x.row(c * per_class + k) = (p.transpose() * lift);
            out.labels.push_back(c);
        }
    return out;
}

}  // namespace oracle
