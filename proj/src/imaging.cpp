#include "fer/imaging.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace fer {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

void require_non_empty(const GrayImage& img, const char* op) {
    require(!img.empty(), std::string(op) + ": empty image");
}

// Separable Gaussian blur with edge replication.
RealGrid gaussian_blur(const RealGrid& in, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        total += kernel[i + radius];
    }
    for (double& k : kernel) k /= total;

    RealGrid tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * in.clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    RealGrid out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.clamped(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

std::vector<double> smooth_1d(const std::vector<double>& v, int radius) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) acc += v[clampi(i + j, 0, n - 1)];
        out[i] = acc / (2 * radius + 1);
    }
    return out;
}

}  // namespace

double RealGrid::clamped(int x, int y) const {
    return at(clampi(x, 0, width - 1), clampi(y, 0, height - 1));
}

int to_level(double v) {
    return clampi(static_cast<int>(std::lround(v * 255.0)), 0, 255);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width >= 0 && height >= 0, "GrayImage: negative dimensions");
    require(data_.size() == static_cast<std::size_t>(width) * height,
            "GrayImage: data length does not match width x height");
    for (double v : data_) {
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
                "GrayImage: intensities must be finite and within [0,1]");
    }
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, fill)) {}

GrayImage GrayImage::from_clamped(const RealGrid& grid) {
    std::vector<double> data(grid.data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        require(std::isfinite(grid.data[i]), "GrayImage: non-finite intensity");
        data[i] = std::clamp(grid.data[i], 0.0, 1.0);
    }
    return GrayImage(grid.width, grid.height, std::move(data));
}

GrayImage GrayImage::from_levels(int width, int height, std::span<const std::uint8_t> levels) {
    require(levels.size() == static_cast<std::size_t>(width) * height,
            "GrayImage: level buffer does not match width x height");
    std::vector<double> data(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) data[i] = levels[i] / 255.0;
    return GrayImage(width, height, std::move(data));
}

double GrayImage::clamped(int x, int y) const {
    return at(clampi(x, 0, width_ - 1), clampi(y, 0, height_ - 1));
}

int GrayImage::level(int x, int y) const { return to_level(at(x, y)); }

RealGrid GrayImage::to_grid() const {
    RealGrid g;
    g.width = width_;
    g.height = height_;
    g.data = data_;
    return g;
}

ReferenceLine::ReferenceLine(Point2D p0, Point2D p1) : p0_(p0), p1_(p1) {
    require(std::isfinite(p0.x) && std::isfinite(p0.y) && std::isfinite(p1.x) && std::isfinite(p1.y),
            "ReferenceLine: non-finite endpoint");
    require(p0.x != p1.x || p0.y != p1.y, "ReferenceLine: endpoints coincide");
}

double ReferenceLine::length() const { return std::hypot(p1_.x - p0_.x, p1_.y - p0_.y); }

double ReferenceLine::angle() const { return std::atan2(p1_.y - p0_.y, p1_.x - p0_.x); }

IntegralImage::IntegralImage(const RealGrid& grid)
    : width_(grid.width), height_(grid.height),
      table_(static_cast<std::size_t>(grid.width + 1) * (grid.height + 1), 0.0) {
    const int stride = width_ + 1;
    for (int y = 0; y < height_; ++y) {
        double row = 0.0;
        for (int x = 0; x < width_; ++x) {
            row += grid.at(x, y);
            table_[static_cast<std::size_t>(y + 1) * stride + x + 1] =
                table_[static_cast<std::size_t>(y) * stride + x + 1] + row;
        }
    }
}

IntegralImage::IntegralImage(const GrayImage& img) : IntegralImage(img.to_grid()) {}

GrayImage luminance(std::span<const std::uint8_t> rgb, int width, int height) {
    require(rgb.size() == static_cast<std::size_t>(width) * height * 3,
            "luminance: buffer does not match width x height x 3");
    std::vector<double> data(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        data[i] = std::clamp(v / 255.0, 0.0, 1.0);
    }
    return GrayImage(width, height, std::move(data));
}

GrayImage mean_filter(const GrayImage& img, int radius) {
    require_non_empty(img, "mean_filter");
    require(radius >= 1, "mean_filter: radius must be >= 1");
    const int w = img.width();
    const int h = img.height();
    const double norm = 1.0 / (2 * radius + 1);
    // Edge replication is separable, so a row pass followed by a column pass
    // equals the full (2r+1)^2 window mean.
    RealGrid rows(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += img.clamped(x + i, y);
            rows.at(x, y) = acc * norm;
        }
    }
    RealGrid out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += rows.clamped(x, y + i);
            out.at(x, y) = acc * norm;
        }
    }
    return GrayImage::from_clamped(out);
}

GrayImage hist_equalize(const GrayImage& img) {
    require_non_empty(img, "hist_equalize");
    std::array<std::size_t, 256> hist{};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) ++hist[img.level(x, y)];

    // out = ceil(256 * CDF) - 1: maps the top occupied level to 255 and keeps
    // an exactly uniform histogram uniform.
    std::array<int, 256> map{};
    std::size_t cumulative = 0;
    const auto total = static_cast<double>(img.size());
    for (int l = 0; l < 256; ++l) {
        cumulative += hist[l];
        const double scaled = 256.0 * static_cast<double>(cumulative) / total;
        map[l] = clampi(static_cast<int>(std::ceil(scaled - 1e-9)) - 1, 0, 255);
    }
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out[static_cast<std::size_t>(y) * img.width() + x] = map[img.level(x, y)] / 255.0;
    return GrayImage(img.width(), img.height(), std::move(out));
}

RealGrid homomorphic_filter_unscaled(const GrayImage& img, const HomomorphicParams& params) {
    require_non_empty(img, "homomorphic_filter");
    require(std::isfinite(params.low_gain) && std::isfinite(params.high_gain) &&
                std::isfinite(params.cutoff),
            "homomorphic_filter: non-finite parameters");
    require(params.cutoff > 0.0 && params.cutoff < 0.5, "homomorphic_filter: cutoff must lie in (0, 0.5)");
    require(params.low_gain < params.high_gain, "homomorphic_filter: low_gain must be < high_gain");

    constexpr double kOffset = 0.01;
    const int w = img.width();
    const int h = img.height();
    // Symmetric extension to 2w x 2h removes the wrap-around discontinuity.
    const int pw = 2 * w;
    const int ph = 2 * h;
    const int cw = pw / 2 + 1;

    std::vector<double> spatial(static_cast<std::size_t>(pw) * ph);
    auto* freq = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ph * cw));
    fftw_plan forward = fftw_plan_dft_r2c_2d(ph, pw, spatial.data(), freq, FFTW_ESTIMATE);
    fftw_plan backward = fftw_plan_dft_c2r_2d(ph, pw, freq, spatial.data(), FFTW_ESTIMATE);
    for (int y = 0; y < ph; ++y) {
        const int sy = y < h ? y : ph - 1 - y;
        for (int x = 0; x < pw; ++x) {
            const int sx = x < w ? x : pw - 1 - x;
            spatial[static_cast<std::size_t>(y) * pw + x] = std::log(img.at(sx, sy) + kOffset);
        }
    }
    fftw_execute(forward);

    const double c2 = 2.0 * params.cutoff * params.cutoff;
    const double span = params.high_gain - params.low_gain;
    const double norm = 1.0 / (static_cast<double>(pw) * ph);
    for (int v = 0; v < ph; ++v) {
        const double fv = (v <= ph / 2 ? v : v - ph) / static_cast<double>(ph);
        for (int u = 0; u < cw; ++u) {
            const double fu = u / static_cast<double>(pw);
            const double d2 = fu * fu + fv * fv;
            const double gain = (params.low_gain + span * (1.0 - std::exp(-d2 / c2))) * norm;
            fftw_complex& c = freq[static_cast<std::size_t>(v) * cw + u];
            c[0] *= gain;
            c[1] *= gain;
        }
    }
    fftw_execute(backward);
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(freq);

    RealGrid out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = std::exp(spatial[static_cast<std::size_t>(y) * pw + x]) - kOffset;
    return out;
}

GrayImage homomorphic_filter(const GrayImage& img, const HomomorphicParams& params) {
    RealGrid raw = homomorphic_filter_unscaled(img, params);
    const auto [lo, hi] = std::minmax_element(raw.data.begin(), raw.data.end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (range < 1e-12) {
        // No structure to stretch; keep the input level.
        return GrayImage(img.width(), img.height(), std::clamp(img.at(0, 0), 0.0, 1.0));
    }
    for (double& v : raw.data) v = (v - min) / range;
    return GrayImage::from_clamped(raw);
}

IntegralImage integral_image(const GrayImage& img) { return IntegralImage(img); }

std::vector<double> integral_projection(const GrayImage& img, Axis axis) {
    require_non_empty(img, "integral_projection");
    if (axis == Axis::Horizontal) {
        std::vector<double> rows(img.height(), 0.0);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) rows[y] += img.at(x, y);
        return rows;
    }
    std::vector<double> cols(img.width(), 0.0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) cols[x] += img.at(x, y);
    return cols;
}

RealGrid harris_response(const GrayImage& img, const HarrisParams& params) {
    require(img.width() >= 3 && img.height() >= 3, "harris_corners: image must be at least 3x3");
    const int w = img.width();
    const int h = img.height();
    RealGrid ixx(w, h), iyy(w, h), ixy(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (img.clamped(x + 1, y) - img.clamped(x - 1, y));
            const double gy = 0.5 * (img.clamped(x, y + 1) - img.clamped(x, y - 1));
            ixx.at(x, y) = gx * gx;
            iyy.at(x, y) = gy * gy;
            ixy.at(x, y) = gx * gy;
        }
    }
    const RealGrid sxx = gaussian_blur(ixx, params.window_sigma);
    const RealGrid syy = gaussian_blur(iyy, params.window_sigma);
    const RealGrid sxy = gaussian_blur(ixy, params.window_sigma);
    RealGrid r(w, h);
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        const double det = sxx.data[i] * syy.data[i] - sxy.data[i] * sxy.data[i];
        const double tr = sxx.data[i] + syy.data[i];
        r.data[i] = det - params.k * tr * tr;
    }
    return r;
}

std::vector<Point2D> harris_corners(const GrayImage& img, const HarrisParams& params) {
    const RealGrid r = harris_response(img, params);
    const double peak = *std::max_element(r.data.begin(), r.data.end());
    std::vector<Point2D> corners;
    if (!(peak > 0.0)) return corners;
    const double floor = params.threshold * peak;
    const int rad = params.nms_radius;
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            const double v = r.at(x, y);
            if (v <= floor || v <= 0.0) continue;
            bool is_max = true;
            for (int dy = -rad; dy <= rad && is_max; ++dy) {
                for (int dx = -rad; dx <= rad; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int qx = x + dx;
                    const int qy = y + dy;
                    if (qx < 0 || qy < 0 || qx >= r.width || qy >= r.height) continue;
                    const double q = r.at(qx, qy);
                    // Plateaus keep the first pixel in raster order.
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (q > v || (earlier && q == v)) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            Point2D p{static_cast<double>(x), static_cast<double>(y)};
            if (x > 0 && x < r.width - 1) {
                const double l = r.at(x - 1, y), c = v, rr = r.at(x + 1, y);
                const double den = l - 2.0 * c + rr;
                if (den < 0.0) p.x += std::clamp(0.5 * (l - rr) / den, -0.5, 0.5);
            }
            if (y > 0 && y < r.height - 1) {
                const double t = r.at(x, y - 1), c = v, b = r.at(x, y + 1);
                const double den = t - 2.0 * c + b;
                if (den < 0.0) p.y += std::clamp(0.5 * (t - b) / den, -0.5, 0.5);
            }
            corners.push_back(p);
        }
    }
    return corners;
}

ReferenceLine locate_reference_line(const GrayImage& face, const HarrisParams& params) {
    if (face.width() < 8 || face.height() < 8) {
        fail(ErrorKind::NormalizationFailure, "locate_reference_line: face crop too small");
    }
    const int h = face.height();
    std::vector<double> proj = integral_projection(face, Axis::Horizontal);
    for (double& v : proj) v /= face.width();
    const std::vector<double> smooth = smooth_1d(proj, std::max(1, h / 40));

    const int start = static_cast<int>(std::ceil(0.15 * h));
    const int stop = h - std::max(1, h / 10);
    const auto [lo_it, hi_it] = std::minmax_element(smooth.begin() + start, smooth.begin() + stop);
    const double range = *hi_it - *lo_it;
    if (range < 1e-6) {
        fail(ErrorKind::NormalizationFailure, "locate_reference_line: flat projection, no valley");
    }

    int valley = -1;
    double prominence = 0.0;
    for (int i = start + 1; i < stop - 1; ++i) {
        if (!(smooth[i] <= smooth[i - 1] && smooth[i] < smooth[i + 1])) continue;
        const double left = *std::max_element(smooth.begin() + start, smooth.begin() + i + 1);
        const double right = *std::max_element(smooth.begin() + i, smooth.begin() + stop);
        const double prom = std::min(left, right) - smooth[i];
        if (prom >= 0.2 * range) {
            valley = i;
            prominence = prom;
            break;
        }
    }
    if (valley < 0) {
        fail(ErrorKind::NormalizationFailure, "locate_reference_line: no significant projection valley");
    }

    const double level = smooth[valley] + 0.5 * prominence;
    int top = valley;
    int bottom = valley;
    while (top > 0 && smooth[top - 1] <= level) --top;
    while (bottom < h - 1 && smooth[bottom + 1] <= level) ++bottom;
    const double band_top = top - 2.0;
    const double band_bottom = bottom + 2.0;

    std::vector<Point2D> in_band;
    for (const Point2D& p : harris_corners(face, params)) {
        if (p.y >= band_top && p.y <= band_bottom) in_band.push_back(p);
    }
    if (in_band.size() < 2) {
        fail(ErrorKind::NormalizationFailure, "locate_reference_line: fewer than 2 corners in the eye band");
    }
    const auto [left, right] = std::minmax_element(
        in_band.begin(), in_band.end(), [](const Point2D& a, const Point2D& b) { return a.x < b.x; });
    if (right->x - left->x < 2.0) {
        fail(ErrorKind::NormalizationFailure, "locate_reference_line: eye-band corners collapse");
    }
    return ReferenceLine(*left, *right);
}

double sample_bilinear(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double a = img.clamped(x0, y0);
    const double b = img.clamped(x0 + 1, y0);
    const double c = img.clamped(x0, y0 + 1);
    const double d = img.clamped(x0 + 1, y0 + 1);
    return (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
}

GrayImage geometric_normalize(const GrayImage& img, const ReferenceLine& line, const CanonicalFrame& frame) {
    require_non_empty(img, "geometric_normalize");
    require(frame.side >= 2, "geometric_normalize: target side must be >= 2");
    if (line.length() < 2.0) {
        fail(ErrorKind::NormalizationFailure, "geometric_normalize: reference line shorter than 2 px");
    }
    const auto inside = [&](Point2D p) {
        return p.x >= 0 && p.y >= 0 && p.x <= img.width() - 1 && p.y <= img.height() - 1;
    };
    require(inside(line.p0()) && inside(line.p1()), "geometric_normalize: reference line outside image");

    const double side = frame.side;
    const Point2D q0{frame.left_x * side, frame.line_y * side};
    const double canonical_len = (frame.right_x - frame.left_x) * side;
    // Inverse map: output q -> input p = p0 + (len/canon) * R(theta) * (q - q0).
    const double scale = line.length() / canonical_len;
    const double theta = line.angle();
    const double c = std::cos(theta) * scale;
    const double s = std::sin(theta) * scale;
    const Point2D p0 = line.p0();

    std::vector<double> out(static_cast<std::size_t>(frame.side) * frame.side);
    for (int v = 0; v < frame.side; ++v) {
        for (int u = 0; u < frame.side; ++u) {
            const double dx = u - q0.x;
            const double dy = v - q0.y;
            const double x = p0.x + c * dx - s * dy;
            const double y = p0.y + s * dx + c * dy;
            out[static_cast<std::size_t>(v) * frame.side + u] = std::clamp(sample_bilinear(img, x, y), 0.0, 1.0);
        }
    }
    return GrayImage(frame.side, frame.side, std::move(out));
}

GrayImage resize(const GrayImage& img, int width, int height) {
    require_non_empty(img, "resize");
    require(width >= 1 && height >= 1, "resize: target must be positive");
    if (width == img.width() && height == img.height()) return img;
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;
    const bool shrink = sx > 1.0 || sy > 1.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v;
            if (shrink) {
                // Area average keeps downscaled detector windows alias-free.
                const double x0 = x * sx, x1 = (x + 1) * sx;
                const double y0 = y * sy, y1 = (y + 1) * sy;
                double acc = 0.0, wsum = 0.0;
                for (int yy = static_cast<int>(std::floor(y0)); yy < static_cast<int>(std::ceil(y1)); ++yy) {
                    const double wy = std::min<double>(yy + 1, y1) - std::max<double>(yy, y0);
                    for (int xx = static_cast<int>(std::floor(x0)); xx < static_cast<int>(std::ceil(x1)); ++xx) {
                        const double wx = std::min<double>(xx + 1, x1) - std::max<double>(xx, x0);
                        acc += wx * wy * img.clamped(xx, yy);
                        wsum += wx * wy;
                    }
                }
                v = acc / wsum;
            } else {
                v = sample_bilinear(img, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
            }
            out[static_cast<std::size_t>(y) * width + x] = std::clamp(v, 0.0, 1.0);
        }
    }
    return GrayImage(width, height, std::move(out));
}

GrayImage crop(const GrayImage& img, int x, int y, int width, int height) {
    require(x >= 0 && y >= 0 && width >= 1 && height >= 1 && x + width <= img.width() &&
                y + height <= img.height(),
            "crop: rectangle outside image");
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) out[static_cast<std::size_t>(r) * width + c] = img.at(x + c, y + r);
    return GrayImage(width, height, std::move(out));
}

}  // namespace fer
