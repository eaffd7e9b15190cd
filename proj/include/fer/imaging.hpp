#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fer/error.hpp"

namespace fer {

/// Row-major grid of unconstrained reals (responses, log images, magnitudes).
struct RealGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    RealGrid() = default;
    RealGrid(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    bool empty() const { return data.empty(); }
    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    /// Edge-replicated read.
    double clamped(int x, int y) const;
};

/// Grayscale image with intensities in [0, 1]. Immutable once constructed.
class GrayImage {
public:
    GrayImage() = default;
    /// Throws InvalidInput when data length != w*h or any value is non-finite
    /// or outside [0, 1].
    GrayImage(int width, int height, std::vector<double> data);
    GrayImage(int width, int height, double fill);
    /// Clamps every value into [0, 1]; non-finite values are rejected.
    static GrayImage from_clamped(const RealGrid& grid);
    static GrayImage from_levels(int width, int height, std::span<const std::uint8_t> levels);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }
    std::span<const double> data() const { return data_; }

    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double clamped(int x, int y) const;
    /// Quantized 0..255 view used by histogram and binary-pattern operators.
    int level(int x, int y) const;

    RealGrid to_grid() const;
    bool operator==(const GrayImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

int to_level(double v);

struct Point2D {
    double x = 0.0;  // column
    double y = 0.0;  // row
};

class ReferenceLine {
public:
    ReferenceLine(Point2D p0, Point2D p1);
    Point2D p0() const { return p0_; }
    Point2D p1() const { return p1_; }
    double length() const;
    /// Angle of p0->p1 against the +x axis, radians (image y grows downward).
    double angle() const;

private:
    Point2D p0_;
    Point2D p1_;
};

/// (w+1) x (h+1) table; entry (row i, col j) is the sum of pixels with
/// row < i and col < j.
class IntegralImage {
public:
    IntegralImage() = default;
    explicit IntegralImage(const RealGrid& grid);
    explicit IntegralImage(const GrayImage& img);

    int width() const { return width_; }
    int height() const { return height_; }
    double entry(int row, int col) const {
        return table_[static_cast<std::size_t>(row) * (width_ + 1) + col];
    }
    /// Sum over columns [x0, x1) and rows [y0, y1).
    double rect_sum(int x0, int y0, int x1, int y1) const {
        return entry(y1, x1) - entry(y0, x1) - entry(y1, x0) + entry(y0, x0);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> table_;
};

enum class Axis { Horizontal, Vertical };

struct HomomorphicParams {
    double low_gain = 0.5;
    double high_gain = 1.5;
    double cutoff = 0.05;
};

struct HarrisParams {
    double window_sigma = 1.5;
    double k = 0.04;
    /// Fraction of the maximum response a local maximum must exceed.
    double threshold = 0.01;
    int nms_radius = 3;
};

/// Canonical placement of the reference line inside the normalized frame.
struct CanonicalFrame {
    int side = 120;
    double left_x = 0.2;
    double right_x = 0.8;
    double line_y = 0.35;
};

GrayImage luminance(std::span<const std::uint8_t> rgb, int width, int height);

GrayImage mean_filter(const GrayImage& img, int radius);
GrayImage hist_equalize(const GrayImage& img);

/// Pre-rescale output in intensity units (exp of the filtered log image).
RealGrid homomorphic_filter_unscaled(const GrayImage& img, const HomomorphicParams& params);
GrayImage homomorphic_filter(const GrayImage& img, const HomomorphicParams& params);

IntegralImage integral_image(const GrayImage& img);
std::vector<double> integral_projection(const GrayImage& img, Axis axis);

RealGrid harris_response(const GrayImage& img, const HarrisParams& params);
std::vector<Point2D> harris_corners(const GrayImage& img, const HarrisParams& params = {});

ReferenceLine locate_reference_line(const GrayImage& face, const HarrisParams& params = {});
GrayImage geometric_normalize(const GrayImage& img, const ReferenceLine& line,
                              const CanonicalFrame& frame = {});

/// Bilinear resize to side x side (for pre-aligned crops).
GrayImage resize(const GrayImage& img, int width, int height);
GrayImage crop(const GrayImage& img, int x, int y, int width, int height);
double sample_bilinear(const GrayImage& img, double x, double y);

}  // namespace fer
