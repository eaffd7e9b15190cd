#pragma once

#include <complex>
#include <vector>

#include "fer/imaging.hpp"

namespace fer::gabor {

using Complex = std::complex<double>;

struct GaborParams {
    std::vector<int> orientations{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> scales{0, 2};
    double sigma = 3.14159265358979323846;
    double k_max = 3.14159265358979323846 / 2.0;
    double lambda = 1.41421356237309504880;
    int template_side = 21;
    int downsample = 30;
    int face_side = 120;

    /// Throws InvalidInput when any invariant is violated.
    void validate() const;
    std::size_t feature_dimension() const {
        return orientations.size() * scales.size() * static_cast<std::size_t>(downsample) * downsample;
    }
};

/// Square complex kernel sampled at integer offsets around the centre.
struct Kernel {
    int u = 0;
    int v = 0;
    int side = 0;
    std::vector<Complex> taps;  // row-major, taps[(dy + r) * side + (dx + r)]

    int radius() const { return side / 2; }
    Complex at(int dx, int dy) const {
        return taps[static_cast<std::size_t>(dy + radius()) * side + dx + radius()];
    }
};

struct GaborBank {
    std::vector<Kernel> kernels;  // scales ascending, then orientations ascending
};

Kernel make_kernel(int u, int v, const GaborParams& params);
GaborBank make_bank(const GaborParams& params);

/// Modulus of the edge-replicated convolution of any grid with one kernel.
RealGrid convolve_modulus(const RealGrid& img, const Kernel& kernel);

/// One modulus grid per kernel; img must be face_side x face_side.
std::vector<RealGrid> convolve_bank(const GrayImage& img, const GaborBank& bank, int face_side = 120);

/// Block-average to out_side x out_side, then normalize to zero mean, unit
/// population variance. Degenerate (constant) grids map to all zeros.
RealGrid downsample_normalize(const RealGrid& grid, int out_side);

std::vector<double> extract_gabor_features(const GrayImage& img, const GaborParams& params);
std::vector<double> extract_gabor_features(const GrayImage& img, const GaborParams& params,
                                           const GaborBank& bank);

}  // namespace fer::gabor
