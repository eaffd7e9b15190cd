#pragma once

#include <array>
#include <vector>

#include "fer/imaging.hpp"

namespace fer::lbp {

/// 3x3 neighbourhood, patch[row][col]; centre at [1][1].
using Patch = std::array<std::array<double, 3>, 3>;

enum class Mode { Lbp, Cbp };

struct CbpParams {
    /// Threshold on |i_n - i_c| in 0..255 level units.
    double threshold = 6.0;
};

// Bit n is neighbour n, starting at the right neighbour and walking
// counter-clockwise: right, upper-right, up, upper-left, left, lower-left,
// down, lower-right.
inline constexpr std::array<std::array<int, 2>, 8> kNeighbourOffsets{{
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

int lbp_code(const Patch& patch);
int cbp_code(const Patch& patch, const CbpParams& params);

/// Per-pixel codes over edge-replicated borders; codes are stored as
/// intensity code/255 so the result stays a GrayImage.
GrayImage code_image(const GrayImage& img, Mode mode, const CbpParams& params = {});

/// Row-major flattening of the code image, each code scaled to [0, 1].
std::vector<double> extract_lbp_features(const GrayImage& img, Mode mode, const CbpParams& params = {},
                                         int face_side = 120);

}  // namespace fer::lbp
