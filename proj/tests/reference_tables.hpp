#pragma once
// Reference per-class counts and percentages used as fixtures.

#include <array>

namespace tables {

struct Row {
    int tp, fp, fn, tn;
    double sen, spe, ace;
};

// Gabor features.
inline constexpr std::array<Row, 7> kGaborRows{{
    {14, 0, 0, 84, 100, 100, 100},
    {10, 4, 4, 80, 71.43, 95.24, 91.84},
    {11, 5, 3, 79, 78.57, 94.05, 91.84},
    {9, 4, 5, 80, 64.29, 95.24, 90.82},
    {11, 4, 3, 80, 78.57, 95.24, 92.86},
    {11, 1, 3, 83, 78.57, 98.81, 95.92},
    {9, 5, 5, 79, 64.29, 94.05, 89.80},
}};
inline constexpr std::array<double, 3> kGaborAverage{76.53, 96.09, 93.29};

// LBP features.
inline constexpr std::array<Row, 7> kLbpRows{{
    {12, 3, 2, 81, 85.71, 96.43, 94.90},
    {7, 3, 7, 81, 50, 96.43, 89.80},
    {9, 5, 5, 79, 64.29, 94.05, 89.80},
    {7, 3, 7, 81, 50, 96.43, 89.80},
    {8, 4, 6, 80, 57.14, 95.24, 89.80},
    {9, 9, 5, 75, 64.29, 89.29, 85.71},
    {7, 11, 7, 73, 50, 86.90, 81.63},
}};
inline constexpr std::array<double, 3> kLbpAverage{60.20, 93.54, 88.78};

// Rows are the true class, columns the prediction.
inline constexpr int kGaborConfusion[7][7] = {
    {14, 0, 0, 0, 0, 0, 0}, {0, 10, 0, 2, 1, 0, 1}, {0, 0, 11, 0, 1, 1, 1}, {0, 1, 2, 9, 0, 0, 2},
    {0, 0, 2, 0, 11, 0, 1}, {0, 1, 1, 0, 1, 11, 0}, {0, 2, 0, 2, 1, 0, 9},
};
}  // namespace tables
