#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "fer/error.hpp"

namespace fer::manifold {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n samples (rows) x d features, with optional per-row class labels.
struct FeatureMatrix {
    Matrix x;
    std::vector<int> labels;

    int rows() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
    bool labeled() const { return !labels.empty(); }
    /// Distinct labels, ascending.
    std::vector<int> classes() const;
    /// Throws InvalidInput on non-finite entries or a label count mismatch.
    void validate() const;
};

enum class GraphMode { NearestNeighbors, Epsilon };

struct NeighborGraph {
    int nodes = 0;
    GraphMode mode = GraphMode::NearestNeighbors;
    double param = 0.0;
    std::vector<std::vector<int>> adjacency;  // sorted, symmetric, no self-loops

    bool has_edge(int i, int j) const;
    std::size_t edge_count() const;
};

/// Symmetric, non-negative, zero-diagonal weights.
class WeightMatrix {
public:
    explicit WeightMatrix(Matrix w);
    const Matrix& matrix() const { return w_; }
    int size() const { return static_cast<int>(w_.rows()); }
    Vector degrees() const { return w_.rowwise().sum(); }

private:
    Matrix w_;
};

enum class WeightScheme { Heat, Simple };

struct LeModel {
    Matrix embedding;    // n x m, columns are generalized eigenvectors
    Vector eigenvalues;  // m, ascending
    double trivial_eigenvalue = 0.0;
    Vector trivial_vector;
};

Matrix pairwise_squared_distances(const Matrix& x);
double mean_squared_distance(const Matrix& x);

NeighborGraph build_graph(const Matrix& x, GraphMode mode, double param);
WeightMatrix edge_weights(const NeighborGraph& graph, const Matrix& x, WeightScheme scheme, double t = 1.0);
/// Connected components of the positive-weight graph, each sorted.
std::vector<std::vector<int>> connected_components(const WeightMatrix& w);
/// Solves L y = lambda D y and drops the constant solution.
LeModel le_embed(const WeightMatrix& w, int m);

/// (1 + cos(x, y)) / 2; 0.5 when either vector is zero.
double similarity(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
double sigmoid(double z, double p, double a);
double s_d_transform(double simi, bool same_label, double p, double a, double penalty);

enum class WeightMap { Intent, Literal };

struct SdleParams {
    double p = 10.0;
    double a = 0.5;
    double t = 1.0;
    /// Constant inter-class penalty; unset means the minimum observed
    /// inter-class similarity, clamped at zero.
    std::optional<double> penalty;
    WeightMap weight_map = WeightMap::Intent;
    double ridge = 1e-8;

    void validate() const;
};

struct SdleMatrices {
    Matrix similarity;  // n x n simi(i, j)
    Matrix w;           // W^{S_D}
    Vector d;           // row sums of w
    Matrix m;           // 1 where labels differ
    Vector p;           // row sums of m
    double penalty = 0.0;
};

SdleMatrices sdle_matrices(const FeatureMatrix& data, const SdleParams& params);

struct SdleModel {
    int input_dim = 0;
    Matrix basis;        // input_dim x r, orthonormal columns
    Matrix projection;   // r x m  (A)
    Vector eigenvalues;  // m, descending
    SdleParams params;
    double penalty = 0.0;

    int reduced_dim() const { return static_cast<int>(basis.cols()); }
    int output_dim() const { return static_cast<int>(projection.cols()); }
};

/// Requires n >= m + 1. The output dimension is min(m, r) where r is the
/// pre-projection rank.
SdleModel sdle_fit(const FeatureMatrix& data, int m, const SdleParams& params = {});
/// Rows of x are samples; returns n x m.
Matrix sdle_transform(const SdleModel& model, const Matrix& x);

/// Flips each column so its largest-magnitude entry is positive.
void fix_column_signs(Matrix& m);

}  // namespace fer::manifold
