#include "fer/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace fer::manifold {

std::vector<int> FeatureMatrix::classes() const {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

void FeatureMatrix::validate() const {
    require(x.allFinite(), "FeatureMatrix: non-finite entries");
    require(labels.empty() || labels.size() == static_cast<std::size_t>(x.rows()),
            "FeatureMatrix: label count does not match row count");
}

bool NeighborGraph::has_edge(int i, int j) const {
    const auto& adj = adjacency[i];
    return std::binary_search(adj.begin(), adj.end(), j);
}

std::size_t NeighborGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& adj : adjacency) total += adj.size();
    return total / 2;
}

WeightMatrix::WeightMatrix(Matrix w) : w_(std::move(w)) {
    require(w_.rows() == w_.cols(), "WeightMatrix: matrix must be square");
    require(w_.allFinite(), "WeightMatrix: non-finite weights");
    for (Eigen::Index i = 0; i < w_.rows(); ++i) {
        require(w_(i, i) == 0.0, "WeightMatrix: diagonal must be zero");
        for (Eigen::Index j = 0; j < w_.cols(); ++j) {
            require(w_(i, j) >= 0.0, "WeightMatrix: weights must be non-negative");
            require(w_(i, j) == w_(j, i), "WeightMatrix: matrix must be symmetric");
        }
    }
}

Matrix pairwise_squared_distances(const Matrix& x) {
    const Matrix gram = x * x.transpose();
    const Vector sq = gram.diagonal();
    Matrix d2(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
            const double v = std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j));
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

double mean_squared_distance(const Matrix& x) {
    const Eigen::Index n = x.rows();
    if (n < 2) return 0.0;
    const Matrix d2 = pairwise_squared_distances(x);
    return d2.sum() / static_cast<double>(n * (n - 1));
}

NeighborGraph build_graph(const Matrix& x, GraphMode mode, double param) {
    const int n = static_cast<int>(x.rows());
    require(n >= 2, "build_graph: need at least 2 samples");
    require(param > 0.0 && std::isfinite(param), "build_graph: parameter must be positive");
    require(x.allFinite(), "build_graph: non-finite features");
    const Matrix d2 = pairwise_squared_distances(x);

    std::vector<std::set<int>> adj(n);
    if (mode == GraphMode::NearestNeighbors) {
        const int k = static_cast<int>(std::min<double>(std::floor(param), n - 1));
        require(k >= 1, "build_graph: neighbour count must be >= 1");
        std::vector<int> order;
        for (int i = 0; i < n; ++i) {
            order.resize(n);
            std::iota(order.begin(), order.end(), 0);
            order.erase(order.begin() + i);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d2(i, a) < d2(i, b); });
            for (int r = 0; r < k; ++r) {
                adj[i].insert(order[r]);
                adj[order[r]].insert(i);
            }
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (d2(i, j) < param) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
    }

    NeighborGraph g;
    g.nodes = n;
    g.mode = mode;
    g.param = param;
    g.adjacency.resize(n);
    for (int i = 0; i < n; ++i) g.adjacency[i].assign(adj[i].begin(), adj[i].end());
    if (g.edge_count() == 0) {
        fail(ErrorKind::Construction, "build_graph: parameter yields a graph with no edges");
    }
    return g;
}

WeightMatrix edge_weights(const NeighborGraph& graph, const Matrix& x, WeightScheme scheme, double t) {
    require(x.rows() == graph.nodes, "edge_weights: feature rows do not match graph size");
    if (scheme == WeightScheme::Heat) {
        require(t > 0.0 && std::isfinite(t), "edge_weights: heat parameter t must be positive");
    }
    Matrix w = Matrix::Zero(graph.nodes, graph.nodes);
    for (int i = 0; i < graph.nodes; ++i) {
        for (int j : graph.adjacency[i]) {
            if (j <= i) continue;
            double v = 1.0;
            if (scheme == WeightScheme::Heat) v = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / t);
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return WeightMatrix(std::move(w));
}

std::vector<std::vector<int>> connected_components(const WeightMatrix& w) {
    const int n = w.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::queue<int> q;
        q.push(s);
        comp[s] = id;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            out[id].push_back(i);
            for (int j = 0; j < n; ++j) {
                if (comp[j] < 0 && w.matrix()(i, j) > 0.0) {
                    comp[j] = id;
                    q.push(j);
                }
            }
        }
        std::sort(out[id].begin(), out[id].end());
    }
    return out;
}

void fix_column_signs(Matrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            // Strict comparison with a small slack keeps the choice stable
            // when two entries tie up to rounding.
            if (std::abs(m(r, c)) > best * (1.0 + 1e-9)) {
                best = std::abs(m(r, c));
                arg = r;
            }
        }
        if (m(arg, c) < 0.0) m.col(c) = -m.col(c);
    }
}

LeModel le_embed(const WeightMatrix& w, int m) {
    const int n = w.size();
    require(n >= 2, "le_embed: need at least 2 nodes");
    require(m >= 1 && m <= n - 1, "le_embed: target dimension must lie in [1, n-1]");
    const auto comps = connected_components(w);
    if (comps.size() > 1) {
        std::ostringstream msg;
        msg << "le_embed: graph is disconnected (" << comps.size() << " components, sizes";
        for (const auto& c : comps) msg << ' ' << c.size();
        msg << "); embed each component separately";
        fail(ErrorKind::Connectivity, msg.str());
    }

    const Vector deg = w.degrees();
    const Vector inv_sqrt = deg.array().rsqrt();
    // D^{-1/2} L D^{-1/2} v = lambda v  <=>  L y = lambda D y with y = D^{-1/2} v,
    // and y^T D y = v^T v = 1.
    Matrix normalized = -(inv_sqrt.asDiagonal() * w.matrix() * inv_sqrt.asDiagonal());
    normalized.diagonal().array() += 1.0;
    normalized = 0.5 * (normalized + normalized.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(normalized);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Numeric, "le_embed: eigensolver did not converge");

    Matrix y = inv_sqrt.asDiagonal() * solver.eigenvectors();
    fix_column_signs(y);
    LeModel model;
    model.trivial_eigenvalue = solver.eigenvalues()(0);
    model.trivial_vector = y.col(0);
    model.eigenvalues = solver.eigenvalues().segment(1, m);
    model.embedding = y.middleCols(1, m);
    return model;
}

double similarity(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
    require(x.size() == y.size(), "similarity: dimension mismatch");
    const double nx = x.norm();
    const double ny = y.norm();
    if (nx == 0.0 || ny == 0.0) return 0.5;
    const double cosine = std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
    return 0.5 * (1.0 + cosine);
}

double sigmoid(double z, double p, double a) { return 1.0 / (1.0 + std::exp(-p * (z - a))); }

double s_d_transform(double simi, bool same_label, double p, double a, double penalty) {
    if (same_label) return sigmoid(simi, p, a);
    return std::max(0.0, simi - penalty);
}

void SdleParams::validate() const {
    require(p > 0.0 && std::isfinite(p), "sdle: sigmoid slope p must be positive");
    require(a > 0.0 && a < 1.0, "sdle: sigmoid centre a must lie in (0, 1)");
    require(t > 0.0 && std::isfinite(t), "sdle: heat parameter t must be positive");
    require(!penalty || (*penalty >= 0.0 && std::isfinite(*penalty)), "sdle: penalty must be >= 0");
    require(ridge >= 0.0 && std::isfinite(ridge), "sdle: ridge must be >= 0");
}

namespace {

SdleMatrices matrices_from_gram(const Matrix& gram, const std::vector<int>& labels, const SdleParams& params) {
    const Eigen::Index n = gram.rows();
    SdleMatrices out;
    out.similarity.resize(n, n);
    const Vector norms = gram.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.5;
            if (norms(i) > 0.0 && norms(j) > 0.0) {
                s = 0.5 * (1.0 + std::clamp(gram(i, j) / (norms(i) * norms(j)), -1.0, 1.0));
            }
            out.similarity(i, j) = s;
        }
    }

    if (params.penalty) {
        out.penalty = *params.penalty;
    } else {
        double lowest = 1.0;
        bool any = false;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (labels[i] != labels[j]) {
                    lowest = std::min(lowest, out.similarity(i, j));
                    any = true;
                }
        out.penalty = any ? std::max(0.0, lowest) : 0.0;
    }

    out.w = Matrix::Zero(n, n);
    out.m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const bool same = labels[i] == labels[j];
            const double sd = s_d_transform(out.similarity(i, j), same, params.p, params.a, out.penalty);
            const double w = params.weight_map == WeightMap::Intent ? std::exp(-(1.0 - sd) / params.t)
                                                                    : std::exp(-sd / params.t);
            out.w(i, j) = out.w(j, i) = w;
            out.m(i, j) = out.m(j, i) = same ? 0.0 : 1.0;
        }
    }
    out.d = out.w.rowwise().sum();
    out.p = out.m.rowwise().sum();
    return out;
}

void require_supervised(const FeatureMatrix& data, const char* op) {
    data.validate();
    require(data.labeled(), std::string(op) + ": labels required");
    require(data.classes().size() >= 2, std::string(op) + ": at least 2 classes required");
}

}  // namespace

SdleMatrices sdle_matrices(const FeatureMatrix& data, const SdleParams& params) {
    data.validate();
    require(data.labeled(), "sdle_matrices: labels required");
    params.validate();
    return matrices_from_gram(data.x * data.x.transpose(), data.labels, params);
}

SdleModel sdle_fit(const FeatureMatrix& data, int m, const SdleParams& params) {
    require_supervised(data, "sdle_fit");
    params.validate();
    const int n = data.rows();
    require(m >= 1, "sdle_fit: target dimension must be >= 1");
    require(n >= m + 1, "sdle_fit: need at least m + 1 samples");

    const Matrix gram = data.x * data.x.transpose();
    const SdleMatrices mats = matrices_from_gram(gram, data.labels, params);

    // Orthogonal pre-projection onto the leading principal directions of the
    // (uncentred) sample span, so the map stays linear.
    Eigen::SelfAdjointEigenSolver<Matrix> gram_eig(gram);
    if (gram_eig.info() != Eigen::Success) fail(ErrorKind::Numeric, "sdle_fit: Gram eigensolver failed");
    const Vector gvals = gram_eig.eigenvalues().reverse();
    const Matrix gvecs = gram_eig.eigenvectors().rowwise().reverse();
    const double top = std::max(gvals(0), 0.0);
    int rank = 0;
    while (rank < n && gvals(rank) > top * 1e-12 * n && gvals(rank) > 0.0) ++rank;
    const int r = std::min(rank, n - 1);
    require(r >= 1, "sdle_fit: data has rank zero");
    // A rank-deficient sample span caps the embedding at min(m, rank).
    m = std::min(m, r);

    Matrix u = gvecs.leftCols(r);
    fix_column_signs(u);
    const Vector sv = gvals.head(r).cwiseSqrt();
    Matrix basis = data.x.transpose() * u * sv.cwiseInverse().asDiagonal();  // d x r
    const Matrix z = u * sv.asDiagonal();                                     // n x r, = X * basis

    Matrix lap_w = -mats.w;
    lap_w.diagonal() += mats.d;
    Matrix lap_m = -mats.m;
    lap_m.diagonal() += mats.p;
    Matrix lhs = z.transpose() * lap_m * z;
    Matrix rhs = z.transpose() * lap_w * z;
    lhs = 0.5 * (lhs + lhs.transpose());
    rhs = 0.5 * (rhs + rhs.transpose());
    const double ridge = params.ridge * std::max(rhs.trace() / r, 1e-300);
    rhs.diagonal().array() += ridge;

    Eigen::LLT<Matrix> chol(rhs);
    if (chol.info() != Eigen::Success) {
        fail(ErrorKind::Numeric, "sdle_fit: right-hand matrix is singular after regularization");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(lhs, rhs, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Numeric, "sdle_fit: generalized eigensolver failed");

    SdleModel model;
    model.input_dim = data.dim();
    model.basis = std::move(basis);
    model.projection = solver.eigenvectors().rightCols(m).rowwise().reverse();
    model.eigenvalues = solver.eigenvalues().tail(m).reverse();
    fix_column_signs(model.projection);
    model.params = params;
    model.penalty = mats.penalty;
    return model;
}

Matrix sdle_transform(const SdleModel& model, const Matrix& x) {
    require(x.cols() == model.input_dim, "sdle_transform: expected input dimension " +
                                             std::to_string(model.input_dim) + ", got " +
                                             std::to_string(x.cols()));
    return (x * model.basis) * model.projection;
}

}  // namespace fer::manifold
