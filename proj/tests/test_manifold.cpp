#include <cmath>

#include "doctest.h"
#include "fer/evalharness.hpp"
#include "fer/manifold.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fer;
using namespace fer::manifold;

using namespace fixture;

namespace {

Matrix points_1d(std::initializer_list<double> v) {
    Matrix x(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double d : v) x(i++, 0) = d;
    return x;
}

}  // namespace

TEST_CASE("graph construction") {
    const Matrix x = points_1d({0, 1, 3});
    const NeighborGraph g = build_graph(x, GraphMode::NearestNeighbors, 1);
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 2));

    Rng rng(1);
    Matrix r(8, 3);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();
    CHECK(build_graph(r, GraphMode::NearestNeighbors, 7).edge_count() == 28);
    CHECK(build_graph(r, GraphMode::NearestNeighbors, 50).edge_count() == 28);
    const NeighborGraph g2 = build_graph(r, GraphMode::NearestNeighbors, 2);
    for (int i = 0; i < 8; ++i) {
        CHECK(g2.adjacency[i].size() >= 2);
        for (int j : g2.adjacency[i]) {
            CHECK(j != i);
            CHECK(g2.has_edge(j, i));
        }
    }

    CHECK(build_graph(x, GraphMode::Epsilon, 1.5).edge_count() == 1);
    try {
        build_graph(x, GraphMode::Epsilon, 0.5);
        FAIL("expected construction failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Construction);
    }
    CHECK_THROWS_AS(build_graph(x, GraphMode::NearestNeighbors, 0), Error);
}

TEST_CASE("edge weights") {
    Matrix x(3, 2);
    x << 0, 0, 1, 1, 1, 1;  // points 1 and 2 coincide
    const NeighborGraph g = build_graph(x, GraphMode::NearestNeighbors, 2);
    const WeightMatrix heat = edge_weights(g, x, WeightScheme::Heat, 2.0);
    CHECK(heat.matrix()(0, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(heat.matrix()(0, 1) == doctest::Approx(0.3679).epsilon(1e-4));
    CHECK(heat.matrix()(1, 2) == 1.0);
    const WeightMatrix simple = edge_weights(g, x, WeightScheme::Simple);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(simple.matrix()(i, j) == (i == j ? 0.0 : 1.0));
    CHECK_THROWS_AS(edge_weights(g, x, WeightScheme::Heat, 0.0), Error);
    Matrix asym = Matrix::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(WeightMatrix{asym}, Error);
}

TEST_CASE("LE on a 3-node path") {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = w(1, 2) = w(2, 1) = 1.0;
    const LeModel m = le_embed(WeightMatrix(w), 2);
    CHECK(std::abs(m.trivial_eigenvalue) < 1e-12);
    CHECK(m.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
    // y = (1, -1, 1): L y = (2, -4, 2) = 2 D y. {0, 1, 3} belongs to L alone.
    CHECK(m.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-12));
    const oracle::Vec want = oracle::generalized_diag_eigenvalues(laplacian(w), w.rowwise().sum());
    CHECK(std::abs(want(1) - 1.0) < 1e-12);
    CHECK(std::abs(want(2) - 2.0) < 1e-12);
    const oracle::Vec plain = oracle::jacobi_eigen(laplacian(w)).first;
    CHECK(std::abs(plain(2) - 3.0) < 1e-12);
}

TEST_CASE("LE against a dense oracle on random connected graphs") {
    Rng rng(2024);
    for (int t = 0; t < 20; ++t) {
        const int n = 5 + static_cast<int>(rng.index(46));
        const WeightMatrix w = random_connected(n, rng);
        const int m = std::min(n - 1, 6);
        const LeModel model = le_embed(w, m);
        const Matrix l = laplacian(w.matrix());
        const Vector d = w.degrees();
        for (int c = 0; c < m; ++c) {
            const Vector y = model.embedding.col(c);
            const double res = (l * y - model.eigenvalues(c) * d.cwiseProduct(y)).norm() / (l.norm() * y.norm());
            CHECK(res <= 1e-8);
        }
        const oracle::Vec want = oracle::generalized_diag_eigenvalues(l, d);
        for (int c = 0; c < m; ++c) CHECK(std::abs(model.eigenvalues(c) - want(c + 1)) <= 1e-8);
        CHECK(std::abs(model.trivial_eigenvalue) <= 1e-10);
        const Vector& v0 = model.trivial_vector;
        CHECK((v0.array() - v0.mean()).abs().maxCoeff() <= 1e-10 * v0.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("LE splits two weakly joined clusters") {
    Rng rng(77);
    Matrix x(20, 2);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = (i < 10 ? -10.0 : 10.0) + rng.normal();
        x(i, 1) = rng.normal();
    }
    Matrix w = Matrix::Zero(20, 20);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            if (i != j && (i < 10) == (j < 10)) w(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / 4.0);
    w(3, 14) = w(14, 3) = 1e-3;
    const LeModel m = le_embed(WeightMatrix(w), 1);
    const Vector f = m.embedding.col(0);
    for (int i = 1; i < 20; ++i) CHECK(((f(i) > 0) == (f(0) > 0)) == ((i < 10) == true));
}

TEST_CASE("LE rejects disconnected graphs") {
    Matrix w = Matrix::Zero(5, 5);
    w(0, 1) = w(1, 0) = 1.0;
    w(2, 3) = w(3, 2) = w(3, 4) = w(4, 3) = 1.0;
    CHECK(connected_components(WeightMatrix(w)).size() == 2);
    try {
        le_embed(WeightMatrix(w), 1);
        FAIL("expected connectivity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Connectivity);
        CHECK(std::string(e.what()).find("sizes 2 3") != std::string::npos);
    }
    Matrix ok = Matrix::Zero(2, 2);
    ok(0, 1) = ok(1, 0) = 1;
    CHECK_THROWS_AS(le_embed(WeightMatrix(ok), 2), Error);
}

TEST_CASE("similarity and divergence transforms") {
    Vector x(3), y(3), z = Vector::Zero(3);
    x << 1, 2, 3;
    y << -3, 0, 1;
    CHECK(similarity(x, x) == doctest::Approx(1.0));
    CHECK(similarity(x, y) == doctest::Approx(0.5));
    CHECK(similarity(x, -x) == doctest::Approx(0.0));
    CHECK(similarity(x, z) == 0.5);
    CHECK(s_d_transform(0.5, true, 10, 0.5, 0.0) == doctest::Approx(0.5));
    CHECK(s_d_transform(0.9, true, 10, 0.5, 0.0) == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))));
    CHECK(s_d_transform(0.9, true, 10, 0.5, 0.0) == doctest::Approx(0.9820).epsilon(1e-4));
    CHECK(s_d_transform(0.8, false, 10, 0.5, 0.3) == doctest::Approx(0.5));
}

TEST_CASE("SDLE matrices") {
    SUBCASE("single class has no inter-class ties") {
        FeatureMatrix d{Matrix::Random(4, 3), {2, 2, 2, 2}};
        const SdleMatrices m = sdle_matrices(d, {});
        CHECK(m.m.isZero());
        CHECK(m.p.isZero());
    }
    SUBCASE("two samples of different classes") {
        FeatureMatrix d{Matrix::Random(2, 3), {0, 1}};
        const SdleMatrices m = sdle_matrices(d, {});
        CHECK(m.m(0, 1) == 1.0);
        CHECK(m.m(1, 0) == 1.0);
        CHECK(m.m(0, 0) == 0.0);
        CHECK(m.p(0) == 1.0);
        CHECK(m.p(1) == 1.0);
    }
    SUBCASE("three points against the scalar formulas") {
        Matrix x(3, 2);
        x << 1, 0, 0.8, 0.6, -0.6, 0.8;
        FeatureMatrix d{x, {0, 0, 1}};
        SdleParams p;
        p.t = 0.7;
        for (WeightMap map : {WeightMap::Intent, WeightMap::Literal}) {
            p.weight_map = map;
            const SdleMatrices m = sdle_matrices(d, p);
            const double s01 = 0.5 * (1 + 0.8), s02 = 0.5 * (1 - 0.6), s12 = 0.5 * (1 + 0.0);
            const double pen = std::min(s02, s12);
            CHECK(m.penalty == doctest::Approx(pen));
            auto weight = [&](double sd) { return map == WeightMap::Intent ? std::exp(-(1 - sd) / 0.7) : std::exp(-sd / 0.7); };
            CHECK(std::abs(m.w(0, 1) - weight(1.0 / (1.0 + std::exp(-10.0 * (s01 - 0.5))))) <= 1e-12);
            CHECK(std::abs(m.w(0, 2) - weight(s02 - pen)) <= 1e-12);
            CHECK(std::abs(m.w(1, 2) - weight(s12 - pen)) <= 1e-12);
            CHECK(m.w(0, 0) == 0.0);
            CHECK(std::abs(m.d(0) - m.w(0, 1) - m.w(0, 2)) <= 1e-12);
        }
    }
}

TEST_CASE("SDLE generalized eigen-residuals") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = oracle::gaussian_lift(12 + static_cast<int>(seed) * 4, 10, 100 * static_cast<int>(seed), seed);
        FeatureMatrix fm{data.x, data.labels};
        const SdleParams params;
        const SdleModel model = sdle_fit(fm, 8, params);
        REQUIRE(model.output_dim() == 8);
        // Full-space check of X^T (P - M) X a = lambda X^T (D - W) X a.
        const SdleMatrices mats = sdle_matrices(fm, params);
        Matrix lm = -mats.m;
        lm.diagonal() += mats.p;
        Matrix lw = -mats.w;
        lw.diagonal() += mats.d;
        const Matrix lhs = data.x.transpose() * lm * data.x, rhs = data.x.transpose() * lw * data.x;
        for (int c = 0; c < model.output_dim(); ++c) {
            const Vector a = model.basis * model.projection.col(c);
            const double res = (lhs * a - model.eigenvalues(c) * rhs * a).norm();
            CHECK(res <= 1e-6 * (lhs * a).norm());
        }
        // Eigenvalues are descending and match a dense oracle in the reduced space.
        const Matrix z = data.x * model.basis;
        Matrix rl = z.transpose() * lm * z, rr = z.transpose() * lw * z;
        rr.diagonal().array() += params.ridge * rr.trace() / rr.rows();
        const Eigen::LLT<Matrix> chol(rr);
        const Matrix li = chol.matrixL().solve(Matrix::Identity(rr.rows(), rr.cols()));
        const oracle::Vec want = oracle::jacobi_eigen(li * rl * li.transpose()).first.reverse();
        for (int c = 0; c < model.output_dim(); ++c) {
            CHECK(std::abs(model.eigenvalues(c) - want(c)) <= 1e-6 * std::abs(want(0)));
            if (c > 0) CHECK(model.eigenvalues(c) <= model.eigenvalues(c - 1));
        }
    }
}

TEST_CASE("SDLE raises class separation") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto data = oracle::gaussian_lift(15, 10, 200, seed, 1.5);
        const SdleModel model = sdle_fit({data.x, data.labels}, 2);
        const Matrix y = sdle_transform(model, data.x);
        CHECK(oracle::fisher_ratio(y, data.labels) >= oracle::fisher_ratio(data.x, data.labels));
    }
}

TEST_CASE("SDLE ignores class naming") {
    const auto data = oracle::gaussian_lift(12, 6, 80, 5);
    std::vector<int> renamed(data.labels.size());
    const int perm[3] = {2, 0, 1};
    for (std::size_t i = 0; i < renamed.size(); ++i) renamed[i] = perm[data.labels[i]];
    const SdleModel a = sdle_fit({data.x, data.labels}, 4), b = sdle_fit({data.x, renamed}, 4);
    CHECK(column_sign_distance(sdle_transform(a, data.x), sdle_transform(b, data.x)) <= 1e-8);
}

TEST_CASE("SDLE transform") {
    const auto data = oracle::gaussian_lift(10, 5, 40, 9);
    const SdleModel model = sdle_fit({data.x, data.labels}, 3);
    const Matrix y = sdle_transform(model, data.x);
    CHECK(y.cols() == 3);
    // Projecting row by row equals projecting the stack.
    for (Eigen::Index i = 0; i < data.x.rows(); ++i)
        CHECK((sdle_transform(model, data.x.row(i)) - y.row(i)).norm() <= 1e-9);
    CHECK(sdle_transform(model, Matrix::Zero(1, 40)).isZero());
    CHECK((sdle_transform(model, 2.5 * data.x) - 2.5 * y).norm() <= 1e-9 * y.norm());
    try {
        sdle_transform(model, Matrix::Zero(1, 39));
        FAIL("expected dimension error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
}

TEST_CASE("SDLE preconditions and defaults") {
    CHECK(eval::LearnerConfig{}.dim == 83);
    const auto data = oracle::gaussian_lift(3, 4, 20, 3);
    CHECK_THROWS_AS(sdle_fit({data.x, data.labels}, 9), Error);
    CHECK_THROWS_AS(sdle_fit({data.x, std::vector<int>(9, 0)}, 2), Error);
    CHECK_THROWS_AS(sdle_fit({data.x, {}}, 2), Error);
    // Rank 4 data caps the output.
    CHECK(sdle_fit({data.x, data.labels}, 8).output_dim() == 4);
    SdleParams bad;
    bad.a = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
}
