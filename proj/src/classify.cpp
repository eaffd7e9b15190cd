#include "fer/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "fer/rng.hpp"

namespace fer::classify {

namespace {

void require_labeled(const FeatureMatrix& data, const char* op) {
    data.validate();
    require(data.labeled(), std::string(op) + ": labels required");
    require(data.rows() > 0, std::string(op) + ": no samples");
}

std::map<int, std::vector<int>> rows_by_class(const FeatureMatrix& data) {
    std::map<int, std::vector<int>> out;
    for (int i = 0; i < data.rows(); ++i) out[data.labels[i]].push_back(i);
    return out;
}

}  // namespace

std::vector<int> PrototypeSet::classes() const {
    std::set<int> s;
    for (const auto& p : prototypes) s.insert(p.label);
    return {s.begin(), s.end()};
}

KnnModel::KnnModel(Matrix train_, std::vector<int> labels_, int k_)
    : train(std::move(train_)), labels(std::move(labels_)), k(k_) {
    require(labels.size() == static_cast<std::size_t>(train.rows()), "KnnModel: label count mismatch");
    require(k >= 1 && k <= train.rows(), "KnnModel: k must lie in [1, n_train]");
}

int knn_classify(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
    require(x.size() == model.train.cols(), "knn_classify: dimension mismatch");
    const int n = static_cast<int>(model.train.rows());
    std::vector<std::pair<double, int>> dist(n);
    for (int i = 0; i < n; ++i) dist[i] = {(model.train.row(i).transpose() - x).norm(), i};
    std::partial_sort(dist.begin(), dist.begin() + model.k, dist.end());

    struct Tally {
        int votes = 0;
        double distance = 0.0;
    };
    std::map<int, Tally> tally;
    for (int r = 0; r < model.k; ++r) {
        Tally& t = tally[model.labels[dist[r].second]];
        ++t.votes;
        t.distance += dist[r].first;
    }
    // map iterates labels ascending, so the final tie-break is the lowest label.
    int best = tally.begin()->first;
    Tally best_t = tally.begin()->second;
    for (const auto& [label, t] : tally) {
        if (t.votes > best_t.votes || (t.votes == best_t.votes && t.distance < best_t.distance)) {
            best = label;
            best_t = t;
        }
    }
    return best;
}

PrototypeSet mean_prototypes(const FeatureMatrix& data, Measure measure) {
    require_labeled(data, "mean_prototypes");
    PrototypeSet set;
    set.method = PrototypeMethod::Mean;
    set.measure = measure;
    for (const auto& [label, rows] : rows_by_class(data)) {
        require(!rows.empty(), "mean_prototypes: empty class");
        Vector sum = Vector::Zero(data.dim());
        for (int r : rows) sum += data.x.row(r).transpose();
        set.prototypes.push_back({label, sum / static_cast<double>(rows.size())});
    }
    return set;
}

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter, double tol) {
    const int n = static_cast<int>(points.rows());
    require(k >= 1 && k <= n, "kmeans: cluster count must lie in [1, n]");
    Rng rng(seed);

    // Farthest-point start: seeded first pick, then repeatedly the point
    // farthest from every chosen centre (lowest index on ties).
    std::vector<int> chosen{static_cast<int>(rng.index(n))};
    Vector nearest = (points.rowwise() - points.row(chosen[0])).rowwise().squaredNorm();
    while (static_cast<int>(chosen.size()) < k) {
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (nearest(i) > nearest(arg)) arg = i;
        chosen.push_back(arg);
        nearest = nearest.cwiseMin((points.rowwise() - points.row(arg)).rowwise().squaredNorm());
    }

    KmeansResult res;
    res.centers.resize(k, points.cols());
    for (int c = 0; c < k; ++c) res.centers.row(c) = points.row(chosen[c]);
    res.assignment.assign(n, 0);

    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - res.centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            res.assignment[i] = best;
        }
        Matrix sums = Matrix::Zero(k, points.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.assignment[i]) += points.row(i);
            ++counts[res.assignment[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) res.centers.row(c) = sums.row(c) / counts[c];  // empty clusters keep their centre
        double updated = 0.0;
        for (int i = 0; i < n; ++i) updated += (points.row(i) - res.centers.row(res.assignment[i])).squaredNorm();
        res.objective_history.push_back(updated);

        const double change = std::abs(previous - updated);
        if (updated == 0.0 || change <= tol * std::max(updated, 1e-300)) break;
        previous = updated;
    }
    return res;
}

PrototypeSet cluster_prototypes(const FeatureMatrix& data, int k_per_class, std::uint64_t seed, Measure measure) {
    require_labeled(data, "cluster_prototypes");
    require(k_per_class >= 1, "cluster_prototypes: k_per_class must be >= 1");
    PrototypeSet set;
    set.method = PrototypeMethod::Cluster;
    set.measure = measure;
    for (const auto& [label, rows] : rows_by_class(data)) {
        require(static_cast<int>(rows.size()) >= k_per_class,
                "cluster_prototypes: class " + std::to_string(label) + " has fewer than k_per_class samples");
        Matrix pts(static_cast<Eigen::Index>(rows.size()), data.dim());
        for (std::size_t i = 0; i < rows.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
        const KmeansResult km = kmeans(pts, k_per_class, seed + static_cast<std::uint64_t>(label));
        for (int c = 0; c < k_per_class; ++c) set.prototypes.push_back({label, km.centers.row(c).transpose()});
    }
    return set;
}

std::size_t nearest_prototype_index(const PrototypeSet& protos, const Eigen::Ref<const Vector>& x) {
    require(!protos.prototypes.empty(), "nearest_prototype: empty prototype set");
    require(x.size() == protos.dim(), "nearest_prototype: dimension mismatch");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < protos.prototypes.size(); ++i) {
        const Prototype& p = protos.prototypes[i];
        const double score = protos.measure == Measure::Similarity ? manifold::similarity(x, p.vector)
                                                                    : -(x - p.vector).norm();
        const bool better = score > best_score ||
                            (score == best_score && p.label < protos.prototypes[best].label);
        if (better) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

Decision nearest_prototype(const PrototypeSet& protos, const Eigen::Ref<const Vector>& x) {
    const std::size_t i = nearest_prototype_index(protos, x);
    const Prototype& p = protos.prototypes[i];
    const double score = protos.measure == Measure::Similarity ? manifold::similarity(x, p.vector)
                                                                : -(x - p.vector).norm();
    return {p.label, score};
}

double training_accuracy(const PrototypeSet& protos, const FeatureMatrix& data) {
    require_labeled(data, "training_accuracy");
    int correct = 0;
    for (int i = 0; i < data.rows(); ++i)
        if (nearest_prototype_classify(protos, data.x.row(i).transpose()) == data.labels[i]) ++correct;
    return static_cast<double>(correct) / data.rows();
}

void feedback_update(PrototypeSet& set, const Eigen::Ref<const Vector>& x, int truth, std::size_t winner,
                     double rate) {
    Prototype* own = nullptr;
    double own_score = -std::numeric_limits<double>::infinity();
    for (Prototype& p : set.prototypes) {
        if (p.label != truth) continue;
        const double score = set.measure == Measure::Similarity ? manifold::similarity(x, p.vector)
                                                                 : -(x - p.vector).norm();
        if (score > own_score) {
            own_score = score;
            own = &p;
        }
    }
    require(own != nullptr, "feedback_update: no prototype for the true class");
    Prototype& rival = set.prototypes[winner];
    const Vector pull = rate * (x - own->vector);
    const Vector push = rate * (x - rival.vector);
    own->vector += pull;
    rival.vector -= push;
}

PrototypeSet feedback_prototypes(const FeatureMatrix& data, const FeedbackParams& params, Measure measure) {
    require_labeled(data, "feedback_prototypes");
    require(params.rate > 0.0 && params.rate <= 1.0, "feedback_prototypes: rate must lie in (0, 1]");
    require(params.epochs >= 1, "feedback_prototypes: epochs must be >= 1");

    PrototypeSet current = mean_prototypes(data, measure);
    current.method = PrototypeMethod::Feedback;
    PrototypeSet best = current;
    double best_acc = training_accuracy(current, data);
    if (best_acc == 1.0) return best;

    Rng rng(params.seed);
    std::vector<int> order(static_cast<std::size_t>(data.rows()));
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        int errors = 0;
        for (int i : order) {
            const Vector x = data.x.row(i).transpose();
            const std::size_t w = nearest_prototype_index(current, x);
            if (current.prototypes[w].label == data.labels[i]) continue;
            ++errors;
            feedback_update(current, x, data.labels[i], w, params.rate);
        }
        const double acc = training_accuracy(current, data);
        if (acc > best_acc) {
            best_acc = acc;
            best = current;
        }
        if (errors == 0 || best_acc == 1.0) break;
    }
    return best;
}

std::string to_string(PrototypeMethod m) {
    switch (m) {
    case PrototypeMethod::Mean: return "mean";
    case PrototypeMethod::Cluster: return "cluster";
    case PrototypeMethod::Feedback: return "feedback";
    }
    return "mean";
}

std::string to_string(Measure m) { return m == Measure::Similarity ? "similarity" : "euclidean"; }

PrototypeMethod parse_prototype_method(const std::string& s) {
    if (s == "mean") return PrototypeMethod::Mean;
    if (s == "cluster") return PrototypeMethod::Cluster;
    if (s == "feedback") return PrototypeMethod::Feedback;
    fail(ErrorKind::InvalidInput, "unknown prototype method '" + s + "'");
}

Measure parse_measure(const std::string& s) {
    if (s == "similarity") return Measure::Similarity;
    if (s == "euclidean") return Measure::Euclidean;
    fail(ErrorKind::InvalidInput, "unknown decision measure '" + s + "'");
}

}  // namespace fer::classify
