#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fer/manifold.hpp"

namespace fer::classify {

using manifold::FeatureMatrix;
using manifold::Matrix;
using manifold::Vector;

enum class PrototypeMethod { Mean, Cluster, Feedback };
enum class Measure { Similarity, Euclidean };

struct Prototype {
    int label = 0;
    Vector vector;
};

struct PrototypeSet {
    std::vector<Prototype> prototypes;
    PrototypeMethod method = PrototypeMethod::Mean;
    Measure measure = Measure::Similarity;

    int dim() const { return prototypes.empty() ? 0 : static_cast<int>(prototypes.front().vector.size()); }
    std::vector<int> classes() const;
};

struct KnnModel {
    Matrix train;  // rows are samples
    std::vector<int> labels;
    int k = 1;

    KnnModel() = default;
    KnnModel(Matrix train, std::vector<int> labels, int k);
};

struct Decision {
    int label = 0;
    double score = 0.0;  // similarity (or negated distance) of the winner
};

int knn_classify(const KnnModel& model, const Eigen::Ref<const Vector>& x);

PrototypeSet mean_prototypes(const FeatureMatrix& data, Measure measure = Measure::Similarity);

struct KmeansResult {
    Matrix centers;  // k x d
    std::vector<int> assignment;
    std::vector<double> objective_history;  // sum of squared distances per iteration
};

/// Lloyd iterations from a seeded farthest-point start. Stops once the
/// relative objective change drops below tol or after max_iter rounds.
KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 300, double tol = 1e-8);

PrototypeSet cluster_prototypes(const FeatureMatrix& data, int k_per_class, std::uint64_t seed,
                                Measure measure = Measure::Similarity);

struct FeedbackParams {
    double rate = 0.05;
    int epochs = 50;
    std::uint64_t seed = 42;
};

/// LVQ-style refinement of the MEAN prototypes: each misclassified sample
/// pulls its own class prototype toward it and pushes the wrongly winning
/// prototype away by the same step. The prototype set with the best training
/// accuracy seen at an epoch boundary (initialization included) is returned.
PrototypeSet feedback_prototypes(const FeatureMatrix& data, const FeedbackParams& params,
                                 Measure measure = Measure::Similarity);

/// One error-driven update for sample x of class `truth` that was won by
/// prototype index `winner`. Exposed for testing.
void feedback_update(PrototypeSet& set, const Eigen::Ref<const Vector>& x, int truth, std::size_t winner,
                     double rate);

Decision nearest_prototype(const PrototypeSet& protos, const Eigen::Ref<const Vector>& x);
std::size_t nearest_prototype_index(const PrototypeSet& protos, const Eigen::Ref<const Vector>& x);
inline int nearest_prototype_classify(const PrototypeSet& protos, const Eigen::Ref<const Vector>& x) {
    return nearest_prototype(protos, x).label;
}

double training_accuracy(const PrototypeSet& protos, const FeatureMatrix& data);

std::string to_string(PrototypeMethod m);
std::string to_string(Measure m);
PrototypeMethod parse_prototype_method(const std::string& s);
Measure parse_measure(const std::string& s);

}  // namespace fer::classify
