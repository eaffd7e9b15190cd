#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fer/classify.hpp"
#include "fer/manifold.hpp"

namespace fer::eval {

using manifold::FeatureMatrix;
using manifold::Matrix;

/// Default class order: happy, sad, fear, anger, surprise, disgust, calm.
const std::vector<std::string>& default_class_names();

/// cell(i, j) counts samples of true class i predicted as j.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes, std::vector<std::string> names = {});

    int classes() const { return classes_; }
    const std::vector<std::string>& names() const { return names_; }
    std::int64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
    void add(int truth, int predicted, std::int64_t count = 1);
    void merge(const ConfusionMatrix& other);

    std::int64_t total() const;
    std::int64_t row_sum(int truth) const;
    std::int64_t col_sum(int predicted) const;
    std::int64_t trace() const;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * classes_ + j; }
    int classes_;
    std::vector<std::string> names_;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int classes,
                                 std::vector<std::string> names = {});

struct ClassMetrics {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double sen = 0.0;  // percent; 0 when the denominator is empty
    double spe = 0.0;
    double ace = 0.0;
};

ClassMetrics metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn);
ClassMetrics class_metrics(const ConfusionMatrix& cm, int class_index);
std::vector<ClassMetrics> all_class_metrics(const ConfusionMatrix& cm);

struct MacroAverage {
    double sen = 0.0, spe = 0.0, ace = 0.0;
};

MacroAverage macro_average(std::span<const ClassMetrics> metrics);

/// Half-up rounding for display.
double round_half_up(double value, int decimals = 2);
std::string format_percent(double value);

// ----- learners driven by cross-validation -----

enum class Reduction { None, Le, Sdle };
enum class ClassifierKind { Knn, Mean, Cluster, Feedback };

struct LeConfig {
    manifold::GraphMode graph = manifold::GraphMode::NearestNeighbors;
    double graph_param = 10.0;
    manifold::WeightScheme weights = manifold::WeightScheme::Heat;
    /// Unset: mean squared pairwise distance.
    std::optional<double> t;
    /// LE keeps its own target dimension; the shared `dim` is the SDLE one.
    int dim = 10;
};

struct LearnerConfig {
    Reduction reduction = Reduction::Sdle;
    int dim = 83;
    manifold::SdleParams sdle;
    LeConfig le;
    ClassifierKind classifier = ClassifierKind::Feedback;
    classify::Measure measure = classify::Measure::Similarity;
    int knn_k = 1;
    int clusters_per_class = 2;
    classify::FeedbackParams feedback;

    void validate() const;
};

/// A fitted reduction + classifier. LE has no out-of-sample map, so it is
/// only usable through transductive evaluation (see cross_validate).
struct FittedLearner {
    Reduction reduction = Reduction::None;
    std::optional<manifold::SdleModel> sdle;
    ClassifierKind classifier = ClassifierKind::Feedback;
    std::optional<classify::KnnModel> knn;
    std::optional<classify::PrototypeSet> prototypes;

    Matrix embed(const Matrix& x) const;
    classify::Decision decide(const Eigen::Ref<const manifold::Vector>& embedded) const;
};

/// Fits the classifier on already-embedded training rows.
void fit_classifier(FittedLearner& learner, const FeatureMatrix& embedded, const LearnerConfig& config,
                    std::uint64_t seed);
FittedLearner fit_learner(const FeatureMatrix& train, const LearnerConfig& config, std::uint64_t seed);

/// LE embedding of all rows at once (unsupervised, so test rows may join).
Matrix le_embedding(const Matrix& x, const LearnerConfig& config);

struct Scheme {
    enum class Kind { KFold, LeaveOneOut };
    Kind kind = Kind::KFold;
    int folds = 7;
};

/// Fold id per sample; classes are shuffled by seed and dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

struct EvalReport {
    Scheme scheme;
    std::uint64_t seed = 0;
    std::string method;
    ConfusionMatrix confusion{1};
    std::vector<ClassMetrics> metrics;
    MacroAverage average;
    double accuracy = 0.0;
    std::vector<double> fold_accuracies;
};

EvalReport cross_validate(const FeatureMatrix& data, const LearnerConfig& config, const Scheme& scheme,
                          std::uint64_t seed, std::vector<std::string> class_names = {});

std::string describe(const LearnerConfig& config);
std::string report_json(const EvalReport& report);
/// Fixed-width table with TP FP FN TN SEN SPE ACE columns and an AVR row,
/// followed by the confusion matrix.
std::string report_table(const EvalReport& report);

std::string to_string(Reduction r);
std::string to_string(ClassifierKind c);
Reduction parse_reduction(const std::string& s);
ClassifierKind parse_classifier(const std::string& s);

}  // namespace fer::eval
