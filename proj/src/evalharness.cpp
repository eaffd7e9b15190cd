#include "fer/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "fer/rng.hpp"
#include "json.hpp"

namespace fer::eval {

const std::vector<std::string>& default_class_names() {
    static const std::vector<std::string> names{"happy", "sad", "fear", "anger", "surprise", "disgust", "calm"};
    return names;
}

ConfusionMatrix::ConfusionMatrix(int classes, std::vector<std::string> names)
    : classes_(classes), names_(std::move(names)),
      counts_(static_cast<std::size_t>(std::max(classes, 0)) * std::max(classes, 0), 0) {
    require(classes >= 1, "ConfusionMatrix: need at least one class");
    if (names_.empty()) {
        for (int i = 0; i < classes; ++i) {
            names_.push_back(i < static_cast<int>(default_class_names().size()) && classes <= 7
                                 ? default_class_names()[i]
                                 : "class" + std::to_string(i));
        }
    }
    require(static_cast<int>(names_.size()) == classes, "ConfusionMatrix: class-name count mismatch");
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) {
    require(truth >= 0 && truth < classes_ && predicted >= 0 && predicted < classes_,
            "ConfusionMatrix: label out of range");
    require(count >= 0, "ConfusionMatrix: negative count");
    counts_[index(truth, predicted)] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    require(other.classes_ == classes_, "ConfusionMatrix: class count mismatch in merge");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
    std::int64_t t = 0;
    for (int j = 0; j < classes_; ++j) t += at(truth, j);
    return t;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
    std::int64_t t = 0;
    for (int i = 0; i < classes_; ++i) t += at(i, predicted);
    return t;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < classes_; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int classes,
                                 std::vector<std::string> names) {
    require(truth.size() == predicted.size(), "confusion_matrix: truth and prediction lengths differ");
    ConfusionMatrix cm(classes, std::move(names));
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

ClassMetrics metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
    require(tp >= 0 && fp >= 0 && fn >= 0 && tn >= 0, "class_metrics: negative count");
    ClassMetrics m{tp, fp, fn, tn, 0.0, 0.0, 0.0};
    const auto pct = [](std::int64_t num, std::int64_t den) {
        return den > 0 ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    m.sen = pct(tp, tp + fn);
    m.spe = pct(tn, tn + fp);
    m.ace = pct(tp + tn, tp + fp + fn + tn);
    return m;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, int c) {
    require(c >= 0 && c < cm.classes(), "class_metrics: class index out of range");
    const std::int64_t tp = cm.at(c, c);
    const std::int64_t fn = cm.row_sum(c) - tp;
    const std::int64_t fp = cm.col_sum(c) - tp;
    const std::int64_t tn = cm.total() - tp - fn - fp;
    return metrics_from_counts(tp, fp, fn, tn);
}

std::vector<ClassMetrics> all_class_metrics(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out;
    for (int c = 0; c < cm.classes(); ++c) out.push_back(class_metrics(cm, c));
    return out;
}

MacroAverage macro_average(std::span<const ClassMetrics> metrics) {
    require(!metrics.empty(), "macro_average: empty metric list");
    MacroAverage avg;
    for (const ClassMetrics& m : metrics) {
        avg.sen += m.sen;
        avg.spe += m.spe;
        avg.ace += m.ace;
    }
    const auto n = static_cast<double>(metrics.size());
    avg.sen /= n;
    avg.spe /= n;
    avg.ace /= n;
    return avg;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    // The nudge absorbs binary representation error on exact half values.
    return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round_half_up(value, 2));
    return buf;
}

// ----- learners -----

void LearnerConfig::validate() const {
    require(dim >= 1, "learner: target dimension must be >= 1");
    sdle.validate();
    require(le.graph_param > 0.0, "learner: LE graph parameter must be positive");
    require(!le.t || *le.t > 0.0, "learner: LE heat parameter must be positive");
    require(le.dim >= 1, "learner: LE dimension must be >= 1");
    require(knn_k >= 1, "learner: knn_k must be >= 1");
    require(clusters_per_class >= 1, "learner: clusters_per_class must be >= 1");
    require(feedback.rate > 0.0 && feedback.rate <= 1.0, "learner: feedback rate must lie in (0, 1]");
    require(feedback.epochs >= 1, "learner: feedback epochs must be >= 1");
}

Matrix FittedLearner::embed(const Matrix& x) const {
    switch (reduction) {
    case Reduction::None: return x;
    case Reduction::Sdle: return manifold::sdle_transform(*sdle, x);
    case Reduction::Le: break;
    }
    fail(ErrorKind::InvalidInput, "Laplacian eigenmaps have no out-of-sample map; use transductive evaluation");
}

classify::Decision FittedLearner::decide(const Eigen::Ref<const manifold::Vector>& embedded) const {
    if (classifier == ClassifierKind::Knn) {
        const int label = classify::knn_classify(*knn, embedded);
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < knn->train.rows(); ++i)
            if (knn->labels[i] == label) best = std::min(best, (knn->train.row(i).transpose() - embedded).norm());
        return {label, -best};
    }
    return classify::nearest_prototype(*prototypes, embedded);
}

void fit_classifier(FittedLearner& learner, const FeatureMatrix& embedded, const LearnerConfig& config,
                    std::uint64_t seed) {
    learner.classifier = config.classifier;
    switch (config.classifier) {
    case ClassifierKind::Knn:
        learner.knn = classify::KnnModel(embedded.x, embedded.labels, std::min(config.knn_k, embedded.rows()));
        break;
    case ClassifierKind::Mean:
        learner.prototypes = classify::mean_prototypes(embedded, config.measure);
        break;
    case ClassifierKind::Cluster:
        learner.prototypes = classify::cluster_prototypes(embedded, config.clusters_per_class, seed, config.measure);
        break;
    case ClassifierKind::Feedback: {
        classify::FeedbackParams fp = config.feedback;
        fp.seed = seed;
        learner.prototypes = classify::feedback_prototypes(embedded, fp, config.measure);
        break;
    }
    }
}

FittedLearner fit_learner(const FeatureMatrix& train, const LearnerConfig& config, std::uint64_t seed) {
    config.validate();
    FittedLearner learner;
    learner.reduction = config.reduction;
    FeatureMatrix embedded;
    embedded.labels = train.labels;
    switch (config.reduction) {
    case Reduction::None: embedded.x = train.x; break;
    case Reduction::Sdle:
        learner.sdle = manifold::sdle_fit(train, config.dim, config.sdle);
        embedded.x = manifold::sdle_transform(*learner.sdle, train.x);
        break;
    case Reduction::Le:
        fail(ErrorKind::InvalidInput, "Laplacian eigenmaps have no out-of-sample map; use transductive evaluation");
    }
    fit_classifier(learner, embedded, config, seed);
    return learner;
}

Matrix le_embedding(const Matrix& x, const LearnerConfig& config) {
    const manifold::NeighborGraph g = manifold::build_graph(x, config.le.graph, config.le.graph_param);
    const double t = config.le.t ? *config.le.t : manifold::mean_squared_distance(x);
    const manifold::WeightMatrix w = manifold::edge_weights(g, x, config.le.weights, t > 0.0 ? t : 1.0);
    return manifold::le_embed(w, std::min<int>(config.le.dim, static_cast<int>(x.rows()) - 1)).embedding;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    require(folds >= 2, "stratified_folds: need at least 2 folds");
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    std::vector<int> fold(labels.size(), 0);
    Rng rng(seed);
    int offset = 0;
    for (auto& [label, rows] : by_class) {
        require(static_cast<int>(rows.size()) >= folds,
                "cross_validate: class " + std::to_string(label) + " has fewer samples than folds");
        rng.shuffle(rows);
        for (std::size_t r = 0; r < rows.size(); ++r) fold[rows[r]] = static_cast<int>((r + offset) % folds);
        offset += static_cast<int>(rows.size());
    }
    return fold;
}

EvalReport cross_validate(const FeatureMatrix& data, const LearnerConfig& config, const Scheme& scheme,
                          std::uint64_t seed, std::vector<std::string> class_names) {
    data.validate();
    config.validate();
    require(data.labeled() && data.rows() >= 2, "cross_validate: labeled data required");
    int classes = 0;
    for (int l : data.labels) {
        require(l >= 0, "cross_validate: labels must be non-negative class indices");
        classes = std::max(classes, l + 1);
    }
    if (!class_names.empty()) {
        require(static_cast<int>(class_names.size()) >= classes, "cross_validate: too few class names");
        classes = static_cast<int>(class_names.size());
    }

    std::vector<int> fold;
    int fold_count = 0;
    if (scheme.kind == Scheme::Kind::LeaveOneOut) {
        fold.resize(data.labels.size());
        for (std::size_t i = 0; i < fold.size(); ++i) fold[i] = static_cast<int>(i);
        fold_count = data.rows();
    } else {
        fold = stratified_folds(data.labels, scheme.folds, seed);
        fold_count = scheme.folds;
    }

    std::optional<Matrix> transductive;
    if (config.reduction == Reduction::Le) transductive = le_embedding(data.x, config);

    EvalReport report;
    report.scheme = scheme;
    report.seed = seed;
    report.method = describe(config);
    report.confusion = ConfusionMatrix(classes, class_names);
    for (int f = 0; f < fold_count; ++f) {
        std::vector<int> train_rows, test_rows;
        for (int i = 0; i < data.rows(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
        if (test_rows.empty()) continue;

        const Matrix& source = transductive ? *transductive : data.x;
        FeatureMatrix train;
        train.x.resize(static_cast<Eigen::Index>(train_rows.size()), source.cols());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            train.x.row(static_cast<Eigen::Index>(r)) = source.row(train_rows[r]);
            train.labels.push_back(data.labels[train_rows[r]]);
        }
        const std::uint64_t fold_seed = seed + static_cast<std::uint64_t>(f);

        FittedLearner learner;
        if (transductive) {
            learner.reduction = Reduction::None;
            fit_classifier(learner, train, config, fold_seed);
        } else {
            learner = fit_learner(train, config, fold_seed);
        }

        Matrix test(static_cast<Eigen::Index>(test_rows.size()), source.cols());
        for (std::size_t r = 0; r < test_rows.size(); ++r) test.row(static_cast<Eigen::Index>(r)) = source.row(test_rows[r]);
        const Matrix embedded = learner.embed(test);
        int correct = 0;
        for (std::size_t r = 0; r < test_rows.size(); ++r) {
            const int truth = data.labels[test_rows[r]];
            const int pred = learner.decide(embedded.row(static_cast<Eigen::Index>(r)).transpose()).label;
            report.confusion.add(truth, pred);
            if (pred == truth) ++correct;
        }
        report.fold_accuracies.push_back(100.0 * correct / static_cast<double>(test_rows.size()));
    }
    report.metrics = all_class_metrics(report.confusion);
    report.average = macro_average(report.metrics);
    report.accuracy = 100.0 * static_cast<double>(report.confusion.trace()) / static_cast<double>(report.confusion.total());
    return report;
}

std::string to_string(Reduction r) {
    switch (r) {
    case Reduction::None: return "none";
    case Reduction::Le: return "le";
    case Reduction::Sdle: return "sdle";
    }
    return "none";
}

std::string to_string(ClassifierKind c) {
    switch (c) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Mean: return "mean";
    case ClassifierKind::Cluster: return "cluster";
    case ClassifierKind::Feedback: return "feedback";
    }
    return "knn";
}

Reduction parse_reduction(const std::string& s) {
    if (s == "none") return Reduction::None;
    if (s == "le") return Reduction::Le;
    if (s == "sdle") return Reduction::Sdle;
    fail(ErrorKind::InvalidInput, "unknown reduction '" + s + "'");
}

ClassifierKind parse_classifier(const std::string& s) {
    if (s == "knn") return ClassifierKind::Knn;
    if (s == "mean") return ClassifierKind::Mean;
    if (s == "cluster") return ClassifierKind::Cluster;
    if (s == "feedback") return ClassifierKind::Feedback;
    fail(ErrorKind::InvalidInput, "unknown classifier '" + s + "'");
}

std::string describe(const LearnerConfig& config) {
    std::string s = to_string(config.reduction);
    if (config.reduction != Reduction::None)
        s += "(" + std::to_string(config.reduction == Reduction::Le ? config.le.dim : config.dim) + ")";
    s += "+" + to_string(config.classifier);
    if (config.classifier != ClassifierKind::Knn) s += "/" + classify::to_string(config.measure);
    return s;
}

std::string report_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "fer-eval-report";
    j["version"] = 1;
    j["method"] = report.method;
    j["scheme"] = report.scheme.kind == Scheme::Kind::LeaveOneOut ? "leave-one-out"
                                                                  : "k-fold(" + std::to_string(report.scheme.folds) + ")";
    j["seed"] = report.seed;
    j["classes"] = report.confusion.names();
    ordered_json cm = ordered_json::array();
    for (int i = 0; i < report.confusion.classes(); ++i) {
        ordered_json row = ordered_json::array();
        for (int k = 0; k < report.confusion.classes(); ++k) row.push_back(report.confusion.at(i, k));
        cm.push_back(row);
    }
    j["confusion"] = cm;
    ordered_json metrics = ordered_json::array();
    for (std::size_t c = 0; c < report.metrics.size(); ++c) {
        const ClassMetrics& m = report.metrics[c];
        metrics.push_back({{"class", report.confusion.names()[c]},
                           {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
                           {"sen", m.sen}, {"spe", m.spe}, {"ace", m.ace}});
    }
    j["metrics"] = metrics;
    j["average"] = {{"sen", report.average.sen}, {"spe", report.average.spe}, {"ace", report.average.ace}};
    j["accuracy"] = report.accuracy;
    j["fold_accuracies"] = report.fold_accuracies;
    return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    out << "method: " << report.method << "  accuracy: " << format_percent(report.accuracy) << "%\n";
    std::snprintf(line, sizeof line, "%-10s %5s %5s %5s %5s %8s %8s %8s\n", "TAG", "TP", "FP", "FN", "TN", "SEN",
                  "SPE", "ACE");
    out << line;
    for (std::size_t c = 0; c < report.metrics.size(); ++c) {
        const ClassMetrics& m = report.metrics[c];
        std::snprintf(line, sizeof line, "%-10s %5lld %5lld %5lld %5lld %8s %8s %8s\n",
                      report.confusion.names()[c].c_str(), static_cast<long long>(m.tp),
                      static_cast<long long>(m.fp), static_cast<long long>(m.fn), static_cast<long long>(m.tn),
                      format_percent(m.sen).c_str(), format_percent(m.spe).c_str(), format_percent(m.ace).c_str());
        out << line;
    }
    std::snprintf(line, sizeof line, "%-10s %5s %5s %5s %5s %8s %8s %8s\n", "AVR", "", "", "", "",
                  format_percent(report.average.sen).c_str(), format_percent(report.average.spe).c_str(),
                  format_percent(report.average.ace).c_str());
    out << line << "\nconfusion (rows = truth, columns = predicted)\n";
    out << std::string(10, ' ');
    for (const auto& n : report.confusion.names()) {
        std::snprintf(line, sizeof line, " %8.8s", n.c_str());
        out << line;
    }
    out << '\n';
    for (int i = 0; i < report.confusion.classes(); ++i) {
        std::snprintf(line, sizeof line, "%-10.10s", report.confusion.names()[i].c_str());
        out << line;
        for (int k = 0; k < report.confusion.classes(); ++k) {
            std::snprintf(line, sizeof line, " %8lld", static_cast<long long>(report.confusion.at(i, k)));
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fer::eval
