// Model bundle: a two-line text header followed by a JSON payload. The
// checksum covers the payload bytes exactly as written.
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fer/pipeline.hpp"
#include "json.hpp"

namespace fer::pipeline {

using nlohmann::ordered_json;
using Json = nlohmann::json;

namespace {

constexpr const char* kMagic = "FERBUNDLE";
constexpr int kVersion = 1;

ordered_json matrix_json(const manifold::Matrix& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    // Row-major so the text reads like the matrix.
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

manifold::Matrix matrix_from(const Json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        fail(ErrorKind::Bundle, "bundle: matrix shape does not match its data");
    manifold::Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
    return m;
}

ordered_json vector_json(const manifold::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

manifold::Vector vector_from(const Json& j) {
    const std::vector<double> d = j.get<std::vector<double>>();
    return Eigen::Map<const manifold::Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

ordered_json learner_json(const eval::FittedLearner& l) {
    ordered_json j;
    j["reduction"] = eval::to_string(l.reduction);
    if (l.sdle) {
        j["sdle"] = {{"input_dim", l.sdle->input_dim},
                     {"penalty", l.sdle->penalty},
                     {"eigenvalues", vector_json(l.sdle->eigenvalues)},
                     {"basis", matrix_json(l.sdle->basis)},
                     {"projection", matrix_json(l.sdle->projection)}};
    }
    j["classifier"] = eval::to_string(l.classifier);
    if (l.knn) j["knn"] = {{"k", l.knn->k}, {"labels", l.knn->labels}, {"train", matrix_json(l.knn->train)}};
    if (l.prototypes) {
        ordered_json items = ordered_json::array();
        for (const auto& p : l.prototypes->prototypes) items.push_back({{"label", p.label}, {"vector", vector_json(p.vector)}});
        j["prototypes"] = {{"method", classify::to_string(l.prototypes->method)},
                           {"measure", classify::to_string(l.prototypes->measure)},
                           {"items", items}};
    }
    return j;
}

eval::FittedLearner learner_from(const Json& j, const PipelineConfig& config) {
    eval::FittedLearner l;
    l.reduction = eval::parse_reduction(j.at("reduction").get<std::string>());
    l.classifier = eval::parse_classifier(j.at("classifier").get<std::string>());
    if (l.reduction == eval::Reduction::Le) fail(ErrorKind::Bundle, "bundle: LE models cannot be stored");
    int dim = 0;
    if (l.reduction == eval::Reduction::Sdle) {
        const Json& s = j.at("sdle");
        manifold::SdleModel m;
        m.input_dim = s.at("input_dim").get<int>();
        m.penalty = s.at("penalty").get<double>();
        m.eigenvalues = vector_from(s.at("eigenvalues"));
        m.basis = matrix_from(s.at("basis"));
        m.projection = matrix_from(s.at("projection"));
        m.params = config.learner.sdle;
        if (m.basis.rows() != m.input_dim || m.basis.cols() != m.projection.rows() ||
            m.eigenvalues.size() != m.projection.cols())
            fail(ErrorKind::Bundle, "bundle: inconsistent SDLE shapes");
        dim = m.output_dim();
        l.sdle = std::move(m);
    }
    if (l.classifier == eval::ClassifierKind::Knn) {
        const Json& k = j.at("knn");
        l.knn = classify::KnnModel(matrix_from(k.at("train")), k.at("labels").get<std::vector<int>>(), k.at("k").get<int>());
        if (dim > 0 && l.knn->train.cols() != dim) fail(ErrorKind::Bundle, "bundle: KNN dimension mismatch");
    } else {
        const Json& p = j.at("prototypes");
        classify::PrototypeSet set;
        set.method = classify::parse_prototype_method(p.at("method").get<std::string>());
        set.measure = classify::parse_measure(p.at("measure").get<std::string>());
        for (const auto& item : p.at("items")) set.prototypes.push_back({item.at("label").get<int>(), vector_from(item.at("vector"))});
        if (set.prototypes.empty()) fail(ErrorKind::Bundle, "bundle: empty prototype set");
        for (const auto& proto : set.prototypes)
            if (proto.vector.size() != set.prototypes.front().vector.size() || (dim > 0 && proto.vector.size() != dim))
                fail(ErrorKind::Bundle, "bundle: prototype dimension mismatch");
        l.prototypes = std::move(set);
    }
    return l;
}

}  // namespace

std::string checksum_hex(const std::string& payload) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string bundle_payload(const ModelBundle& bundle) {
    ordered_json j;
    j["format"] = "fer-model";
    j["version"] = kVersion;
    j["config"] = ordered_json::parse(config_to_json(bundle.config));
    j["cascade"] = bundle.cascade ? ordered_json::parse(detect::cascade_to_json(*bundle.cascade)) : ordered_json(nullptr);
    j["learner"] = learner_json(bundle.learner);
    return j.dump() + "\n";
}

std::string serialize_bundle(ModelBundle& bundle) {
    const std::string payload = bundle_payload(bundle);
    bundle.checksum = checksum_hex(payload);
    return std::string(kMagic) + " " + std::to_string(kVersion) + "\nchecksum fnv1a64:" + bundle.checksum + "\n" + payload;
}

ModelBundle parse_bundle(const std::string& text) {
    const auto nl1 = text.find('\n');
    const auto nl2 = nl1 == std::string::npos ? std::string::npos : text.find('\n', nl1 + 1);
    if (nl2 == std::string::npos) fail(ErrorKind::Bundle, "bundle: truncated header");
    std::istringstream head(text.substr(0, nl1));
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kMagic) fail(ErrorKind::Bundle, "bundle: not a model bundle");
    if (version != kVersion)
        fail(ErrorKind::Bundle, "bundle: version " + std::to_string(version) + " unsupported (expected " +
                                    std::to_string(kVersion) + ")");
    const std::string sum_line = text.substr(nl1 + 1, nl2 - nl1 - 1);
    const std::string prefix = "checksum fnv1a64:";
    if (sum_line.rfind(prefix, 0) != 0) fail(ErrorKind::Bundle, "bundle: missing checksum line");
    const std::string stored = sum_line.substr(prefix.size());
    const std::string payload = text.substr(nl2 + 1);
    const std::string actual = checksum_hex(payload);
    if (stored != actual) fail(ErrorKind::Bundle, "bundle: checksum mismatch (stored " + stored + ", computed " + actual + ")");

    ModelBundle b;
    b.version = version;
    b.checksum = actual;
    try {
        const Json j = Json::parse(payload);
        if (j.at("format").get<std::string>() != "fer-model") fail(ErrorKind::Bundle, "bundle: wrong payload format");
        if (j.at("version").get<int>() != kVersion) fail(ErrorKind::Bundle, "bundle: payload version mismatch");
        b.config = config_from_json(j.at("config").dump());
        if (!j.at("cascade").is_null()) b.cascade = detect::cascade_from_json(j.at("cascade").dump());
        b.learner = learner_from(j.at("learner"), b.config);
    } catch (const Json::exception& e) {
        fail(ErrorKind::Bundle, std::string("bundle: malformed payload: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Bundle) throw;
        fail(ErrorKind::Bundle, std::string("bundle: invalid content: ") + e.what());
    }
    if (b.config.detector.enabled && !b.cascade) fail(ErrorKind::Bundle, "bundle: detector enabled but no cascade stored");
    return b;
}

void save_bundle(const std::string& path, ModelBundle& bundle) {
    const std::string text = serialize_bundle(bundle);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write bundle '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open bundle '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bundle(ss.str());
}

}  // namespace fer::pipeline
