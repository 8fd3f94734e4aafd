#include "relief/learning/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "relief/error.hpp"

namespace relief {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd read_vector(const json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a non-empty array of rows");
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != cols) throw ValidationError(field, "rows have different lengths");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
    return m;
}

const json& need(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(key, "missing field");
    return j.at(key);
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    json j;
    j["format"] = "relief-vfa";
    j["version"] = kCheckpointVersion;
    j["method"] = ckpt.method;
    j["instance"] = ckpt.instance;
    j["seed"] = ckpt.seed;
    j["episodes"] = ckpt.episodes;
    j["truncated"] = ckpt.truncated;
    if (ckpt.linear) {
        json w = json::array();
        for (const auto& epoch : ckpt.linear->weights) {
            json row = json::array();
            for (const auto& d : epoch) row.push_back(d);
            w.push_back(row);
        }
        j["linear"] = {{"horizon", ckpt.linear->horizon()}, {"districts", ckpt.linear->districts()}, {"weights", w}};
    }
    if (ckpt.mlp) {
        json layers = json::array();
        for (const auto& l : ckpt.mlp->network().layers)
            layers.push_back({{"weights", matrix_json(l.weights)}, {"bias", vector_json(l.bias)}});
        j["mlp"] = {{"layers", layers},
                    {"input_mean", vector_json(ckpt.mlp->input_mean())},
                    {"input_scale", vector_json(ckpt.mlp->input_scale())},
                    {"output_mean", ckpt.mlp->output_mean()},
                    {"output_scale", ckpt.mlp->output_scale()}};
    }
    // 17 significant digits: doubles survive the round trip exactly
    return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("checkpoint", e.what());
    }
    try {
        if (need(j, "format").get<std::string>() != "relief-vfa") throw ValidationError("format", "not a value-function checkpoint");
        if (need(j, "version").get<int>() != kCheckpointVersion)
            throw ValidationError("version", "unsupported checkpoint version " + j["version"].dump());
        Checkpoint c;
        c.method = need(j, "method").get<std::string>();
        c.instance = j.value("instance", "");
        c.seed = j.value("seed", std::uint64_t{0});
        c.episodes = j.value("episodes", 0);
        c.truncated = j.value("truncated", false);
        if (j.contains("linear")) {
            const auto& lj = j["linear"];
            LinearVFA vfa(need(lj, "horizon").get<int>(), need(lj, "districts").get<int>());
            const auto& w = need(lj, "weights");
            if (w.size() != vfa.weights.size()) throw ValidationError("linear.weights", "expected one row per epoch");
            for (std::size_t t = 0; t < w.size(); ++t) {
                if (w[t].size() != vfa.weights[t].size())
                    throw ValidationError("linear.weights", "expected one weight vector per district");
                for (std::size_t n = 0; n < w[t].size(); ++n) vfa.weights[t][n] = w[t][n].get<DistrictWeights>();
            }
            c.linear = std::move(vfa);
        }
        if (j.contains("mlp")) {
            const auto& mj = j["mlp"];
            MlpVFA vfa;
            for (const auto& lj : need(mj, "layers"))
                vfa.network().layers.push_back({read_matrix(need(lj, "weights"), "mlp.layers.weights"),
                                                read_vector(need(lj, "bias"), "mlp.layers.bias")});
            const auto& layers = vfa.network().layers;
            for (std::size_t l = 0; l < layers.size(); ++l) {
                if (layers[l].bias.size() != layers[l].weights.rows() ||
                    (l > 0 && layers[l].weights.cols() != layers[l - 1].weights.rows()))
                    throw ValidationError("mlp.layers", "layer shapes do not chain");
            }
            if (layers.empty() || layers.back().weights.rows() != 1)
                throw ValidationError("mlp.layers", "the last layer must have one output");
            vfa.set_standardization(read_vector(need(mj, "input_mean"), "mlp.input_mean"),
                                    read_vector(need(mj, "input_scale"), "mlp.input_scale"),
                                    need(mj, "output_mean").get<double>(), need(mj, "output_scale").get<double>());
            if (vfa.input_mean().size() != vfa.network().input_size() || vfa.input_scale().size() != vfa.network().input_size())
                throw ValidationError("mlp.input_mean", "standardization does not match the input layer");
            c.mlp = std::move(vfa);
        }
        if (c.linear.has_value() == c.mlp.has_value())
            throw ValidationError("checkpoint", "exactly one of 'linear' and 'mlp' must be present");
        return c;
    } catch (const json::exception& e) {
        throw ValidationError("checkpoint", e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw ValidationError("checkpoint", "cannot write " + path.string());
    out << checkpoint_to_json(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("checkpoint", "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace relief
