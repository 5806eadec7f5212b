#include "bigat/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bigat/errors.hpp"
#include "bigat/rng.hpp"

namespace bigat {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::GCN: return "gcn";
        case Variant::GAT: return "gat";
        case Variant::BiGAT: return "bigat";
        case Variant::BiGATUndirected: return "bigat-ud";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    if (name == "gcn") return Variant::GCN;
    if (name == "gat") return Variant::GAT;
    if (name == "bigat") return Variant::BiGAT;
    if (name == "bigat-ud") return Variant::BiGATUndirected;
    throw ConfigError("unknown model '" + name + "'; valid variants: gcn, gat, bigat, bigat-ud");
}

std::vector<Param*> BigatModel::free_params() {
    std::vector<Param*> out = {&beta1};
    if (bimodal()) out.push_back(&beta2);
    if (config.variant != Variant::GCN) {
        out.push_back(&a_src);
        if (config.variant != Variant::BiGATUndirected) out.push_back(&a_dst);
    }
    out.push_back(&readout_w);
    out.push_back(&readout_b);
    return out;
}

void BigatModel::reset_grads() {
    for (Param* p : {&beta1, &beta2, &a_src, &a_dst, &readout_w, &readout_b}) p->reset_grad();
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (double& v : m.values) v = u(rng);
    return m;
}

}  // namespace

BigatModel init_params(const ModelConfig& config) {
    if (config.hidden_dim < 1 || config.n_classes < 2)
        throw ConfigError("init_params: need hidden_dim >= 1 and n_classes >= 2");
    const std::size_t h = config.hidden_dim, d = config.input_dim, c = config.n_classes;
    BigatModel model;
    model.config = config;
    Rng rng(config.seed);
    // fixed draw order: beta1, beta2, a_src, a_dst, W; biases zero
    model.beta1.value = glorot(h, d, d, h, rng);
    model.beta2.value = glorot(h, d, d, h, rng);
    model.a_src.value = glorot(h, 1, h, 1, rng);
    model.a_dst.value = glorot(h, 1, h, 1, rng);
    model.readout_w.value = glorot(c, h, h, c, rng);
    model.readout_b.value = Matrix(c, 1);
    for (Param* p : {&model.beta1, &model.beta2, &model.a_src, &model.a_dst, &model.readout_w,
                     &model.readout_b})
        p->grad = Matrix(p->value.rows, p->value.cols);
    return model;
}

Matrix embed(BigatModel& model, const Matrix& x, const ClusterAssignment& clusters) {
    if (x.cols != model.config.input_dim)
        throw DimensionError("embed: feature width != input_dim");
    const std::size_t h = model.config.hidden_dim;
    Matrix m(x.rows, h);
    for (std::size_t v = 0; v < x.rows; ++v) {
        if (model.bimodal() && clusters.source[v] == ClusterSource::Unset)
            throw DataError("embed: node " + std::to_string(v) + " has no cluster label");
        const Matrix& beta = model.beta(model.bimodal() ? clusters.labels[v] : 1).value;
        for (std::size_t i = 0; i < h; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j) acc += beta(i, j) * x(v, j);
            m(v, i) = acc;
        }
    }
    return m;
}

AttentionCoefficients attention(BigatModel& model, const Matrix& m, const SpatialGraph& g) {
    if (m.rows != g.n) throw DimensionError("attention: message rows != node count");
    const std::size_t h = model.config.hidden_dim;
    const Matrix& asrc = model.a_src.value;
    const Matrix& adst = model.attn_dst().value;

    std::vector<double> src_dot(g.n), dst_dot(g.n);
    for (std::size_t v = 0; v < g.n; ++v) {
        double s = 0.0, d = 0.0;
        for (std::size_t i = 0; i < h; ++i) {
            s += asrc(i, 0) * m(v, i);
            d += adst(i, 0) * m(v, i);
        }
        src_dot[v] = s;
        dst_dot[v] = d;
    }

    AttentionCoefficients out(g.n);
    for (std::size_t v = 0; v < g.n; ++v) {
        // normalization set N_v plus self, in ascending id order
        std::vector<std::size_t> set = g.neighbors[v];
        set.insert(std::lower_bound(set.begin(), set.end(), v), v);
        std::vector<double> scores(set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double raw = src_dot[set[i]] + dst_dot[v];
            scores[i] = raw >= 0.0 ? raw : model.config.leaky_slope * raw;
        }
        const std::vector<double> alpha = softmax(scores);
        out[v].resize(set.size());
        for (std::size_t i = 0; i < set.size(); ++i)
            out[v][i] = {set[i], scores[i], alpha[i]};
    }
    return out;
}

Matrix aggregate(const AttentionCoefficients& alpha, const Matrix& m) {
    Matrix out(m.rows, m.cols);
    for (std::size_t v = 0; v < alpha.size(); ++v) {
        for (const auto& e : alpha[v]) {
            for (std::size_t i = 0; i < m.cols; ++i) out(v, i) += e.alpha * m(e.u, i);
        }
    }
    return out;
}

Logits readout(BigatModel& model, const Matrix& m_agg) {
    if (m_agg.cols != model.config.hidden_dim)
        throw DimensionError("readout: message width != hidden_dim");
    const Matrix& w = model.readout_w.value;
    const Matrix& b = model.readout_b.value;
    Matrix out(m_agg.rows, w.rows);
    for (std::size_t v = 0; v < m_agg.rows; ++v) {
        for (std::size_t c = 0; c < w.rows; ++c) {
            double acc = b(c, 0);
            for (std::size_t i = 0; i < w.cols; ++i) acc += w(c, i) * m_agg(v, i);
            out(v, c) = acc;
        }
    }
    return out;
}

std::vector<int> predict(const Logits& logits) {
    std::vector<int> out(logits.rows);
    for (std::size_t v = 0; v < logits.rows; ++v) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (logits(v, c) > logits(v, best)) best = c;  // ties to lowest index
        out[v] = static_cast<int>(best);
    }
    return out;
}

Matrix gcn_propagation(const SpatialGraph& g) {
    std::vector<double> inv_sqrt_deg(g.n);
    for (std::size_t v = 0; v < g.n; ++v)
        inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(g.neighbors[v].size() + 1));
    Matrix p(g.n, g.n);
    for (std::size_t v = 0; v < g.n; ++v) {
        p(v, v) = inv_sqrt_deg[v] * inv_sqrt_deg[v];
        for (std::size_t u : g.neighbors[v]) p(v, u) = inv_sqrt_deg[v] * inv_sqrt_deg[u];
    }
    return p;
}

Logits gcn_forward(BigatModel& model, const Matrix& x, const SpatialGraph& g) {
    const Matrix m = matmul(x, transpose(model.beta1.value));
    const Matrix h = matmul(gcn_propagation(g), m);
    return readout(model, h);
}

Logits forward(BigatModel& model, const Matrix& x, const SpatialGraph& g,
               const ClusterAssignment& clusters) {
    if (model.config.variant == Variant::GCN) return gcn_forward(model, x, g);
    const Matrix m = embed(model, x, clusters);
    const AttentionCoefficients alpha = attention(model, m, g);
    return readout(model, aggregate(alpha, m));
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"values", m.values}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.values = j.at("values").get<std::vector<double>>();
    if (m.values.size() != m.rows * m.cols)
        throw DataError("checkpoint: matrix value count does not match shape");
    return m;
}

}  // namespace

void save_checkpoint(const BigatModel& model, const std::string& path) {
    json j;
    j["version"] = 1;
    j["config"] = {{"input_dim", model.config.input_dim},
                   {"hidden_dim", model.config.hidden_dim},
                   {"n_classes", model.config.n_classes},
                   {"variant", variant_name(model.config.variant)},
                   {"leaky_slope", model.config.leaky_slope},
                   {"seed", model.config.seed}};
    j["params"] = {{"beta1", matrix_to_json(model.beta1.value)},
                   {"beta2", matrix_to_json(model.beta2.value)},
                   {"a_src", matrix_to_json(model.a_src.value)},
                   {"a_dst", matrix_to_json(model.a_dst.value)},
                   {"readout_w", matrix_to_json(model.readout_w.value)},
                   {"readout_b", matrix_to_json(model.readout_b.value)}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out << j.dump(2) << "\n";
}

BigatModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("checkpoint " + path + ": " + e.what());
    }
    if (j.at("version").get<int>() != 1)
        throw DataError("checkpoint " + path + ": unsupported version");
    ModelConfig cfg;
    const auto& c = j.at("config");
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    cfg.n_classes = c.at("n_classes").get<std::size_t>();
    cfg.variant = parse_variant(c.at("variant").get<std::string>());
    cfg.leaky_slope = c.at("leaky_slope").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    BigatModel model = init_params(cfg);
    const auto& p = j.at("params");
    model.beta1.value = matrix_from_json(p.at("beta1"));
    model.beta2.value = matrix_from_json(p.at("beta2"));
    model.a_src.value = matrix_from_json(p.at("a_src"));
    model.a_dst.value = matrix_from_json(p.at("a_dst"));
    model.readout_w.value = matrix_from_json(p.at("readout_w"));
    model.readout_b.value = matrix_from_json(p.at("readout_b"));
    return model;
}

}  // namespace bigat
