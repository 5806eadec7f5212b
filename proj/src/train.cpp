#include "bigat/train.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "bigat/errors.hpp"

namespace bigat {

namespace {

void check_mask_classes(const std::vector<int>& labels, const TrainMask& mask,
                        std::size_t n_classes) {
    std::set<int> seen;
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) seen.insert(labels[v]);
    if (seen.empty()) throw DataError("training mask is empty");
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (!seen.count(static_cast<int>(c)))
            throw DataError("training set has no node of class " + std::to_string(c) +
                            (n_classes == 2 ? " (bimodal structure unidentifiable)" : ""));
    }
}

// softmax rows and per-row log-sum-exp for the masked CE
double ce_forward(const Logits& logits, const std::vector<int>& labels, const TrainMask& mask,
                  Matrix* dlogits) {
    std::size_t n_masked = 0;
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) ++n_masked;
    if (n_masked == 0) throw DataError("masked_cross_entropy: empty mask");

    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(n_masked);
    for (std::size_t v = 0; v < logits.rows; ++v) {
        if (!mask[v]) continue;
        const auto row = logits.row(v);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double z : row) sum += std::exp(z - mx);
        const double lse = mx + std::log(sum);
        loss += (lse - row[labels[v]]) * inv;
        if (dlogits) {
            for (std::size_t c = 0; c < logits.cols; ++c) {
                double p = std::exp(row[c] - lse);
                if (c == static_cast<std::size_t>(labels[v])) p -= 1.0;
                (*dlogits)(v, c) = p * inv;
            }
        }
    }
    return loss;
}

// dW, db, dM' from dO; returns dM' (n x hidden)
Matrix readout_backward(BigatModel& model, const Matrix& m_agg, const Matrix& dlogits) {
    const Matrix& w = model.readout_w.value;
    Matrix dm(m_agg.rows, m_agg.cols);
    for (std::size_t v = 0; v < m_agg.rows; ++v) {
        for (std::size_t c = 0; c < w.rows; ++c) {
            const double g = dlogits(v, c);
            if (g == 0.0) continue;
            model.readout_b.grad(c, 0) += g;
            for (std::size_t i = 0; i < w.cols; ++i) {
                model.readout_w.grad(c, i) += g * m_agg(v, i);
                dm(v, i) += g * w(c, i);
            }
        }
    }
    return dm;
}

void embed_backward(BigatModel& model, const Matrix& x, const ClusterAssignment& clusters,
                    const Matrix& dm) {
    for (std::size_t v = 0; v < x.rows; ++v) {
        Matrix& dbeta = model.beta(model.bimodal() ? clusters.labels[v] : 1).grad;
        for (std::size_t i = 0; i < dm.cols; ++i) {
            const double g = dm(v, i);
            if (g == 0.0) continue;
            for (std::size_t j = 0; j < x.cols; ++j) dbeta(i, j) += g * x(v, j);
        }
    }
}

double gat_loss_and_grad(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                         const ClusterAssignment& clusters, const std::vector<int>& labels,
                         const TrainMask& mask) {
    const std::size_t h = model.config.hidden_dim;
    const Matrix m = embed(model, x, clusters);
    const AttentionCoefficients alpha = attention(model, m, g);
    const Matrix m_agg = aggregate(alpha, m);
    const Logits logits = readout(model, m_agg);

    Matrix dlogits(logits.rows, logits.cols);
    const double loss = ce_forward(logits, labels, mask, &dlogits);
    const Matrix dm_agg = readout_backward(model, m_agg, dlogits);

    Matrix dm(m.rows, m.cols);
    std::vector<double> d_src_dot(g.n, 0.0), d_dst_dot(g.n, 0.0);
    const double slope = model.config.leaky_slope;
    for (std::size_t v = 0; v < g.n; ++v) {
        const auto& entries = alpha[v];
        // aggregation: m'_v = sum_u alpha_vu m_u
        std::vector<double> dalpha(entries.size(), 0.0);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            for (std::size_t j = 0; j < h; ++j) {
                dalpha[i] += dm_agg(v, j) * m(e.u, j);
                dm(e.u, j) += e.alpha * dm_agg(v, j);
            }
        }
        // softmax over the normalization set
        double dot = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) dot += entries[i].alpha * dalpha[i];
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            const double de = e.alpha * (dalpha[i] - dot);
            const double draw = de * (e.score >= 0.0 ? 1.0 : slope);
            d_src_dot[e.u] += draw;
            d_dst_dot[v] += draw;
        }
    }
    const Matrix& asrc = model.a_src.value;
    const Matrix& adst = model.attn_dst().value;
    Matrix& dasrc = model.a_src.grad;
    Matrix& dadst = model.attn_dst().grad;  // lands in a_src when tied
    for (std::size_t w = 0; w < g.n; ++w) {
        for (std::size_t i = 0; i < h; ++i) {
            dm(w, i) += d_src_dot[w] * asrc(i, 0) + d_dst_dot[w] * adst(i, 0);
            dasrc(i, 0) += d_src_dot[w] * m(w, i);
            dadst(i, 0) += d_dst_dot[w] * m(w, i);
        }
    }
    embed_backward(model, x, clusters, dm);
    return loss;
}

double gcn_loss_and_grad(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                         const std::vector<int>& labels, const TrainMask& mask) {
    const Matrix p = gcn_propagation(g);
    const Matrix m = matmul(x, transpose(model.beta1.value));
    const Matrix hmat = matmul(p, m);
    const Logits logits = readout(model, hmat);

    Matrix dlogits(logits.rows, logits.cols);
    const double loss = ce_forward(logits, labels, mask, &dlogits);
    const Matrix dh = readout_backward(model, hmat, dlogits);
    const Matrix dm = matmul(p, dh);  // p is symmetric
    const Matrix dbeta = matmul(transpose(dm), x);
    for (std::size_t i = 0; i < dbeta.size(); ++i) model.beta1.grad.values[i] += dbeta.values[i];
    return loss;
}

}  // namespace

double masked_cross_entropy(const Logits& logits, const std::vector<int>& labels,
                            const TrainMask& mask) {
    return ce_forward(logits, labels, mask, nullptr);
}

double loss_and_grad(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                     const ClusterAssignment& clusters, const std::vector<int>& labels,
                     const TrainMask& mask) {
    if (model.config.variant == Variant::GCN)
        return gcn_loss_and_grad(model, x, g, labels, mask);
    return gat_loss_and_grad(model, x, g, clusters, labels, mask);
}

void adam_step(std::vector<Param*> params, AdamState& state, const TrainConfig& cfg) {
    if (state.first_moment.empty()) {
        for (const Param* p : params) {
            state.first_moment.emplace_back(p->value.rows, p->value.cols);
            state.second_moment.emplace_back(p->value.rows, p->value.cols);
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param& p = *params[k];
        Matrix& m1 = state.first_moment[k];
        Matrix& m2 = state.second_moment[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.values[i];
            m1.values[i] = cfg.adam_beta1 * m1.values[i] + (1.0 - cfg.adam_beta1) * g;
            m2.values[i] = cfg.adam_beta2 * m2.values[i] + (1.0 - cfg.adam_beta2) * g * g;
            const double mhat = m1.values[i] / bc1;
            const double vhat = m2.values[i] / bc2;
            p.value.values[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
        p.grad.fill(0.0);
    }
}

std::vector<double> train_model(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                                const ClusterAssignment& clusters, const std::vector<int>& labels,
                                const TrainMask& mask, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train_model: epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ConfigError("train_model: learning_rate must be > 0");
    check_mask_classes(labels, mask, model.config.n_classes);

    model.reset_grads();
    AdamState state;
    std::vector<double> history;
    history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = loss_and_grad(model, x, g, clusters, labels, mask);
        if (!std::isfinite(loss))
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        adam_step(model.free_params(), state, cfg);
        history.push_back(loss);
    }
    return history;
}

BigatModel train_cluster_model(const Matrix& x, const SpatialGraph& g,
                               const ClusterAssignment& kmeans_labels, const TrainMask& mask,
                               const TrainConfig& cfg, std::size_t input_dim,
                               std::size_t hidden_dim) {
    std::vector<int> labels(g.n, -1);
    for (std::size_t v = 0; v < g.n; ++v) {
        if (!mask[v]) continue;
        if (kmeans_labels.source[v] != ClusterSource::Kmeans)
            throw DataError("train_cluster_model: masked node " + std::to_string(v) +
                            " lacks a kmeans label");
        labels[v] = static_cast<int>(kmeans_labels.labels[v]) - 1;  // cluster 1 -> class 0
    }
    ModelConfig mc;
    mc.input_dim = input_dim;
    mc.hidden_dim = hidden_dim;
    mc.n_classes = 2;
    mc.variant = Variant::GAT;
    mc.seed = cfg.seed;
    BigatModel model = init_params(mc);
    ClusterAssignment no_clusters;  // GAT variant ignores clusters
    no_clusters.labels.assign(g.n, 1);
    no_clusters.source.assign(g.n, ClusterSource::Kmeans);
    train_model(model, x, g, no_clusters, labels, mask, cfg);
    return model;
}

ClusterAssignment infer_clusters(BigatModel& cluster_model, const Matrix& x,
                                 const SpatialGraph& g, const ClusterAssignment& assignment) {
    ClusterAssignment out = assignment;
    ClusterAssignment dummy;
    dummy.labels.assign(g.n, 1);
    dummy.source.assign(g.n, ClusterSource::Kmeans);
    const Logits logits = forward(cluster_model, x, g, dummy);
    const std::vector<int> pred = predict(logits);
    for (std::size_t v = 0; v < g.n; ++v) {
        if (out.source[v] == ClusterSource::Unset) {
            out.labels[v] = static_cast<std::size_t>(pred[v]) + 1;
            out.source[v] = ClusterSource::Inferred;
        }
    }
    return out;
}

double grad_check(const std::function<double()>& loss, const std::vector<Param*>& params,
                  double h) {
    if (h <= 0.0) throw ConfigError("grad_check: h must be > 0");
    const double base1 = loss();
    const double base2 = loss();
    if (base1 != base2) throw NumericError("grad_check: closure is not deterministic");

    double max_rel = 0.0;
    for (Param* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.values[i];
            p->value.values[i] = saved + h;
            const double fp = loss();
            p->value.values[i] = saved - h;
            const double fm = loss();
            p->value.values[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = p->grad.values[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace bigat
