#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bigat/cluster.hpp"
#include "bigat/graph.hpp"
#include "bigat/matrix.hpp"
#include "bigat/model.hpp"

namespace bigat {

struct TrainConfig {
    double learning_rate = 0.005;
    std::size_t epochs = 300;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
};

struct AdamState {
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    std::size_t t = 0;
};

using TrainMask = std::vector<bool>;

// Mean over masked nodes of -log softmax(logits_v)[label_v], log-sum-exp
// stabilized. Forward only.
double masked_cross_entropy(const Logits& logits, const std::vector<int>& labels,
                            const TrainMask& mask);

// Full forward plus hand-derived backward for the active variant; accumulates
// parameter gradients and returns the masked loss.
double loss_and_grad(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                     const ClusterAssignment& clusters, const std::vector<int>& labels,
                     const TrainMask& mask);

// One Adam update with bias correction over the model's free parameters;
// gradients are zeroed after the step.
void adam_step(std::vector<Param*> params, AdamState& state, const TrainConfig& cfg);

// Full-batch transductive training; returns per-epoch loss history.
std::vector<double> train_model(BigatModel& model, const Matrix& x, const SpatialGraph& g,
                                const ClusterAssignment& clusters, const std::vector<int>& labels,
                                const TrainMask& mask, const TrainConfig& cfg);

// Pre-trained GAT that predicts the bimodal cluster label (M_cluster).
BigatModel train_cluster_model(const Matrix& x, const SpatialGraph& g,
                               const ClusterAssignment& kmeans_labels, const TrainMask& mask,
                               const TrainConfig& cfg, std::size_t input_dim,
                               std::size_t hidden_dim = 3);

// Fill unset nodes with argmax of the cluster model; kmeans labels are never
// overwritten.
ClusterAssignment infer_clusters(BigatModel& cluster_model, const Matrix& x,
                                 const SpatialGraph& g, const ClusterAssignment& assignment);

// Central-finite-difference check of the analytic gradients currently stored
// in `params`. Returns the max relative error with denominator
// max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<double()>& loss, const std::vector<Param*>& params,
                  double h);

}  // namespace bigat
