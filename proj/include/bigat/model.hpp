#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bigat/cluster.hpp"
#include "bigat/graph.hpp"
#include "bigat/matrix.hpp"

namespace bigat {

enum class Variant { GCN, GAT, BiGAT, BiGATUndirected };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);  // {gcn, gat, bigat, bigat-ud}

struct ModelConfig {
    std::size_t input_dim = kFeatureDim;
    std::size_t hidden_dim = 3;
    std::size_t n_classes = 3;
    Variant variant = Variant::BiGAT;
    double leaky_slope = 0.2;
    std::uint64_t seed = 0;
};

// Parameter bundle for all four variants. Ties: GAT/GCN use beta1 for every
// node; BiGAT-undirected uses a_src in place of a_dst. Tied parameters share
// storage and gradients through the accessors below.
struct BigatModel {
    Param beta1;      // hidden x input
    Param beta2;      // hidden x input
    Param a_src;      // hidden x 1
    Param a_dst;      // hidden x 1
    Param readout_w;  // n_classes x hidden
    Param readout_b;  // n_classes x 1
    ModelConfig config;

    bool bimodal() const {
        return config.variant == Variant::BiGAT || config.variant == Variant::BiGATUndirected;
    }
    Param& beta(std::size_t cluster) {
        return (!bimodal() || cluster == 1) ? beta1 : beta2;
    }
    Param& attn_dst() {
        return config.variant == Variant::BiGATUndirected ? a_src : a_dst;
    }
    // untied learnable parameters, in fixed order
    std::vector<Param*> free_params();
    void reset_grads();
};

struct AttentionEntry {
    std::size_t u;  // neighbor or self id
    double score;   // e_vu, post LeakyReLU
    double alpha;
};

// Per-node attention over N_v plus the self-loop.
using AttentionCoefficients = std::vector<std::vector<AttentionEntry>>;

using Logits = Matrix;  // n x n_classes

BigatModel init_params(const ModelConfig& config);

Matrix embed(BigatModel& model, const Matrix& x, const ClusterAssignment& clusters);
AttentionCoefficients attention(BigatModel& model, const Matrix& m, const SpatialGraph& g);
Matrix aggregate(const AttentionCoefficients& alpha, const Matrix& m);
Logits readout(BigatModel& model, const Matrix& m_agg);
std::vector<int> predict(const Logits& logits);

// Kipf-Welling symmetric-normalized propagation with self-loops.
Matrix gcn_propagation(const SpatialGraph& g);
Logits gcn_forward(BigatModel& model, const Matrix& x, const SpatialGraph& g);

Logits forward(BigatModel& model, const Matrix& x, const SpatialGraph& g,
               const ClusterAssignment& clusters);

void save_checkpoint(const BigatModel& model, const std::string& path);
BigatModel load_checkpoint(const std::string& path);

}  // namespace bigat
