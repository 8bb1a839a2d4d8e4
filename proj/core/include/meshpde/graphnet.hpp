#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "meshpde/graph.hpp"

namespace meshpde::gnn {

struct GnnError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense MLP: ReLU on hidden layers, identity on the output layer.
/// weights[l] is (out x in); rows of a batch are items.
struct Mlp {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct ModelSpec {
    int message_layers = 3;  // K
    int latent_dim = 64;     // node state width between message-passing layers
    int hidden_dim = 128;    // MLP hidden width and message width
    int input_frames = 4;    // n
    int output_frames = 1;   // m
    int edge_dim = 2;        // displacement (2) + PDE parameters
    int aggregation = 0;     // 0 = mean (the only implemented mode)

    int node_feature_dim() const { return input_frames + 1; }  // frames + boundary flag
    /// Node state width entering message-passing layer k (0-based).
    int node_dim_at(int k) const { return k == 0 ? node_feature_dim() : latent_dim; }
    /// Node state width leaving layer k.
    int node_dim_after(int k) const {
        return k + 1 == message_layers ? output_frames : latent_dim;
    }
};

/// z-score statistics computed on the training split. Node field values share
/// one scalar pair (inputs and targets are the same physical quantity); edge
/// features are normalized per column. The boundary flag is passed through.
struct FeatureStats {
    double node_mean = 0.0;
    double node_std = 1.0;
    Eigen::VectorXd edge_mean;
    Eigen::VectorXd edge_std;
};

/// Message-passing model: per-layer message nets phi and update nets gamma
/// (no weight sharing across layers), plus the normalization record.
struct MpgnnModel {
    ModelSpec spec;
    std::vector<Mlp> message_net;  // phi^(k): (u_i, u_j, e_ij) -> message
    std::vector<Mlp> update_net;   // gamma^(k): (u_i, mean message) -> next state
    FeatureStats stats;
};

/// He-uniform weights, zero biases, deterministic per seed.
MpgnnModel init_model(const ModelSpec& spec, uint64_t seed);

/// Topology + normalized edge features of one graph, shared by every sample
/// windowed from the same trajectory. Edges are CSR-grouped by receiving
/// node; message aggregation sorts messages by content before summing, which
/// makes the forward pass bitwise independent of node numbering and edge
/// order. Throws naming the node if one has no neighbors.
struct CompiledGraph {
    Eigen::MatrixXd edge_features;  // M x edge_dim, normalized
    std::vector<int> recv, send;    // canonical (sorted by (recv, send)) order
    std::vector<int> offsets;       // CSR by recv, size N+1
    int n_nodes = 0;
};

CompiledGraph compile_graph(const Graph& g, const Eigen::MatrixXd& raw_edge_features,
                            const FeatureStats& stats);

struct ForwardCache;  // internal activations, reused by the backward pass

/// One trained-model application. Raw node features (N x (n+1), frame columns
/// in physical units, boundary flag last) are z-scored internally; the output
/// is denormalized back to physical units (N x m).
Eigen::MatrixXd forward(const MpgnnModel& model, const CompiledGraph& graph,
                        const Eigen::MatrixXd& raw_node_features,
                        ForwardCache* cache = nullptr);

/// Mean squared error over nodes and output frames.
double loss_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

struct MlpGrads {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct ModelGrads {
    std::vector<MlpGrads> message_net;
    std::vector<MlpGrads> update_net;

    void add_scaled(const ModelGrads& other, double scale);
};

ModelGrads make_zero_grads(const MpgnnModel& model);

struct TrainingSample {
    std::shared_ptr<const CompiledGraph> graph;
    Eigen::MatrixXd node_features;  // raw units
    Eigen::MatrixXd targets;        // raw units
};

/// Accumulates weight * d(normalized-unit mse)/d(params) into grads and
/// returns the sample's normalized mse.
double forward_backward(const MpgnnModel& model, const CompiledGraph& graph,
                        const Eigen::MatrixXd& raw_node_features,
                        const Eigen::MatrixXd& raw_targets, ModelGrads& grads, double weight);

/// Exact reverse-mode gradient of the mean of per-sample normalized mse.
ModelGrads backward(const MpgnnModel& model, const std::vector<TrainingSample>& batch,
                    double* mean_loss = nullptr);

struct AdamState {
    std::vector<MlpGrads> m_message, v_message;
    std::vector<MlpGrads> m_update, v_update;
    int64_t t = 0;
};

AdamState make_adam_state(const MpgnnModel& model);

void adam_step(MpgnnModel& model, const ModelGrads& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Step schedule: base_lr * 0.2^floor(epoch / 5).
double lr_schedule(int epoch, double base_lr);

struct Checkpoint {
    MpgnnModel model;
    AdamState optimizer;
    bool has_optimizer = false;
    uint64_t epoch = 0;
    std::string rng_state;  // serialized training RNG
};

/// "PMP1" binary format (little-endian, trailing crc32). Load never leaves a
/// partially initialized model behind.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace meshpde::gnn
