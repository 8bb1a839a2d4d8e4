#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "meshpde/fem.hpp"
#include "meshpde/graph.hpp"
#include "meshpde/graphnet.hpp"

namespace meshpde::data {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Split : uint8_t { Train = 0, Val = 1, Test = 2 };

/// One (n input frames, m target frames) window over a trajectory together
/// with its graph. Features are kept in physical units; normalization is the
/// model's job.
struct Sample {
    std::shared_ptr<const Graph> graph;
    Eigen::MatrixXd node_features;  // N x (n+1): frames oldest..newest, boundary flag
    Eigen::MatrixXd edge_features;  // M x (2+P): wrapped displacement, then PDE params
    Eigen::MatrixXd targets;        // N x m
    int frame_gap = 1;
};

/// Number of gap-spaced windows that fit into `frames` recorded frames:
/// min(max_windows, frames - (n+m-1)*gap). Non-positive means the trajectory
/// is too short.
int window_count(int frames, int n, int m, int gap, int max_windows);

/// Edge feature width for a PDE kind (2 displacement columns, plus lambda1
/// and lambda2 evaluated at edge midpoints for advection-diffusion).
int edge_feature_dim(PdeKind kind);

/// M x (2+P) raw edge features: minimum-image displacement x_j + shift - x_i,
/// then PDE parameters at the edge midpoint (advection-diffusion only).
Eigen::MatrixXd edge_feature_matrix(const Graph& g, const PdeSpec& pde);

Sample assemble_features(const Trajectory& traj, std::shared_ptr<const Graph> graph, int start,
                         int n, int m, int gap);

/// Sliding windows with start offsets 0..count-1.
/// Throws naming the required length when none fit.
std::vector<Sample> window(const Trajectory& traj, std::shared_ptr<const Graph> graph, int n,
                           int m, int gap, int max_windows);

/// z-score statistics over the training split only (std floored at 1e-8).
gnn::FeatureStats compute_normalization(const std::vector<Sample>& train_samples);

struct TrajectoryRecord {
    std::string traj_path;   // relative to the manifest directory
    std::string graph_path;
    uint32_t traj_checksum = 0;
    uint32_t graph_checksum = 0;
    Split split = Split::Train;
    std::vector<int> window_offsets;
};

/// Windowing plan over a set of trajectory files. Holds indices and
/// checksums only; frames stay on disk until a split is materialized.
struct DatasetManifest {
    int n = 4, m = 1, gap = 1, max_windows = 20;
    int edge_dim = 2;
    gnn::FeatureStats stats;
    std::vector<TrajectoryRecord> records;
};

/// Windows every trajectory, assigns whole simulations to train/val/test
/// (never splitting one across splits), and computes normalization from the
/// training split.
DatasetManifest build_manifest(const std::filesystem::path& dir,
                               const std::vector<std::pair<std::string, std::string>>& traj_graph,
                               int n, int m, int gap, int max_windows, double train_frac,
                               double val_frac, uint64_t seed);

void save_manifest(const DatasetManifest& man, const std::filesystem::path& path);
/// Verifies every referenced file exists with a matching checksum; loads
/// metadata only (O(manifest) memory).
DatasetManifest load_manifest(const std::filesystem::path& path);
uint32_t manifest_hash(const DatasetManifest& man);

std::vector<Sample> materialize_record(const DatasetManifest& man, const TrajectoryRecord& rec,
                                       const std::filesystem::path& base_dir);
std::vector<Sample> materialize_split(const DatasetManifest& man, Split split,
                                      const std::filesystem::path& base_dir);

const char* split_name(Split s);

}  // namespace meshpde::data
