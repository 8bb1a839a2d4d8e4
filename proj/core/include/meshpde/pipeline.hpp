#pragma once

#include <filesystem>
#include <optional>

#include "meshpde/dataset.hpp"
#include "meshpde/graphnet.hpp"

namespace meshpde::pipeline {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Compiled sample: shared per-trajectory topology + per-window features.
struct CompiledSample {
    std::shared_ptr<const gnn::CompiledGraph> graph;
    Eigen::MatrixXd node_features;  // raw units
    Eigen::MatrixXd targets;        // raw units
};

std::vector<CompiledSample> compile_samples(const std::vector<data::Sample>& samples,
                                            const gnn::FeatureStats& stats,
                                            bool zero_lambda_columns = false);

// ---------------------------------------------------------------------------
// data generation

struct HeatGenConfig {
    int interior_nodes = 200;     // boundary nodes added on top (~56 on the unit square)
    double bc_min = 0.0, bc_max = 200.0;  // Dirichlet range per segment
    double dt_solver = 8e-4;
    int record_every = 1;
    int frames = 100;             // recorded frames (t_end = (frames-1) * dt_record)
    bool lumped_mass = true;
    bool distorted = false;       // generate on the distorted domain, density-matched
};

struct AdvDiffGenConfig {
    int interior_nodes = 200;
    double lambda_min = 0.5, lambda_max = 1.5;
    double dt_solver = 1e-4;
    int record_every = 2;
    int frames = 420;
    bool lumped_mass = true;
};

struct WindowConfig {
    int n = 4, m = 1, gap = 20, max_windows = 20;
    double train_frac = 0.8, val_frac = 0.1;
};

/// Simulates n_sims heat trajectories (fresh mesh + Dirichlet values per
/// simulation), writes sim_###.{pgn,ptr} plus manifest.txt into dir.
data::DatasetManifest generate_heat_dataset(const std::filesystem::path& dir, int n_sims,
                                            const HeatGenConfig& cfg, const WindowConfig& win,
                                            uint64_t seed, int threads = 1);

/// Advection-diffusion on the unit square, periodic in x, Neumann in y,
/// lambda1/lambda2 ~ U[lambda_min, lambda_max] per simulation.
data::DatasetManifest generate_advdiff_dataset(const std::filesystem::path& dir, int n_sims,
                                               const AdvDiffGenConfig& cfg,
                                               const WindowConfig& win, uint64_t seed,
                                               int threads = 1);

// ---------------------------------------------------------------------------
// training

struct TrainConfig {
    int epochs = 20;
    double base_lr = 1e-3;   // decayed by 0.2 every 5 epochs
    int batch_size = 8;
    uint64_t seed = 0;
    int message_layers = 3;
    int latent_dim = 64;
    int hidden_dim = 128;
    int threads = 1;
    std::filesystem::path checkpoint_path;       // best-validation model
    std::filesystem::path last_checkpoint_path;  // resume target (optional)
    std::filesystem::path resume_from;           // optional
};

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_mse = 0.0;  // normalized units
    double val_mse = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> curve;
    gnn::Checkpoint best;
};

/// Seeded-shuffle mini-batch Adam loop; fully deterministic for a given
/// (seed, config), independent of the thread count. Aborts naming the batch
/// when the loss goes non-finite.
TrainResult train(const TrainConfig& cfg, const data::DatasetManifest& man,
                  const std::filesystem::path& manifest_dir);

void write_loss_curve_csv(const std::vector<EpochLog>& curve, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// evaluation

struct EvalReport {
    std::vector<double> per_sample_mse;       // raw units
    std::vector<double> per_sample_mse_norm;  // normalized units
    std::vector<double> per_sample_rel_l2;    // raw units
    double mean_mse = 0.0;
    double mean_mse_norm = 0.0;
    double mean_rel_l2 = 0.0;
    std::string geometry_tag = "same geometry";
    std::string resolution_tag = "same res";
};

EvalReport evaluate(const gnn::MpgnnModel& model, const std::vector<CompiledSample>& samples,
                    int threads = 1);

/// Loop-and-compensated-summation metric variants, independent of the Eigen
/// reductions used by evaluate(); tests pin both paths together.
double mse_reference(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
double rel_l2_reference(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string report_text(const EvalReport& report);

/// Fresh meshes + simulations on a new domain, evaluated without retraining.
EvalReport transfer_test(const gnn::MpgnnModel& model, int n_sims, const HeatGenConfig& cfg,
                         const WindowConfig& win, uint64_t seed,
                         const std::filesystem::path& work_dir, int threads = 1);

// ---------------------------------------------------------------------------
// rollout

struct RolloutResult {
    Eigen::MatrixXd predictions;    // steps x N
    std::vector<double> step_mse;   // vs ground truth where available (raw units)
};

/// Autoregressive prediction: seed with the first n recorded frames, then
/// feed predictions back (or ground truth, with teacher_forcing). The
/// paper-faithful mode requires an n=3, m=1 checkpoint; allow_general_n
/// lifts that.
RolloutResult rollout(const gnn::MpgnnModel& model, const Graph& graph, const Trajectory& traj,
                      int steps, bool teacher_forcing = false, bool allow_general_n = false);

// ---------------------------------------------------------------------------
// experiment grids

struct AblationRow {
    int n_frames = 0;
    int gap = 0;
    double same_geometry_mse = 0.0;  // normalized units
    double transfer_mse = 0.0;
};

struct AblationConfig {
    std::vector<std::pair<int, int>> frames_and_gaps = {
        {2, 40}, {3, 25}, {4, 20}, {5, 15}, {8, 10}};
    int train_sims = 60;
    int transfer_sims = 10;
    int epochs = 8;
    HeatGenConfig gen;
    TrainConfig trainer;
    uint64_t seed = 0;
};

/// One model per input-frame count, sharing the same trajectory files.
std::vector<AblationRow> frame_ablation(const AblationConfig& cfg,
                                        const std::filesystem::path& work_dir);

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

struct BenchmarkCell {
    std::string train_res;   // "high" / "low"
    std::string geometry;    // "same" / "different"
    std::string eval_res;    // "high" / "low"
    double mse = 0.0;        // normalized units
    double rel_l2 = 0.0;
};

struct BenchmarkConfig {
    int train_sims = 60;
    int eval_sims = 10;
    int epochs = 8;
    int high_res_nodes = 94;  // mean edge ~0.1 on the unit square
    int low_res_nodes = 22;   // mean edge ~0.2
    HeatGenConfig gen;
    TrainConfig trainer;
    WindowConfig win;
    uint64_t seed = 0;
};

/// Resolution/geometry transfer grid: train on high- and low-res square
/// meshes, evaluate on same geometry plus the distorted domain at both
/// resolutions (3 rows x 2 training columns).
std::vector<BenchmarkCell> benchmark_matrix(const BenchmarkConfig& cfg,
                                            const std::filesystem::path& work_dir);

void write_benchmark_csv(const std::vector<BenchmarkCell>& cells,
                         const std::filesystem::path& path);

}  // namespace meshpde::pipeline
