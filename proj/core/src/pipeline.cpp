#include "meshpde/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "meshpde/io.hpp"
#include "meshpde/mesh.hpp"
#include "meshpde/rng.hpp"

namespace meshpde::pipeline {

namespace {

// Index-parallel helper; results must go into caller-owned slots so the
// reduction order stays fixed regardless of the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::string sim_stem(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "sim_%04d", index);
    return buf;
}

}  // namespace

std::vector<CompiledSample> compile_samples(const std::vector<data::Sample>& samples,
                                            const gnn::FeatureStats& stats,
                                            bool zero_lambda_columns) {
    std::map<const Graph*, std::shared_ptr<const gnn::CompiledGraph>> cache;
    std::vector<CompiledSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto& slot = cache[s.graph.get()];
        if (!slot) {
            Eigen::MatrixXd edge_feats = s.edge_features;
            if (zero_lambda_columns && edge_feats.cols() > 2) {
                edge_feats.rightCols(edge_feats.cols() - 2).setZero();
            }
            slot = std::make_shared<const gnn::CompiledGraph>(
                gnn::compile_graph(*s.graph, edge_feats, stats));
        }
        out.push_back({slot, s.node_features, s.targets});
    }
    return out;
}

// ---------------------------------------------------------------------------
// data generation

namespace {

data::DatasetManifest finish_dataset(const std::filesystem::path& dir,
                                     const std::vector<std::pair<std::string, std::string>>& files,
                                     const WindowConfig& win, uint64_t seed) {
    auto man = data::build_manifest(dir, files, win.n, win.m, win.gap, win.max_windows,
                                    win.train_frac, win.val_frac, seed);
    data::save_manifest(man, dir / "manifest.txt");
    return man;
}

}  // namespace

data::DatasetManifest generate_heat_dataset(const std::filesystem::path& dir, int n_sims,
                                            const HeatGenConfig& cfg, const WindowConfig& win,
                                            uint64_t seed, int threads) {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::string, std::string>> files(n_sims);

    parallel_for(n_sims, threads, [&](int s) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(s)));
        const Domain domain = cfg.distorted ? make_distorted_domain() : make_unit_square();
        const int interior = static_cast<int>(
            std::llround(cfg.interior_nodes * domain.area()));  // density-matched
        const uint64_t mesh_seed = rng.next_u64();
        const Graph graph = triangulate(sample_points(domain, interior, mesh_seed), domain);

        std::vector<SegmentBc> bc(domain.segments.size());
        for (auto& b : bc) {
            b.kind = BcKind::Dirichlet;
            b.value = rng.uniform(cfg.bc_min, cfg.bc_max);
        }
        SimulateConfig sim;
        sim.dt_solver = cfg.dt_solver;
        sim.dt_record = cfg.dt_solver * cfg.record_every;
        sim.t_end = sim.dt_record * (cfg.frames - 1);
        sim.ic.kind = InitialCondition::Kind::Constant;
        sim.ic.value = rng.uniform(cfg.bc_min, cfg.bc_max);
        sim.seed = mesh_seed;
        sim.lumped_mass = cfg.lumped_mass;

        Trajectory traj = simulate(graph, domain, heat_pde(bc), sim);
        const std::string stem = sim_stem(s);
        traj.graph_path = stem + ".pgn";
        save_graph(graph, dir / (stem + ".pgn"));
        save_trajectory(traj, dir / (stem + ".ptr"));
        files[s] = {stem + ".ptr", stem + ".pgn"};
    });
    return finish_dataset(dir, files, win, seed);
}

data::DatasetManifest generate_advdiff_dataset(const std::filesystem::path& dir, int n_sims,
                                               const AdvDiffGenConfig& cfg,
                                               const WindowConfig& win, uint64_t seed,
                                               int threads) {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::string, std::string>> files(n_sims);

    parallel_for(n_sims, threads, [&](int s) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(s)));
        const Domain domain = make_unit_square();
        const uint64_t mesh_seed = rng.next_u64();
        const Graph graph =
            triangulate(sample_points(domain, cfg.interior_nodes, mesh_seed), domain);

        // segments: bottom, right, top, left - periodic in x, Neumann in y
        std::vector<SegmentBc> bc(4);
        bc[0].kind = BcKind::Neumann;
        bc[1].kind = BcKind::Periodic;
        bc[2].kind = BcKind::Neumann;
        bc[3].kind = BcKind::Periodic;
        const double l1 = rng.uniform(cfg.lambda_min, cfg.lambda_max);
        const double l2 = rng.uniform(cfg.lambda_min, cfg.lambda_max);

        SimulateConfig sim;
        sim.dt_solver = cfg.dt_solver;
        sim.dt_record = cfg.dt_solver * cfg.record_every;
        sim.t_end = sim.dt_record * (cfg.frames - 1);
        sim.ic.kind = InitialCondition::Kind::TrigSeriesX;
        for (double& c : sim.ic.coeffs) c = rng.uniform(-1.0, 1.0);
        sim.seed = mesh_seed;
        sim.lumped_mass = cfg.lumped_mass;

        Trajectory traj = simulate(graph, domain, advection_diffusion_pde(l1, l2, bc), sim);
        const std::string stem = sim_stem(s);
        traj.graph_path = stem + ".pgn";
        save_graph(graph, dir / (stem + ".pgn"));
        save_trajectory(traj, dir / (stem + ".ptr"));
        files[s] = {stem + ".ptr", stem + ".pgn"};
    });
    return finish_dataset(dir, files, win, seed);
}

// ---------------------------------------------------------------------------
// training

TrainResult train(const TrainConfig& cfg, const data::DatasetManifest& man,
                  const std::filesystem::path& manifest_dir) {
    const auto train_samples =
        compile_samples(data::materialize_split(man, data::Split::Train, manifest_dir), man.stats);
    const auto val_samples =
        compile_samples(data::materialize_split(man, data::Split::Val, manifest_dir), man.stats);
    if (train_samples.empty()) throw PipelineError("train: dataset has no training split");

    gnn::ModelSpec spec;
    spec.message_layers = cfg.message_layers;
    spec.latent_dim = cfg.latent_dim;
    spec.hidden_dim = cfg.hidden_dim;
    spec.input_frames = man.n;
    spec.output_frames = man.m;
    spec.edge_dim = man.edge_dim;

    gnn::MpgnnModel model;
    gnn::AdamState opt;
    Rng rng(mix_seed(cfg.seed, 0x72417));
    uint64_t start_epoch = 0;
    if (!cfg.resume_from.empty()) {
        gnn::Checkpoint ckpt = gnn::load_checkpoint(cfg.resume_from);
        model = std::move(ckpt.model);
        opt = std::move(ckpt.optimizer);
        if (!ckpt.has_optimizer) opt = gnn::make_adam_state(model);
        rng = Rng::deserialize(ckpt.rng_state);
        start_epoch = ckpt.epoch;
    } else {
        model = gnn::init_model(spec, cfg.seed);
        model.stats = man.stats;
        opt = gnn::make_adam_state(model);
    }

    const int n_train = static_cast<int>(train_samples.size());
    const int batch = std::max(1, cfg.batch_size);
    std::vector<int> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    double best_val = std::numeric_limits<double>::infinity();

    const auto eval_loss = [&](const std::vector<CompiledSample>& samples) {
        if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::vector<double> losses(samples.size());
        parallel_for(static_cast<int>(samples.size()), cfg.threads, [&](int i) {
            const auto& s = samples[i];
            const Eigen::MatrixXd pred = gnn::forward(model, *s.graph, s.node_features);
            losses[i] = gnn::loss_mse(pred, s.targets) /
                        (model.stats.node_std * model.stats.node_std);
        });
        double acc = 0.0;
        for (const double l : losses) acc += l;
        return acc / static_cast<double>(samples.size());
    };

    for (int epoch = static_cast<int>(start_epoch); epoch < cfg.epochs; ++epoch) {
        const double lr = gnn::lr_schedule(epoch, cfg.base_lr);
        rng.shuffle(order);

        double epoch_loss = 0.0;
        for (int b0 = 0; b0 < n_train; b0 += batch) {
            const int bsz = std::min(batch, n_train - b0);
            const double w = 1.0 / static_cast<double>(bsz);
            gnn::ModelGrads grads = gnn::make_zero_grads(model);
            std::vector<double> losses(bsz);

            if (cfg.threads <= 1) {
                for (int i = 0; i < bsz; ++i) {
                    const auto& s = train_samples[order[b0 + i]];
                    losses[i] = gnn::forward_backward(model, *s.graph, s.node_features, s.targets,
                                                      grads, w);
                }
            } else {
                std::vector<gnn::ModelGrads> slots(bsz);
                parallel_for(bsz, cfg.threads, [&](int i) {
                    slots[i] = gnn::make_zero_grads(model);
                    const auto& s = train_samples[order[b0 + i]];
                    losses[i] = gnn::forward_backward(model, *s.graph, s.node_features, s.targets,
                                                      slots[i], w);
                });
                for (int i = 0; i < bsz; ++i) grads.add_scaled(slots[i], 1.0);
            }

            double batch_loss = 0.0;
            for (const double l : losses) batch_loss += l;
            batch_loss *= w;
            if (!std::isfinite(batch_loss)) {
                throw PipelineError("non-finite loss in epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(b0 / batch));
            }
            epoch_loss += batch_loss * bsz;
            gnn::adam_step(model, grads, opt, lr);
        }
        epoch_loss /= static_cast<double>(n_train);
        const double val_loss = eval_loss(val_samples);

        EpochLog log;
        log.epoch = epoch;
        log.lr = lr;
        log.train_mse = epoch_loss;
        log.val_mse = val_loss;
        result.curve.push_back(log);

        gnn::Checkpoint ckpt;
        ckpt.model = model;
        ckpt.optimizer = opt;
        ckpt.has_optimizer = true;
        ckpt.epoch = static_cast<uint64_t>(epoch + 1);
        ckpt.rng_state = rng.serialize();
        if (!cfg.last_checkpoint_path.empty()) gnn::save_checkpoint(ckpt, cfg.last_checkpoint_path);
        const bool improved = std::isnan(val_loss) || val_loss <= best_val;
        if (improved) {
            best_val = val_loss;
            result.best = ckpt;
            if (!cfg.checkpoint_path.empty()) gnn::save_checkpoint(ckpt, cfg.checkpoint_path);
        }
    }
    if (result.curve.empty()) throw PipelineError("train: nothing to do (resume past end?)");
    return result;
}

void write_loss_curve_csv(const std::vector<EpochLog>& curve, const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,lr,train_mse,val_mse\n";
    for (const auto& e : curve) {
        os << e.epoch << ',' << e.lr << ',' << e.train_mse << ',' << e.val_mse << '\n';
    }
    io::write_text_atomic(path, os.str());
}

// ---------------------------------------------------------------------------
// evaluation

double mse_reference(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    double acc = 0.0, comp = 0.0;  // Neumaier compensation
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        for (Eigen::Index r = 0; r < pred.rows(); ++r) {
            const double d = pred(r, c) - target(r, c);
            const double term = d * d;
            const double t = acc + term;
            comp += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
            acc = t;
        }
    }
    return (acc + comp) / static_cast<double>(pred.rows() * pred.cols());
}

double rel_l2_reference(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        for (Eigen::Index r = 0; r < pred.rows(); ++r) {
            const double d = pred(r, c) - target(r, c);
            num += d * d;
            den += target(r, c) * target(r, c);
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

EvalReport evaluate(const gnn::MpgnnModel& model, const std::vector<CompiledSample>& samples,
                    int threads) {
    if (samples.empty()) throw PipelineError("evaluate: no samples");
    EvalReport rep;
    const auto count = static_cast<int>(samples.size());
    rep.per_sample_mse.resize(count);
    rep.per_sample_mse_norm.resize(count);
    rep.per_sample_rel_l2.resize(count);

    const double var = model.stats.node_std * model.stats.node_std;
    parallel_for(count, threads, [&](int i) {
        const auto& s = samples[i];
        const Eigen::MatrixXd pred = gnn::forward(model, *s.graph, s.node_features);
        const double mse = gnn::loss_mse(pred, s.targets);
        rep.per_sample_mse[i] = mse;
        rep.per_sample_mse_norm[i] = mse / var;
        const double t_norm = s.targets.norm();
        rep.per_sample_rel_l2[i] =
            t_norm > 0.0 ? (pred - s.targets).norm() / t_norm : (pred - s.targets).norm();
    });
    for (int i = 0; i < count; ++i) {
        rep.mean_mse += rep.per_sample_mse[i];
        rep.mean_mse_norm += rep.per_sample_mse_norm[i];
        rep.mean_rel_l2 += rep.per_sample_rel_l2[i];
    }
    rep.mean_mse /= count;
    rep.mean_mse_norm /= count;
    rep.mean_rel_l2 /= count;
    return rep;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << "sample,mse,mse_norm,rel_l2,geometry,resolution\n";
    for (size_t i = 0; i < report.per_sample_mse.size(); ++i) {
        os << i << ',' << report.per_sample_mse[i] << ',' << report.per_sample_mse_norm[i] << ','
           << report.per_sample_rel_l2[i] << ',' << report.geometry_tag << ','
           << report.resolution_tag << '\n';
    }
    os << "mean," << report.mean_mse << ',' << report.mean_mse_norm << ',' << report.mean_rel_l2
       << ',' << report.geometry_tag << ',' << report.resolution_tag << '\n';
    io::write_text_atomic(path, os.str());
}

std::string report_text(const EvalReport& report) {
    std::ostringstream os;
    os.precision(6);
    os << "samples:        " << report.per_sample_mse.size() << '\n'
       << "geometry:       " << report.geometry_tag << '\n'
       << "resolution:     " << report.resolution_tag << '\n'
       << "mean MSE:       " << report.mean_mse << " (raw units)\n"
       << "mean MSE:       " << report.mean_mse_norm << " (normalized units)\n"
       << "mean rel. L2:   " << report.mean_rel_l2 << '\n';
    return os.str();
}

EvalReport transfer_test(const gnn::MpgnnModel& model, int n_sims, const HeatGenConfig& cfg,
                         const WindowConfig& win, uint64_t seed,
                         const std::filesystem::path& work_dir, int threads) {
    HeatGenConfig gen = cfg;
    gen.distorted = true;
    WindowConfig w = win;
    w.train_frac = 0.0;  // evaluation only; normalization comes from the model
    std::filesystem::create_directories(work_dir);

    std::vector<data::Sample> samples;
    std::vector<std::vector<data::Sample>> slots(n_sims);
    parallel_for(n_sims, threads, [&](int s) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(s)));
        const Domain domain = make_distorted_domain();
        const int interior = static_cast<int>(std::llround(gen.interior_nodes * domain.area()));
        const uint64_t mesh_seed = rng.next_u64();
        auto graph = std::make_shared<const Graph>(
            triangulate(sample_points(domain, interior, mesh_seed), domain));
        std::vector<SegmentBc> bc(domain.segments.size());
        for (auto& b : bc) {
            b.kind = BcKind::Dirichlet;
            b.value = rng.uniform(gen.bc_min, gen.bc_max);
        }
        SimulateConfig sim;
        sim.dt_solver = gen.dt_solver;
        sim.dt_record = gen.dt_solver * gen.record_every;
        sim.t_end = sim.dt_record * (gen.frames - 1);
        sim.ic.kind = InitialCondition::Kind::Constant;
        sim.ic.value = rng.uniform(gen.bc_min, gen.bc_max);
        sim.seed = mesh_seed;
        sim.lumped_mass = gen.lumped_mass;
        const Trajectory traj = simulate(*graph, domain, heat_pde(bc), sim);
        slots[s] = data::window(traj, graph, w.n, w.m, w.gap, w.max_windows);
    });
    for (auto& sl : slots) {
        std::move(sl.begin(), sl.end(), std::back_inserter(samples));
    }

    EvalReport rep = evaluate(model, compile_samples(samples, model.stats), threads);
    rep.geometry_tag = "different geometry";
    return rep;
}

// ---------------------------------------------------------------------------
// rollout

RolloutResult rollout(const gnn::MpgnnModel& model, const Graph& graph, const Trajectory& traj,
                      int steps, bool teacher_forcing, bool allow_general_n) {
    const int n = model.spec.input_frames;
    if (!allow_general_n && n != 3) {
        throw PipelineError("rollout: paper-faithful mode needs an n=3 checkpoint (got n=" +
                            std::to_string(n) + "); pass allow_general_n to override");
    }
    if (model.spec.output_frames != 1) {
        throw PipelineError("rollout: requires an m=1 checkpoint");
    }
    if (traj.frame_count() < n) throw PipelineError("rollout: trajectory shorter than n frames");

    const auto nn = static_cast<Eigen::Index>(graph.node_count());
    const Eigen::MatrixXd edge_feats = data::edge_feature_matrix(graph, traj.pde);
    const gnn::CompiledGraph cg = gnn::compile_graph(graph, edge_feats, model.stats);

    std::vector<Eigen::VectorXd> window;
    for (int f = 0; f < n; ++f) window.push_back(traj.frames.row(f).transpose());

    RolloutResult result;
    result.predictions.resize(steps, nn);
    for (int s = 0; s < steps; ++s) {
        Eigen::MatrixXd feats(nn, n + 1);
        for (int f = 0; f < n; ++f) feats.col(f) = window[f];
        for (Eigen::Index i = 0; i < nn; ++i) {
            feats(i, n) = static_cast<double>(graph.boundary_flag[i]);
        }
        const Eigen::MatrixXd pred = gnn::forward(model, cg, feats);
        result.predictions.row(s) = pred.col(0).transpose();

        const int truth_frame = n + s;
        const bool have_truth = truth_frame < traj.frame_count();
        if (have_truth) {
            result.step_mse.push_back(
                gnn::loss_mse(pred, traj.frames.row(truth_frame).transpose()));
        }
        window.erase(window.begin());
        if (teacher_forcing && have_truth) {
            window.push_back(traj.frames.row(truth_frame).transpose());
        } else {
            window.push_back(pred.col(0));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// experiment grids

std::vector<AblationRow> frame_ablation(const AblationConfig& cfg,
                                        const std::filesystem::path& work_dir) {
    std::filesystem::create_directories(work_dir);
    // one pool of trajectories serves every (n, gap) row
    const auto data_dir = work_dir / "trajectories";
    WindowConfig base_win;  // windowing replaced per row below
    generate_heat_dataset(data_dir, cfg.train_sims, cfg.gen, base_win, cfg.seed,
                          cfg.trainer.threads);

    std::vector<std::pair<std::string, std::string>> files;
    for (int s = 0; s < cfg.train_sims; ++s) {
        files.emplace_back(sim_stem(s) + ".ptr", sim_stem(s) + ".pgn");
    }

    std::vector<AblationRow> rows;
    for (const auto& [n, gap] : cfg.frames_and_gaps) {
        auto man = data::build_manifest(data_dir, files, n, 1, gap, base_win.max_windows,
                                        base_win.train_frac, base_win.val_frac, cfg.seed);

        TrainConfig tcfg = cfg.trainer;
        tcfg.epochs = cfg.epochs;
        tcfg.seed = mix_seed(cfg.seed, static_cast<uint64_t>(n));
        tcfg.checkpoint_path.clear();
        tcfg.last_checkpoint_path.clear();
        tcfg.resume_from.clear();
        TrainResult tr = train(tcfg, man, data_dir);
        const gnn::MpgnnModel& model = tr.best.model;

        const auto test_samples = compile_samples(
            data::materialize_split(man, data::Split::Test, data_dir), model.stats);
        const EvalReport same = evaluate(model, test_samples, cfg.trainer.threads);

        WindowConfig twin;
        twin.n = n;
        twin.gap = gap;
        const EvalReport transfer =
            transfer_test(model, cfg.transfer_sims, cfg.gen, twin, mix_seed(cfg.seed, 0xab1a7e),
                          work_dir / ("transfer_n" + std::to_string(n)), cfg.trainer.threads);

        AblationRow row;
        row.n_frames = n;
        row.gap = gap;
        row.same_geometry_mse = same.mean_mse_norm;
        row.transfer_mse = transfer.mean_mse_norm;
        rows.push_back(row);
    }
    return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << "n_frames,gap,same_geometry_mse,transfer_mse\n";
    for (const auto& r : rows) {
        os << r.n_frames << ',' << r.gap << ',' << r.same_geometry_mse << ',' << r.transfer_mse
           << '\n';
    }
    io::write_text_atomic(path, os.str());
}

std::vector<BenchmarkCell> benchmark_matrix(const BenchmarkConfig& cfg,
                                            const std::filesystem::path& work_dir) {
    std::filesystem::create_directories(work_dir);

    struct TrainedModel {
        std::string res;
        int nodes;
        gnn::MpgnnModel model;
        double same_mse = 0.0, same_rel = 0.0;
    };

    std::vector<TrainedModel> models;
    for (const auto& [res, nodes] :
         std::vector<std::pair<std::string, int>>{{"high", cfg.high_res_nodes},
                                                  {"low", cfg.low_res_nodes}}) {
        HeatGenConfig gen = cfg.gen;
        gen.interior_nodes = nodes;
        const auto dir = work_dir / ("train_" + res);
        auto man = generate_heat_dataset(dir, cfg.train_sims, gen, cfg.win,
                                         mix_seed(cfg.seed, nodes), cfg.trainer.threads);
        TrainConfig tcfg = cfg.trainer;
        tcfg.epochs = cfg.epochs;
        tcfg.seed = mix_seed(cfg.seed, 0xbe7c + nodes);
        tcfg.checkpoint_path.clear();
        tcfg.last_checkpoint_path.clear();
        tcfg.resume_from.clear();
        TrainResult tr = train(tcfg, man, dir);

        TrainedModel tm{res, nodes, tr.best.model};
        const auto test = compile_samples(data::materialize_split(man, data::Split::Test, dir),
                                          tm.model.stats);
        const EvalReport rep = evaluate(tm.model, test, cfg.trainer.threads);
        tm.same_mse = rep.mean_mse_norm;
        tm.same_rel = rep.mean_rel_l2;
        models.push_back(std::move(tm));
    }

    std::vector<BenchmarkCell> cells;
    for (const auto& tm : models) {
        cells.push_back({tm.res, "same", tm.res, tm.same_mse, tm.same_rel});
        for (const auto& [eres, nodes] :
             std::vector<std::pair<std::string, int>>{{"low", cfg.low_res_nodes},
                                                      {"high", cfg.high_res_nodes}}) {
            HeatGenConfig gen = cfg.gen;
            gen.interior_nodes = nodes;
            const EvalReport rep = transfer_test(
                tm.model, cfg.eval_sims, gen, cfg.win, mix_seed(cfg.seed, 0xd1f + nodes),
                work_dir / ("transfer_" + tm.res + "_" + eres), cfg.trainer.threads);
            cells.push_back({tm.res, "different", eres, rep.mean_mse_norm, rep.mean_rel_l2});
        }
    }
    return cells;
}

void write_benchmark_csv(const std::vector<BenchmarkCell>& cells,
                         const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << "train_res,eval_geometry,eval_res,mse,rel_l2\n";
    for (const auto& c : cells) {
        os << c.train_res << ',' << c.geometry << ',' << c.eval_res << ',' << c.mse << ','
           << c.rel_l2 << '\n';
    }
    io::write_text_atomic(path, os.str());
}

}  // namespace meshpde::pipeline
