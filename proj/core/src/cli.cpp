#include "meshpde/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <thread>

#include "meshpde/dataset.hpp"
#include "meshpde/fem.hpp"
#include "meshpde/io.hpp"
#include "meshpde/mesh.hpp"
#include "meshpde/pipeline.hpp"
#include "meshpde/raster.hpp"
#include "meshpde/rng.hpp"
#include "meshpde/spectral.hpp"
#include "meshpde/validate.hpp"

namespace meshpde::cli {

namespace {

namespace fs = std::filesystem;

int default_threads() {
    if (const char* env = std::getenv("MESHPDE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Domain domain_by_name(const std::string& name, double side) {
    if (name == "unit-square") return make_unit_square();
    if (name == "periodic-square") return make_periodic_square(side);
    if (name == "distorted") return make_distorted_domain();
    throw std::runtime_error("unknown domain: " + name);
}

std::vector<SegmentBc> parse_bc(const std::string& text, const Domain& domain) {
    std::vector<SegmentBc> bc(domain.segments.size());
    if (text.empty()) return bc;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        const std::string name = item.substr(0, eq);
        const std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
        int idx = -1;
        for (size_t s = 0; s < domain.segments.size(); ++s) {
            if (domain.segments[s].name == name) idx = static_cast<int>(s);
        }
        if (idx < 0) throw std::runtime_error("unknown boundary segment: " + name);
        if (value == "neumann" || value.empty()) {
            bc[idx].kind = BcKind::Neumann;
        } else if (value == "periodic") {
            bc[idx].kind = BcKind::Periodic;
        } else {
            bc[idx].kind = BcKind::Dirichlet;
            bc[idx].value = std::stod(value);
        }
    }
    return bc;
}

// every run records the effective settings next to its outputs
void write_resolved_config(CLI::App& app, const fs::path& out_dir, const std::string& sub) {
    fs::create_directories(out_dir);
    std::string text = app.config_to_str(true, true);
    const uint32_t hash =
        io::crc32(reinterpret_cast<const uint8_t*>(text.data()), text.size());
    text = "# config_hash " + std::to_string(hash) + "\n" + text;
    io::write_text_atomic(out_dir / ("resolved-" + sub + ".cfg"), text);
}

Graph load_graph_for_trajectory(const fs::path& traj_path, const Trajectory& traj,
                                const std::string& mesh_override) {
    if (!mesh_override.empty()) return load_graph(mesh_override);
    if (traj.graph_path.empty()) {
        throw std::runtime_error("trajectory has no graph reference; pass --mesh");
    }
    fs::path p = traj.graph_path;
    if (p.is_relative()) p = traj_path.parent_path() / p;
    return load_graph(p);
}

struct GlobalOpts {
    uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = default_threads();
};

int run_impl(const std::vector<std::string>& args) {
    CLI::App app{"meshpde: learned time-stepping for PDEs on unstructured meshes"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value config file; command-line flags win");
    app.allow_config_extras(true);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for resolved configs and default outputs")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (default: MESHPDE_THREADS or cores)")
        ->capture_default_str();

    // ---- mesh ----------------------------------------------------------
    auto* mesh_cmd = app.add_subcommand("mesh", "generate a mesh graph file");
    std::string mesh_domain = "unit-square", mesh_out = "mesh.pgn";
    int mesh_nodes = 200;
    double mesh_side = 2.0 * std::numbers::pi;
    bool mesh_stitch = false;
    mesh_cmd->add_option("--domain", mesh_domain, "unit-square | periodic-square | distorted")
        ->capture_default_str();
    mesh_cmd->add_option("--nodes", mesh_nodes, "interior node count")->capture_default_str();
    mesh_cmd->add_option("--side", mesh_side, "periodic square side length")
        ->capture_default_str();
    mesh_cmd->add_flag("--stitch", mesh_stitch, "stitch periodic boundaries");
    mesh_cmd->add_option("-o,--out", mesh_out, "output graph file")->capture_default_str();

    // ---- simulate ------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "run a ground-truth solver");
    std::string sim_pde = "heat", sim_bc, sim_mesh, sim_out = "traj.ptr";
    std::string sim_domain = "unit-square", sim_ic = "constant";
    int sim_nodes = 200, sim_record_every = 1, sim_grid = 64;
    double sim_t_end = 0.08, sim_dt = 8e-4, sim_l1 = 0.0, sim_l2 = 1.0, sim_nu = 3e-4;
    double sim_ic_value = 0.0;
    sim_cmd->add_option("--pde", sim_pde, "heat | advdiff | ns")->capture_default_str();
    sim_cmd->add_option("--bc", sim_bc, "per-segment conditions, e.g. top=200,left=0");
    sim_cmd->add_option("--mesh", sim_mesh, "existing graph file (otherwise generated)");
    sim_cmd->add_option("--domain", sim_domain, "domain when generating a mesh")
        ->capture_default_str();
    sim_cmd->add_option("--nodes", sim_nodes, "interior nodes when generating a mesh")
        ->capture_default_str();
    sim_cmd->add_option("--t-end", sim_t_end, "final time")->capture_default_str();
    sim_cmd->add_option("--dt", sim_dt, "solver step")->capture_default_str();
    sim_cmd->add_option("--record-every", sim_record_every, "solver steps per recorded frame")
        ->capture_default_str();
    sim_cmd->add_option("--lambda1", sim_l1, "advection velocity")->capture_default_str();
    sim_cmd->add_option("--lambda2", sim_l2, "diffusivity")->capture_default_str();
    sim_cmd->add_option("--nu", sim_nu, "Navier-Stokes viscosity")->capture_default_str();
    sim_cmd->add_option("--grid-size", sim_grid, "spectral grid (ns only)")
        ->capture_default_str();
    sim_cmd->add_option("--ic", sim_ic, "zero | constant | sine-product | trig")
        ->capture_default_str();
    sim_cmd->add_option("--ic-value", sim_ic_value, "constant IC value")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim_out, "output trajectory file")->capture_default_str();

    // ---- dataset -------------------------------------------------------
    auto* data_cmd = app.add_subcommand("dataset", "generate simulations and build a manifest");
    std::string data_pde = "heat", data_dir = "dataset";
    int data_sims = 20, data_nodes = 200, data_frames = 100, data_record_every = 1;
    pipeline::WindowConfig data_win;
    data_cmd->add_option("--pde", data_pde, "heat | advdiff")->capture_default_str();
    data_cmd->add_option("--sims", data_sims, "simulation count")->capture_default_str();
    data_cmd->add_option("--nodes", data_nodes, "interior nodes per mesh")->capture_default_str();
    data_cmd->add_option("--frames", data_frames, "recorded frames per simulation")
        ->capture_default_str();
    data_cmd->add_option("--record-every", data_record_every, "solver steps per recorded frame")
        ->capture_default_str();
    data_cmd->add_option("--n", data_win.n, "input frames")->capture_default_str();
    data_cmd->add_option("--m", data_win.m, "target frames")->capture_default_str();
    data_cmd->add_option("--gap", data_win.gap, "recorded frames between window frames")
        ->capture_default_str();
    data_cmd->add_option("--max-windows", data_win.max_windows, "windows per simulation")
        ->capture_default_str();
    data_cmd->add_option("--train-frac", data_win.train_frac, "")->capture_default_str();
    data_cmd->add_option("--val-frac", data_win.val_frac, "")->capture_default_str();
    data_cmd->add_option("--dir", data_dir, "output dataset directory")->capture_default_str();

    // ---- train ---------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the message-passing model");
    std::string train_manifest, train_out = "model.pmp", train_resume, train_curve, train_last;
    pipeline::TrainConfig tcfg;
    train_cmd->add_option("--dataset", train_manifest, "manifest file")->required();
    train_cmd->add_option("--epochs", tcfg.epochs, "")->capture_default_str();
    train_cmd->add_option("--lr", tcfg.base_lr, "base learning rate")->capture_default_str();
    train_cmd->add_option("--batch", tcfg.batch_size, "")->capture_default_str();
    train_cmd->add_option("--layers", tcfg.message_layers, "message-passing layers")
        ->capture_default_str();
    train_cmd->add_option("--latent", tcfg.latent_dim, "")->capture_default_str();
    train_cmd->add_option("--hidden", tcfg.hidden_dim, "")->capture_default_str();
    train_cmd->add_option("--resume", train_resume, "checkpoint to resume from");
    train_cmd->add_option("--curve", train_curve, "loss-curve CSV output");
    train_cmd->add_option("--last", train_last, "rolling last-epoch checkpoint");
    train_cmd->add_option("-o,--out", train_out, "best-validation checkpoint")
        ->capture_default_str();

    // ---- eval ----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    std::string eval_ckpt, eval_manifest, eval_split = "test", eval_out;
    bool eval_zero_lambda = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "")->required();
    eval_cmd->add_option("--dataset", eval_manifest, "")->required();
    eval_cmd->add_option("--split", eval_split, "train | val | test")->capture_default_str();
    eval_cmd->add_flag("--zero-lambda", eval_zero_lambda,
                       "ablate PDE-parameter edge features (zero the columns)");
    eval_cmd->add_option("-o,--out", eval_out, "report CSV");

    // ---- transfer ------------------------------------------------------
    auto* transfer_cmd =
        app.add_subcommand("transfer", "evaluate on freshly simulated distorted-domain data");
    std::string transfer_ckpt, transfer_out;
    int transfer_sims = 20, transfer_nodes = 200, transfer_frames = 100;
    int transfer_n = 4, transfer_gap = 20;
    transfer_cmd->add_option("--checkpoint", transfer_ckpt, "")->required();
    transfer_cmd->add_option("--sims", transfer_sims, "")->capture_default_str();
    transfer_cmd->add_option("--nodes", transfer_nodes, "density-matched interior nodes")
        ->capture_default_str();
    transfer_cmd->add_option("--frames", transfer_frames, "")->capture_default_str();
    transfer_cmd->add_option("--n", transfer_n, "input frames (must match checkpoint)")
        ->capture_default_str();
    transfer_cmd->add_option("--gap", transfer_gap, "")->capture_default_str();
    transfer_cmd->add_option("-o,--out", transfer_out, "report CSV");

    // ---- ablate --------------------------------------------------------
    auto* ablate_cmd = app.add_subcommand("ablate", "input-frame-count ablation table");
    std::string ablate_out = "ablation.csv", ablate_grid = "2:40,3:25,4:20,5:15,8:10";
    pipeline::AblationConfig acfg;
    ablate_cmd->add_option("--grid", ablate_grid, "n:gap pairs")->capture_default_str();
    ablate_cmd->add_option("--train-sims", acfg.train_sims, "")->capture_default_str();
    ablate_cmd->add_option("--transfer-sims", acfg.transfer_sims, "")->capture_default_str();
    ablate_cmd->add_option("--epochs", acfg.epochs, "")->capture_default_str();
    ablate_cmd->add_option("--nodes", acfg.gen.interior_nodes, "")->capture_default_str();
    ablate_cmd->add_option("-o,--out", ablate_out, "table CSV")->capture_default_str();

    // ---- rollout -------------------------------------------------------
    auto* roll_cmd = app.add_subcommand("rollout", "recurrent multi-step prediction");
    std::string roll_ckpt, roll_traj, roll_mesh, roll_out = "rollout.csv";
    int roll_steps = 8;
    bool roll_teacher = false, roll_any_n = false;
    roll_cmd->add_option("--checkpoint", roll_ckpt, "n=3, m=1 checkpoint")->required();
    roll_cmd->add_option("--traj", roll_traj, "ground-truth trajectory at the model cadence")
        ->required();
    roll_cmd->add_option("--mesh", roll_mesh, "graph override (default: trajectory reference)");
    roll_cmd->add_option("--steps", roll_steps, "")->capture_default_str();
    roll_cmd->add_flag("--teacher-forcing", roll_teacher, "feed ground truth back instead");
    roll_cmd->add_flag("--allow-any-n", roll_any_n, "lift the n=3 restriction");
    roll_cmd->add_option("-o,--out", roll_out, "per-step error CSV")->capture_default_str();

    // ---- bench ---------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "resolution/geometry transfer matrix");
    std::string bench_out = "benchmark.csv";
    pipeline::BenchmarkConfig bcfg;
    bench_cmd->add_option("--train-sims", bcfg.train_sims, "")->capture_default_str();
    bench_cmd->add_option("--eval-sims", bcfg.eval_sims, "")->capture_default_str();
    bench_cmd->add_option("--epochs", bcfg.epochs, "")->capture_default_str();
    bench_cmd->add_option("--high-nodes", bcfg.high_res_nodes, "")->capture_default_str();
    bench_cmd->add_option("--low-nodes", bcfg.low_res_nodes, "")->capture_default_str();
    bench_cmd->add_option("-o,--out", bench_out, "grid CSV")->capture_default_str();

    // ---- plot ----------------------------------------------------------
    auto* plot_cmd = app.add_subcommand("plot", "rasterize a nodal field to PPM + CSV");
    std::string plot_traj, plot_pred, plot_mesh, plot_out = "field.ppm", plot_csv;
    int plot_frame = 0, plot_width = 256, plot_height = 256;
    plot_cmd->add_option("--traj", plot_traj, "trajectory file (ground truth)")->required();
    plot_cmd->add_option("--pred", plot_pred,
                         "prediction trajectory; enables the triptych (pred|truth|error)");
    plot_cmd->add_option("--mesh", plot_mesh, "graph override");
    plot_cmd->add_option("--frame", plot_frame, "frame index")->capture_default_str();
    plot_cmd->add_option("--width", plot_width, "")->capture_default_str();
    plot_cmd->add_option("--height", plot_height, "")->capture_default_str();
    plot_cmd->add_option("-o,--out", plot_out, "PPM output")->capture_default_str();
    plot_cmd->add_option("--csv", plot_csv, "value-grid CSV output");

    // ---- validate ------------------------------------------------------
    auto* val_cmd = app.add_subcommand("validate", "check file integrity and invariants");
    std::vector<std::string> val_files;
    val_cmd->add_option("files", val_files, "files to check")->required();

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const fs::path out_dir = g.out_dir;
    CLI::App* sub = app.get_subcommands().front();
    write_resolved_config(app, out_dir, sub->get_name());

    if (sub == mesh_cmd) {
        const Domain domain = domain_by_name(mesh_domain, mesh_side);
        Graph graph = triangulate(sample_points(domain, mesh_nodes, g.seed), domain);
        if (mesh_stitch) graph = stitch_periodic(graph, domain);
        save_graph(graph, mesh_out);
        std::cout << "mesh: " << graph.node_count() << " nodes, " << graph.edge_count()
                  << " directed edges, mean edge " << mean_edge_length(graph) << "\n";
        return 0;
    }

    if (sub == sim_cmd) {
        if (sim_pde == "ns") {
            Graph graph;
            if (!sim_mesh.empty()) {
                graph = load_graph(sim_mesh);
            } else {
                const Domain domain = make_periodic_square(2.0 * std::numbers::pi);
                graph = stitch_periodic(
                    triangulate(sample_points(domain, sim_nodes, g.seed), domain), domain);
                save_graph(graph, sim_out + ".pgn");
            }
            spectral::NsConfig cfg;
            cfg.nu = sim_nu;
            cfg.t_end = sim_t_end;
            cfg.dt = sim_dt;
            cfg.record_every = sim_record_every;
            cfg.seed = g.seed;
            Trajectory traj = spectral::simulate_ns(sim_grid, cfg, graph);
            traj.graph_path = sim_mesh.empty() ? fs::path(sim_out + ".pgn").filename().string()
                                               : sim_mesh;
            save_trajectory(traj, sim_out);
            std::cout << "ns trajectory: " << traj.frame_count() << " frames on "
                      << traj.node_count() << " nodes\n";
            return 0;
        }

        const Domain domain = domain_by_name(sim_domain, 1.0);
        Graph graph;
        std::string graph_ref;
        if (!sim_mesh.empty()) {
            graph = load_graph(sim_mesh);
            graph_ref = sim_mesh;
        } else {
            graph = triangulate(sample_points(domain, sim_nodes, g.seed), domain);
            save_graph(graph, sim_out + ".pgn");
            graph_ref = fs::path(sim_out + ".pgn").filename().string();
        }
        const auto bc = parse_bc(sim_bc, domain);
        PdeSpec pde = sim_pde == "advdiff" ? advection_diffusion_pde(sim_l1, sim_l2, bc)
                                           : heat_pde(bc);
        SimulateConfig cfg;
        cfg.t_end = sim_t_end;
        cfg.dt_solver = sim_dt;
        cfg.dt_record = sim_dt * sim_record_every;
        cfg.seed = g.seed;
        if (sim_ic == "constant") {
            cfg.ic.kind = InitialCondition::Kind::Constant;
            cfg.ic.value = sim_ic_value;
        } else if (sim_ic == "sine-product") {
            cfg.ic.kind = InitialCondition::Kind::SineProduct;
        } else if (sim_ic == "trig") {
            cfg.ic.kind = InitialCondition::Kind::TrigSeriesX;
            Rng rng(g.seed);
            for (double& c : cfg.ic.coeffs) c = rng.uniform(-1.0, 1.0);
        }
        Trajectory traj = simulate(graph, domain, pde, cfg);
        traj.graph_path = graph_ref;
        save_trajectory(traj, sim_out);
        std::cout << "trajectory: " << traj.frame_count() << " frames on " << traj.node_count()
                  << " nodes, range [" << traj.frames.minCoeff() << ", " << traj.frames.maxCoeff()
                  << "]\n";
        return 0;
    }

    if (sub == data_cmd) {
        data::DatasetManifest man;
        if (data_pde == "advdiff") {
            pipeline::AdvDiffGenConfig cfg;
            cfg.interior_nodes = data_nodes;
            cfg.frames = data_frames;
            cfg.record_every = data_record_every;
            man = pipeline::generate_advdiff_dataset(data_dir, data_sims, cfg, data_win, g.seed,
                                                     g.threads);
        } else {
            pipeline::HeatGenConfig cfg;
            cfg.interior_nodes = data_nodes;
            cfg.frames = data_frames;
            cfg.record_every = data_record_every;
            man = pipeline::generate_heat_dataset(data_dir, data_sims, cfg, data_win, g.seed,
                                                  g.threads);
        }
        std::cout << "dataset: " << man.records.size() << " simulations, manifest hash "
                  << data::manifest_hash(man) << "\n";
        return 0;
    }

    if (sub == train_cmd) {
        const auto man = data::load_manifest(train_manifest);
        tcfg.seed = g.seed;
        tcfg.threads = g.threads;
        tcfg.checkpoint_path = train_out;
        if (!train_last.empty()) tcfg.last_checkpoint_path = train_last;
        if (!train_resume.empty()) tcfg.resume_from = train_resume;
        const auto result =
            pipeline::train(tcfg, man, fs::path(train_manifest).parent_path());
        if (!train_curve.empty()) pipeline::write_loss_curve_csv(result.curve, train_curve);
        for (const auto& e : result.curve) {
            std::cout << "epoch " << e.epoch << " lr " << e.lr << " train " << e.train_mse
                      << " val " << e.val_mse << "\n";
        }
        return 0;
    }

    if (sub == eval_cmd) {
        const auto ckpt = gnn::load_checkpoint(eval_ckpt);
        const auto man = data::load_manifest(eval_manifest);
        const auto split = eval_split == "train" ? data::Split::Train
                           : eval_split == "val" ? data::Split::Val
                                                 : data::Split::Test;
        const auto samples = pipeline::compile_samples(
            data::materialize_split(man, split, fs::path(eval_manifest).parent_path()),
            ckpt.model.stats, eval_zero_lambda);
        const auto report = pipeline::evaluate(ckpt.model, samples, g.threads);
        std::cout << pipeline::report_text(report);
        if (!eval_out.empty()) pipeline::write_report_csv(report, eval_out);
        return 0;
    }

    if (sub == transfer_cmd) {
        const auto ckpt = gnn::load_checkpoint(transfer_ckpt);
        pipeline::HeatGenConfig gen;
        gen.interior_nodes = transfer_nodes;
        gen.frames = transfer_frames;
        pipeline::WindowConfig win;
        win.n = transfer_n;
        win.gap = transfer_gap;
        const auto report = pipeline::transfer_test(ckpt.model, transfer_sims, gen, win, g.seed,
                                                    out_dir / "transfer_work", g.threads);
        std::cout << pipeline::report_text(report);
        if (!transfer_out.empty()) pipeline::write_report_csv(report, transfer_out);
        return 0;
    }

    if (sub == ablate_cmd) {
        acfg.frames_and_gaps.clear();
        std::stringstream ss(ablate_grid);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto colon = item.find(':');
            acfg.frames_and_gaps.emplace_back(std::stoi(item.substr(0, colon)),
                                              std::stoi(item.substr(colon + 1)));
        }
        acfg.seed = g.seed;
        acfg.trainer.threads = g.threads;
        const auto rows = pipeline::frame_ablation(acfg, out_dir / "ablation_work");
        pipeline::write_ablation_csv(rows, ablate_out);
        for (const auto& r : rows) {
            std::cout << "n=" << r.n_frames << " gap=" << r.gap << " same " << r.same_geometry_mse
                      << " transfer " << r.transfer_mse << "\n";
        }
        return 0;
    }

    if (sub == roll_cmd) {
        const auto ckpt = gnn::load_checkpoint(roll_ckpt);
        const Trajectory traj = load_trajectory(roll_traj);
        const Graph graph = load_graph_for_trajectory(roll_traj, traj, roll_mesh);
        const auto result =
            pipeline::rollout(ckpt.model, graph, traj, roll_steps, roll_teacher, roll_any_n);
        std::ostringstream os;
        os.precision(17);
        os << "step,mse\n";
        for (size_t s = 0; s < result.step_mse.size(); ++s) {
            os << (s + 1) << ',' << result.step_mse[s] << '\n';
        }
        io::write_text_atomic(roll_out, os.str());
        std::cout << "rollout: " << result.step_mse.size() << " scored steps\n";
        return 0;
    }

    if (sub == bench_cmd) {
        bcfg.seed = g.seed;
        bcfg.trainer.threads = g.threads;
        const auto cells = pipeline::benchmark_matrix(bcfg, out_dir / "bench_work");
        pipeline::write_benchmark_csv(cells, bench_out);
        for (const auto& c : cells) {
            std::cout << c.train_res << "-res model, " << c.geometry << " geometry, " << c.eval_res
                      << " res: mse " << c.mse << "\n";
        }
        return 0;
    }

    if (sub == plot_cmd) {
        const Trajectory traj = load_trajectory(plot_traj);
        const Graph graph = load_graph_for_trajectory(plot_traj, traj, plot_mesh);
        if (plot_frame < 0 || plot_frame >= traj.frame_count()) {
            throw std::runtime_error("frame index out of range");
        }
        const Eigen::VectorXd truth = traj.frames.row(plot_frame).transpose();
        const auto truth_img = raster::rasterize_field(graph, truth, plot_width, plot_height);
        double vmin = truth.minCoeff(), vmax = truth.maxCoeff();
        raster::RasterImage img = truth_img;
        if (!plot_pred.empty()) {
            const Trajectory pred = load_trajectory(plot_pred);
            const Eigen::VectorXd pv = pred.frames.row(plot_frame).transpose();
            const auto pred_img = raster::rasterize_field(graph, pv, plot_width, plot_height);
            vmin = std::min(vmin, pv.minCoeff());
            vmax = std::max(vmax, pv.maxCoeff());
            img = raster::triptych(pred_img, truth_img);
        }
        raster::write_ppm(img, vmin, vmax, plot_out);
        if (!plot_csv.empty()) raster::write_field_csv(img, plot_csv);
        std::cout << "wrote " << plot_out << "\n";
        return 0;
    }

    if (sub == val_cmd) {
        bool all_ok = true;
        for (const auto& f : val_files) {
            const auto report = validate::validate_file(f);
            std::cout << validate::report_text(report);
            all_ok = all_ok && report.ok();
        }
        return all_ok ? 0 : 1;
    }

    throw std::runtime_error("unhandled subcommand");
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return run_impl(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace meshpde::cli
