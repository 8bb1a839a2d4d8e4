#include "meshpde/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "meshpde/io.hpp"
#include "meshpde/rng.hpp"

namespace meshpde::data {

int window_count(int frames, int n, int m, int gap, int max_windows) {
    if (n < 1 || m < 1 || gap < 1) throw DatasetError("window: n, m, gap must be >= 1");
    const int span = (n + m - 1) * gap;
    return std::min(max_windows, frames - span);
}

int edge_feature_dim(PdeKind kind) {
    return kind == PdeKind::AdvectionDiffusion ? 4 : 2;
}

Eigen::MatrixXd edge_feature_matrix(const Graph& g, const PdeSpec& pde) {
    if (pde.kind == PdeKind::AdvectionDiffusion && pde.lambda2 <= 0.0) {
        throw DatasetError("advection-diffusion trajectory lacks PDE parameters");
    }
    const int p = edge_feature_dim(pde.kind) - 2;
    Eigen::MatrixXd feats(static_cast<Eigen::Index>(g.edge_count()), 2 + p);
    for (size_t e = 0; e < g.edge_count(); ++e) {
        const Vec2 d = g.edge_displacement(e);
        const auto row = static_cast<Eigen::Index>(e);
        feats(row, 0) = d.x;
        feats(row, 1) = d.y;
        if (p > 0) {
            // PDE parameters at the edge midpoint; constant-lambda runs
            // broadcast the scalar so the layout stays uniform
            feats(row, 2) = pde.lambda1;
            feats(row, 3) = pde.lambda2;
        }
    }
    return feats;
}

Sample assemble_features(const Trajectory& traj, std::shared_ptr<const Graph> graph, int start,
                         int n, int m, int gap) {
    const Graph& g = *graph;
    const auto nn = static_cast<Eigen::Index>(g.node_count());
    if (traj.frames.cols() != nn) throw DatasetError("trajectory/graph node count mismatch");
    if (start < 0 || start + (n + m - 1) * gap >= traj.frame_count()) {
        throw DatasetError("window out of range");
    }

    Sample s;
    s.frame_gap = gap;
    s.node_features.resize(nn, n + 1);
    for (int f = 0; f < n; ++f) {
        s.node_features.col(f) = traj.frames.row(start + f * gap).transpose();
    }
    for (Eigen::Index i = 0; i < nn; ++i) {
        s.node_features(i, n) = static_cast<double>(g.boundary_flag[i]);
    }
    s.edge_features = edge_feature_matrix(g, traj.pde);
    s.graph = std::move(graph);

    s.targets.resize(nn, m);
    for (int f = 0; f < m; ++f) {
        s.targets.col(f) = traj.frames.row(start + (n + f) * gap).transpose();
    }
    return s;
}

std::vector<Sample> window(const Trajectory& traj, std::shared_ptr<const Graph> graph, int n,
                           int m, int gap, int max_windows) {
    const int count = window_count(traj.frame_count(), n, m, gap, max_windows);
    if (count < 1) {
        throw DatasetError("trajectory too short: " + std::to_string(traj.frame_count()) +
                           " frames, need at least " + std::to_string((n + m - 1) * gap + 1));
    }
    std::vector<Sample> out;
    out.reserve(count);
    for (int start = 0; start < count; ++start) {
        out.push_back(assemble_features(traj, graph, start, n, m, gap));
    }
    return out;
}

gnn::FeatureStats compute_normalization(const std::vector<Sample>& train_samples) {
    if (train_samples.empty()) throw DatasetError("compute_normalization: empty training split");
    const auto n_frames = train_samples.front().node_features.cols() - 1;
    const auto e_cols = train_samples.front().edge_features.cols();

    double node_sum = 0.0;
    long node_count = 0;
    Eigen::VectorXd edge_sum = Eigen::VectorXd::Zero(e_cols);
    long edge_count = 0;
    for (const auto& s : train_samples) {
        node_sum += s.node_features.leftCols(n_frames).sum();
        node_count += s.node_features.rows() * n_frames;
        edge_sum += s.edge_features.colwise().sum().transpose();
        edge_count += s.edge_features.rows();
    }
    const double node_mean = node_sum / static_cast<double>(node_count);
    const Eigen::VectorXd edge_mean = edge_sum / static_cast<double>(edge_count);

    double node_var = 0.0;
    Eigen::VectorXd edge_var = Eigen::VectorXd::Zero(e_cols);
    for (const auto& s : train_samples) {
        node_var += (s.node_features.leftCols(n_frames).array() - node_mean).square().sum();
        edge_var +=
            (s.edge_features.rowwise() - edge_mean.transpose()).array().square().colwise().sum()
                .matrix()
                .transpose();
    }
    constexpr double kStdFloor = 1e-8;
    gnn::FeatureStats stats;
    stats.node_mean = node_mean;
    stats.node_std = std::max(std::sqrt(node_var / static_cast<double>(node_count)), kStdFloor);
    stats.edge_mean = edge_mean;
    stats.edge_std = (edge_var / static_cast<double>(edge_count))
                         .array()
                         .sqrt()
                         .max(kStdFloor)
                         .matrix();
    return stats;
}

DatasetManifest build_manifest(const std::filesystem::path& dir,
                               const std::vector<std::pair<std::string, std::string>>& traj_graph,
                               int n, int m, int gap, int max_windows, double train_frac,
                               double val_frac, uint64_t seed) {
    if (traj_graph.empty()) throw DatasetError("build_manifest: no trajectories");
    DatasetManifest man;
    man.n = n;
    man.m = m;
    man.gap = gap;
    man.max_windows = max_windows;

    for (const auto& [tp, gp] : traj_graph) {
        TrajectoryRecord rec;
        rec.traj_path = tp;
        rec.graph_path = gp;
        rec.traj_checksum = io::crc32_file(dir / tp);
        rec.graph_checksum = io::crc32_file(dir / gp);
        const Trajectory traj = load_trajectory(dir / tp);
        man.edge_dim = edge_feature_dim(traj.pde.kind);
        const int count = window_count(traj.frame_count(), n, m, gap, max_windows);
        if (count < 1) {
            throw DatasetError("trajectory too short: " + tp + " has " +
                               std::to_string(traj.frame_count()) + " frames, need at least " +
                               std::to_string((n + m - 1) * gap + 1));
        }
        rec.window_offsets.resize(count);
        std::iota(rec.window_offsets.begin(), rec.window_offsets.end(), 0);
        man.records.push_back(std::move(rec));
    }

    // split whole simulations, never individual windows
    const size_t r = man.records.size();
    std::vector<size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x51717));
    rng.shuffle(order);
    auto n_train = static_cast<size_t>(std::llround(train_frac * static_cast<double>(r)));
    auto n_val = static_cast<size_t>(std::llround(val_frac * static_cast<double>(r)));
    n_train = std::clamp<size_t>(n_train, 1, r);
    n_val = std::min(n_val, r - n_train);
    for (size_t i = 0; i < r; ++i) {
        man.records[order[i]].split =
            i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
    }

    std::vector<Sample> train_samples = materialize_split(man, Split::Train, dir);
    man.stats = compute_normalization(train_samples);
    return man;
}

namespace {

std::string stats_line(const gnn::FeatureStats& s) {
    std::ostringstream os;
    os.precision(17);
    os << "node_stats\t" << s.node_mean << '\t' << s.node_std << "\nedge_stats\t"
       << s.edge_mean.size();
    for (Eigen::Index i = 0; i < s.edge_mean.size(); ++i) os << '\t' << s.edge_mean[i];
    for (Eigen::Index i = 0; i < s.edge_std.size(); ++i) os << '\t' << s.edge_std[i];
    return os.str();
}

std::string serialize_manifest(const DatasetManifest& man) {
    std::ostringstream os;
    os.precision(17);
    os << "MESHPDE-MANIFEST\tv1\n";
    os << "window\t" << man.n << '\t' << man.m << '\t' << man.gap << '\t' << man.max_windows
       << '\t' << man.edge_dim << '\n';
    os << stats_line(man.stats) << '\n';
    for (const auto& rec : man.records) {
        os << "traj\t" << split_name(rec.split) << '\t' << rec.traj_checksum << '\t'
           << rec.graph_checksum << '\t' << rec.window_offsets.size();
        for (const int off : rec.window_offsets) os << '\t' << off;
        os << '\t' << rec.traj_path << '\t' << rec.graph_path << '\n';
    }
    return os.str();
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, '\t')) out.push_back(field);
    return out;
}

}  // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

void save_manifest(const DatasetManifest& man, const std::filesystem::path& path) {
    io::write_text_atomic(path, serialize_manifest(man));
}

uint32_t manifest_hash(const DatasetManifest& man) {
    const std::string text = serialize_manifest(man);
    return io::crc32(reinterpret_cast<const uint8_t*>(text.data()), text.size());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open manifest: " + path.string());
    DatasetManifest man;
    std::string line;
    if (!std::getline(in, line) || split_tabs(line) != std::vector<std::string>{"MESHPDE-MANIFEST", "v1"}) {
        throw DatasetError("manifest " + path.string() + ": bad header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_tabs(line);
        if (f[0] == "window" && f.size() == 6) {
            man.n = std::stoi(f[1]);
            man.m = std::stoi(f[2]);
            man.gap = std::stoi(f[3]);
            man.max_windows = std::stoi(f[4]);
            man.edge_dim = std::stoi(f[5]);
        } else if (f[0] == "node_stats" && f.size() == 3) {
            man.stats.node_mean = std::stod(f[1]);
            man.stats.node_std = std::stod(f[2]);
        } else if (f[0] == "edge_stats" && f.size() >= 2) {
            const int cols = std::stoi(f[1]);
            if (static_cast<int>(f.size()) != 2 + 2 * cols) {
                throw DatasetError("manifest: malformed edge_stats");
            }
            man.stats.edge_mean.resize(cols);
            man.stats.edge_std.resize(cols);
            for (int i = 0; i < cols; ++i) man.stats.edge_mean[i] = std::stod(f[2 + i]);
            for (int i = 0; i < cols; ++i) man.stats.edge_std[i] = std::stod(f[2 + cols + i]);
        } else if (f[0] == "traj" && f.size() >= 7) {
            TrajectoryRecord rec;
            const std::string& split = f[1];
            rec.split = split == "train" ? Split::Train
                                         : (split == "val" ? Split::Val : Split::Test);
            rec.traj_checksum = static_cast<uint32_t>(std::stoul(f[2]));
            rec.graph_checksum = static_cast<uint32_t>(std::stoul(f[3]));
            const int offs = std::stoi(f[4]);
            if (static_cast<int>(f.size()) != 5 + offs + 2) {
                throw DatasetError("manifest: malformed traj record");
            }
            rec.window_offsets.resize(offs);
            for (int i = 0; i < offs; ++i) rec.window_offsets[i] = std::stoi(f[5 + i]);
            rec.traj_path = f[5 + offs];
            rec.graph_path = f[6 + offs];
            man.records.push_back(std::move(rec));
        } else {
            throw DatasetError("manifest " + path.string() + ": unrecognized line: " + f[0]);
        }
    }

    // verify references without decoding any frames
    const auto dir = path.parent_path();
    const auto check = [&dir](const std::string& p, uint32_t crc) {
        const auto full = dir / p;
        if (!std::filesystem::exists(full)) {
            throw DatasetError("manifest references missing file: " + p);
        }
        if (io::crc32_file(full) != crc) {
            throw DatasetError("checksum mismatch for " + p);
        }
    };
    for (const auto& rec : man.records) {
        check(rec.traj_path, rec.traj_checksum);
        check(rec.graph_path, rec.graph_checksum);
    }
    return man;
}

std::vector<Sample> materialize_record(const DatasetManifest& man, const TrajectoryRecord& rec,
                                       const std::filesystem::path& base_dir) {
    const Trajectory traj = load_trajectory(base_dir / rec.traj_path);
    auto graph = std::make_shared<const Graph>(load_graph(base_dir / rec.graph_path));
    std::vector<Sample> out;
    out.reserve(rec.window_offsets.size());
    for (const int start : rec.window_offsets) {
        out.push_back(assemble_features(traj, graph, start, man.n, man.m, man.gap));
    }
    return out;
}

std::vector<Sample> materialize_split(const DatasetManifest& man, Split split,
                                      const std::filesystem::path& base_dir) {
    std::vector<Sample> out;
    for (const auto& rec : man.records) {
        if (rec.split != split) continue;
        auto samples = materialize_record(man, rec, base_dir);
        std::move(samples.begin(), samples.end(), std::back_inserter(out));
    }
    return out;
}

}  // namespace meshpde::data
