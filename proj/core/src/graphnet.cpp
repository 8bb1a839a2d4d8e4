#include "meshpde/graphnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meshpde/io.hpp"
#include "meshpde/rng.hpp"

namespace meshpde::gnn {

namespace {

// Dense GEMM kernels round differently for rows in the vectorized main block
// than in the scalar tail, so a row's result can depend on its position in
// the batch. Every MLP application therefore runs on a content-sorted copy of
// its input: identical row multisets land in identical positions, which makes
// the forward pass bitwise equivariant under node/edge relabeling.
std::vector<Eigen::Index> content_order(const Eigen::MatrixXd& rows) {
    std::vector<Eigen::Index> order(rows.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            const double va = rows(a, c), vb = rows(b, c);
            if (va < vb) return true;
            if (va > vb) return false;
        }
        return false;
    });
    return order;
}

struct MlpCache {
    std::vector<Eigen::MatrixXd> acts;  // content-sorted: acts[0] = input, acts[l] = layer l out
    std::vector<Eigen::Index> order;    // sorted position -> original row
};

Eigen::MatrixXd mlp_forward(const Mlp& mlp, const Eigen::MatrixXd& input, MlpCache* cache) {
    const auto order = content_order(input);
    Eigen::MatrixXd x(input.rows(), input.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) x.row(r) = input.row(order[r]);
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(x);
        cache->order = order;
    }
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        Eigen::MatrixXd z = x * mlp.weights[l].transpose();
        z.rowwise() += mlp.biases[l].transpose();
        if (l + 1 < mlp.weights.size()) z = z.cwiseMax(0.0);  // ReLU on hidden layers
        x = std::move(z);
        if (cache) cache->acts.push_back(x);
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(order[r]) = x.row(r);
    return out;
}

// Propagates dY (original row order) back through the MLP, accumulating
// parameter gradients. Returns dX in original row order.
Eigen::MatrixXd mlp_backward(const Mlp& mlp, const MlpCache& cache, const Eigen::MatrixXd& d_y,
                             MlpGrads& grads) {
    Eigen::MatrixXd d_out(d_y.rows(), d_y.cols());
    for (Eigen::Index r = 0; r < d_y.rows(); ++r) d_out.row(r) = d_y.row(cache.order[r]);
    for (size_t l = mlp.weights.size(); l-- > 0;) {
        if (l + 1 < mlp.weights.size()) {
            // ReLU mask from the stored post-activation (relu(x) > 0 iff x > 0)
            d_out.array() *= (cache.acts[l + 1].array() > 0.0).cast<double>();
        }
        grads.weights[l].noalias() += d_out.transpose() * cache.acts[l];
        grads.biases[l].noalias() += d_out.colwise().sum().transpose();
        if (l > 0) d_out = d_out * mlp.weights[l];
    }
    Eigen::MatrixXd d_in = d_out * mlp.weights[0];
    Eigen::MatrixXd unsorted(d_in.rows(), d_in.cols());
    for (Eigen::Index r = 0; r < d_in.rows(); ++r) unsorted.row(cache.order[r]) = d_in.row(r);
    return unsorted;
}

Mlp make_mlp(const std::vector<int>& dims, Rng& rng) {
    Mlp mlp;
    for (size_t l = 1; l < dims.size(); ++l) {
        const int in = dims[l - 1], out = dims[l];
        Eigen::MatrixXd w(out, in);
        const double limit = std::sqrt(6.0 / in);  // He-uniform for ReLU
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-limit, limit);
        }
        mlp.weights.push_back(std::move(w));
        mlp.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return mlp;
}

std::vector<int> phi_dims(const ModelSpec& s, int k) {
    return {2 * s.node_dim_at(k) + s.edge_dim, s.hidden_dim, s.hidden_dim, s.hidden_dim};
}

std::vector<int> gamma_dims(const ModelSpec& s, int k) {
    return {s.node_dim_at(k) + s.hidden_dim, s.hidden_dim, s.hidden_dim, s.node_dim_after(k)};
}

MlpGrads zero_like(const Mlp& mlp) {
    MlpGrads g;
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        g.weights.push_back(Eigen::MatrixXd::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(mlp.biases[l].size()));
    }
    return g;
}

// Content-lexicographic message order. Equal-content ties are harmless: IEEE
// addition of identical rows commutes bitwise.
void sort_by_content(const Eigen::MatrixXd& msgs, std::vector<int>& idx) {
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        for (Eigen::Index c = 0; c < msgs.cols(); ++c) {
            const double va = msgs(a, c), vb = msgs(b, c);
            if (va < vb) return true;
            if (va > vb) return false;
        }
        return false;
    });
}

Eigen::MatrixXd normalize_nodes(const Eigen::MatrixXd& raw, const ModelSpec& spec,
                                const FeatureStats& stats) {
    if (raw.cols() != spec.node_feature_dim()) {
        throw GnnError("node feature width " + std::to_string(raw.cols()) + " != expected " +
                       std::to_string(spec.node_feature_dim()));
    }
    Eigen::MatrixXd x = raw;
    x.leftCols(spec.input_frames) =
        (x.leftCols(spec.input_frames).array() - stats.node_mean) / stats.node_std;
    return x;
}

}  // namespace

MpgnnModel init_model(const ModelSpec& spec, uint64_t seed) {
    if (spec.message_layers < 1 || spec.latent_dim < 1 || spec.hidden_dim < 1 ||
        spec.input_frames < 1 || spec.output_frames < 1 || spec.edge_dim < 2) {
        throw GnnError("init_model: invalid architecture");
    }
    if (spec.aggregation != 0) throw GnnError("init_model: only mean aggregation implemented");
    MpgnnModel model;
    model.spec = spec;
    model.stats.edge_mean = Eigen::VectorXd::Zero(spec.edge_dim);
    model.stats.edge_std = Eigen::VectorXd::Ones(spec.edge_dim);
    uint64_t stream = 0;
    for (int k = 0; k < spec.message_layers; ++k) {
        Rng rp(mix_seed(seed, stream++));
        model.message_net.push_back(make_mlp(phi_dims(spec, k), rp));
        Rng rg(mix_seed(seed, stream++));
        model.update_net.push_back(make_mlp(gamma_dims(spec, k), rg));
    }
    return model;
}

CompiledGraph compile_graph(const Graph& g, const Eigen::MatrixXd& raw_edge_features,
                            const FeatureStats& stats) {
    const int n = static_cast<int>(g.node_count());
    const auto m = static_cast<Eigen::Index>(g.edge_count());
    if (raw_edge_features.rows() != m) throw GnnError("edge feature rows != edge count");

    CompiledGraph cg;
    cg.n_nodes = n;
    if (stats.edge_mean.size() != raw_edge_features.cols()) {
        throw GnnError("edge stats width mismatch");
    }

    // canonical (receiver, sender) order so the edge-list order of the input
    // graph cannot influence anything downstream
    std::vector<Eigen::Index> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return g.edges[a] < g.edges[b]; });

    cg.edge_features.resize(m, raw_edge_features.cols());
    cg.recv.resize(m);
    cg.send.resize(m);
    cg.offsets.assign(n + 1, 0);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto [i, j] = g.edges[order[e]];
        cg.edge_features.row(e) = raw_edge_features.row(order[e]);
        cg.recv[e] = static_cast<int>(i);
        cg.send[e] = static_cast<int>(j);
        ++cg.offsets[i + 1];
    }
    for (Eigen::Index c = 0; c < cg.edge_features.cols(); ++c) {
        cg.edge_features.col(c) =
            (cg.edge_features.col(c).array() - stats.edge_mean[c]) / stats.edge_std[c];
    }
    for (int i = 0; i < n; ++i) cg.offsets[i + 1] += cg.offsets[i];
    for (int i = 0; i < n; ++i) {
        if (cg.offsets[i + 1] == cg.offsets[i]) {
            throw GnnError("isolated node " + std::to_string(i) + " has no neighbors");
        }
    }
    return cg;
}

struct LayerCache {
    MlpCache phi, gamma;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Eigen::MatrixXd output_norm;
};

namespace {

Eigen::MatrixXd forward_normalized(const MpgnnModel& model, const CompiledGraph& g,
                                   const Eigen::MatrixXd& nodes_norm, ForwardCache* cache) {
    const auto& spec = model.spec;
    const int n = g.n_nodes;
    const auto m = static_cast<Eigen::Index>(g.recv.size());
    if (nodes_norm.rows() != n) throw GnnError("node feature rows != node count");
    if (g.edge_features.cols() != spec.edge_dim) throw GnnError("edge feature width mismatch");

    if (cache) cache->layers.assign(spec.message_layers, {});
    Eigen::MatrixXd x = nodes_norm;
    std::vector<int> idx;

    for (int k = 0; k < spec.message_layers; ++k) {
        const auto d = x.cols();
        Eigen::MatrixXd phi_in(m, 2 * d + spec.edge_dim);
        for (Eigen::Index e = 0; e < m; ++e) {
            phi_in.block(e, 0, 1, d) = x.row(g.recv[e]);
            phi_in.block(e, d, 1, d) = x.row(g.send[e]);
        }
        phi_in.rightCols(spec.edge_dim) = g.edge_features;

        MlpCache local_phi;
        MlpCache* phi_cache = cache ? &cache->layers[k].phi : &local_phi;
        const Eigen::MatrixXd msgs =
            mlp_forward(model.message_net[k], std::move(phi_in), phi_cache);

        // mean over neighbors, content-sorted so the sum order is canonical
        Eigen::MatrixXd agg(n, spec.hidden_dim);
        for (int i = 0; i < n; ++i) {
            const int lo = g.offsets[i], hi = g.offsets[i + 1];
            idx.assign(static_cast<size_t>(hi - lo), 0);
            std::iota(idx.begin(), idx.end(), lo);
            sort_by_content(msgs, idx);
            for (Eigen::Index c = 0; c < spec.hidden_dim; ++c) {
                double acc = 0.0;
                for (const int e : idx) acc += msgs(e, c);
                agg(i, c) = acc / static_cast<double>(hi - lo);
            }
        }

        Eigen::MatrixXd gamma_in(n, d + spec.hidden_dim);
        gamma_in.leftCols(d) = x;
        gamma_in.rightCols(spec.hidden_dim) = agg;
        MlpCache local_gamma;
        MlpCache* gamma_cache = cache ? &cache->layers[k].gamma : &local_gamma;
        x = mlp_forward(model.update_net[k], std::move(gamma_in), gamma_cache);
    }
    if (cache) cache->output_norm = x;
    return x;
}

}  // namespace

Eigen::MatrixXd forward(const MpgnnModel& model, const CompiledGraph& graph,
                        const Eigen::MatrixXd& raw_node_features, ForwardCache* cache) {
    const Eigen::MatrixXd nodes = normalize_nodes(raw_node_features, model.spec, model.stats);
    Eigen::MatrixXd out = forward_normalized(model, graph, nodes, cache);
    return (out.array() * model.stats.node_std + model.stats.node_mean).matrix();
}

double loss_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw GnnError("loss_mse: shape mismatch");
    }
    return (predictions - targets).squaredNorm() /
           static_cast<double>(predictions.rows() * predictions.cols());
}

void ModelGrads::add_scaled(const ModelGrads& other, double scale) {
    for (size_t k = 0; k < message_net.size(); ++k) {
        for (size_t l = 0; l < message_net[k].weights.size(); ++l) {
            message_net[k].weights[l] += scale * other.message_net[k].weights[l];
            message_net[k].biases[l] += scale * other.message_net[k].biases[l];
        }
        for (size_t l = 0; l < update_net[k].weights.size(); ++l) {
            update_net[k].weights[l] += scale * other.update_net[k].weights[l];
            update_net[k].biases[l] += scale * other.update_net[k].biases[l];
        }
    }
}

ModelGrads make_zero_grads(const MpgnnModel& model) {
    ModelGrads g;
    for (const auto& mlp : model.message_net) g.message_net.push_back(zero_like(mlp));
    for (const auto& mlp : model.update_net) g.update_net.push_back(zero_like(mlp));
    return g;
}

double forward_backward(const MpgnnModel& model, const CompiledGraph& g,
                        const Eigen::MatrixXd& raw_node_features,
                        const Eigen::MatrixXd& raw_targets, ModelGrads& grads, double weight) {
    const auto& spec = model.spec;
    const int n = g.n_nodes;
    const auto m = static_cast<Eigen::Index>(g.recv.size());

    const Eigen::MatrixXd nodes = normalize_nodes(raw_node_features, spec, model.stats);
    Eigen::MatrixXd targets_norm =
        ((raw_targets.array() - model.stats.node_mean) / model.stats.node_std).matrix();
    if (targets_norm.rows() != n || targets_norm.cols() != spec.output_frames) {
        throw GnnError("target shape mismatch");
    }

    ForwardCache cache;
    forward_normalized(model, g, nodes, &cache);

    const double denom = static_cast<double>(n) * spec.output_frames;
    const Eigen::MatrixXd residual = cache.output_norm - targets_norm;
    const double mse = residual.squaredNorm() / denom;

    Eigen::MatrixXd d_x = residual * (2.0 * weight / denom);
    for (int k = spec.message_layers - 1; k >= 0; --k) {
        const auto d = spec.node_dim_at(k);
        const Eigen::MatrixXd d_gamma_in =
            mlp_backward(model.update_net[k], cache.layers[k].gamma, std::move(d_x),
                         grads.update_net[k]);

        Eigen::MatrixXd d_msgs(m, spec.hidden_dim);
        for (int i = 0; i < n; ++i) {
            const int lo = g.offsets[i], hi = g.offsets[i + 1];
            const double inv_deg = 1.0 / static_cast<double>(hi - lo);
            for (int e = lo; e < hi; ++e) {
                d_msgs.row(e) = d_gamma_in.row(i).tail(spec.hidden_dim) * inv_deg;
            }
        }
        const Eigen::MatrixXd d_phi_in = mlp_backward(model.message_net[k], cache.layers[k].phi,
                                                      std::move(d_msgs), grads.message_net[k]);

        Eigen::MatrixXd d_prev = d_gamma_in.leftCols(d);
        for (Eigen::Index e = 0; e < m; ++e) {
            d_prev.row(g.recv[e]) += d_phi_in.block(e, 0, 1, d);
            d_prev.row(g.send[e]) += d_phi_in.block(e, d, 1, d);
        }
        d_x = std::move(d_prev);
    }
    return mse;
}

ModelGrads backward(const MpgnnModel& model, const std::vector<TrainingSample>& batch,
                    double* mean_loss) {
    if (batch.empty()) throw GnnError("backward: empty batch");
    ModelGrads grads = make_zero_grads(model);
    const double w = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const auto& sample : batch) {
        loss += w * forward_backward(model, *sample.graph, sample.node_features, sample.targets,
                                     grads, w);
    }
    if (mean_loss) *mean_loss = loss;
    return grads;
}

AdamState make_adam_state(const MpgnnModel& model) {
    AdamState s;
    for (const auto& mlp : model.message_net) {
        s.m_message.push_back(zero_like(mlp));
        s.v_message.push_back(zero_like(mlp));
    }
    for (const auto& mlp : model.update_net) {
        s.m_update.push_back(zero_like(mlp));
        s.v_update.push_back(zero_like(mlp));
    }
    return s;
}

namespace {

void adam_update_array(Eigen::Ref<Eigen::MatrixXd> p, const Eigen::MatrixXd& g,
                       Eigen::MatrixXd& m, Eigen::MatrixXd& v, double lr, double beta1,
                       double beta2, double eps, double bc1, double bc2) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v.array().matrix() + (1.0 - beta2) * g.array().square().matrix();
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(MpgnnModel& model, const ModelGrads& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    const auto update_mlp = [&](Mlp& mlp, const MlpGrads& g, MlpGrads& m, MlpGrads& v) {
        for (size_t l = 0; l < mlp.weights.size(); ++l) {
            adam_update_array(mlp.weights[l], g.weights[l], m.weights[l], v.weights[l], lr, beta1,
                              beta2, eps, bc1, bc2);
            Eigen::MatrixXd gb = g.biases[l], mb = m.biases[l], vb = v.biases[l];
            Eigen::MatrixXd pb = mlp.biases[l];
            adam_update_array(pb, gb, mb, vb, lr, beta1, beta2, eps, bc1, bc2);
            mlp.biases[l] = pb;
            m.biases[l] = mb;
            v.biases[l] = vb;
        }
    };
    for (size_t k = 0; k < model.message_net.size(); ++k) {
        update_mlp(model.message_net[k], grads.message_net[k], state.m_message[k],
                   state.v_message[k]);
        update_mlp(model.update_net[k], grads.update_net[k], state.m_update[k],
                   state.v_update[k]);
    }
}

double lr_schedule(int epoch, double base_lr) {
    return base_lr * std::pow(0.2, static_cast<double>(epoch / 5));
}

namespace {

void write_mlp_params(io::Writer& w, const Mlp& mlp) {
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        const auto& wt = mlp.weights[l];
        for (Eigen::Index r = 0; r < wt.rows(); ++r) {
            for (Eigen::Index c = 0; c < wt.cols(); ++c) w.f64(wt(r, c));
        }
        for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i) w.f64(mlp.biases[l][i]);
    }
}

void read_mlp_params(io::Reader& r, Mlp& mlp) {
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        auto& wt = mlp.weights[l];
        for (Eigen::Index row = 0; row < wt.rows(); ++row) {
            for (Eigen::Index c = 0; c < wt.cols(); ++c) wt(row, c) = r.f64();
        }
        for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i) mlp.biases[l][i] = r.f64();
    }
}

void write_grads_blob(io::Writer& w, const std::vector<MlpGrads>& gs) {
    for (const auto& g : gs) {
        for (size_t l = 0; l < g.weights.size(); ++l) {
            for (Eigen::Index r = 0; r < g.weights[l].rows(); ++r) {
                for (Eigen::Index c = 0; c < g.weights[l].cols(); ++c) w.f64(g.weights[l](r, c));
            }
            for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) w.f64(g.biases[l][i]);
        }
    }
}

void read_grads_blob(io::Reader& r, std::vector<MlpGrads>& gs) {
    for (auto& g : gs) {
        for (size_t l = 0; l < g.weights.size(); ++l) {
            for (Eigen::Index row = 0; row < g.weights[l].rows(); ++row) {
                for (Eigen::Index c = 0; c < g.weights[l].cols(); ++c) {
                    g.weights[l](row, c) = r.f64();
                }
            }
            for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) g.biases[l][i] = r.f64();
        }
    }
}

uint64_t param_count(const MpgnnModel& model) {
    uint64_t count = 0;
    const auto count_mlp = [&](const Mlp& mlp) {
        for (size_t l = 0; l < mlp.weights.size(); ++l) {
            count += static_cast<uint64_t>(mlp.weights[l].size()) + mlp.biases[l].size();
        }
    };
    for (const auto& mlp : model.message_net) count_mlp(mlp);
    for (const auto& mlp : model.update_net) count_mlp(mlp);
    return count;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto& model = ckpt.model;
    const auto& spec = model.spec;
    io::Writer w;
    w.magic("PMP1");
    w.u32(1);  // version
    w.u32(static_cast<uint32_t>(spec.message_layers));
    w.u32(static_cast<uint32_t>(spec.latent_dim));
    w.u32(static_cast<uint32_t>(spec.hidden_dim));
    w.u32(static_cast<uint32_t>(spec.input_frames));
    w.u32(static_cast<uint32_t>(spec.output_frames));
    w.u32(static_cast<uint32_t>(spec.edge_dim));
    w.u32(static_cast<uint32_t>(spec.aggregation));
    w.f64(model.stats.node_mean);
    w.f64(model.stats.node_std);
    w.u32(static_cast<uint32_t>(model.stats.edge_mean.size()));
    for (Eigen::Index i = 0; i < model.stats.edge_mean.size(); ++i) w.f64(model.stats.edge_mean[i]);
    for (Eigen::Index i = 0; i < model.stats.edge_std.size(); ++i) w.f64(model.stats.edge_std[i]);
    w.u64(param_count(model));
    for (int k = 0; k < spec.message_layers; ++k) {
        write_mlp_params(w, model.message_net[k]);
        write_mlp_params(w, model.update_net[k]);
    }
    w.u8(ckpt.has_optimizer ? 1 : 0);
    if (ckpt.has_optimizer) {
        w.i64(ckpt.optimizer.t);
        write_grads_blob(w, ckpt.optimizer.m_message);
        write_grads_blob(w, ckpt.optimizer.m_update);
        write_grads_blob(w, ckpt.optimizer.v_message);
        write_grads_blob(w, ckpt.optimizer.v_update);
    }
    w.u64(ckpt.epoch);
    w.str(ckpt.rng_state);
    w.finish_with_crc();
    io::write_file_atomic(path, w.buffer());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    io::Reader r(io::read_file(path));
    r.check_crc("checkpoint " + path.string());
    r.expect_magic("PMP1", "checkpoint " + path.string());
    const uint32_t version = r.u32();
    if (version != 1) {
        throw io::IoError("checkpoint " + path.string() + ": unsupported version " +
                          std::to_string(version));
    }
    ModelSpec spec;
    spec.message_layers = static_cast<int>(r.u32());
    spec.latent_dim = static_cast<int>(r.u32());
    spec.hidden_dim = static_cast<int>(r.u32());
    spec.input_frames = static_cast<int>(r.u32());
    spec.output_frames = static_cast<int>(r.u32());
    spec.edge_dim = static_cast<int>(r.u32());
    spec.aggregation = static_cast<int>(r.u32());

    Checkpoint ckpt;
    ckpt.model = init_model(spec, 0);
    ckpt.model.stats.node_mean = r.f64();
    ckpt.model.stats.node_std = r.f64();
    const uint32_t edge_cols = r.u32();
    if (static_cast<int>(edge_cols) != spec.edge_dim) {
        throw io::IoError("checkpoint " + path.string() + ": normalization width mismatch");
    }
    ckpt.model.stats.edge_mean.resize(edge_cols);
    ckpt.model.stats.edge_std.resize(edge_cols);
    for (auto i = 0u; i < edge_cols; ++i) ckpt.model.stats.edge_mean[i] = r.f64();
    for (auto i = 0u; i < edge_cols; ++i) ckpt.model.stats.edge_std[i] = r.f64();

    const uint64_t expected = r.u64();
    if (expected != param_count(ckpt.model)) {
        throw io::IoError("checkpoint " + path.string() + ": parameter count mismatch");
    }
    for (int k = 0; k < spec.message_layers; ++k) {
        read_mlp_params(r, ckpt.model.message_net[k]);
        read_mlp_params(r, ckpt.model.update_net[k]);
    }
    ckpt.has_optimizer = r.u8() != 0;
    ckpt.optimizer = make_adam_state(ckpt.model);
    if (ckpt.has_optimizer) {
        ckpt.optimizer.t = r.i64();
        read_grads_blob(r, ckpt.optimizer.m_message);
        read_grads_blob(r, ckpt.optimizer.m_update);
        read_grads_blob(r, ckpt.optimizer.v_message);
        read_grads_blob(r, ckpt.optimizer.v_update);
    }
    ckpt.epoch = r.u64();
    ckpt.rng_state = r.str();
    return ckpt;
}

}  // namespace meshpde::gnn
