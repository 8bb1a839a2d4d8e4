#include "meshpde/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "meshpde/io.hpp"

namespace meshpde {

PdeSpec heat_pde(std::vector<SegmentBc> bc) {
    PdeSpec p;
    p.kind = PdeKind::Heat;
    p.lambda1 = 0.0;
    p.lambda2 = 1.0;
    p.bc = std::move(bc);
    return p;
}

PdeSpec advection_diffusion_pde(double lambda1, double lambda2, std::vector<SegmentBc> bc) {
    if (lambda2 <= 0.0) throw FemError("advection-diffusion: lambda2 must be positive");
    PdeSpec p;
    p.kind = PdeKind::AdvectionDiffusion;
    p.lambda1 = lambda1;
    p.lambda2 = lambda2;
    p.bc = std::move(bc);
    return p;
}

Eigen::VectorXd InitialCondition::evaluate(const Graph& g) const {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
        case Kind::Zero:
            break;
        case Kind::Constant:
            u.setConstant(value);
            break;
        case Kind::TrigSeriesX:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x = g.positions[i].x;
                u[i] = coeffs[0] * std::sin(two_pi * x) + coeffs[1] * std::sin(2 * two_pi * x) +
                       coeffs[2] * std::cos(two_pi * x) + coeffs[3] * std::cos(2 * two_pi * x);
            }
            break;
        case Kind::SineProduct:
            for (Eigen::Index i = 0; i < n; ++i) {
                u[i] = std::sin(std::numbers::pi * g.positions[i].x) *
                       std::sin(std::numbers::pi * g.positions[i].y);
            }
            break;
    }
    return u;
}

P1Matrices assemble_p1(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    std::vector<Eigen::Triplet<double>> tm, tk, ta;
    tm.reserve(g.triangles.size() * 9);
    tk.reserve(g.triangles.size() * 9);
    ta.reserve(g.triangles.size() * 9);

    for (size_t t = 0; t < g.triangles.size(); ++t) {
        const auto& tri = g.triangles[t];
        const Vec2 p0 = g.positions[tri[0]];
        const Vec2 p1 = g.positions[tri[1]];
        const Vec2 p2 = g.positions[tri[2]];
        const double area2 = cross(p1 - p0, p2 - p0);  // signed, CCW positive
        const double area = 0.5 * std::abs(area2);
        const double scale = std::max({(p1 - p0).norm(), (p2 - p0).norm(), (p2 - p1).norm()});
        if (area <= 1e-14 * scale * scale) {
            throw FemError("assemble_p1: zero-area triangle #" + std::to_string(t) + " (" +
                           std::to_string(tri[0]) + "," + std::to_string(tri[1]) + "," +
                           std::to_string(tri[2]) + ")");
        }

        // P1 basis gradients: grad(phi_i) = (b_i, c_i) / (2 area)
        const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        const double inv4a = 1.0 / (4.0 * area);

        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const auto gi = static_cast<Eigen::Index>(tri[i]);
                const auto gj = static_cast<Eigen::Index>(tri[j]);
                tm.emplace_back(gi, gj, area / 12.0 * (i == j ? 2.0 : 1.0));
                tk.emplace_back(gi, gj, (b[i] * b[j] + c[i] * c[j]) * inv4a);
                // int phi_i d_x(phi_j) = (area/3) * b_j / (2 area) = b_j / 6
                ta.emplace_back(gi, gj, b[j] / 6.0);
            }
        }
    }

    P1Matrices out;
    out.mass.resize(n, n);
    out.stiffness.resize(n, n);
    out.advection_x.resize(n, n);
    out.mass.setFromTriplets(tm.begin(), tm.end());
    out.stiffness.setFromTriplets(tk.begin(), tk.end());
    out.advection_x.setFromTriplets(ta.begin(), ta.end());
    return out;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct PeriodicPairing {
    std::vector<int> reduced_of;  // full node -> reduced index
    int reduced_count = 0;
};

// Identifies slave nodes on the max-coordinate periodic face with masters on
// the min-coordinate face. axis 0 pairs left/right, axis 1 pairs top/bottom.
PeriodicPairing build_pairing(const Graph& g, const Domain& domain, const PdeSpec& pde) {
    const int n = static_cast<int>(g.node_count());
    PeriodicPairing pp;
    pp.reduced_of.assign(n, -1);

    bool per_x = false, per_y = false;
    for (size_t s = 0; s < pde.bc.size() && s < domain.segments.size(); ++s) {
        if (pde.bc[s].kind != BcKind::Periodic) continue;
        const std::string& name = domain.segments[s].name;
        if (name == "left" || name == "right") per_x = true;
        if (name == "top" || name == "bottom") per_y = true;
    }

    Vec2 lo, hi;
    domain.bounding_box(lo, hi);
    const double tol = 1e-9 * domain.diameter();

    std::vector<int> master(n, -1);
    const auto pair_axis = [&](bool along_x) {
        std::vector<int> lo_nodes, hi_nodes;
        for (int i = 0; i < n; ++i) {
            const double c = along_x ? g.positions[i].x : g.positions[i].y;
            const double c_lo = along_x ? lo.x : lo.y;
            const double c_hi = along_x ? hi.x : hi.y;
            if (std::abs(c - c_lo) <= tol) lo_nodes.push_back(i);
            if (std::abs(c - c_hi) <= tol) hi_nodes.push_back(i);
        }
        const auto other = [&](int i) { return along_x ? g.positions[i].y : g.positions[i].x; };
        const auto by_other = [&](int a, int b) { return other(a) < other(b); };
        std::sort(lo_nodes.begin(), lo_nodes.end(), by_other);
        std::sort(hi_nodes.begin(), hi_nodes.end(), by_other);
        if (lo_nodes.size() != hi_nodes.size()) {
            throw FemError("periodic faces have mismatched node counts");
        }
        for (size_t k = 0; k < lo_nodes.size(); ++k) {
            if (std::abs(other(lo_nodes[k]) - other(hi_nodes[k])) > tol) {
                throw FemError("periodic faces have mismatched node positions");
            }
            master[hi_nodes[k]] = lo_nodes[k];
        }
    };
    if (per_x) pair_axis(true);
    if (per_y) pair_axis(false);

    // resolve chains (a corner can be slave along both axes)
    const auto root = [&](int i) {
        while (master[i] >= 0) i = master[i];
        return i;
    };
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (master[i] < 0) pp.reduced_of[i] = next++;
    }
    for (int i = 0; i < n; ++i) {
        if (master[i] >= 0) pp.reduced_of[i] = pp.reduced_of[root(i)];
    }
    pp.reduced_count = next;
    return pp;
}

SpMat reduce_matrix(const SpMat& a, const PeriodicPairing& pp) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(a.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            trips.emplace_back(pp.reduced_of[it.row()], pp.reduced_of[it.col()], it.value());
        }
    }
    SpMat out(pp.reduced_count, pp.reduced_count);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

struct FemSystem::Impl {
    PeriodicPairing pairing;
    SpMat mass_reduced;         // RHS operator
    SpMat system;               // pinned symmetric-style system matrix
    Eigen::VectorXd col_correction;  // Dirichlet column contribution, unpinned rows
    Eigen::VectorXd dirichlet_value;  // reduced size, meaningful at pinned slots
    std::vector<char> pinned;         // reduced size
    std::vector<int> dirichlet_full;  // full-graph node ids
    bool symmetric = false;
    int n_full = 0;

    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    Eigen::BiCGSTAB<SpMat> bicg;
};

FemSystem::FemSystem(const Graph& g, const Domain& domain, const PdeSpec& pde, double dt,
                     bool lumped_mass)
    : impl_(std::make_unique<Impl>()) {
    if (dt <= 0.0) throw FemError("FemSystem: dt must be positive");
    auto mats = assemble_p1(g);
    if (lumped_mass) {
        // row-sum lumping
        Eigen::VectorXd row = mats.mass * Eigen::VectorXd::Ones(mats.mass.rows());
        SpMat lump(mats.mass.rows(), mats.mass.cols());
        std::vector<Eigen::Triplet<double>> trips;
        for (Eigen::Index i = 0; i < row.size(); ++i) trips.emplace_back(i, i, row[i]);
        lump.setFromTriplets(trips.begin(), trips.end());
        mats.mass = std::move(lump);
    }

    auto& im = *impl_;
    im.n_full = static_cast<int>(g.node_count());
    im.pairing = build_pairing(g, domain, pde);
    im.mass_reduced = reduce_matrix(mats.mass, im.pairing);

    SpMat a_full = mats.mass;
    a_full += (dt * pde.lambda2) * mats.stiffness;
    if (pde.lambda1 != 0.0) a_full += (dt * pde.lambda1) * mats.advection_x;
    SpMat a = reduce_matrix(a_full, im.pairing);

    // Dirichlet nodes from boundary flags + segment membership; a node takes
    // the first matching segment in descriptor order.
    const double tol = 1e-9 * domain.diameter();
    im.pinned.assign(im.pairing.reduced_count, 0);
    im.dirichlet_value = Eigen::VectorXd::Zero(im.pairing.reduced_count);
    for (int i = 0; i < im.n_full; ++i) {
        if (!g.boundary_flag[i]) continue;
        const int seg = domain.segment_containing(g.positions[i], tol);
        if (seg < 0 || static_cast<size_t>(seg) >= pde.bc.size()) continue;
        if (pde.bc[seg].kind != BcKind::Dirichlet) continue;
        const int r = im.pairing.reduced_of[i];
        im.pinned[r] = 1;
        im.dirichlet_value[r] = pde.bc[seg].value;
        im.dirichlet_full.push_back(i);
    }

    // pin rows and columns, keep symmetry, fold columns into a correction term
    im.col_correction = Eigen::VectorXd::Zero(im.pairing.reduced_count);
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (im.pinned[r]) continue;
            if (im.pinned[c]) {
                im.col_correction[r] += it.value() * im.dirichlet_value[c];
                continue;
            }
            trips.emplace_back(r, c, it.value());
        }
    }
    for (int r = 0; r < im.pairing.reduced_count; ++r) {
        if (im.pinned[r]) trips.emplace_back(r, r, 1.0);
    }
    im.system.resize(im.pairing.reduced_count, im.pairing.reduced_count);
    im.system.setFromTriplets(trips.begin(), trips.end());

    im.symmetric = (pde.lambda1 == 0.0);
    const int max_iters = 10 * im.pairing.reduced_count;
    if (im.symmetric) {
        im.cg.setTolerance(1e-10);
        im.cg.setMaxIterations(max_iters);
        im.cg.compute(im.system);
    } else {
        im.bicg.setTolerance(1e-10);
        im.bicg.setMaxIterations(max_iters);
        im.bicg.compute(im.system);
    }
}

FemSystem::~FemSystem() = default;
FemSystem::FemSystem(FemSystem&&) noexcept = default;

Eigen::VectorXd FemSystem::step(const Eigen::VectorXd& u) const {
    const auto& im = *impl_;
    if (u.size() != im.n_full) throw FemError("step: state length mismatch");

    Eigen::VectorXd ur = Eigen::VectorXd::Zero(im.pairing.reduced_count);
    for (int i = 0; i < im.n_full; ++i) ur[im.pairing.reduced_of[i]] = u[i];

    Eigen::VectorXd rhs = im.mass_reduced * ur;
    rhs -= im.col_correction;
    for (int r = 0; r < im.pairing.reduced_count; ++r) {
        if (im.pinned[r]) rhs[r] = im.dirichlet_value[r];
    }

    Eigen::VectorXd x;
    if (im.symmetric) {
        x = im.cg.solveWithGuess(rhs, ur);
        if (im.cg.info() != Eigen::Success) {
            throw FemError("conjugate gradient failed to converge: residual " +
                           std::to_string(im.cg.error()) + " after " +
                           std::to_string(im.cg.iterations()) + " iterations");
        }
    } else {
        x = im.bicg.solveWithGuess(rhs, ur);
        if (im.bicg.info() != Eigen::Success) {
            throw FemError("BiCGSTAB failed to converge: residual " +
                           std::to_string(im.bicg.error()) + " after " +
                           std::to_string(im.bicg.iterations()) + " iterations");
        }
    }

    Eigen::VectorXd out(im.n_full);
    for (int i = 0; i < im.n_full; ++i) out[i] = x[im.pairing.reduced_of[i]];
    return out;
}

Eigen::VectorXd FemSystem::apply_dirichlet(Eigen::VectorXd u) const {
    const auto& im = *impl_;
    for (const int i : im.dirichlet_full) {
        u[i] = im.dirichlet_value[im.pairing.reduced_of[i]];
    }
    return u;
}

const std::vector<int>& FemSystem::dirichlet_nodes() const { return impl_->dirichlet_full; }

double FemSystem::mass_integral(const Eigen::VectorXd& u) const {
    const auto& im = *impl_;
    Eigen::VectorXd ur = Eigen::VectorXd::Zero(im.pairing.reduced_count);
    for (int i = 0; i < im.n_full; ++i) ur[im.pairing.reduced_of[i]] = u[i];
    return (im.mass_reduced * ur).sum();
}

Eigen::VectorXd step_implicit_euler(const Eigen::VectorXd& state, double dt,
                                    const P1Matrices& matrices, const PdeSpec& pde) {
    SpMat a = matrices.mass;
    a += (dt * pde.lambda2) * matrices.stiffness;
    if (pde.lambda1 != 0.0) a += (dt * pde.lambda1) * matrices.advection_x;
    const Eigen::VectorXd rhs = matrices.mass * state;
    if (pde.lambda1 == 0.0) {
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-10);
        cg.setMaxIterations(10 * a.rows());
        cg.compute(a);
        Eigen::VectorXd x = cg.solveWithGuess(rhs, state);
        if (cg.info() != Eigen::Success) throw FemError("step_implicit_euler: CG failed");
        return x;
    }
    Eigen::BiCGSTAB<SpMat> bicg;
    bicg.setTolerance(1e-10);
    bicg.setMaxIterations(10 * a.rows());
    bicg.compute(a);
    Eigen::VectorXd x = bicg.solveWithGuess(rhs, state);
    if (bicg.info() != Eigen::Success) throw FemError("step_implicit_euler: BiCGSTAB failed");
    return x;
}

Trajectory simulate(const Graph& g, const Domain& domain, const PdeSpec& pde,
                    const SimulateConfig& cfg) {
    if (cfg.dt_record <= 0.0 || cfg.t_end < cfg.dt_record) {
        throw FemError("simulate: need t_end >= dt_record > 0");
    }
    const double ratio = cfg.dt_record / cfg.dt_solver;
    const auto steps_per_record = static_cast<long>(std::llround(ratio));
    if (steps_per_record < 1 || std::abs(ratio - static_cast<double>(steps_per_record)) > 1e-9) {
        throw FemError("simulate: dt_record must be an integer multiple of dt_solver");
    }
    const auto records = static_cast<long>(std::floor(cfg.t_end / cfg.dt_record + 1e-9));

    FemSystem sys(g, domain, pde, cfg.dt_solver, cfg.lumped_mass);
    Eigen::VectorXd u = sys.apply_dirichlet(cfg.ic.evaluate(g));

    Trajectory traj;
    traj.frames.resize(records + 1, static_cast<Eigen::Index>(g.node_count()));
    traj.frames.row(0) = u.transpose();
    traj.dt_solver = cfg.dt_solver;
    traj.dt_record = cfg.dt_record;
    traj.pde = pde;
    traj.ic = cfg.ic;
    traj.seed = cfg.seed;

    for (long r = 1; r <= records; ++r) {
        for (long s = 0; s < steps_per_record; ++s) u = sys.step(u);
        traj.frames.row(r) = u.transpose();
    }
    return traj;
}

Eigen::MatrixXd stencil_reference(const Eigen::MatrixXd& grid, double alpha, double beta) {
    if (grid.rows() < 3 || grid.cols() < 3) {
        throw FemError("stencil_reference: grid must be at least 3x3");
    }
    Eigen::MatrixXd out = grid;
    for (Eigen::Index i = 1; i + 1 < grid.rows(); ++i) {
        for (Eigen::Index j = 1; j + 1 < grid.cols(); ++j) {
            const double u = grid(i, j);
            out(i, j) = u + alpha * (grid(i, j + 1) - u) + alpha * (grid(i, j - 1) - u) +
                        beta * (grid(i + 1, j) - u) + beta * (grid(i - 1, j) - u);
        }
    }
    return out;
}

double l2_norm(const Eigen::SparseMatrix<double>& mass, const Eigen::VectorXd& v) {
    return std::sqrt(v.dot(mass * v));
}

void save_trajectory(const Trajectory& t, const std::filesystem::path& path) {
    io::Writer w;
    w.magic("PTR1");
    w.u64(static_cast<uint64_t>(t.frames.cols()));  // N
    w.u64(static_cast<uint64_t>(t.frames.rows()));  // T
    w.f64(t.dt_solver);
    w.f64(t.dt_record);
    w.u8(static_cast<uint8_t>(t.pde.kind));
    w.f64(t.pde.lambda1);
    w.f64(t.pde.lambda2);
    w.u64(t.seed);
    // BC table + initial-condition descriptor + graph reference
    w.u32(static_cast<uint32_t>(t.pde.bc.size()));
    for (const auto& bc : t.pde.bc) {
        w.u8(static_cast<uint8_t>(bc.kind));
        w.f64(bc.value);
    }
    w.u8(static_cast<uint8_t>(t.ic.kind));
    w.f64(t.ic.value);
    for (const double c : t.ic.coeffs) w.f64(c);
    w.str(t.graph_path);
    for (Eigen::Index r = 0; r < t.frames.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.frames.cols(); ++c) w.f64(t.frames(r, c));
    }
    w.finish_with_crc();
    io::write_file_atomic(path, w.buffer());
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    io::Reader r(io::read_file(path));
    r.check_crc("trajectory " + path.string());
    r.expect_magic("PTR1", "trajectory " + path.string());
    const uint64_t n = r.u64();
    const uint64_t frames = r.u64();
    Trajectory t;
    t.dt_solver = r.f64();
    t.dt_record = r.f64();
    t.pde.kind = static_cast<PdeKind>(r.u8());
    t.pde.lambda1 = r.f64();
    t.pde.lambda2 = r.f64();
    t.seed = r.u64();
    const uint32_t bcs = r.u32();
    t.pde.bc.resize(bcs);
    for (auto& bc : t.pde.bc) {
        bc.kind = static_cast<BcKind>(r.u8());
        bc.value = r.f64();
    }
    t.ic.kind = static_cast<InitialCondition::Kind>(r.u8());
    t.ic.value = r.f64();
    for (double& c : t.ic.coeffs) c = r.f64();
    t.graph_path = r.str();
    t.frames.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(n));
    for (Eigen::Index row = 0; row < t.frames.rows(); ++row) {
        for (Eigen::Index col = 0; col < t.frames.cols(); ++col) t.frames(row, col) = r.f64();
    }
    return t;
}

}  // namespace meshpde
