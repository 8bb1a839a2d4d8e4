#include "meshpde/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "meshpde/rng.hpp"

namespace meshpde::spectral {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

int wavenumber(int idx, int g) { return idx <= g / 2 ? idx : idx - g; }

}  // namespace

struct Solver::Impl {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    mutable std::vector<std::complex<double>> buf_in, buf_out;

    ~Impl() {
        std::lock_guard lock(plan_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

Solver::Solver(int grid_size) : g_(grid_size), impl_(std::make_unique<Impl>()) {
    if (grid_size < 16 || (grid_size & (grid_size - 1)) != 0) {
        throw SpectralError("grid size must be a power of two >= 16");
    }
    impl_->buf_in.resize(static_cast<size_t>(g_) * g_);
    impl_->buf_out.resize(static_cast<size_t>(g_) * g_);
    std::lock_guard lock(plan_mutex());
    auto* in = reinterpret_cast<fftw_complex*>(impl_->buf_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(impl_->buf_out.data());
    // FFTW_ESTIMATE keeps planning deterministic
    impl_->forward = fftw_plan_dft_2d(g_, g_, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->backward = fftw_plan_dft_2d(g_, g_, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;

SpectralField Solver::to_spectral(const GridField& field) const {
    if (field.size() != static_cast<size_t>(g_) * g_) throw SpectralError("grid size mismatch");
    auto& in = impl_->buf_in;
    auto& out = impl_->buf_out;
    for (size_t i = 0; i < field.size(); ++i) in[i] = field[i];
    fftw_execute_dft(impl_->forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / (static_cast<double>(g_) * g_);
    SpectralField hat(out.size());
    for (size_t i = 0; i < out.size(); ++i) hat[i] = out[i] * scale;
    return hat;
}

GridField Solver::to_grid(const SpectralField& hat) const {
    if (hat.size() != static_cast<size_t>(g_) * g_) throw SpectralError("spectral size mismatch");
    auto& in = impl_->buf_in;
    auto& out = impl_->buf_out;
    std::copy(hat.begin(), hat.end(), in.begin());
    fftw_execute_dft(impl_->backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    GridField field(hat.size());
    for (size_t i = 0; i < out.size(); ++i) field[i] = out[i].real();
    return field;
}

SpectralField Solver::nonlinear_term(const SpectralField& zeta_hat) const {
    const int g = g_;
    const size_t total = static_cast<size_t>(g) * g;
    if (zeta_hat.size() != total) throw SpectralError("spectral size mismatch");

    SpectralField psi_y(total), psi_x(total), zx_hat(total), zy_hat(total);
    const std::complex<double> I(0.0, 1.0);
    for (int iy = 0; iy < g; ++iy) {
        const int ky = wavenumber(iy, g);
        for (int ix = 0; ix < g; ++ix) {
            const int kx = wavenumber(ix, g);
            const size_t idx = static_cast<size_t>(iy) * g + ix;
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            const std::complex<double> z = zeta_hat[idx];
            const std::complex<double> psi = (k2 > 0.0) ? -z / k2 : 0.0;
            psi_x[idx] = I * static_cast<double>(kx) * psi;
            psi_y[idx] = I * static_cast<double>(ky) * psi;
            zx_hat[idx] = I * static_cast<double>(kx) * z;
            zy_hat[idx] = I * static_cast<double>(ky) * z;
        }
    }

    const GridField psi_y_g = to_grid(psi_y);
    const GridField psi_x_g = to_grid(psi_x);
    const GridField zx_g = to_grid(zx_hat);
    const GridField zy_g = to_grid(zy_hat);

    GridField prod(total);
    for (size_t i = 0; i < total; ++i) {
        prod[i] = psi_y_g[i] * zx_g[i] - psi_x_g[i] * zy_g[i];
    }

    SpectralField p_hat = to_spectral(prod);
    // 2/3-rule dealiasing of the quadratic product
    const int cutoff = g / 3;
    for (int iy = 0; iy < g; ++iy) {
        const int ky = wavenumber(iy, g);
        for (int ix = 0; ix < g; ++ix) {
            const int kx = wavenumber(ix, g);
            if (std::max(std::abs(kx), std::abs(ky)) > cutoff) {
                p_hat[static_cast<size_t>(iy) * g + ix] = 0.0;
            }
        }
    }
    p_hat[0] = 0.0;  // mean vorticity is conserved; pin exactly
    return p_hat;
}

SpectralField Solver::step_cn(const SpectralField& zeta_hat, double dt, double nu,
                              bool include_nonlinear) const {
    const int g = g_;
    if (zeta_hat.size() != static_cast<size_t>(g) * g) throw SpectralError("size mismatch");
    SpectralField p_hat;
    if (include_nonlinear) p_hat = nonlinear_term(zeta_hat);

    SpectralField next(zeta_hat.size());
    for (int iy = 0; iy < g; ++iy) {
        const int ky = wavenumber(iy, g);
        for (int ix = 0; ix < g; ++ix) {
            const int kx = wavenumber(ix, g);
            const size_t idx = static_cast<size_t>(iy) * g + ix;
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            const double half = 0.5 * nu * dt * k2;
            const std::complex<double> p = include_nonlinear ? p_hat[idx] : 0.0;
            next[idx] = (dt * p + (1.0 - half) * zeta_hat[idx]) / (1.0 + half);
        }
    }
    return next;
}

void Solver::velocity_from_vorticity(const SpectralField& zeta_hat, GridField& u,
                                     GridField& v) const {
    const int g = g_;
    const size_t total = static_cast<size_t>(g) * g;
    if (zeta_hat.size() != total) throw SpectralError("size mismatch");
    SpectralField u_hat(total), v_hat(total);
    const std::complex<double> I(0.0, 1.0);
    for (int iy = 0; iy < g; ++iy) {
        const int ky = wavenumber(iy, g);
        for (int ix = 0; ix < g; ++ix) {
            const int kx = wavenumber(ix, g);
            const size_t idx = static_cast<size_t>(iy) * g + ix;
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            const std::complex<double> psi = (k2 > 0.0) ? -zeta_hat[idx] / k2 : 0.0;
            u_hat[idx] = -I * static_cast<double>(ky) * psi;
            v_hat[idx] = I * static_cast<double>(kx) * psi;
        }
    }
    u = to_grid(u_hat);
    v = to_grid(v_hat);
}

GridField random_filtered_ic(int grid_size, uint64_t seed) {
    Solver solver(grid_size);
    const size_t total = static_cast<size_t>(grid_size) * grid_size;
    Rng rng(seed);
    GridField raw(total);
    for (auto& v : raw) v = rng.uniform(0.0, 5.0);

    SpectralField hat = solver.to_spectral(raw);
    const int cutoff = (2 * (grid_size / 2)) / 3;
    for (int iy = 0; iy < grid_size; ++iy) {
        const int ky = wavenumber(iy, grid_size);
        for (int ix = 0; ix < grid_size; ++ix) {
            const int kx = wavenumber(ix, grid_size);
            if (std::max(std::abs(kx), std::abs(ky)) > cutoff) {
                hat[static_cast<size_t>(iy) * grid_size + ix] = 0.0;
            }
        }
    }
    return solver.to_grid(hat);
}

Eigen::VectorXd sample_to_graph(const GridField& field, int grid_size, const Graph& g) {
    const double side = 2.0 * std::numbers::pi;
    const double h = side / grid_size;
    Eigen::VectorXd out(static_cast<Eigen::Index>(g.node_count()));
    for (size_t i = 0; i < g.node_count(); ++i) {
        const double gx = g.positions[i].x / h;
        const double gy = g.positions[i].y / h;
        const auto ix0 = static_cast<long>(std::floor(gx));
        const auto iy0 = static_cast<long>(std::floor(gy));
        const double fx = gx - ix0, fy = gy - iy0;
        const auto wrap = [grid_size](long k) {
            long m = k % grid_size;
            return static_cast<size_t>(m < 0 ? m + grid_size : m);
        };
        const size_t x0 = wrap(ix0), x1 = wrap(ix0 + 1);
        const size_t y0 = wrap(iy0), y1 = wrap(iy0 + 1);
        const double v00 = field[y0 * grid_size + x0], v01 = field[y0 * grid_size + x1];
        const double v10 = field[y1 * grid_size + x0], v11 = field[y1 * grid_size + x1];
        out[static_cast<Eigen::Index>(i)] = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                            fy * ((1 - fx) * v10 + fx * v11);
    }
    return out;
}

Trajectory simulate_ns(int grid_size, const NsConfig& cfg, const Graph& g) {
    if (cfg.dt <= 0.0 || cfg.record_every < 1) throw SpectralError("simulate_ns: bad cadence");
    Solver solver(grid_size);
    SpectralField zeta = solver.to_spectral(random_filtered_ic(grid_size, cfg.seed));

    const auto records = static_cast<long>(std::floor(cfg.t_end / (cfg.dt * cfg.record_every) + 1e-9));
    Trajectory traj;
    traj.frames.resize(records + 1, static_cast<Eigen::Index>(g.node_count()));
    traj.dt_solver = cfg.dt;
    traj.dt_record = cfg.dt * cfg.record_every;
    traj.pde.kind = PdeKind::NavierStokes;
    traj.pde.lambda1 = 0.0;
    traj.pde.lambda2 = cfg.nu;
    traj.seed = cfg.seed;

    traj.frames.row(0) = sample_to_graph(solver.to_grid(zeta), grid_size, g).transpose();
    for (long r = 1; r <= records; ++r) {
        for (int s = 0; s < cfg.record_every; ++s) zeta = solver.step_cn(zeta, cfg.dt, cfg.nu);
        traj.frames.row(r) = sample_to_graph(solver.to_grid(zeta), grid_size, g).transpose();
    }
    return traj;
}

GridField taylor_green_vorticity(int grid_size) {
    GridField field(static_cast<size_t>(grid_size) * grid_size);
    const double h = 2.0 * std::numbers::pi / grid_size;
    for (int iy = 0; iy < grid_size; ++iy) {
        for (int ix = 0; ix < grid_size; ++ix) {
            field[static_cast<size_t>(iy) * grid_size + ix] =
                2.0 * std::sin(ix * h) * std::sin(iy * h);
        }
    }
    return field;
}

}  // namespace meshpde::spectral
