#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "meshpde/fem.hpp"
#include "meshpde/graph.hpp"

namespace meshpde::spectral {

using GridField = std::vector<double>;                 // G*G row-major, idx = iy*G + ix
using SpectralField = std::vector<std::complex<double>>;  // matching FFT layout

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pseudo-spectral vorticity solver for 2-D incompressible Navier-Stokes on
/// the [0, 2pi]^2 periodic square. Linear part integrated with Crank-Nicolson,
/// quadratic term explicit with 2/3-rule dealiasing:
///   zeta'_{k} = (dt P_k(zeta) + (1 - nu dt |k|^2 / 2) zeta_k)
///             / (1 + nu dt |k|^2 / 2)
/// The k = 0 mode is pinned, so mean vorticity is conserved exactly.
class Solver {
public:
    explicit Solver(int grid_size);
    ~Solver();
    Solver(Solver&&) noexcept;

    int grid_size() const { return g_; }

    SpectralField to_spectral(const GridField& field) const;
    GridField to_grid(const SpectralField& hat) const;

    /// Dealiased spectral transform of
    ///   P(zeta) = (d_y inv_lap zeta) d_x zeta - (d_x inv_lap zeta) d_y zeta.
    SpectralField nonlinear_term(const SpectralField& zeta_hat) const;

    SpectralField step_cn(const SpectralField& zeta_hat, double dt, double nu,
                          bool include_nonlinear = true) const;

    /// u = -d_y inv_lap zeta, v = d_x inv_lap zeta (mean mode zeroed).
    void velocity_from_vorticity(const SpectralField& zeta_hat, GridField& u, GridField& v) const;

private:
    struct Impl;
    int g_;
    std::unique_ptr<Impl> impl_;
};

/// Uniform U[0,5] samples per grid point with the top third of wave numbers
/// (max(|kx|, |ky|) > floor(2/3 * G/2)) removed. Deterministic per seed.
GridField random_filtered_ic(int grid_size, uint64_t seed);

/// Bilinear interpolation with periodic wrapping onto graph node positions.
Eigen::VectorXd sample_to_graph(const GridField& field, int grid_size, const Graph& g);

struct NsConfig {
    double nu = 3e-4;
    double t_end = 1.0;
    double dt = 1e-3;
    int record_every = 100;
    uint64_t seed = 0;
};

/// Runs the solver from a random filtered initial condition and records the
/// vorticity interpolated onto the graph nodes. Reuses the trajectory format
/// with pde kind NavierStokes, nu in the lambda2 slot and lambda1 = 0.
Trajectory simulate_ns(int grid_size, const NsConfig& cfg, const Graph& g);

/// Taylor-Green vorticity 2 sin(x) sin(y) on the grid; exact Navier-Stokes
/// solution decaying as exp(-2 nu t), used as the solver oracle.
GridField taylor_green_vorticity(int grid_size);

}  // namespace meshpde::spectral
