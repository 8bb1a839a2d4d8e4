#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include "meshpde/graph.hpp"

namespace meshpde {

struct FemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PdeKind : uint8_t { Heat = 0, AdvectionDiffusion = 1, NavierStokes = 2 };
enum class BcKind : uint8_t { Dirichlet = 0, Neumann = 1, Periodic = 2 };

struct SegmentBc {
    BcKind kind = BcKind::Neumann;
    double value = 0.0;  // Dirichlet only
};

/// u_t + lambda1 u_x = lambda2 div(grad u), one boundary condition per
/// domain segment. Heat is the lambda1 = 0, lambda2 = 1 special case.
struct PdeSpec {
    PdeKind kind = PdeKind::Heat;
    double lambda1 = 0.0;
    double lambda2 = 1.0;
    std::vector<SegmentBc> bc;
};

PdeSpec heat_pde(std::vector<SegmentBc> bc);
PdeSpec advection_diffusion_pde(double lambda1, double lambda2, std::vector<SegmentBc> bc);

struct InitialCondition {
    enum class Kind : uint8_t { Zero = 0, Constant = 1, TrigSeriesX = 2, SineProduct = 3 };
    Kind kind = Kind::Zero;
    double value = 0.0;            // Constant
    std::array<double, 4> coeffs{};  // TrigSeriesX: a1 sin(2pi x) + a2 sin(4pi x) + a3 cos(2pi x) + a4 cos(4pi x)

    Eigen::VectorXd evaluate(const Graph& g) const;
};

/// Time-ordered nodal fields from one simulation, plus the settings that
/// produced them. Frames are stored every dt_record, frame 0 included.
struct Trajectory {
    Eigen::MatrixXd frames;  // T x N
    double dt_solver = 0.0;
    double dt_record = 0.0;
    PdeSpec pde;
    InitialCondition ic;
    uint64_t seed = 0;
    std::string graph_path;

    int frame_count() const { return static_cast<int>(frames.rows()); }
    int node_count() const { return static_cast<int>(frames.cols()); }
};

/// "PTR1" binary format (little-endian, trailing crc32).
void save_trajectory(const Trajectory& t, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

struct P1Matrices {
    Eigen::SparseMatrix<double> mass;         // consistent
    Eigen::SparseMatrix<double> stiffness;    // int grad(phi_i) . grad(phi_j)
    Eigen::SparseMatrix<double> advection_x;  // int phi_i d_x(phi_j)
};

/// Element-wise P1 assembly with exact linear-basis integration.
/// Throws FemError naming the triangle when one has zero area.
P1Matrices assemble_p1(const Graph& g);

/// Implicit-Euler stepper for a fixed (graph, pde, dt):
///   (M + dt lambda2 K + dt lambda1 Ax) u' = M u
/// with Dirichlet rows pinned symmetrically, zero-Neumann natural, and
/// periodic DOFs identified across opposite faces. Conjugate gradient for the
/// symmetric (pure diffusion) case, BiCGSTAB otherwise, relative residual
/// 1e-10, at most 10 N iterations.
class FemSystem {
public:
    FemSystem(const Graph& g, const Domain& domain, const PdeSpec& pde, double dt,
              bool lumped_mass = false);
    ~FemSystem();
    FemSystem(FemSystem&&) noexcept;

    Eigen::VectorXd step(const Eigen::VectorXd& u) const;
    /// Overwrites Dirichlet nodes with their boundary values.
    Eigen::VectorXd apply_dirichlet(Eigen::VectorXd u) const;
    const std::vector<int>& dirichlet_nodes() const;
    /// Discrete integral 1^T M u (uses the reduced mass so periodic pairs
    /// are counted once).
    double mass_integral(const Eigen::VectorXd& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Free-function form of one implicit Euler step on an unconstrained system
/// (no Dirichlet/periodic handling); kept for direct matrix-level tests.
Eigen::VectorXd step_implicit_euler(const Eigen::VectorXd& state, double dt,
                                    const P1Matrices& matrices, const PdeSpec& pde);

struct SimulateConfig {
    double t_end = 0.0;
    double dt_solver = 0.0;
    double dt_record = 0.0;
    InitialCondition ic;
    uint64_t seed = 0;
    // Row-sum lumping keeps the implicit-Euler update an M-matrix system on
    // Delaunay meshes, so the discrete maximum principle holds exactly; the
    // consistent-mass path is kept for matrix-level work.
    bool lumped_mass = true;
};

Trajectory simulate(const Graph& g, const Domain& domain, const PdeSpec& pde,
                    const SimulateConfig& cfg);

/// Explicit structured-grid heat stencil: one update of
/// u += alpha (u_E + u_W - 2u) + beta (u_N + u_S - 2u), alpha along columns
/// and beta along rows, boundary rows/columns held fixed.
Eigen::MatrixXd stencil_reference(const Eigen::MatrixXd& grid, double alpha, double beta);

/// sqrt(v^T M v), the P1 L2 norm.
double l2_norm(const Eigen::SparseMatrix<double>& mass, const Eigen::VectorXd& v);

}  // namespace meshpde
