#pragma once

#include <string>

#include "padam/field.hpp"
#include "padam/grid.hpp"

namespace padam {

enum class ScalarFamily { diffusion, advection, advection_diffusion, adr, allen_cahn };
enum class VectorFamily { burgers, navier_stokes };

const char* to_string(ScalarFamily f);
const char* to_string(VectorFamily f);

// Coefficients for the scalar families. Only the fields a family reads may be
// nonzero; validate() enforces that so a mistyped configuration fails loudly
// instead of silently changing the physics.
struct ScalarPDEParams {
    ScalarFamily family = ScalarFamily::diffusion;
    double nu = 0.0;   // diffusion coefficient
    double ax = 0.0;   // advection velocity x
    double ay = 0.0;   // advection velocity y
    double k = 0.0;    // linear reaction rate
    double eps2 = 0.0; // Allen-Cahn interface parameter (epsilon^2)

    void validate() const;
};

struct VectorPDEParams {
    VectorFamily family = VectorFamily::burgers;
    double nu = 0.0; // kinematic viscosity
    double L = 1.0;  // Navier-Stokes domain length

    void validate() const;
};

struct SolverConfig {
    double T = 0.0;          // terminal time
    double cfl = 0.5;        // Courant safety factor in (0, 1]
    long max_steps = 2000000;
    bool record_trajectory = false;
    int trajectory_stride = 0; // 0 -> pick a stride that keeps ~16 frames

    void validate() const;
};

/// Largest stable explicit step for the family on this grid (already scaled
/// by cfl). Burgers and Navier-Stokes depend on the current velocity field,
/// so `state` is required for them and ignored otherwise.
double stable_dt(ScalarFamily family, const ScalarPDEParams& p, const Grid2D& grid, double cfl);
double stable_dt(VectorFamily family, const VectorPDEParams& p, const Grid2D& grid, double cfl,
                 const Field& state);

// --- Initial conditions -------------------------------------------------

/// Gaussian bump with a sin(pi x) sin(pi y) taper on the unit square.
Field gaussian_bump_ic(const Grid2D& grid, double xc, double yc, double w0);

/// Two independent tapered bumps, one per velocity component, on (-1,1)^2.
Field burgers_ic(const Grid2D& grid, double c1x, double c1y, double w1, double c2x, double c2y,
                 double w2);

enum class TrigChoice { sin, cos };

/// Solenoidal shear field u1 = -a phi(2 pi y / L), u2 = a psi(4 pi x / L).
Field ns_ic(const Grid2D& grid, double a, TrigChoice phi_choice, TrigChoice psi_choice, double L);

// --- Solvers --------------------------------------------------------------

struct SolveResult {
    Field terminal;
    long steps = 0;
    std::vector<Field> trajectory; // populated when cfg.record_trajectory
};

/// Explicit stepping: centered Laplacian, first-order upwind advection,
/// explicit reaction. Neumann via mirrored ghosts (diffusion/advection/AD/
/// ADR); Dirichlet rows re-imposed each step (Allen-Cahn).
SolveResult solve_scalar(const ScalarPDEParams& p, const Field& ic, const SolverConfig& cfg);

/// Component-wise upwinding by the local velocity sign; dt re-evaluated each
/// step from the current maximum speed. Dirichlet box on (-1,1)^2.
SolveResult solve_burgers(const VectorPDEParams& p, const Field& ic, const SolverConfig& cfg);

/// Pseudo-spectral vorticity-streamfunction solver: 2/3-rule dealiasing,
/// RK4 with an exact viscous integrating factor, periodic box.
SolveResult solve_navier_stokes(const VectorPDEParams& p, const Field& ic, const SolverConfig& cfg);

/// Max |div u| of a 2-channel periodic velocity field, evaluated spectrally.
double spectral_divergence_max(const Field& velocity);

/// 0.5 * mean(u^2 + v^2); the monitored invariant for the unforced NS runs.
double kinetic_energy(const Field& velocity);

} // namespace padam
