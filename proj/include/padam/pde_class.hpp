#pragma once

#include <string>
#include <vector>

#include "padam/pde.hpp"

namespace padam {

// Channel semantics of the unified 3-channel generative variable.
enum class ChannelLayout {
    scalar_param_state, // (Phi, u0, uT)
    vector_state_u,     // (u0, v0, uT)
    vector_state_v      // (u0, v0, vT)
};

const char* to_string(ChannelLayout l);
ChannelLayout channel_layout_from_string(const std::string& s);

enum class Investigation { unified, continuous_manifold, structural, parametric };

const char* to_string(Investigation inv);
Investigation investigation_from_string(const std::string& s);

/// Uniform sampling law for one coefficient; lo == hi means fixed.
struct ParamLaw {
    double lo = 0.0;
    double hi = 0.0;
};

// Where each phi component lands in the solver coefficients.
enum class CoeffSlot { nu, ax, ay, eps2 };

// One registered PDE class: identity, layout, parameter law, and everything
// the generator needs to synthesize training pairs for it.
struct PDEClass {
    int id = 0;
    std::string name;
    ChannelLayout layout = ChannelLayout::scalar_param_state;
    bool vector_family = false;
    ScalarFamily scalar_family = ScalarFamily::diffusion;
    VectorFamily vec_family = VectorFamily::burgers;

    int param_dim = 0;                 // d_c
    std::vector<ParamLaw> phi_law;     // size d_c
    std::vector<CoeffSlot> phi_slots;  // size d_c

    // Coefficients not carried by phi.
    double fixed_nu = 0.0;
    double fixed_ax = 0.0;
    double fixed_ay = 0.0;
    double fixed_eps2 = 0.0;

    double terminal_time = 0.0;

    /// Solver coefficients with phi overlaid on the fixed values.
    ScalarPDEParams scalar_params(std::span<const double> phi) const;
    VectorPDEParams vector_params() const;
};

struct ClassRegistry {
    Investigation investigation = Investigation::unified;
    std::vector<PDEClass> classes;

    const PDEClass& by_id(int id) const;
    const PDEClass* find(const std::string& name) const;
    int size() const { return static_cast<int>(classes.size()); }
};

/// The class libraries of the four thematic investigations.
ClassRegistry make_registry(Investigation inv);

/// Domain geometry a class's fields live on, at the given resolution:
/// unit square for scalar families (Dirichlet for Allen-Cahn), (-1,1)^2
/// Dirichlet for Burgers, periodic unit square for Navier-Stokes.
Grid2D class_grid(const PDEClass& cls, int nx, int ny);

/// Default per-family horizons (the solvers see them via PDEClass).
double default_terminal_time(ScalarFamily f);
double default_terminal_time(VectorFamily f);

} // namespace padam
