#include "padam/pde_class.hpp"

#include <stdexcept>

namespace padam {

const char* to_string(ChannelLayout l) {
    switch (l) {
        case ChannelLayout::scalar_param_state: return "scalar_param_state";
        case ChannelLayout::vector_state_u: return "vector_state_u";
        case ChannelLayout::vector_state_v: return "vector_state_v";
    }
    return "?";
}

ChannelLayout channel_layout_from_string(const std::string& s) {
    if (s == "scalar_param_state") return ChannelLayout::scalar_param_state;
    if (s == "vector_state_u") return ChannelLayout::vector_state_u;
    if (s == "vector_state_v") return ChannelLayout::vector_state_v;
    throw std::invalid_argument("unknown channel layout: " + s);
}

const char* to_string(Investigation inv) {
    switch (inv) {
        case Investigation::unified: return "unified";
        case Investigation::continuous_manifold: return "continuous_manifold";
        case Investigation::structural: return "structural";
        case Investigation::parametric: return "parametric";
    }
    return "?";
}

Investigation investigation_from_string(const std::string& s) {
    if (s == "unified") return Investigation::unified;
    if (s == "continuous_manifold") return Investigation::continuous_manifold;
    if (s == "structural") return Investigation::structural;
    if (s == "parametric") return Investigation::parametric;
    throw std::invalid_argument("unknown investigation: " + s);
}

double default_terminal_time(ScalarFamily f) {
    switch (f) {
        case ScalarFamily::diffusion: return 0.04;
        case ScalarFamily::advection: return 0.05;
        case ScalarFamily::advection_diffusion: return 0.04;
        case ScalarFamily::adr: return 0.04;
        case ScalarFamily::allen_cahn: return 0.005;
    }
    return 0.0;
}

double default_terminal_time(VectorFamily f) {
    return f == VectorFamily::burgers ? 0.5 : 1.0;
}

ScalarPDEParams PDEClass::scalar_params(std::span<const double> phi) const {
    if (vector_family) throw std::invalid_argument("scalar_params: vector class");
    if (static_cast<int>(phi.size()) != param_dim)
        throw std::invalid_argument("scalar_params: phi size does not match d_c");
    ScalarPDEParams p;
    p.family = scalar_family;
    p.nu = fixed_nu;
    p.ax = fixed_ax;
    p.ay = fixed_ay;
    p.eps2 = fixed_eps2;
    for (int k = 0; k < param_dim; ++k) {
        switch (phi_slots[k]) {
            case CoeffSlot::nu: p.nu = phi[k]; break;
            case CoeffSlot::ax: p.ax = phi[k]; break;
            case CoeffSlot::ay: p.ay = phi[k]; break;
            case CoeffSlot::eps2: p.eps2 = phi[k]; break;
        }
    }
    return p;
}

VectorPDEParams PDEClass::vector_params() const {
    if (!vector_family) throw std::invalid_argument("vector_params: scalar class");
    VectorPDEParams p;
    p.family = vec_family;
    p.nu = fixed_nu;
    p.L = 1.0;
    return p;
}

const PDEClass& ClassRegistry::by_id(int id) const {
    if (id < 0 || id >= size()) throw std::invalid_argument("ClassRegistry: unknown class id");
    return classes[id];
}

const PDEClass* ClassRegistry::find(const std::string& name) const {
    for (const auto& c : classes)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

PDEClass scalar_class(int id, const std::string& name, ScalarFamily fam) {
    PDEClass c;
    c.id = id;
    c.name = name;
    c.layout = ChannelLayout::scalar_param_state;
    c.vector_family = false;
    c.scalar_family = fam;
    c.terminal_time = default_terminal_time(fam);
    return c;
}

PDEClass vector_class(int id, const std::string& name, VectorFamily fam, ChannelLayout layout,
                      double nu) {
    PDEClass c;
    c.id = id;
    c.name = name;
    c.layout = layout;
    c.vector_family = true;
    c.vec_family = fam;
    c.fixed_nu = nu;
    c.terminal_time = default_terminal_time(fam);
    return c;
}

void add_phi(PDEClass& c, CoeffSlot slot, double lo, double hi) {
    c.phi_slots.push_back(slot);
    c.phi_law.push_back({lo, hi});
    c.param_dim = static_cast<int>(c.phi_slots.size());
}

} // namespace

Grid2D class_grid(const PDEClass& cls, int nx, int ny) {
    if (!cls.vector_family) {
        const BoundaryTag bc = cls.scalar_family == ScalarFamily::allen_cahn
                                   ? BoundaryTag::dirichlet
                                   : BoundaryTag::neumann;
        return Grid2D(nx, ny, 0.0, 1.0, 0.0, 1.0, bc);
    }
    if (cls.vec_family == VectorFamily::burgers)
        return Grid2D(nx, ny, -1.0, 1.0, -1.0, 1.0, BoundaryTag::dirichlet);
    return Grid2D(nx, ny, 0.0, 1.0, 0.0, 1.0, BoundaryTag::periodic);
}

ClassRegistry make_registry(Investigation inv) {
    ClassRegistry r;
    r.investigation = inv;
    switch (inv) {
        case Investigation::unified: {
            auto d = scalar_class(0, "diffusion", ScalarFamily::diffusion);
            d.fixed_nu = 0.25;
            auto a = scalar_class(1, "advection", ScalarFamily::advection);
            a.fixed_ax = 4.0;
            a.fixed_ay = 2.0;
            auto ad = scalar_class(2, "advection_diffusion", ScalarFamily::advection_diffusion);
            ad.fixed_nu = 0.25;
            ad.fixed_ax = 4.0;
            ad.fixed_ay = 2.0;
            r.classes = {d, a, ad};
            break;
        }
        case Investigation::continuous_manifold: {
            auto d = scalar_class(0, "diffusion", ScalarFamily::diffusion);
            add_phi(d, CoeffSlot::nu, 0.1, 0.4);
            auto a = scalar_class(1, "advection", ScalarFamily::advection);
            add_phi(a, CoeffSlot::ax, 2.0, 5.0);
            a.fixed_ay = 2.0;
            auto ad = scalar_class(2, "advection_diffusion", ScalarFamily::advection_diffusion);
            add_phi(ad, CoeffSlot::nu, 0.1, 0.4);
            ad.fixed_ax = 4.0;
            ad.fixed_ay = 2.0;
            r.classes = {d, a, ad};
            break;
        }
        case Investigation::structural: {
            auto d = scalar_class(0, "diffusion", ScalarFamily::diffusion);
            add_phi(d, CoeffSlot::nu, 0.1, 0.4);
            auto a = scalar_class(1, "advection", ScalarFamily::advection);
            add_phi(a, CoeffSlot::ax, 2.0, 5.0);
            a.fixed_ay = 2.0;
            auto ad = scalar_class(2, "advection_diffusion", ScalarFamily::advection_diffusion);
            add_phi(ad, CoeffSlot::nu, 0.1, 0.4);
            ad.fixed_ax = 4.0;
            ad.fixed_ay = 2.0;
            auto ac = scalar_class(3, "allen_cahn", ScalarFamily::allen_cahn);
            add_phi(ac, CoeffSlot::eps2, 2.5e-3, 0.0121);
            auto bu = vector_class(4, "burgers_u", VectorFamily::burgers,
                                   ChannelLayout::vector_state_u, 0.05);
            auto bv = vector_class(5, "burgers_v", VectorFamily::burgers,
                                   ChannelLayout::vector_state_v, 0.05);
            auto nu_ = vector_class(6, "navier_stokes_u", VectorFamily::navier_stokes,
                                    ChannelLayout::vector_state_u, 0.02);
            auto nv = vector_class(7, "navier_stokes_v", VectorFamily::navier_stokes,
                                   ChannelLayout::vector_state_v, 0.02);
            r.classes = {d, a, ad, ac, bu, bv, nu_, nv};
            break;
        }
        case Investigation::parametric: {
            auto d = scalar_class(0, "diffusion", ScalarFamily::diffusion);
            add_phi(d, CoeffSlot::nu, 0.2, 0.4);
            auto a = scalar_class(1, "advection", ScalarFamily::advection);
            add_phi(a, CoeffSlot::ax, 2.0, 3.0);
            add_phi(a, CoeffSlot::ay, 2.0, 3.0);
            auto ad = scalar_class(2, "advection_diffusion", ScalarFamily::advection_diffusion);
            add_phi(ad, CoeffSlot::nu, 0.2, 0.4);
            add_phi(ad, CoeffSlot::ax, 2.0, 3.0);
            add_phi(ad, CoeffSlot::ay, 2.0, 3.0);
            r.classes = {d, a, ad};
            break;
        }
    }
    return r;
}

} // namespace padam
