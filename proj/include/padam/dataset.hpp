#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "padam/field.hpp"
#include "padam/pde_class.hpp"

namespace padam {

// The unified 3-channel generative variable x with its provenance.
struct UnifiedSample {
    int class_id = 0;
    Field x;                 // exactly 3 channels
    std::vector<double> phi; // raw coefficients, length d_c (possibly 0)
    std::uint64_t seed = 0;
};

/// Pack fields into the class layout. Scalar classes receive (u0, uT) and phi
/// (channel 0 is lifted here, or zero when d_c = 0); vector classes receive
/// the three state channels directly in layout order.
UnifiedSample assemble_sample(const PDEClass& cls, std::span<const double> phi,
                              std::span<const Field* const> fields, std::uint64_t seed);

// Per-(class, channel) affine normalization x -> (x - mean)/scale. The prior
// and the guidance both operate on normalized values.
struct NormStats {
    int n_classes = 0;
    std::vector<double> mean;  // n_classes * 3
    std::vector<double> scale; // n_classes * 3, floored away from zero

    double m(int c, int ch) const { return mean[static_cast<std::size_t>(c) * 3 + ch]; }
    double s(int c, int ch) const { return scale[static_cast<std::size_t>(c) * 3 + ch]; }

    void normalize(int c, Field& x) const;
    void denormalize(int c, Field& x) const;
    double normalize_value(int c, int ch, double v) const { return (v - m(c, ch)) / s(c, ch); }
    double denormalize_value(int c, int ch, double v) const { return v * s(c, ch) + m(c, ch); }
};

struct Dataset {
    Grid2D grid;                       // prior grid shared by every sample
    ClassRegistry registry;
    std::vector<UnifiedSample> samples;
    NormStats norm;
    double sigma_data = 1.0;           // std of the normalized training values
    std::string config_hash;
    std::uint64_t seed = 0;
    int n_per_class = 0;

    std::vector<int> indices_of_class(int class_id) const;
};

struct GeneratorConfig {
    Investigation investigation = Investigation::unified;
    int n_per_class = 200;
    int solver_nx = 64;  // fields are solved here ...
    int prior_nx = 32;   // ... and restricted to this resolution
    double cfl = 0.5;
    std::string config_hash = "0";
};

/// Draw ICs and coefficients from the investigation's sampling rules, run the
/// solvers, and assemble the library. Vector families share one solve per
/// index across their _u/_v layout classes. Deterministic in `seed`; a
/// diverging solve is regenerated with the next derived seed (hard error when
/// more than 5% of samples need regeneration).
Dataset generate_dataset(const GeneratorConfig& cfg, std::uint64_t seed);

/// Normalization statistics and sigma_data from the sample set.
void compute_normalization(Dataset& ds);

} // namespace padam
