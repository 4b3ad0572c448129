#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vmin/data/dataset.hpp"
#include "vmin/types.hpp"

namespace vmin {

/// Per-node shape parameters (die count, grouped feature sizes, odometer
/// sites, pattern count, temperature arms).
struct SynthNodeSpec {
    Index n_dies = 0;
    std::vector<Index> group_sizes;
    Index n_odometers = 0;
    Index n_patterns = 0;
    std::vector<int> temperatures_c;
};

/// Generator configuration. The defaults emit the standard two-node pair:
/// base 5239 dies, groups 5/19/21, 63 patterns; target 415 dies, groups
/// 12/7/18 plus 124 odometers, 27 patterns.
struct SyntheticSpec {
    std::uint64_t master_seed = 20250801;
    double share_rho = 0.9;             // cross-node share of the latent map, in [0,1]
    Index global_latent_dim = 6;        // die-level process factors
    Index local_latent_dim = 1;         // latent components per odometer site
    double feature_noise = 0.02;         // sensor measurement noise (relative units)
    double target_noise_mv = 1.5;        // irreducible V_min noise
    double nonlinearity = 1.3;           // weight of the squashed latent response
    double odometer_coupling_mv = 12.0;  // local-variation contribution to V_min
    double local_site_jitter = 0.3;     // per-site spread around the die-level local factor
    SynthNodeSpec base;
    SynthNodeSpec target;

    void validate() const;  // ConfigError on invalid values
};

SyntheticSpec default_synthetic_spec();

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
void save_synthetic_spec(const std::filesystem::path& path, const SyntheticSpec& spec);

/// Node-specific coefficient set derived deterministically from the
/// master seed.
struct NodeLatentModel {
    // Squashed-basis latent response, already share_rho-mixed with the
    // cross-node shared draw: response_a(z) = nonlinearity * w2_a . tanh(w1 z + b1)
    //                                        + lin_a . z
    Matrix basis_weight;    // n_basis x p
    Vector basis_offset;    // n_basis
    Matrix readout_weight;  // n_archetypes x n_basis
    Matrix readout_linear;  // n_archetypes x p

    // Pattern layer: vmin_r = pattern_mix.row(r) . response(z) * 1mV-scale
    Matrix pattern_mix_mv;    // n_patterns x n_archetypes
    Vector pattern_offset_mv; // n_patterns
    Vector temp_slope_mv;     // n_patterns, per normalized temperature

    // POSt sensors: linear views of the global latent plus temperature.
    Matrix sensor_map;       // m_post x p
    Vector sensor_temp_sens; // m_post
    Vector sensor_scale;     // m_post, unit heterogeneity
    Vector sensor_offset;    // m_post

    // Odometer response (target node): odo_j = f0_j * exp(c_j . z + d * s_j) + noise
    Matrix odo_global_coef;  // n_odometers x p
    Vector odo_base_freq;    // n_odometers
    double odo_local_coef = 0.0;

    Vector latent_response(const Vector& global_latent) const;  // n_archetypes
};

struct LatentModel {
    NodeLatentModel base;
    NodeLatentModel target;
};

LatentModel build_latent_model(const SyntheticSpec& spec);

/// Everything that determines one die, reproducible from
/// (master seed, node, die index) alone.
struct DieRecord {
    std::string die_id;
    Vector global_latent;
    double local_factor = 0.0;  // die-level local-variation factor
    Vector site_locals;         // per odometer site
    int temperature_c = 25;
    Vector post_features;
    Vector odometers;
    Vector vmin_mv;
};

DieRecord make_die(const LatentModel& model, const SyntheticSpec& spec, NodeLabel node,
                   Index die_index);

struct GeneratedPair {
    std::filesystem::path base_manifest;
    std::filesystem::path target_manifest;
};

/// Writes both nodes' CSV files, group specs and manifests under
/// out_dir/base and out_dir/target, plus a spec echo recording the full
/// generator configuration and derived coefficients. Byte-identical for
/// identical specs.
GeneratedPair gen_pair(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

/// Human-readable summary of shapes and coefficients; byte-stable.
std::string describe(const SyntheticSpec& spec);

}  // namespace vmin
