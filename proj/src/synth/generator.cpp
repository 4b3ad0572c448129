#include "vmin/synth/generator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmin/data/csv.hpp"
#include "vmin/errors.hpp"
#include "vmin/rng.hpp"

namespace vmin {

using nlohmann::json;

namespace {

constexpr Index kBasisDim = 24;
constexpr Index kArchetypes = 16;

void validate_node(const SynthNodeSpec& node, const char* label) {
    const std::string who(label);
    if (node.n_dies < 1) throw ConfigError(who + ": n_dies must be >= 1");
    if (node.group_sizes.empty()) throw ConfigError(who + ": needs at least one feature group");
    for (Index m : node.group_sizes) {
        if (m < 1) throw ConfigError(who + ": group sizes must be >= 1");
    }
    if (node.n_patterns < 1) throw ConfigError(who + ": n_patterns must be >= 1");
    if (node.n_odometers < 0) throw ConfigError(who + ": n_odometers must be >= 0");
    if (node.temperatures_c.empty()) throw ConfigError(who + ": temperature list must be nonempty");
}

Index post_width(const SynthNodeSpec& node) {
    Index total = 0;
    for (Index m : node.group_sizes) total += m;
    return total;
}

double norm_temp(int temperature_c) { return (temperature_c - 25.0) / 100.0; }

Matrix random_matrix(Rng& rng, Index rows, Index cols, double sd) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
    }
    return m;
}

Vector random_vector(Rng& rng, Index size, double sd) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v[i] = sd * rng.normal();
    return v;
}

/// rho-mix of a shared and a node-specific draw: convex interpolation,
/// rescaled so the mixture keeps the draw variance.
Matrix mixed(const Matrix& shared, const Matrix& own, double rho) {
    const double scale = std::sqrt(rho * rho + (1.0 - rho) * (1.0 - rho));
    return (rho * shared + (1.0 - rho) * own) / scale;
}

struct SharedDraw {
    Matrix basis_weight;
    Vector basis_offset;
    Matrix readout_weight;
    Matrix readout_linear;
};

SharedDraw draw_trunk(Rng& rng, Index p) {
    SharedDraw d;
    d.basis_weight = random_matrix(rng, kBasisDim, p, 1.0 / std::sqrt(static_cast<double>(p)));
    d.basis_offset = random_vector(rng, kBasisDim, 0.3);
    d.readout_weight =
        random_matrix(rng, kArchetypes, kBasisDim, 1.0 / std::sqrt(static_cast<double>(kBasisDim)));
    d.readout_linear = random_matrix(rng, kArchetypes, p, 1.0 / std::sqrt(static_cast<double>(p)));
    return d;
}

NodeLatentModel build_node_model(const SyntheticSpec& spec, const SynthNodeSpec& node,
                                 NodeLabel label, const SharedDraw& shared) {
    const Index p = spec.global_latent_dim;
    const std::string name = node_label_name(label);
    Rng rng(mix_seed(spec.master_seed, stream_tag("model:" + name)));

    NodeLatentModel m;
    const SharedDraw own = draw_trunk(rng, p);
    const double rho = spec.share_rho;
    m.basis_weight = mixed(shared.basis_weight, own.basis_weight, rho);
    m.basis_offset = mixed(shared.basis_offset, own.basis_offset, rho);
    m.readout_weight = mixed(shared.readout_weight, own.readout_weight, rho);
    m.readout_linear = mixed(shared.readout_linear, own.readout_linear, rho);

    // Pattern readout: unit direction over archetypes scaled to ~30 mV,
    // always node-specific, plus per-pattern offset and temperature slope.
    m.pattern_mix_mv.resize(node.n_patterns, kArchetypes);
    for (Index r = 0; r < node.n_patterns; ++r) {
        Vector dir = random_vector(rng, kArchetypes, 1.0);
        m.pattern_mix_mv.row(r) = 30.0 * dir.normalized();
    }
    m.pattern_offset_mv.resize(node.n_patterns);
    m.temp_slope_mv.resize(node.n_patterns);
    for (Index r = 0; r < node.n_patterns; ++r) {
        m.pattern_offset_mv[r] = rng.uniform(620.0, 780.0);
        m.temp_slope_mv[r] = 15.0 * rng.normal();
    }

    const Index m_post = post_width(node);
    m.sensor_map = random_matrix(rng, m_post, p, 1.0 / std::sqrt(static_cast<double>(p)));
    m.sensor_temp_sens = random_vector(rng, m_post, 0.5);
    m.sensor_scale.resize(m_post);
    m.sensor_offset.resize(m_post);
    for (Index i = 0; i < m_post; ++i) {
        // Heterogeneous units: scales span several orders of magnitude.
        m.sensor_scale[i] = std::pow(10.0, rng.uniform(-1.0, 2.0));
        m.sensor_offset[i] = m.sensor_scale[i] * rng.uniform(2.0, 10.0);
    }

    if (node.n_odometers > 0) {
        m.odo_global_coef = random_matrix(rng, node.n_odometers, p, 0.08);
        m.odo_base_freq.resize(node.n_odometers);
        for (Index j = 0; j < node.n_odometers; ++j) {
            m.odo_base_freq[j] = rng.uniform(800.0, 1200.0);
        }
        m.odo_local_coef = 0.15;
    }
    return m;
}

const NodeLatentModel& node_model(const LatentModel& model, NodeLabel node) {
    return node == NodeLabel::Base ? model.base : model.target;
}

const SynthNodeSpec& node_spec(const SyntheticSpec& spec, NodeLabel node) {
    return node == NodeLabel::Base ? spec.base : spec.target;
}

std::string pattern_name(Index r, Index n_patterns) {
    const char* category = r < n_patterns / 3       ? "dcscan"
                           : r < 2 * n_patterns / 3 ? "acscan"
                                                    : "mbist";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%02lld", category, static_cast<long long>(r));
    return buf;
}

std::vector<std::string> feature_names(const SynthNodeSpec& node) {
    static const char* kGroupNames[] = {"vth", "delay", "leakage", "slew", "cap", "res"};
    std::vector<std::string> names;
    for (std::size_t g = 0; g < node.group_sizes.size(); ++g) {
        const std::string base =
            g < std::size(kGroupNames) ? kGroupNames[g] : "post" + std::to_string(g);
        for (Index i = 0; i < node.group_sizes[g]; ++i) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%s_%02lld", base.c_str(), static_cast<long long>(i));
            names.emplace_back(buf);
        }
    }
    for (Index j = 0; j < node.n_odometers; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "odo_%03lld", static_cast<long long>(j));
        names.emplace_back(buf);
    }
    return names;
}

GroupSpec make_groupspec(const SynthNodeSpec& node) {
    static const char* kGroupNames[] = {"vth", "delay", "leakage", "slew", "cap", "res"};
    GroupSpec spec;
    const std::vector<std::string> cols = feature_names(node);
    std::size_t at = 0;
    for (std::size_t g = 0; g < node.group_sizes.size(); ++g) {
        FeatureGroup group;
        group.name = g < std::size(kGroupNames) ? kGroupNames[g] : "post" + std::to_string(g);
        group.kind = GroupKind::Common;
        for (Index i = 0; i < node.group_sizes[g]; ++i) group.columns.push_back(cols[at++]);
        spec.groups.push_back(std::move(group));
    }
    if (node.n_odometers > 0) {
        FeatureGroup group;
        group.name = "odometer";
        group.kind = GroupKind::Odometer;
        for (Index j = 0; j < node.n_odometers; ++j) group.columns.push_back(cols[at++]);
        spec.groups.push_back(std::move(group));
    }
    return spec;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json node_spec_to_json(const SynthNodeSpec& node) {
    return json{{"n_dies", node.n_dies},
                {"group_sizes", node.group_sizes},
                {"n_odometers", node.n_odometers},
                {"n_patterns", node.n_patterns},
                {"temperatures_c", node.temperatures_c}};
}

SynthNodeSpec node_spec_from_json(const json& j) {
    SynthNodeSpec node;
    node.n_dies = j.at("n_dies").get<Index>();
    node.group_sizes = j.at("group_sizes").get<std::vector<Index>>();
    node.n_odometers = j.value("n_odometers", Index{0});
    node.n_patterns = j.at("n_patterns").get<Index>();
    node.temperatures_c = j.at("temperatures_c").get<std::vector<int>>();
    return node;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (!(share_rho >= 0.0 && share_rho <= 1.0)) {
        throw ConfigError("share_rho must lie in [0, 1]");
    }
    if (global_latent_dim < 1) throw ConfigError("global_latent_dim must be >= 1");
    if (local_latent_dim < 1) throw ConfigError("local_latent_dim must be >= 1");
    if (feature_noise < 0.0 || target_noise_mv < 0.0) {
        throw ConfigError("noise scales must be >= 0");
    }
    if (local_site_jitter < 0.0) throw ConfigError("local_site_jitter must be >= 0");
    if (odometer_coupling_mv < 0.0) throw ConfigError("odometer_coupling_mv must be >= 0");
    validate_node(base, "base");
    validate_node(target, "target");
}

SyntheticSpec default_synthetic_spec() {
    SyntheticSpec spec;
    spec.base.n_dies = 5239;
    spec.base.group_sizes = {5, 19, 21};
    spec.base.n_odometers = 0;
    spec.base.n_patterns = 63;
    spec.base.temperatures_c = {-40, 25, 125};

    spec.target.n_dies = 415;
    spec.target.group_sizes = {12, 7, 18};
    spec.target.n_odometers = 124;
    spec.target.n_patterns = 27;
    spec.target.temperatures_c = {-45, 25, 80, 125};
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open generator spec: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    SyntheticSpec spec = default_synthetic_spec();
    try {
        spec.master_seed = j.value("master_seed", spec.master_seed);
        spec.share_rho = j.value("share_rho", spec.share_rho);
        spec.global_latent_dim = j.value("global_latent_dim", spec.global_latent_dim);
        spec.local_latent_dim = j.value("local_latent_dim", spec.local_latent_dim);
        spec.feature_noise = j.value("feature_noise", spec.feature_noise);
        spec.target_noise_mv = j.value("target_noise_mv", spec.target_noise_mv);
        spec.nonlinearity = j.value("nonlinearity", spec.nonlinearity);
        spec.odometer_coupling_mv = j.value("odometer_coupling_mv", spec.odometer_coupling_mv);
        spec.local_site_jitter = j.value("local_site_jitter", spec.local_site_jitter);
        if (j.contains("base")) spec.base = node_spec_from_json(j.at("base"));
        if (j.contains("target")) spec.target = node_spec_from_json(j.at("target"));
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    spec.validate();
    return spec;
}

void save_synthetic_spec(const std::filesystem::path& path, const SyntheticSpec& spec) {
    json j{{"master_seed", spec.master_seed},
           {"share_rho", spec.share_rho},
           {"global_latent_dim", spec.global_latent_dim},
           {"local_latent_dim", spec.local_latent_dim},
           {"feature_noise", spec.feature_noise},
           {"target_noise_mv", spec.target_noise_mv},
           {"nonlinearity", spec.nonlinearity},
           {"odometer_coupling_mv", spec.odometer_coupling_mv},
           {"local_site_jitter", spec.local_site_jitter},
           {"base", node_spec_to_json(spec.base)},
           {"target", node_spec_to_json(spec.target)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write generator spec: " + path.string());
    out << j.dump(2) << '\n';
}

Vector NodeLatentModel::latent_response(const Vector& global_latent) const {
    const Vector squashed = (basis_weight * global_latent + basis_offset).array().tanh();
    return readout_weight * squashed + readout_linear * global_latent;
}

LatentModel build_latent_model(const SyntheticSpec& spec) {
    spec.validate();
    Rng shared_rng(mix_seed(spec.master_seed, stream_tag("model:shared")));
    const SharedDraw shared = draw_trunk(shared_rng, spec.global_latent_dim);
    LatentModel model;
    model.base = build_node_model(spec, spec.base, NodeLabel::Base, shared);
    model.target = build_node_model(spec, spec.target, NodeLabel::Target, shared);
    return model;
}

DieRecord make_die(const LatentModel& model, const SyntheticSpec& spec, NodeLabel node,
                   Index die_index) {
    const SynthNodeSpec& ns = node_spec(spec, node);
    const NodeLatentModel& nm = node_model(model, node);
    if (die_index < 0 || die_index >= ns.n_dies) {
        throw ArgumentError("die index out of range: " + std::to_string(die_index));
    }

    Rng rng(mix_seed(mix_seed(spec.master_seed, stream_tag("die:" + node_label_name(node))),
                     static_cast<std::uint64_t>(die_index)));

    DieRecord die;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s_%06lld", node_label_name(node).c_str(),
                      static_cast<long long>(die_index));
        die.die_id = buf;
    }

    die.global_latent = random_vector(rng, spec.global_latent_dim, 1.0);
    die.temperature_c = ns.temperatures_c[static_cast<std::size_t>(
        rng.below(ns.temperatures_c.size()))];
    const double t_norm = norm_temp(die.temperature_c);

    // Local process variation: a die-level factor plus per-site jitter,
    // observable only through the odometers.
    die.local_factor = rng.normal();
    if (ns.n_odometers > 0) {
        die.site_locals.resize(ns.n_odometers);
        const double inv_sqrt_q = 1.0 / std::sqrt(static_cast<double>(spec.local_latent_dim));
        for (Index j = 0; j < ns.n_odometers; ++j) {
            double site = 0.0;
            for (Index q = 0; q < spec.local_latent_dim; ++q) site += rng.normal();
            die.site_locals[j] = die.local_factor + spec.local_site_jitter * site * inv_sqrt_q;
        }
    }

    const Index m_post = post_width(ns);
    die.post_features.resize(m_post);
    for (Index i = 0; i < m_post; ++i) {
        const double raw = nm.sensor_map.row(i).dot(die.global_latent) +
                           nm.sensor_temp_sens[i] * t_norm + spec.feature_noise * rng.normal();
        die.post_features[i] = nm.sensor_offset[i] + nm.sensor_scale[i] * raw;
    }

    if (ns.n_odometers > 0) {
        die.odometers.resize(ns.n_odometers);
        for (Index j = 0; j < ns.n_odometers; ++j) {
            const double exponent = nm.odo_global_coef.row(j).dot(die.global_latent) +
                                    nm.odo_local_coef * die.site_locals[j];
            die.odometers[j] = nm.odo_base_freq[j] * std::exp(exponent) +
                               spec.feature_noise * nm.odo_base_freq[j] * rng.normal();
        }
    }

    const Vector response = nm.latent_response(die.global_latent);
    // nonlinearity scales the squashed component only.
    const Vector linear_part = nm.readout_linear * die.global_latent;
    const Vector shaped = linear_part + spec.nonlinearity * (response - linear_part);

    const double local_aggregate =
        ns.n_odometers > 0 ? die.site_locals.maxCoeff() : 0.0;

    die.vmin_mv.resize(ns.n_patterns);
    for (Index r = 0; r < ns.n_patterns; ++r) {
        die.vmin_mv[r] = nm.pattern_offset_mv[r] + nm.pattern_mix_mv.row(r).dot(shaped) +
                         spec.odometer_coupling_mv * local_aggregate +
                         nm.temp_slope_mv[r] * t_norm + spec.target_noise_mv * rng.normal();
    }
    return die;
}

namespace {

void write_node(const LatentModel& model, const SyntheticSpec& spec, NodeLabel node,
                const std::filesystem::path& dir, std::filesystem::path& manifest_out) {
    const SynthNodeSpec& ns = node_spec(spec, node);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());

    const std::vector<std::string> columns = feature_names(ns);
    std::vector<std::string> patterns;
    for (Index r = 0; r < ns.n_patterns; ++r) patterns.push_back(pattern_name(r, ns.n_patterns));

    const Index width = static_cast<Index>(columns.size());
    Matrix features(ns.n_dies, width);
    Matrix targets(ns.n_dies, ns.n_patterns);
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(ns.n_dies));
    for (Index i = 0; i < ns.n_dies; ++i) {
        const DieRecord die = make_die(model, spec, node, i);
        features.row(i).head(die.post_features.size()) = die.post_features;
        if (die.odometers.size() > 0) {
            features.row(i).tail(die.odometers.size()) = die.odometers;
        }
        targets.row(i) = die.vmin_mv;
        ids.push_back(die.die_id);
    }

    write_csv(dir / "features.csv", "die_id", columns, ids, features);
    write_csv(dir / "targets.csv", "die_id", patterns, ids, targets);
    save_groupspec(dir / "groups.json", make_groupspec(ns));

    DatasetManifest manifest;
    manifest.features_path = dir / "features.csv";
    manifest.targets_path = dir / "targets.csv";
    manifest.groupspec_path = dir / "groups.json";
    manifest.node_label = node;
    manifest.temperatures_c = ns.temperatures_c;
    manifest_out = dir / "manifest.json";
    save_manifest(manifest_out, manifest);
}

json node_model_to_json(const NodeLatentModel& m) {
    json j{{"basis_weight", matrix_to_json(m.basis_weight)},
           {"basis_offset", vector_to_json(m.basis_offset)},
           {"readout_weight", matrix_to_json(m.readout_weight)},
           {"readout_linear", matrix_to_json(m.readout_linear)},
           {"pattern_mix_mv", matrix_to_json(m.pattern_mix_mv)},
           {"pattern_offset_mv", vector_to_json(m.pattern_offset_mv)},
           {"temp_slope_mv", vector_to_json(m.temp_slope_mv)},
           {"sensor_map", matrix_to_json(m.sensor_map)},
           {"sensor_temp_sens", vector_to_json(m.sensor_temp_sens)},
           {"sensor_scale", vector_to_json(m.sensor_scale)},
           {"sensor_offset", vector_to_json(m.sensor_offset)}};
    if (m.odo_base_freq.size() > 0) {
        j["odo_global_coef"] = matrix_to_json(m.odo_global_coef);
        j["odo_base_freq"] = vector_to_json(m.odo_base_freq);
        j["odo_local_coef"] = m.odo_local_coef;
    }
    return j;
}

}  // namespace

GeneratedPair gen_pair(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    const LatentModel model = build_latent_model(spec);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    GeneratedPair pair;
    write_node(model, spec, NodeLabel::Base, out_dir / "base", pair.base_manifest);
    write_node(model, spec, NodeLabel::Target, out_dir / "target", pair.target_manifest);

    save_synthetic_spec(out_dir / "spec_echo.json", spec);
    {
        json coeffs{{"master_seed", spec.master_seed},
                    {"base", node_model_to_json(model.base)},
                    {"target", node_model_to_json(model.target)}};
        std::ofstream out(out_dir / "latent_model.json", std::ios::binary);
        if (!out) throw IoError("cannot write latent model echo");
        out << coeffs.dump(1) << '\n';
    }
    return pair;
}

std::string describe(const SyntheticSpec& spec) {
    spec.validate();
    auto join_sizes = [](const std::vector<Index>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += "/";
            s += std::to_string(v[i]);
        }
        return s;
    };
    auto join_temps = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(v[i]);
        }
        return s;
    };
    std::ostringstream out;
    out << "synthetic two-node pair (master_seed=" << spec.master_seed << ")\n";
    out << "  base:   " << spec.base.n_dies << " dies, POSt groups " << join_sizes(spec.base.group_sizes)
        << ", " << spec.base.n_patterns << " patterns, temps [" << join_temps(spec.base.temperatures_c)
        << "] C\n";
    out << "  target: " << spec.target.n_dies << " dies, POSt groups "
        << join_sizes(spec.target.group_sizes) << " + " << spec.target.n_odometers
        << " odometers, " << spec.target.n_patterns << " patterns, temps ["
        << join_temps(spec.target.temperatures_c) << "] C\n";
    out << "  latent: global_dim=" << spec.global_latent_dim << ", local_dim=" << spec.local_latent_dim
        << ", share_rho=" << format_double(spec.share_rho)
        << ", nonlinearity=" << format_double(spec.nonlinearity) << "\n";
    out << "  noise:  feature=" << format_double(spec.feature_noise)
        << ", target_mv=" << format_double(spec.target_noise_mv)
        << ", odometer_coupling_mv=" << format_double(spec.odometer_coupling_mv)
        << ", site_jitter=" << format_double(spec.local_site_jitter) << "\n";
    return out.str();
}

}  // namespace vmin
