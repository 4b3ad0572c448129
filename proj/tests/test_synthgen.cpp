#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vmin/baselines/baselines.hpp"
#include "vmin/data/dataset.hpp"
#include "vmin/errors.hpp"
#include "vmin/synth/generator.hpp"

using namespace vmin;
using testsupport::read_file;
using testsupport::TempDir;

namespace {

SyntheticSpec quick_spec(std::uint64_t seed = 99) {
    SyntheticSpec spec = default_synthetic_spec();
    spec.master_seed = seed;
    spec.base.n_dies = 80;
    spec.base.group_sizes = {3, 4};
    spec.base.n_patterns = 5;
    spec.target.n_dies = 60;
    spec.target.group_sizes = {3, 2};
    spec.target.n_odometers = 8;
    spec.target.n_patterns = 4;
    return spec;
}

}  // namespace

TEST_CASE("default pair reproduces the expected dataset structure") {
    TempDir dir("vmin_synth_default");
    const GeneratedPair pair = gen_pair(default_synthetic_spec(), dir.path());

    const Dataset base = load_dataset(load_manifest(pair.base_manifest));
    CHECK(base.features.values.rows() == 5239);
    CHECK(base.features.values.cols() == 45);  // 5 + 19 + 21
    CHECK(base.targets.values.cols() == 63);
    CHECK(base.groups.model_group_sizes() == std::vector<Index>{5, 19, 21});
    CHECK(base.rows_rejected == 0);

    const Dataset target = load_dataset(load_manifest(pair.target_manifest));
    CHECK(target.features.values.rows() == 415);
    CHECK(target.features.values.cols() == 37 + 124);
    CHECK(target.targets.values.cols() == 27);
    CHECK(target.groups.model_group_sizes() == std::vector<Index>{12, 7, 18, 124});
    REQUIRE(target.groups.groups.size() == 4);
    CHECK(target.groups.groups[3].kind == GroupKind::Odometer);
    CHECK(target.groups.groups[3].columns.size() == 124);

    const DatasetManifest bm = load_manifest(pair.base_manifest);
    CHECK(bm.node_label == NodeLabel::Base);
    CHECK(bm.temperatures_c == std::vector<int>{-40, 25, 125});
    const DatasetManifest tm = load_manifest(pair.target_manifest);
    CHECK(tm.node_label == NodeLabel::Target);
    CHECK(tm.temperatures_c == std::vector<int>{-45, 25, 80, 125});

    // Values land in a plausible millivolt range.
    CHECK(target.targets.values.minCoeff() > 300.0);
    CHECK(target.targets.values.maxCoeff() < 1100.0);
}

TEST_CASE("generation is byte-identical for the same master seed") {
    TempDir a("vmin_synth_a");
    TempDir b("vmin_synth_b");
    const SyntheticSpec spec = quick_spec(123);
    gen_pair(spec, a.path());
    gen_pair(spec, b.path());
    for (const char* node : {"base", "target"}) {
        for (const char* file : {"features.csv", "targets.csv", "groups.json"}) {
            CHECK(read_file(a.path() / node / file) == read_file(b.path() / node / file));
        }
    }
    CHECK(read_file(a.path() / "spec_echo.json") == read_file(b.path() / "spec_echo.json"));
    CHECK(read_file(a.path() / "latent_model.json") == read_file(b.path() / "latent_model.json"));

    TempDir c("vmin_synth_c");
    SyntheticSpec other = spec;
    other.master_seed = 124;
    gen_pair(other, c.path());
    CHECK(read_file(a.path() / "base" / "features.csv") !=
          read_file(c.path() / "base" / "features.csv"));
}

TEST_CASE("noise-free dies regenerate exactly and match the closed-form oracle") {
    SyntheticSpec spec = quick_spec(5);
    spec.feature_noise = 0.0;
    spec.target_noise_mv = 0.0;

    TempDir dir("vmin_synth_oracle");
    const GeneratedPair pair = gen_pair(spec, dir.path());
    const Dataset target = load_dataset(load_manifest(pair.target_manifest));

    const LatentModel model = build_latent_model(spec);
    for (Index die_idx : {Index{0}, Index{17}, Index{59}}) {
        const DieRecord die = make_die(model, spec, NodeLabel::Target, die_idx);
        const DieRecord again = make_die(model, spec, NodeLabel::Target, die_idx);
        CHECK(die.post_features == again.post_features);
        CHECK(die.vmin_mv == again.vmin_mv);

        // CSV round trip preserves every value bit-exactly.
        for (Index j = 0; j < die.post_features.size(); ++j) {
            CHECK(target.features.values(die_idx, j) == die.post_features[j]);
        }
        for (Index r = 0; r < die.vmin_mv.size(); ++r) {
            CHECK(target.targets.values(die_idx, r) == die.vmin_mv[r]);
        }

        // Independent closed-form evaluation of the target formula.
        const NodeLatentModel& nm = model.target;
        const double t_norm = (die.temperature_c - 25.0) / 100.0;
        const Vector squashed =
            (nm.basis_weight * die.global_latent + nm.basis_offset).array().tanh();
        const Vector response =
            nm.readout_weight * squashed + nm.readout_linear * die.global_latent;
        const Vector linear_part = nm.readout_linear * die.global_latent;
        const Vector shaped = linear_part + spec.nonlinearity * (response - linear_part);
        const double aggregate = die.site_locals.maxCoeff();
        for (Index r = 0; r < die.vmin_mv.size(); ++r) {
            const double expected = nm.pattern_offset_mv[r] + nm.pattern_mix_mv.row(r).dot(shaped) +
                                    spec.odometer_coupling_mv * aggregate +
                                    nm.temp_slope_mv[r] * t_norm;
            CHECK(die.vmin_mv[r] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("base dies carry no odometer contribution") {
    const SyntheticSpec spec = quick_spec(7);
    const LatentModel model = build_latent_model(spec);
    const DieRecord die = make_die(model, spec, NodeLabel::Base, 3);
    CHECK(die.odometers.size() == 0);
    CHECK(die.site_locals.size() == 0);
    CHECK(die.post_features.size() == 7);  // 3 + 4
    CHECK(die.vmin_mv.size() == 5);
}

TEST_CASE("describe lists the node shapes and is byte-stable") {
    const std::string text = describe(default_synthetic_spec());
    CHECK(text.find("5/19/21") != std::string::npos);
    CHECK(text.find("12/7/18") != std::string::npos);
    CHECK(text.find("124 odometers") != std::string::npos);
    CHECK(text == describe(default_synthetic_spec()));
}

TEST_CASE("spec validation rejects bad values") {
    SyntheticSpec spec = quick_spec();
    spec.base.temperatures_c.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = quick_spec();
    spec.share_rho = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = quick_spec();
    spec.target.n_dies = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = quick_spec();
    spec.target_noise_mv = -1.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("spec JSON round trip preserves every field") {
    TempDir dir("vmin_synth_spec");
    SyntheticSpec spec = quick_spec(42);
    spec.share_rho = 0.25;
    spec.odometer_coupling_mv = 11.5;
    save_synthetic_spec(dir / "spec.json", spec);
    const SyntheticSpec loaded = load_synthetic_spec(dir / "spec.json");
    CHECK(loaded.master_seed == spec.master_seed);
    CHECK(loaded.share_rho == spec.share_rho);
    CHECK(loaded.odometer_coupling_mv == spec.odometer_coupling_mv);
    CHECK(loaded.base.group_sizes == spec.base.group_sizes);
    CHECK(loaded.target.n_odometers == spec.target.n_odometers);
    CHECK(loaded.target.temperatures_c == spec.target.temperatures_c);
}

TEST_CASE("with no target noise and full sharing the latent-record oracle is exact") {
    // Sanity ceiling: an oracle regressor reading each die's latent record
    // (global latent, site locals, temperature) reproduces V_min exactly
    // when the noise term is off.
    SyntheticSpec spec = quick_spec(21);
    spec.share_rho = 1.0;
    spec.target_noise_mv = 0.0;
    const LatentModel model = build_latent_model(spec);
    const NodeLatentModel& nm = model.target;

    double worst = 0.0;
    for (Index i = 0; i < spec.target.n_dies; ++i) {
        const DieRecord die = make_die(model, spec, NodeLabel::Target, i);
        const double t_norm = (die.temperature_c - 25.0) / 100.0;
        const Vector squashed =
            (nm.basis_weight * die.global_latent + nm.basis_offset).array().tanh();
        const Vector response =
            nm.readout_weight * squashed + nm.readout_linear * die.global_latent;
        const Vector linear_part = nm.readout_linear * die.global_latent;
        const Vector shaped = linear_part + spec.nonlinearity * (response - linear_part);
        for (Index r = 0; r < die.vmin_mv.size(); ++r) {
            const double oracle = nm.pattern_offset_mv[r] + nm.pattern_mix_mv.row(r).dot(shaped) +
                                  spec.odometer_coupling_mv * die.site_locals.maxCoeff() +
                                  nm.temp_slope_mv[r] * t_norm;
            worst = std::max(worst, std::abs(oracle - die.vmin_mv[r]));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("stronger odometer coupling raises the variance explained by odometers") {
    // Variance-explained proxy: R^2 of an OLS fit of the pattern-average
    // target on all odometer columns, on a medium-size target node.
    double prev_r2 = -1.0;
    for (double coupling : {0.0, 4.0, 8.0, 16.0}) {
        SyntheticSpec spec = default_synthetic_spec();
        spec.master_seed = 314;
        spec.target.n_dies = 600;
        spec.target.n_odometers = 24;
        spec.odometer_coupling_mv = coupling;

        const LatentModel model = build_latent_model(spec);
        Matrix odos(spec.target.n_dies, spec.target.n_odometers);
        Vector y(spec.target.n_dies);
        for (Index i = 0; i < spec.target.n_dies; ++i) {
            const DieRecord die = make_die(model, spec, NodeLabel::Target, i);
            odos.row(i) = die.odometers;
            y[i] = die.vmin_mv.mean();
        }
        const LinearModel fit = ols_fit(odos, y);
        const Vector pred = ols_predict(fit, odos);
        const double ss_res = (y - pred).squaredNorm();
        const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
        const double r2 = 1.0 - ss_res / ss_tot;
        CHECK(r2 > prev_r2);
        prev_r2 = r2;
    }
    CHECK(prev_r2 > 0.3);  // strong coupling ends up clearly visible
}

TEST_CASE("gen_pair with an unwritable output path raises an I/O error") {
    const SyntheticSpec spec = quick_spec(11);
    CHECK_THROWS_AS(gen_pair(spec, "/proc/definitely/not/writable"), IoError);
}
