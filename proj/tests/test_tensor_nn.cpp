#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "support.hpp"
#include "vmin/checkpoint.hpp"
#include "vmin/errors.hpp"
#include "vmin/nn/activation.hpp"
#include "vmin/nn/adam.hpp"
#include "vmin/nn/dense.hpp"
#include "vmin/nn/gradcheck.hpp"
#include "vmin/nn/loss.hpp"

using namespace vmin;
using testsupport::random_matrix;
using testsupport::random_vector;

namespace {

/// Scalar-loop re-evaluation oracle for a dense layer, independent of the
/// Eigen-based implementation path.
Matrix dense_forward_oracle(const DenseLayer& layer, const Matrix& x) {
    const Index batch = x.rows();
    const Index out = layer.weight.rows();
    Matrix y(batch, out);
    for (Index b = 0; b < batch; ++b) {
        for (Index o = 0; o < out; ++o) {
            double acc = layer.bias[o];
            for (Index i = 0; i < layer.weight.cols(); ++i) acc += layer.weight(o, i) * x(b, i);
            if (layer.activation == Activation::LeakyRelu && acc < 0.0) {
                acc *= layer.leaky_slope;
            }
            y(b, o) = acc;
        }
    }
    return y;
}

DenseLayer make_random_layer(Index in, Index out, Activation act, std::uint64_t seed) {
    Rng rng(seed);
    DenseLayer layer;
    layer.weight = random_matrix(rng, out, in);
    layer.bias = random_vector(rng, out);
    layer.activation = act;
    layer.leaky_slope = 0.01;
    return layer;
}

}  // namespace

TEST_CASE("dense_forward identity case") {
    DenseLayer layer;
    layer.weight = Matrix::Identity(2, 2);
    layer.bias = Vector::Zero(2);
    Matrix x(1, 2);
    x << 3, 4;
    Matrix y = dense_forward(layer, x);
    CHECK(y(0, 0) == 3.0);
    CHECK(y(0, 1) == 4.0);
}

TEST_CASE("dense_forward hand arithmetic") {
    DenseLayer layer;
    layer.weight.resize(2, 2);
    layer.weight << 1, 2, 3, 4;
    layer.bias.resize(2);
    layer.bias << 1, 1;
    Matrix x(1, 2);
    x << 1, 1;
    Matrix y = dense_forward(layer, x);
    CHECK(y(0, 0) == doctest::Approx(4.0));
    CHECK(y(0, 1) == doctest::Approx(8.0));
}

TEST_CASE("dense_forward matches scalar-loop oracle") {
    DenseLayer layer = make_random_layer(5, 3, Activation::LeakyRelu, 42);
    Rng rng(7);
    Matrix x = random_matrix(rng, 4, 5);
    Matrix y = dense_forward(layer, x);
    Matrix expected = dense_forward_oracle(layer, x);
    CHECK((y - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dense_forward shape mismatch") {
    DenseLayer layer = make_random_layer(5, 3, Activation::Identity, 1);
    Matrix x = Matrix::Zero(2, 4);
    CHECK_THROWS_AS(dense_forward(layer, x), DimensionError);
}

TEST_CASE("dense_forward is linear when activation is identity and bias zero") {
    DenseLayer layer = make_random_layer(6, 4, Activation::Identity, 11);
    layer.bias.setZero();
    Rng rng(12);
    Matrix x1 = random_matrix(rng, 3, 6);
    Matrix x2 = random_matrix(rng, 3, 6);
    const double a = 1.7, b = -0.4;
    Matrix lhs = dense_forward(layer, Matrix(a * x1 + b * x2));
    Matrix rhs = a * dense_forward(layer, x1) + b * dense_forward(layer, x2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dense_backward zero upstream gives zero gradients") {
    DenseLayer layer = make_random_layer(4, 3, Activation::LeakyRelu, 5);
    Rng rng(6);
    Matrix x = random_matrix(rng, 2, 4);
    DenseGrads g = dense_backward(layer, x, Matrix::Zero(2, 3));
    CHECK(g.weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.bias.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense_backward outer product on 2x2 identity-activation case") {
    DenseLayer layer;
    layer.weight.resize(2, 2);
    layer.weight << 1, -1, 2, 0.5;
    layer.bias = Vector::Zero(2);
    Matrix x(1, 2);
    x << 3, -2;
    Matrix upstream(1, 2);
    upstream << 0.5, 2;
    DenseGrads g = dense_backward(layer, x, upstream);
    // grad_weight = upstream^T * x
    CHECK(g.weight(0, 0) == doctest::Approx(0.5 * 3));
    CHECK(g.weight(0, 1) == doctest::Approx(0.5 * -2));
    CHECK(g.weight(1, 0) == doctest::Approx(2 * 3));
    CHECK(g.weight(1, 1) == doctest::Approx(2 * -2));
    CHECK(g.bias[0] == doctest::Approx(0.5));
    CHECK(g.bias[1] == doctest::Approx(2.0));
}

TEST_CASE("dense_backward matches central finite differences") {
    DenseLayer layer = make_random_layer(5, 3, Activation::LeakyRelu, 77);
    Rng rng(78);
    Matrix x = random_matrix(rng, 4, 5);
    Matrix upstream = random_matrix(rng, 4, 3);
    const DenseGrads g = dense_backward(layer, x, upstream);

    // Scalar objective: sum(upstream .* forward(x)).
    auto objective = [&]() { return dense_forward(layer, x).cwiseProduct(upstream).sum(); };
    const double h = 1e-6;

    auto check_entry = [&](double& slot, double analytic) {
        const double saved = slot;
        slot = saved + h;
        const double up = objective();
        slot = saved - h;
        const double down = objective();
        slot = saved;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        CHECK(std::abs(analytic - numeric) / denom < 1e-5);
    };

    for (Index i = 0; i < layer.weight.size(); ++i) {
        check_entry(layer.weight.data()[i], g.weight.data()[i]);
    }
    for (Index i = 0; i < layer.bias.size(); ++i) check_entry(layer.bias[i], g.bias[i]);
    for (Index i = 0; i < x.size(); ++i) check_entry(x.data()[i], g.input.data()[i]);
}

TEST_CASE("leaky_relu values and derivative") {
    Matrix x(1, 3);
    x << 5.0, -2.0, 0.0;
    Matrix y = leaky_relu(x, 0.01);
    CHECK(y(0, 0) == 5.0);
    CHECK(y(0, 1) == doctest::Approx(-0.02));
    CHECK(y(0, 2) == 0.0);
    Matrix d = leaky_relu_derivative(x, 0.01);
    CHECK(d(0, 0) == 1.0);
    CHECK(d(0, 1) == 0.01);
    CHECK(d(0, 2) == 1.0);  // kink at 0 defined as slope 1
}

TEST_CASE("mse_loss exact cases") {
    Matrix a(1, 2), b(1, 2);
    a << 1, 1;
    b << 0, 0;
    MseResult r = mse_loss(a, b);
    CHECK(r.loss == doctest::Approx(1.0));
    CHECK(r.grad(0, 0) == doctest::Approx(1.0));
    CHECK(r.grad(0, 1) == doctest::Approx(1.0));

    MseResult zero = mse_loss(a, a);
    CHECK(zero.loss == 0.0);
    CHECK(zero.grad.cwiseAbs().maxCoeff() == 0.0);

    Matrix c = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(mse_loss(a, c), DimensionError);
}

TEST_CASE("mse_loss nonnegative and zero iff equal") {
    Rng rng(3);
    for (int it = 0; it < 20; ++it) {
        Matrix p = random_matrix(rng, 4, 3);
        Matrix t = random_matrix(rng, 4, 3);
        MseResult r = mse_loss(p, t);
        CHECK(r.loss >= 0.0);
        if (r.loss == 0.0) CHECK((p - t).cwiseAbs().maxCoeff() == 0.0);
        CHECK(mse_loss(p, p).loss == 0.0);
    }
}

TEST_CASE("mse_loss gradient matches finite differences") {
    Rng rng(9);
    Matrix p = random_matrix(rng, 7, 3);
    Matrix t = random_matrix(rng, 7, 3);
    MseResult r = mse_loss(p, t);
    const double h = 1e-6;
    for (Index i = 0; i < p.size(); ++i) {
        const double saved = p.data()[i];
        p.data()[i] = saved + h;
        const double up = mse_loss(p, t).loss;
        p.data()[i] = saved - h;
        const double down = mse_loss(p, t).loss;
        p.data()[i] = saved;
        const double numeric = (up - down) / (2 * h);
        CHECK(std::abs(r.grad.data()[i] - numeric) < 1e-8);
    }
}

namespace {

struct ScalarParam {
    double value = 0.0;
    std::vector<ParamView> views() { return {ParamView{"w", Block::Output, &value, 1}}; }
};

}  // namespace

TEST_CASE("adam_step zero gradient leaves parameters unchanged") {
    ScalarParam p;
    p.value = 0.7;
    auto views = p.views();
    AdamState state = make_adam_state(views, 1e-3);
    GradList grads{Vector::Zero(1)};
    adam_step(views, grads, state);
    adam_step(views, grads, state);
    CHECK(p.value == 0.7);
    CHECK(state.first_moment[0][0] == 0.0);
    CHECK(state.second_moment[0][0] == 0.0);

    // Pre-existing moments decay geometrically under zero gradients.
    state.first_moment[0][0] = 1.0;
    state.second_moment[0][0] = 1.0;
    adam_step(views, grads, state);
    CHECK(state.first_moment[0][0] == doctest::Approx(0.9));
    CHECK(state.second_moment[0][0] == doctest::Approx(0.999));
}

TEST_CASE("adam_step single step matches the reference update equations") {
    // Independent evaluation of the written Adam update for one scalar step:
    // m = 0.1*g, v = 0.001*g^2, mhat = m/0.1, vhat = v/0.001,
    // delta = -lr * mhat / (sqrt(vhat) + eps).
    const double g = 2.0, lr = 1e-3, eps = 1e-8;
    const double m = 0.1 * g;
    const double v = 0.001 * g * g;
    const double expected_delta = -lr * (m / 0.1) / (std::sqrt(v / 0.001) + eps);

    ScalarParam p;
    p.value = 1.0;
    auto views = p.views();
    AdamState state = make_adam_state(views, lr);
    GradList grads{Vector::Constant(1, g)};
    adam_step(views, grads, state);
    CHECK(state.step_count == 1);
    CHECK(p.value == doctest::Approx(1.0 + expected_delta).epsilon(1e-12));
    CHECK(expected_delta == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("adam_step 100 constant-gradient steps on f(w)=w^2 shrink |w| after warm-up") {
    // Constant gradient g = f'(w0) = 1; the scripted reference trajectory
    // below evaluates the same update equations independently.
    ScalarParam p;
    p.value = 0.5;
    auto views = p.views();
    const double lr = 1e-3;
    AdamState state = make_adam_state(views, lr);

    double ref_w = 0.5, ref_m = 0.0, ref_v = 0.0;
    double prev_abs = std::abs(p.value);
    for (int t = 1; t <= 100; ++t) {
        GradList grads{Vector::Constant(1, 1.0)};
        adam_step(views, grads, state);

        ref_m = 0.9 * ref_m + 0.1 * 1.0;
        ref_v = 0.999 * ref_v + 0.001 * 1.0;
        const double mhat = ref_m / (1.0 - std::pow(0.9, t));
        const double vhat = ref_v / (1.0 - std::pow(0.999, t));
        ref_w -= lr * mhat / (std::sqrt(vhat) + 1e-8);

        CHECK(p.value == doctest::Approx(ref_w).epsilon(1e-12));
        if (t > 5) CHECK(std::abs(p.value) < prev_abs);
        prev_abs = std::abs(p.value);
    }
}

TEST_CASE("adam_step with lr=0 is a no-op for any gradient") {
    Rng rng(14);
    Vector values = random_vector(rng, 6);
    Vector original = values;
    std::vector<ParamView> views{ParamView{"block", Block::Hidden, values.data(), 6}};
    AdamState state = make_adam_state(views, 0.0);
    GradList grads{random_vector(rng, 6, 10.0)};
    adam_step(views, grads, state);
    CHECK((values - original).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam_step reports non-finite gradients with the block name") {
    ScalarParam p;
    auto views = p.views();
    views[0].name = "hidden_1.weight";
    AdamState state = make_adam_state(views, 1e-3);
    GradList grads{Vector::Constant(1, std::numeric_limits<double>::quiet_NaN())};
    CHECK_THROWS_WITH_AS(adam_step(views, grads, state), doctest::Contains("hidden_1.weight"),
                         TrainingError);
}

TEST_CASE("grad_check on a linear model with quadratic loss is exact") {
    Rng rng(21);
    Vector w = random_vector(rng, 3);
    Matrix x = random_matrix(rng, 5, 3);
    Vector y = random_vector(rng, 5);

    std::vector<ParamView> views{ParamView{"w", Block::Output, w.data(), 3}};
    auto loss = [&]() { return (x * w - y).squaredNorm(); };
    GradList analytic{2.0 * x.transpose() * (x * w - y)};
    CHECK(grad_check(loss, views, analytic, 1e-5) < 1e-9);
}

TEST_CASE("grad_check flags a corrupted gradient") {
    Rng rng(22);
    Vector w = random_vector(rng, 4);
    Matrix x = random_matrix(rng, 6, 4);
    Vector y = random_vector(rng, 6);
    std::vector<ParamView> views{ParamView{"w", Block::Output, w.data(), 4}};
    auto loss = [&]() { return (x * w - y).squaredNorm(); };
    GradList analytic{2.0 * x.transpose() * (x * w - y)};

    Index worst = 0;
    analytic[0].cwiseAbs().maxCoeff(&worst);
    analytic[0][worst] *= 2.0;  // inject the fault
    CHECK(grad_check(loss, views, analytic, 1e-5) > 0.1);
}

TEST_CASE("grad_check rejects out-of-range step sizes") {
    ScalarParam p;
    auto views = p.views();
    GradList analytic{Vector::Zero(1)};
    CHECK_THROWS_AS(grad_check([] { return 0.0; }, views, analytic, 1e-2), ArgumentError);
}

namespace {

Checkpoint make_test_checkpoint(std::uint64_t seed) {
    ModelConfig config;
    config.group_sizes = {3, 2};
    config.fused_per_group = 2;
    config.embedding_dim = 4;
    config.hidden_dims = {5, 3};
    config.output_dim = 2;

    Checkpoint ckpt;
    ckpt.net = build_model(config, seed);
    ckpt.norm.column_names = {"a", "b", "c", "d", "e"};
    Rng rng(seed + 1);
    ckpt.norm.col_min = random_vector(rng, 5);
    ckpt.norm.col_max = ckpt.norm.col_min.array() + 1.0;
    ckpt.norm.degenerate.assign(5, false);
    ckpt.groups.groups = {
        {"g1", GroupKind::Common, {"a", "b", "c"}},
        {"g2", GroupKind::Odometer, {"d", "e"}},
    };
    ckpt.meta.seed = seed;
    ckpt.meta.epochs = 12;
    ckpt.meta.final_loss = 0.125;
    return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact") {
    Checkpoint ckpt = make_test_checkpoint(33);
    std::stringstream buffer;
    save_checkpoint(ckpt, buffer);
    Checkpoint loaded = load_checkpoint(buffer);

    auto orig_layers = ckpt.net.layers();
    auto load_layers = loaded.net.layers();
    REQUIRE(orig_layers.size() == load_layers.size());
    for (std::size_t i = 0; i < orig_layers.size(); ++i) {
        CHECK(orig_layers[i]->weight == load_layers[i]->weight);
        CHECK(orig_layers[i]->bias == load_layers[i]->bias);
    }
    CHECK(loaded.norm == ckpt.norm);
    CHECK(loaded.groups == ckpt.groups);
    CHECK(loaded.meta == ckpt.meta);
    CHECK(loaded.net.config == ckpt.net.config);

    // Second save produces identical bytes.
    std::stringstream again;
    save_checkpoint(loaded, again);
    CHECK(buffer.str() == again.str());
}

TEST_CASE("checkpoint unknown format_version") {
    Checkpoint ckpt = make_test_checkpoint(34);
    std::stringstream buffer;
    save_checkpoint(ckpt, buffer);
    std::string text = buffer.str();
    const std::string field = "\"format_version\": 1";
    const auto pos = text.find(field);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, field.size(), "\"format_version\": 999");
    std::stringstream edited(text);
    CHECK_THROWS_AS(load_checkpoint(edited), VersionError);
}

TEST_CASE("checkpoint shape tampering raises integrity error naming the block") {
    Checkpoint ckpt = make_test_checkpoint(35);
    std::stringstream buffer;
    save_checkpoint(ckpt, buffer);
    const std::string text = buffer.str();
    // hidden_1 is 3x5 in the test config; claim 4 rows instead.
    const auto block_pos = text.find("\"hidden_1\"");
    REQUIRE(block_pos != std::string::npos);
    const std::string field = "\"rows\": 3";
    const auto pos = text.find(field, block_pos);
    REQUIRE(pos != std::string::npos);
    std::string tampered = text;
    tampered.replace(pos, field.size(), "\"rows\": 4");
    std::stringstream edited(tampered);
    CHECK_THROWS_WITH_AS(load_checkpoint(edited), doctest::Contains("hidden_1"), IntegrityError);
}

TEST_CASE("checkpoint truncated input raises parse error") {
    Checkpoint ckpt = make_test_checkpoint(36);
    std::stringstream buffer;
    save_checkpoint(ckpt, buffer);
    std::string text = buffer.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(truncated), ParseError);
}
