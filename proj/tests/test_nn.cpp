#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "oascen/nn.hpp"

using namespace oascen;
using namespace oascen::nn;

namespace {

std::string data(const std::string& name) { return std::string(OASCEN_DATA_DIR) + "/" + name; }

double relative(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

bool relu_away_from_kinks(const NetSpec& spec, const Tape& tape) {
    for (std::size_t k = 0; k < spec.layers.size(); ++k)
        if (spec.layers[k].act == Activation::ReLU && (tape.pre[k].array().abs() <= 1e-3).any()) return false;
    return true;
}

/// 100 random parameter coordinates of upstream . output against central
/// differences with h = 1e-5.
void check_parameter_gradient(const NetSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int checked = 0;
    for (int attempt = 0; attempt < 200 && checked < 100; ++attempt) {
        NetParams p = init_params(spec, rng());
        p.theta += random_vector(rng, p.theta.size(), 0.1);  // nonzero biases
        const Vector x = random_vector(rng, spec.data_dim());
        const int label = spec.n_labels ? static_cast<int>(rng() % static_cast<std::uint64_t>(spec.n_labels)) : 0;
        const auto tape = forward(spec, p, x, label);
        if (!relu_away_from_kinks(spec, tape)) continue;
        const Vector up = random_vector(rng, spec.output_dim());
        const auto g = backward(spec, p, tape, up);
        const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(p.theta.size()));
        const double h = 1e-5;
        NetParams a = p, b = p;
        a.theta[k] += h;
        b.theta[k] -= h;
        const double fd = (up.dot(forward(spec, a, x, label).output) - up.dot(forward(spec, b, x, label).output)) / (2 * h);
        EXPECT_LE(relative(g.params[k], fd), 1e-5) << "coordinate " << k << " analytic " << g.params[k] << " fd " << fd;
        ++checked;
    }
    EXPECT_EQ(checked, 100);
}

}  // namespace

TEST(Forward, IdentityDenseLayer) {
    NetSpec spec{{dense(3, 3, Activation::Identity)}, 0};
    NetParams p{Vector::Zero(12), 0};
    Eigen::Map<Eigen::MatrixXd>(p.theta.data(), 3, 3).setIdentity();
    Vector v(3);
    v << 1.5, -2.0, 7.0;
    EXPECT_EQ(forward(spec, p, v, 0).output, v);
}

TEST(Forward, SigmoidAtZero) {
    NetSpec spec{{dense(2, 1, Activation::Sigmoid)}, 0};
    NetParams p{Vector::Zero(3), 0};
    EXPECT_DOUBLE_EQ(forward(spec, p, Vector::Ones(2), 0).output[0], 0.5);
}

TEST(Forward, TwoLayerFixture) {
    std::ifstream in(data("nn_fixture.json"));
    auto j = nlohmann::json::parse(in);
    auto spec = net_spec_from_json(j["spec"]);
    auto p = net_params_from_json(j["params"], spec);
    Vector x(2);
    x << 1, 0;
    // relu([1.5, -1.5]) = [1.5, 0]; 2*1.5 - 3*0 + 0.25
    EXPECT_DOUBLE_EQ(forward(spec, p, x, 0).output[0], 3.25);
}

TEST(Forward, RejectsBadShapes) {
    auto spec = generator_spec(4, 4, 6, 8);
    auto p = init_params(spec, 1);
    EXPECT_THROW(forward(spec, p, Vector::Zero(5), 0), DimensionMismatch);
    EXPECT_THROW(forward(spec, p, Vector::Zero(4), 4), ValidationError);
    EXPECT_THROW(forward(spec, p, Vector::Zero(4), -1), ValidationError);
    NetParams short_p{Vector::Zero(3), 0};
    EXPECT_THROW(forward(spec, short_p, Vector::Zero(4), 0), DimensionMismatch);
    NetSpec broken{{dense(2, 3, Activation::ReLU), dense(4, 1, Activation::Identity)}, 0};
    EXPECT_THROW(broken.validate(), ConfigError);
    NetSpec even_kernel{{conv1d(2, 2, 4, 2, Activation::ReLU)}, 0};
    EXPECT_THROW(even_kernel.validate(), ConfigError);
}

TEST(Forward, OutputRanges) {
    std::mt19937_64 rng(2);
    auto g = generator_spec(5, 4, 6, 16, 2.5);
    auto d = discriminator_spec(6, 4, 16);
    require_generator_head(g);
    require_discriminator_head(d);
    auto pg = init_params(g, 3), pd = init_params(d, 4);
    pg.theta *= 20.0;  // saturate the head
    for (int k = 0; k < 50; ++k) {
        auto out = forward(g, pg, random_vector(rng, 5), k % 4).output;
        EXPECT_LE(out.cwiseAbs().maxCoeff(), 2.5);
        double prob = forward(d, pd, out, k % 4).output[0];
        EXPECT_GT(prob, 0.0);
        EXPECT_LT(prob, 1.0);
    }
}

TEST(Backward, ZeroUpstreamAndScalarNet) {
    auto spec = generator_spec(3, 2, 4, 8);
    auto p = init_params(spec, 7);
    auto tape = forward(spec, p, Vector::Ones(3), 1);
    EXPECT_TRUE(backward(spec, p, tape, Vector::Zero(4)).params.isZero(0.0));

    NetSpec lin{{dense(1, 1, Activation::Identity)}, 0};
    NetParams q{Vector::Zero(2), 0};
    q.theta[0] = 0.7;
    auto t = forward(lin, q, Vector::Constant(1, 3.0), 0);
    auto g = backward(lin, q, t, Vector::Ones(1));
    EXPECT_DOUBLE_EQ(g.params[0], 3.0);
    EXPECT_DOUBLE_EQ(g.params[1], 1.0);  // bias
    EXPECT_DOUBLE_EQ(g.input[0], 0.7);
    EXPECT_THROW(backward(lin, q, t, Vector::Ones(2)), DimensionMismatch);
}

TEST(Backward, LinearInUpstream) {
    std::mt19937_64 rng(8);
    auto spec = discriminator_spec(6, 3, 10);
    spec.layers.back() = dense(10, 4, Activation::Tanh, 1.5);
    auto p = init_params(spec, 9);
    auto tape = forward(spec, p, random_vector(rng, 6), 2);
    Vector u1 = random_vector(rng, 4), u2 = random_vector(rng, 4);
    auto lhs = backward(spec, p, tape, 2.0 * u1 - u2).params;
    auto rhs = (2.0 * backward(spec, p, tape, u1).params - backward(spec, p, tape, u2).params).eval();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

class GradientCheck : public ::testing::TestWithParam<Activation> {};

TEST_P(GradientCheck, DenseLayers) {
    const Activation a = GetParam();
    NetSpec spec{{dense(5 + 3, 7, a), dense(7, 6, a), dense(6, 4, a, a == Activation::Tanh ? 2.5 : 1.0)}, 3};
    check_parameter_gradient(spec, 100 + static_cast<int>(a));
}

TEST_P(GradientCheck, ConvLayers) {
    const Activation a = GetParam();
    // 2 data channels + 2 label channels over length 6, then a dense head
    NetSpec spec{{conv1d(4, 3, 6, 3, a), conv1d(3, 2, 6, 5, a), dense(12, 3, a)}, 2};
    check_parameter_gradient(spec, 200 + static_cast<int>(a));
}

INSTANTIATE_TEST_SUITE_P(AllActivations, GradientCheck,
                         ::testing::Values(Activation::ReLU, Activation::Sigmoid, Activation::Tanh,
                                           Activation::Identity),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Backward, InputGradientMatchesFiniteDifference) {
    std::mt19937_64 rng(31);
    for (const auto& spec : {generator_spec(4, 2, 5, 9), NetSpec{{conv1d(3, 2, 5, 3, Activation::Tanh),
                                                                  dense(10, 2, Activation::Sigmoid)},
                                                                 1}}) {
        auto p = init_params(spec, 32);
        for (int trial = 0; trial < 20; ++trial) {
            Vector x = random_vector(rng, spec.data_dim());
            auto tape = forward(spec, p, x, 0);
            if (!relu_away_from_kinks(spec, tape)) continue;
            Vector up = random_vector(rng, spec.output_dim());
            auto g = backward(spec, p, tape, up);
            ASSERT_EQ(g.input.size(), spec.data_dim());
            for (Eigen::Index k = 0; k < x.size(); ++k) {
                Vector a = x, b = x;
                a[k] += 1e-5;
                b[k] -= 1e-5;
                const double fd = (up.dot(forward(spec, p, a, 0).output) - up.dot(forward(spec, p, b, 0).output)) / 2e-5;
                EXPECT_LE(relative(g.input[k], fd), 1e-5);
            }
        }
    }
}

TEST(SgdStep, Arithmetic) {
    NetParams p{Vector::Ones(1), 0};
    EXPECT_DOUBLE_EQ(sgd_step(p, Vector::Constant(1, 2.0), 0.01).theta[0], 0.98);
    EXPECT_EQ(sgd_step(p, Vector::Zero(1), 0.5).theta, p.theta);
    Vector base(2), g1(2), g2(2);
    base << 0.3, -1.0;
    g1 << 1.0, 2.0;
    g2 << -0.5, 4.0;
    NetParams q{base, 0};
    EXPECT_EQ(sgd_step(q, g1 + g2, 0.1).theta, (base - 0.1 * (g1 + g2)).eval());
    EXPECT_THROW(sgd_step(q, Vector::Zero(3), 0.1), DimensionMismatch);
}

TEST(InitParams, DeterministicAndBounded) {
    auto spec = generator_spec(8, 4, 72);
    auto a = init_params(spec, 42), b = init_params(spec, 42), c = init_params(spec, 43);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_NE(a.theta, c.theta);
    const double bound = std::sqrt(6.0 / (12 + 128));
    EXPECT_LE(a.theta.head(12 * 128).cwiseAbs().maxCoeff(), bound);
    EXPECT_TRUE(a.theta.segment(12 * 128, 128).isZero(0.0));  // first-layer biases
    Vector z = Vector::LinSpaced(8, -1, 1);
    EXPECT_EQ(forward(spec, a, z, 3).output, forward(spec, b, z, 3).output);
}

TEST(Checkpoint, JsonRoundTripIsBitExact) {
    std::mt19937_64 rng(55);
    NetSpec spec{{conv1d(3, 2, 4, 3, Activation::ReLU), dense(8, 5, Activation::Tanh, 2.5)}, 1};
    auto p = init_params(spec, 56);
    p.theta += random_vector(rng, p.theta.size(), 1e-3);
    p.theta[0] = 1.0 / 3.0;
    p.theta[1] = 5e-324;  // subnormal
    const std::string text = nlohmann::json{{"spec", to_json(spec)}, {"params", to_json(p)}}.dump();
    auto j = nlohmann::json::parse(text);
    auto spec2 = net_spec_from_json(j["spec"]);
    auto p2 = net_params_from_json(j["params"], spec2);
    EXPECT_EQ(spec2, spec);
    EXPECT_EQ(p2.seed, p.seed);
    ASSERT_EQ(p2.theta.size(), p.theta.size());
    EXPECT_EQ(std::memcmp(p2.theta.data(), p.theta.data(), sizeof(double) * static_cast<std::size_t>(p.theta.size())), 0);
    EXPECT_THROW(net_params_from_json(j["params"], generator_spec(2, 1, 2, 4)), DimensionMismatch);
    EXPECT_THROW(net_spec_from_json(nlohmann::json{{"layers", 3}}), ParseError);
}

TEST(Noise, SeededDraws) {
    NoiseSpec n{6};
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(n.sample(a), n.sample(b));
    EXPECT_EQ(n.sample(a).size(), 6);
}
