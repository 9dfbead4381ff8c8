#pragma once

// Small feed-forward network engine for the generator and discriminator.
// Parameters live in one flat vector; each layer stores its weights first,
// then its biases. Dense weights are an (out x in) column-major block.
// Conv1D is a stride-1, zero-padded ("same") convolution over a
// channel-major layout: element (c, l) sits at c*length + l.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "oascen/errors.hpp"

namespace oascen::nn {

using Vector = Eigen::VectorXd;

enum class LayerKind { Dense, Conv1D };
enum class Activation { ReLU, Sigmoid, Tanh, Identity };

inline const char* to_string(LayerKind k) { return k == LayerKind::Dense ? "dense" : "conv1d"; }

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "?";
}

inline LayerKind parse_layer_kind(const std::string& s) {
    if (s == "dense") return LayerKind::Dense;
    if (s == "conv1d") return LayerKind::Conv1D;
    throw ParseError("unknown layer kind '" + s + "'");
}

inline Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw ParseError("unknown activation '" + s + "'");
}

struct LayerSpec {
    LayerKind kind{LayerKind::Dense};
    int in{0};
    int out{0};
    Activation act{Activation::Identity};
    double scale{1.0};  // multiplies the activation output (Tanh head range)
    // Conv1D only
    int in_channels{0};
    int out_channels{0};
    int kernel{0};

    [[nodiscard]] int length() const { return kind == LayerKind::Conv1D ? in / in_channels : 0; }

    [[nodiscard]] std::size_t num_weights() const {
        return kind == LayerKind::Dense ? static_cast<std::size_t>(in) * static_cast<std::size_t>(out)
                                        : static_cast<std::size_t>(out_channels * in_channels * kernel);
    }
    [[nodiscard]] std::size_t num_biases() const {
        return static_cast<std::size_t>(kind == LayerKind::Dense ? out : out_channels);
    }
    [[nodiscard]] std::size_t num_params() const { return num_weights() + num_biases(); }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline LayerSpec dense(int in, int out, Activation act, double scale = 1.0) {
    return {LayerKind::Dense, in, out, act, scale, 0, 0, 0};
}

inline LayerSpec conv1d(int in_channels, int out_channels, int length, int kernel, Activation act,
                        double scale = 1.0) {
    return {LayerKind::Conv1D, in_channels * length, out_channels * length, act, scale, in_channels, out_channels,
            kernel};
}

/// Layer stack plus the size of the one-hot label appended to the input.
/// With a Conv1D first layer the label enters as n_labels constant channels.
struct NetSpec {
    std::vector<LayerSpec> layers;
    int n_labels{0};

    [[nodiscard]] int output_dim() const { return layers.empty() ? 0 : layers.back().out; }

    /// Length of the data part of the input (label excluded).
    [[nodiscard]] int data_dim() const {
        if (layers.empty()) return 0;
        const auto& f = layers.front();
        if (f.kind == LayerKind::Conv1D) return (f.in_channels - n_labels) * f.length();
        return f.in - n_labels;
    }

    [[nodiscard]] std::size_t num_params() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.num_params();
        return n;
    }

    void validate() const {
        if (layers.empty()) throw ConfigError("network has no layers");
        if (n_labels < 0) throw ConfigError("negative label count");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            const std::string where = "layer " + std::to_string(k);
            if (l.in <= 0 || l.out <= 0) throw ConfigError(where + ": non-positive width");
            if (!(std::isfinite(l.scale) && l.scale > 0.0)) throw ConfigError(where + ": scale must be positive");
            if (l.kind == LayerKind::Conv1D) {
                if (l.in_channels <= 0 || l.out_channels <= 0 || l.kernel <= 0 || l.kernel % 2 == 0)
                    throw ConfigError(where + ": conv1d needs positive channels and an odd kernel");
                if (l.in % l.in_channels != 0 || l.out != l.out_channels * l.length())
                    throw ConfigError(where + ": conv1d widths do not match channels x length");
            }
            if (k > 0 && layers[k - 1].out != l.in)
                throw ConfigError(where + ": input width " + std::to_string(l.in) + " does not chain from " +
                                  std::to_string(layers[k - 1].out));
        }
        const auto& f = layers.front();
        if (f.kind == LayerKind::Conv1D ? f.in_channels <= n_labels : f.in <= n_labels)
            throw ConfigError("first layer too narrow for the label embedding");
    }

    friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct NetParams {
    Vector theta;
    std::uint64_t seed{0};
};

/// Generator: noise + label -> Tanh head scaled to +/- output_range.
inline NetSpec generator_spec(int n_z, int n_labels, int out_dim, int hidden = 128, double output_range = 2.5) {
    return {{dense(n_z + n_labels, hidden, Activation::ReLU), dense(hidden, hidden, Activation::ReLU),
             dense(hidden, out_dim, Activation::Tanh, output_range)},
            n_labels};
}

/// Discriminator: data + label -> probability.
inline NetSpec discriminator_spec(int in_dim, int n_labels, int hidden = 128) {
    return {{dense(in_dim + n_labels, hidden, Activation::ReLU), dense(hidden, hidden, Activation::ReLU),
             dense(hidden, 1, Activation::Sigmoid)},
            n_labels};
}

inline void require_generator_head(const NetSpec& s) {
    s.validate();
    if (s.layers.back().act != Activation::Tanh) throw ConfigError("generator head must be tanh");
}

inline void require_discriminator_head(const NetSpec& s) {
    s.validate();
    if (s.layers.back().act != Activation::Sigmoid || s.layers.back().scale != 1.0 || s.output_dim() != 1)
        throw ConfigError("discriminator head must be a single unscaled sigmoid");
}

/// Uniform +/- sqrt(6 / (fan_in + fan_out)) weights, zero biases.
inline NetParams init_params(const NetSpec& spec, std::uint64_t seed) {
    spec.validate();
    NetParams p{Vector::Zero(static_cast<Eigen::Index>(spec.num_params())), seed};
    std::mt19937_64 rng(seed);
    Eigen::Index off = 0;
    for (const auto& l : spec.layers) {
        const double fan_in = l.kind == LayerKind::Dense ? l.in : l.in_channels * l.kernel;
        const double fan_out = l.kind == LayerKind::Dense ? l.out : l.out_channels * l.kernel;
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-a, a);
        for (std::size_t k = 0; k < l.num_weights(); ++k) p.theta[off++] = u(rng);
        off += static_cast<Eigen::Index>(l.num_biases());
    }
    return p;
}

struct Tape {
    std::vector<Vector> inputs;  // input to each layer
    std::vector<Vector> pre;     // pre-activation of each layer
    Vector output;
};

namespace detail {

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid: return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        case Activation::Tanh: return std::tanh(z);
        case Activation::Identity: return z;
    }
    return z;
}

/// Derivative expressed through z and y = activate(z).
inline double activate_grad(Activation a, double z, double y) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

inline void conv_forward(const LayerSpec& l, const double* w, const double* b, const Vector& x, Vector& z) {
    const int L = l.length(), K = l.kernel, P = (K - 1) / 2;
    z.resize(l.out);
    for (int o = 0; o < l.out_channels; ++o)
        for (int t = 0; t < L; ++t) {
            double acc = b[o];
            for (int c = 0; c < l.in_channels; ++c) {
                const double* wk = w + (o * l.in_channels + c) * K;
                const double* xc = x.data() + c * L;
                for (int k = 0; k < K; ++k) {
                    const int s = t + k - P;
                    if (s >= 0 && s < L) acc += wk[k] * xc[s];
                }
            }
            z[o * L + t] = acc;
        }
}

inline void conv_backward(const LayerSpec& l, const double* w, const Vector& x, const Vector& delta, double* gw,
                          double* gb, Vector& gx) {
    const int L = l.length(), K = l.kernel, P = (K - 1) / 2;
    gx = Vector::Zero(l.in);
    for (int o = 0; o < l.out_channels; ++o)
        for (int t = 0; t < L; ++t) {
            const double d = delta[o * L + t];
            if (d == 0.0) continue;
            gb[o] += d;
            for (int c = 0; c < l.in_channels; ++c) {
                const int base = (o * l.in_channels + c) * K;
                for (int k = 0; k < K; ++k) {
                    const int s = t + k - P;
                    if (s < 0 || s >= L) continue;
                    gw[base + k] += d * x[c * L + s];
                    gx[c * L + s] += w[base + k] * d;
                }
            }
        }
}

}  // namespace detail

/// Network input: data followed by the one-hot label (or label channels).
inline Vector assemble_input(const NetSpec& spec, const Vector& data, int label) {
    if (data.size() != spec.data_dim())
        throw DimensionMismatch("network input has " + std::to_string(data.size()) + " entries, expected " +
                                std::to_string(spec.data_dim()));
    if (label < 0 || (spec.n_labels > 0 && label >= spec.n_labels) || (spec.n_labels == 0 && label != 0))
        throw ValidationError("label " + std::to_string(label) + " outside vocabulary of " +
                              std::to_string(spec.n_labels));
    Vector x = Vector::Zero(spec.layers.front().in);
    x.head(data.size()) = data;
    if (spec.n_labels == 0) return x;
    if (spec.layers.front().kind == LayerKind::Conv1D) {
        const int L = spec.layers.front().length();
        x.segment(data.size() + static_cast<Eigen::Index>(label) * L, L).setOnes();
    } else {
        x[data.size() + label] = 1.0;
    }
    return x;
}

inline Tape forward(const NetSpec& spec, const NetParams& params, const Vector& data, int label) {
    if (params.theta.size() != static_cast<Eigen::Index>(spec.num_params()))
        throw DimensionMismatch("parameter vector length does not match network");
    Tape tape;
    tape.inputs.reserve(spec.layers.size());
    tape.pre.reserve(spec.layers.size());
    Vector x = assemble_input(spec, data, label);
    const double* p = params.theta.data();
    for (const auto& l : spec.layers) {
        const double* w = p;
        const double* b = p + l.num_weights();
        Vector z;
        if (l.kind == LayerKind::Dense) {
            Eigen::Map<const Eigen::MatrixXd> W(w, l.out, l.in);
            z = W * x + Eigen::Map<const Vector>(b, l.out);
        } else {
            detail::conv_forward(l, w, b, x, z);
        }
        Vector y(z.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) y[k] = l.scale * detail::activate(l.act, z[k]);
        tape.inputs.push_back(std::move(x));
        tape.pre.push_back(std::move(z));
        x = std::move(y);
        p += l.num_params();
    }
    tape.output = std::move(x);
    return tape;
}

struct Gradients {
    Vector params;  // d(upstream . output)/d(theta)
    Vector input;   // d(upstream . output)/d(data), label part dropped
};

inline Gradients backward(const NetSpec& spec, const NetParams& params, const Tape& tape, const Vector& upstream) {
    if (upstream.size() != tape.output.size())
        throw DimensionMismatch("upstream gradient length does not match network output");
    if (tape.pre.size() != spec.layers.size()) throw DimensionMismatch("tape does not belong to this network");
    Gradients g{Vector::Zero(params.theta.size()), {}};
    Vector delta_out = upstream;  // dL/dy of the current layer
    std::size_t end = spec.num_params();
    for (std::size_t k = spec.layers.size(); k-- > 0;) {
        const auto& l = spec.layers[k];
        const std::size_t start = end - l.num_params();
        const Vector& z = tape.pre[k];
        const Vector& x = tape.inputs[k];
        Vector delta(z.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            const double y = detail::activate(l.act, z[j]);
            delta[j] = delta_out[j] * l.scale * detail::activate_grad(l.act, z[j], y);
        }
        const double* w = params.theta.data() + start;
        double* gw = g.params.data() + start;
        double* gb = gw + l.num_weights();
        Vector gx;
        if (l.kind == LayerKind::Dense) {
            Eigen::Map<const Eigen::MatrixXd> W(w, l.out, l.in);
            Eigen::Map<Eigen::MatrixXd>(gw, l.out, l.in).noalias() += delta * x.transpose();
            Eigen::Map<Vector>(gb, l.out) += delta;
            gx.noalias() = W.transpose() * delta;
        } else {
            detail::conv_backward(l, w, x, delta, gw, gb, gx);
        }
        delta_out = std::move(gx);
        end = start;
    }
    g.input = delta_out.head(spec.data_dim());
    return g;
}

inline NetParams sgd_step(const NetParams& params, const Vector& grad, double alpha) {
    if (grad.size() != params.theta.size()) throw DimensionMismatch("gradient length does not match parameters");
    return {params.theta - alpha * grad, params.seed};
}

inline void sgd_step_inplace(NetParams& params, const Vector& grad, double alpha) {
    if (grad.size() != params.theta.size()) throw DimensionMismatch("gradient length does not match parameters");
    params.theta -= alpha * grad;
}

/// Standard Gaussian noise of dimension n_z.
struct NoiseSpec {
    int n_z{16};

    [[nodiscard]] Vector sample(std::mt19937_64& rng) const {
        std::normal_distribution<double> n(0.0, 1.0);
        Vector z(n_z);
        for (auto& v : z) v = n(rng);
        return z;
    }
};

// ---------------------------------------------------------------------------
// JSON serialization; doubles are written with enough digits to round-trip.

inline nlohmann::json to_json(const LayerSpec& l) {
    nlohmann::json j{{"kind", to_string(l.kind)}, {"in", l.in},       {"out", l.out},
                     {"activation", to_string(l.act)}, {"scale", l.scale}};
    if (l.kind == LayerKind::Conv1D) {
        j["in_channels"] = l.in_channels;
        j["out_channels"] = l.out_channels;
        j["kernel"] = l.kernel;
    }
    return j;
}

inline nlohmann::json to_json(const NetSpec& s) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : s.layers) layers.push_back(to_json(l));
    return {{"n_labels", s.n_labels}, {"layers", layers}};
}

inline nlohmann::json to_json(const NetParams& p) {
    return {{"seed", p.seed}, {"theta", std::vector<double>(p.theta.data(), p.theta.data() + p.theta.size())}};
}

inline NetSpec net_spec_from_json(const nlohmann::json& j) {
    try {
        NetSpec s;
        s.n_labels = j.at("n_labels").get<int>();
        for (const auto& lj : j.at("layers")) {
            LayerSpec l;
            l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
            l.in = lj.at("in").get<int>();
            l.out = lj.at("out").get<int>();
            l.act = parse_activation(lj.at("activation").get<std::string>());
            l.scale = lj.value("scale", 1.0);
            if (l.kind == LayerKind::Conv1D) {
                l.in_channels = lj.at("in_channels").get<int>();
                l.out_channels = lj.at("out_channels").get<int>();
                l.kernel = lj.at("kernel").get<int>();
            }
            s.layers.push_back(l);
        }
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("network spec: ") + e.what());
    }
}

inline NetParams net_params_from_json(const nlohmann::json& j, const NetSpec& spec) {
    try {
        auto theta = j.at("theta").get<std::vector<double>>();
        if (theta.size() != spec.num_params())
            throw DimensionMismatch("checkpoint has " + std::to_string(theta.size()) + " parameters, network needs " +
                                    std::to_string(spec.num_params()));
        NetParams p{Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size())),
                    j.at("seed").get<std::uint64_t>()};
        if (!p.theta.allFinite()) throw ValidationError("checkpoint contains non-finite parameters");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("network parameters: ") + e.what());
    }
}

}  // namespace oascen::nn
