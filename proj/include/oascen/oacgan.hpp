#pragma once

// Operation-adversarial conditional GAN trainer. The generator maps noise and
// a seasonal label to a normalized error field (nodes x hours, flattened
// node-major); its loss mixes the usual adversarial term with the negated
// scaled DC-OPF cost of the load the error implies. The cost gradient
// reaches the generator through the nodal prices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "oascen/csv.hpp"
#include "oascen/dataprep.hpp"
#include "oascen/errors.hpp"
#include "oascen/nn.hpp"
#include "oascen/opf.hpp"
#include "oascen/parallel.hpp"

namespace oascen {

inline constexpr double kProbClip = 1e-7;

enum class InfeasiblePolicy { Skip, Penalty };
enum class UpdateOrder { Algorithm1, Fused };

inline InfeasiblePolicy parse_infeasible_policy(const std::string& s) {
    if (s == "skip") return InfeasiblePolicy::Skip;
    if (s == "penalty") return InfeasiblePolicy::Penalty;
    throw ConfigError("unknown infeasible policy '" + s + "' (expected skip or penalty)");
}
inline const char* to_string(InfeasiblePolicy p) { return p == InfeasiblePolicy::Skip ? "skip" : "penalty"; }

inline UpdateOrder parse_update_order(const std::string& s) {
    if (s == "algorithm1") return UpdateOrder::Algorithm1;
    if (s == "fused") return UpdateOrder::Fused;
    throw ConfigError("unknown update order '" + s + "' (expected algorithm1 or fused)");
}
inline const char* to_string(UpdateOrder o) { return o == UpdateOrder::Algorithm1 ? "algorithm1" : "fused"; }

struct TrainConfig {
    double k{0.8};
    double alpha{1e-3};
    /// Step size of the cost-driven generator update; NaN means `alpha`.
    double alpha_g2{std::numeric_limits<double>::quiet_NaN()};
    std::size_t batch_size{100};
    int epoch_max{30};
    nn::NoiseSpec noise{16};
    ScaleConstants scale{};
    std::uint64_t seed{0};
    InfeasiblePolicy infeasible_policy{InfeasiblePolicy::Skip};
    double penalty_weight{1.0};
    UpdateOrder order{UpdateOrder::Algorithm1};
    SignMode sign{SignMode::RoundTrip};
    /// false trains a plain conditional GAN (no OPF solves at all).
    bool opf_enabled{true};
    int hidden{128};
    double output_range{2.5};
    int n_labels{kQuarterLabels};
    OpfOptions opf{};

    [[nodiscard]] double step_g2() const { return std::isnan(alpha_g2) ? alpha : alpha_g2; }

    void validate() const {
        if (!(k >= 0.0 && k <= 1.0)) throw ConfigError("k must lie in [0, 1]");
        if (!(alpha > 0.0 && std::isfinite(alpha))) throw ConfigError("alpha must be positive");
        if (!(step_g2() > 0.0 && std::isfinite(step_g2()))) throw ConfigError("alpha_g2 must be positive");
        if (batch_size < 1) throw ConfigError("batch size must be at least 1");
        if (epoch_max < 1) throw ConfigError("epoch_max must be at least 1");
        if (noise.n_z < 1) throw ConfigError("noise dimension must be positive");
        if (!(scale.delta_scale > 0.0)) throw ConfigError("delta_scale must be positive");
        if (!(penalty_weight >= 0.0)) throw ConfigError("penalty weight must be nonnegative");
        if (hidden < 1) throw ConfigError("hidden width must be positive");
        if (!(output_range > 0.0)) throw ConfigError("output_range must be positive");
        if (n_labels < 1) throw ConfigError("label vocabulary must be nonempty");
    }
};

struct EpochStats {
    int epoch{0};
    double loss_d{0.0};
    double loss_g{0.0};
    double loss_g1{0.0};
    double loss_g2{0.0};
    std::size_t batches{0};
    std::size_t n_infeasible{0};
    std::size_t n_degenerate{0};
};

struct TrainTrace {
    std::vector<EpochStats> epochs;
};

inline csv::Writer trace_csv(const TrainTrace& t) {
    csv::Writer w({"epoch", "loss_d", "loss_g", "loss_g1", "loss_g2", "n_infeasible", "n_degenerate"});
    for (const auto& e : t.epochs) w.add(e.epoch, e.loss_d, e.loss_g, e.loss_g1, e.loss_g2, e.n_infeasible, e.n_degenerate);
    return w;
}

/// Trained (or freshly initialized) generator/discriminator pair.
struct GanModel {
    nn::NetSpec g_spec, d_spec;
    nn::NetParams theta_g, theta_d;
    int n_z{0};
    int horizon{0};
    double output_range{2.5};
    int n_labels{kQuarterLabels};
    std::vector<std::string> nodes;

    [[nodiscard]] Eigen::Index num_nodes() const { return static_cast<Eigen::Index>(nodes.size()); }
    [[nodiscard]] int data_dim() const { return static_cast<int>(nodes.size()) * horizon; }
};

/// Independent seed for a named random stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace stream {
inline constexpr std::uint64_t kInitG = 1, kInitD = 2, kNoise = 3, kShuffle = 4;
}

inline GanModel make_model(const GridModel& grid, int horizon, const TrainConfig& cfg) {
    cfg.validate();
    if (horizon < 1) throw ConfigError("horizon must be positive");
    GanModel m;
    m.n_z = cfg.noise.n_z;
    m.horizon = horizon;
    m.output_range = cfg.output_range;
    m.n_labels = cfg.n_labels;
    m.nodes = grid.nodes();
    m.g_spec = nn::generator_spec(m.n_z, m.n_labels, m.data_dim(), cfg.hidden, cfg.output_range);
    m.d_spec = nn::discriminator_spec(m.data_dim(), m.n_labels, cfg.hidden);
    m.theta_g = nn::init_params(m.g_spec, derive_seed(cfg.seed, stream::kInitG));
    m.theta_d = nn::init_params(m.d_spec, derive_seed(cfg.seed, stream::kInitD));
    return m;
}

/// Node-major flattening: entry (i, t) at i*hours + t.
inline nn::Vector flatten(const Eigen::MatrixXd& field) {
    nn::Vector v(field.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), field.rows(),
                                                                                       field.cols()) = field;
    return v;
}

inline Eigen::MatrixXd unflatten(const nn::Vector& v, Eigen::Index nodes, Eigen::Index hours) {
    if (v.size() != nodes * hours) throw DimensionMismatch("unflatten: length does not match nodes x hours");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), nodes,
                                                                                                   hours);
}

inline double clip_prob(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

/// Mean of log(1 - D(x)) + log(D(G(z))).
inline double loss_d(const nn::Vector& d_real, const nn::Vector& d_fake) {
    if (d_real.size() != d_fake.size() || d_real.size() == 0) throw DimensionMismatch("loss_d: batch sizes differ");
    double s = 0.0;
    for (Eigen::Index k = 0; k < d_real.size(); ++k) s += std::log(1.0 - clip_prob(d_real[k])) + std::log(clip_prob(d_fake[k]));
    return s / static_cast<double>(d_real.size());
}

/// Mean of log(1 - D(G(z))).
inline double loss_g1(const nn::Vector& d_fake) {
    if (d_fake.size() == 0) throw DimensionMismatch("loss_g1: empty batch");
    double s = 0.0;
    for (double p : d_fake) s += std::log(1.0 - clip_prob(p));
    return s / static_cast<double>(d_fake.size());
}

struct G2Loss {
    double loss{0.0};  // -C*
    OpfSolution sol;
};

/// Denormalizes the generated error against the sample's DA profile, solves
/// the DC-OPF on the implied load and returns minus the scaled cost.
inline G2Loss loss_g2(const ErrorField& eps_gen, const DaySample& sample, const DayStats& stats,
                      const DcopfModel& opf, const ScaleConstants& sc, SignMode sign = SignMode::RoundTrip,
                      const OpfOptions& opt = {}) {
    auto load = denormalize_error(eps_gen, sample, stats, sign);
    G2Loss out;
    out.sol = opf.solve(load, opt);
    out.loss = -scaled_cost(out.sol, sc);
    return out;
}

inline G2Loss loss_g2(const ErrorField& eps_gen, const DaySample& sample, const GridModel& grid,
                      const ScaleConstants& sc, SignMode sign = SignMode::RoundTrip, const OpfOptions& opt = {}) {
    return loss_g2(eps_gen, sample, day_stats(sample), DcopfModel(grid), sc, sign, opt);
}

struct UpstreamGradient {
    Eigen::MatrixXd g;  // d loss_G2 / d eps_gen, nodes x hours
    bool degenerate{false};
};

/// d(-C*)/d(eps) = -(lambda / delta_scale) * d(load)/d(eps). Under RoundTrip
/// d(load)/d(eps) = -range, so this is +lambda*range/delta_scale.
inline UpstreamGradient g2_upstream_gradient(const OpfSolution& sol, const DayStats& st, const ScaleConstants& sc,
                                             SignMode sign = SignMode::RoundTrip) {
    if (!(sc.delta_scale > 0.0)) throw ConfigError("delta_scale must be positive");
    if (sol.lmp.rows() != st.da_min.size()) throw DimensionMismatch("g2_upstream_gradient: stats/solution node count differ");
    UpstreamGradient out{Eigen::MatrixXd(sol.lmp.rows(), sol.lmp.cols()), sol.any_degenerate()};
    const Eigen::VectorXd range = st.range();
    for (Eigen::Index i = 0; i < sol.lmp.rows(); ++i)
        out.g.row(i) = -sol.lmp.row(i) * load_per_error(sign, range[i]) / sc.delta_scale;
    return out;
}

struct G2Gradient {
    bool feasible{true};
    bool degenerate{false};
    double loss{0.0};
    nn::Vector grad;  // d loss_G2 / d theta_g (or the penalty gradient)
};

namespace detail {

inline G2Gradient g2_gradient_from_tape(const GanModel& m, const nn::Tape& tape, const DaySample& s,
                                        const DayStats& st, const DcopfModel& opf, const TrainConfig& cfg) {
    ErrorField eps{unflatten(tape.output, m.num_nodes(), m.horizon), ErrorKind::Normalized};
    G2Gradient out;
    try {
        auto l2 = loss_g2(eps, s, st, opf, cfg.scale, cfg.sign, cfg.opf);
        auto up = g2_upstream_gradient(l2.sol, st, cfg.scale, cfg.sign);
        out.loss = l2.loss;
        out.degenerate = up.degenerate;
        out.grad = nn::backward(m.g_spec, m.theta_g, tape, flatten(up.g)).params;
    } catch (const InfeasibleDispatch&) {
        out.feasible = false;
        if (cfg.infeasible_policy == InfeasiblePolicy::Penalty) {
            // pull the error back toward zero, i.e. toward the DA profile
            out.loss = 0.5 * cfg.penalty_weight * tape.output.squaredNorm();
            out.grad = nn::backward(m.g_spec, m.theta_g, tape, cfg.penalty_weight * tape.output).params;
        } else {
            out.grad = nn::Vector::Zero(m.theta_g.theta.size());
        }
    }
    return out;
}

}  // namespace detail

/// Full-pipeline generator gradient of loss_G2 for one sample and noise draw.
inline G2Gradient g2_parameter_gradient(const GanModel& m, const nn::Vector& z, const DaySample& s,
                                        const GridModel& grid, const TrainConfig& cfg) {
    const auto tape = nn::forward(m.g_spec, m.theta_g, z, s.label);
    return detail::g2_gradient_from_tape(m, tape, s, day_stats(s), DcopfModel(grid), cfg);
}

/// loss_G2 for one sample and noise draw under the given generator parameters.
inline double g2_loss_at(const GanModel& m, const nn::NetParams& theta_g, const nn::Vector& z, const DaySample& s,
                         const GridModel& grid, const TrainConfig& cfg) {
    ErrorField eps{unflatten(nn::forward(m.g_spec, theta_g, z, s.label).output, m.num_nodes(), m.horizon),
                   ErrorKind::Normalized};
    return loss_g2(eps, s, grid, cfg.scale, cfg.sign, cfg.opf).loss;
}

struct TrainResult {
    GanModel model;
    TrainTrace trace;
};

/// Called after every completed epoch with the current parameters.
using EpochHook = std::function<void(const EpochStats&, const GanModel&)>;

inline void check_dataset(const std::vector<DaySample>& data, const GridModel& grid, const TrainConfig& cfg) {
    if (data.empty()) throw InsufficientData("training set is empty");
    const auto N = static_cast<Eigen::Index>(grid.num_nodes());
    const auto H = data.front().hours();
    for (const auto& s : data) {
        if (s.nodes() != N || s.hours() != H)
            throw DimensionMismatch("day " + s.date + " does not match grid nodes / horizon");
        if (s.label < 0 || s.label >= cfg.n_labels)
            throw ValidationError("day " + s.date + ": label " + std::to_string(s.label) + " outside vocabulary");
    }
}

/// Trains from `init` (see make_model) following the per-batch order:
/// generate, discriminator step, adversarial generator step, cost-driven
/// generator step. Both generator steps use gradients taken at the
/// generator parameters from the start of the batch.
inline TrainResult train(const std::vector<DaySample>& data, const GridModel& grid, const TrainConfig& cfg,
                         GanModel init, const EpochHook& hook = {}) {
    cfg.validate();
    check_dataset(data, grid, cfg);
    if (init.horizon != data.front().hours() || init.num_nodes() != static_cast<Eigen::Index>(grid.num_nodes()))
        throw DimensionMismatch("model shape does not match the training data");

    struct Prepared {
        DayStats stats;
        nn::Vector real;
    };
    std::vector<Prepared> prep(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        prep[s].stats = day_stats(data[s]);
        prep[s].real = flatten(forecast_error(normalize_day(data[s], prep[s].stats)).values);
    }

    TrainResult res{std::move(init), {}};
    GanModel& m = res.model;
    const DcopfModel opf(grid);
    const bool use_g2 = cfg.opf_enabled && (1.0 - cfg.k) != 0.0;
    std::mt19937_64 noise_rng(derive_seed(cfg.seed, stream::kNoise));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epoch_max; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(derive_seed(cfg.seed, stream::kShuffle), static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        EpochStats es;
        es.epoch = epoch;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t nb = std::min(cfg.batch_size, order.size() - begin);
            const double inv = 1.0 / static_cast<double>(nb);
            std::vector<nn::Tape> g_tapes(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& s = data[order[begin + b]];
                g_tapes[b] = nn::forward(m.g_spec, m.theta_g, cfg.noise.sample(noise_rng), s.label);
            }

            // discriminator step on mean[log(1 - D(x)) + log(D(G(z)))]
            nn::Vector grad_d = nn::Vector::Zero(m.theta_d.theta.size());
            nn::Vector pr(nb), pf(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto idx = order[begin + b];
                const auto tr = nn::forward(m.d_spec, m.theta_d, prep[idx].real, data[idx].label);
                const auto tf = nn::forward(m.d_spec, m.theta_d, g_tapes[b].output, data[idx].label);
                pr[b] = tr.output[0];
                pf[b] = tf.output[0];
                // the clipped log is flat outside [clip, 1 - clip]
                const double ur = clip_prob(pr[b]) == pr[b] ? -inv / (1.0 - pr[b]) : 0.0;
                const double uf = clip_prob(pf[b]) == pf[b] ? inv / pf[b] : 0.0;
                grad_d += nn::backward(m.d_spec, m.theta_d, tr, nn::Vector::Constant(1, ur)).params;
                grad_d += nn::backward(m.d_spec, m.theta_d, tf, nn::Vector::Constant(1, uf)).params;
            }
            const double ld = loss_d(pr, pf);
            nn::sgd_step_inplace(m.theta_d, grad_d, cfg.alpha);

            // adversarial generator term against the updated discriminator
            nn::Vector grad_g1 = nn::Vector::Zero(m.theta_g.theta.size());
            nn::Vector pf2(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto idx = order[begin + b];
                const auto tf = nn::forward(m.d_spec, m.theta_d, g_tapes[b].output, data[idx].label);
                pf2[b] = tf.output[0];
                const double u = clip_prob(pf2[b]) == pf2[b] ? -inv / (1.0 - pf2[b]) : 0.0;
                const auto dg = nn::backward(m.d_spec, m.theta_d, tf, nn::Vector::Constant(1, u));
                grad_g1 += nn::backward(m.g_spec, m.theta_g, g_tapes[b], dg.input).params;
            }
            const double lg1 = loss_g1(pf2);

            // operating-cost term, one DC-OPF per sample
            double lg2 = 0.0;
            nn::Vector grad_g2;
            if (cfg.opf_enabled) {
                std::vector<G2Gradient> per(nb);
                const bool need_grad = use_g2;
                parallel_for(nb, [&](std::size_t b) {
                    const auto idx = order[begin + b];
                    if (need_grad) {
                        per[b] = detail::g2_gradient_from_tape(m, g_tapes[b], data[idx], prep[idx].stats, opf, cfg);
                    } else {
                        // trace only: same loss, no backward pass
                        ErrorField eps{unflatten(g_tapes[b].output, m.num_nodes(), m.horizon), ErrorKind::Normalized};
                        try {
                            auto l2 = loss_g2(eps, data[idx], prep[idx].stats, opf, cfg.scale, cfg.sign, cfg.opf);
                            per[b].loss = l2.loss;
                            per[b].degenerate = l2.sol.any_degenerate();
                        } catch (const InfeasibleDispatch&) {
                            per[b].feasible = false;
                            if (cfg.infeasible_policy == InfeasiblePolicy::Penalty)
                                per[b].loss = 0.5 * cfg.penalty_weight * g_tapes[b].output.squaredNorm();
                        }
                    }
                });
                grad_g2 = nn::Vector::Zero(m.theta_g.theta.size());
                for (std::size_t b = 0; b < nb; ++b) {
                    lg2 += per[b].loss;
                    if (!per[b].feasible) ++es.n_infeasible;
                    if (per[b].degenerate) ++es.n_degenerate;
                    if (need_grad) grad_g2 += per[b].grad;
                }
                lg2 *= inv;
                grad_g2 *= inv;
            }

            if (cfg.order == UpdateOrder::Algorithm1) {
                nn::sgd_step_inplace(m.theta_g, cfg.k * grad_g1, cfg.alpha);
                if (use_g2) nn::sgd_step_inplace(m.theta_g, (1.0 - cfg.k) * grad_g2, cfg.step_g2());
            } else {
                nn::Vector fused = cfg.alpha * cfg.k * grad_g1;
                if (use_g2) fused += cfg.step_g2() * (1.0 - cfg.k) * grad_g2;
                nn::sgd_step_inplace(m.theta_g, fused, 1.0);
            }

            es.loss_d += ld;
            es.loss_g1 += lg1;
            es.loss_g2 += lg2;
            es.loss_g += cfg.k * lg1 + (1.0 - cfg.k) * lg2;
            ++es.batches;
        }
        const double nbat = static_cast<double>(es.batches);
        es.loss_d /= nbat;
        es.loss_g1 /= nbat;
        es.loss_g2 /= nbat;
        es.loss_g /= nbat;
        res.trace.epochs.push_back(es);
        if (hook) hook(es, m);
    }
    return res;
}

inline TrainResult train(const std::vector<DaySample>& data, const GridModel& grid, const TrainConfig& cfg,
                         const EpochHook& hook = {}) {
    cfg.validate();
    check_dataset(data, grid, cfg);
    return train(data, grid, cfg, make_model(grid, static_cast<int>(data.front().hours()), cfg), hook);
}

/// n independent draws pushed through the generator for one label.
inline std::vector<ErrorField> generate(const GanModel& m, Label label, std::size_t n, std::uint64_t seed) {
    if (label < 0 || label >= m.n_labels)
        throw ValidationError("label " + std::to_string(label) + " outside vocabulary of " + std::to_string(m.n_labels));
    std::mt19937_64 rng(seed);
    const nn::NoiseSpec noise{m.n_z};
    std::vector<ErrorField> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        out.push_back({unflatten(nn::forward(m.g_spec, m.theta_g, noise.sample(rng), label).output, m.num_nodes(),
                                 m.horizon),
                       ErrorKind::Normalized});
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_json(const GanModel& m) {
    if (!m.theta_g.theta.allFinite() || !m.theta_d.theta.allFinite())
        throw ValidationError("refusing to checkpoint non-finite parameters");
    return {{"format", "oascen-gan"},
            {"version", kCheckpointVersion},
            {"n_z", m.n_z},
            {"horizon", m.horizon},
            {"output_range", m.output_range},
            {"n_labels", m.n_labels},
            {"nodes", m.nodes},
            {"generator", {{"spec", nn::to_json(m.g_spec)}, {"params", nn::to_json(m.theta_g)}}},
            {"discriminator", {{"spec", nn::to_json(m.d_spec)}, {"params", nn::to_json(m.theta_d)}}}};
}

inline GanModel model_from_checkpoint(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "oascen-gan") throw ParseError("not an oascen checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw ParseError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
        GanModel m;
        m.n_z = j.at("n_z").get<int>();
        m.horizon = j.at("horizon").get<int>();
        m.output_range = j.at("output_range").get<double>();
        m.n_labels = j.at("n_labels").get<int>();
        m.nodes = j.at("nodes").get<std::vector<std::string>>();
        m.g_spec = nn::net_spec_from_json(j.at("generator").at("spec"));
        m.d_spec = nn::net_spec_from_json(j.at("discriminator").at("spec"));
        m.theta_g = nn::net_params_from_json(j.at("generator").at("params"), m.g_spec);
        m.theta_d = nn::net_params_from_json(j.at("discriminator").at("params"), m.d_spec);
        nn::require_generator_head(m.g_spec);
        nn::require_discriminator_head(m.d_spec);
        if (m.g_spec.data_dim() != m.n_z || m.g_spec.output_dim() != m.data_dim() ||
            m.d_spec.data_dim() != m.data_dim() || m.g_spec.n_labels != m.n_labels || m.d_spec.n_labels != m.n_labels)
            throw ValidationError("checkpoint network shapes are inconsistent");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const GanModel& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << checkpoint_json(m).dump(1) << '\n';
    if (!f) throw IoError("write failed for '" + path + "'");
}

inline GanModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint '" + path + "': " + e.what());
    }
    return model_from_checkpoint(j);
}

/// Checks that a model can be applied to `grid` (same nodes, same order).
inline void require_compatible(const GanModel& m, const GridModel& grid) {
    if (m.nodes != grid.nodes()) throw ValidationError("checkpoint nodes do not match the grid");
}

}  // namespace oascen
