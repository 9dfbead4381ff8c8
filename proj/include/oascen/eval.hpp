#pragma once

// Scoring of forecast-error sources: DA cost under the reserve OPF and the
// share of test days whose reserves cover the realized RT redispatch.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "oascen/csv.hpp"
#include "oascen/dataprep.hpp"
#include "oascen/oacgan.hpp"
#include "oascen/opf.hpp"
#include "oascen/parallel.hpp"

namespace oascen {

/// Error proportional to the DA load, eps = r * DA.
inline ErrorField robust_error(const DaySample& s, double r) {
    if (!(r >= 0.0)) throw ConfigError("robust level must be non-negative");
    return {r * s.da, ErrorKind::PhysicalMW};
}

enum class DownwardTest {
    Symmetric,  // R >= -r_dn
    Verbatim    // R >= r_dn
};

inline const char* to_string(DownwardTest d) { return d == DownwardTest::Symmetric ? "symmetric" : "verbatim"; }

struct EvalOptions {
    ReserveOptions reserve;
    OpfOptions opf;
    double tol{1e-5};  // MW slack on the coverage tests
    DownwardTest downward{DownwardTest::Symmetric};
};

enum class SampleStatus { Ok, InfeasibleReserve, InfeasibleRt };

inline const char* to_string(SampleStatus s) {
    switch (s) {
        case SampleStatus::Ok: return "ok";
        case SampleStatus::InfeasibleReserve: return "infeasible_reserve";
        case SampleStatus::InfeasibleRt: return "infeasible_rt";
    }
    return "?";
}

struct SampleResult {
    std::string date;
    SampleStatus status{SampleStatus::Ok};
    double cost{0.0};
    bool up_ok{false};
    bool dn_ok{false};
    double up_shortfall{0.0};  // max over (g,t) of R - r_up, MW
    double dn_shortfall{0.0};
};

struct EvalMetrics {
    std::string case_id;
    double c_total{0.0};
    double i_up{0.0};
    double i_dn{0.0};
    std::size_t n_infeasible{0};
    std::size_t n_samples{0};
    std::string sign_mode;
    std::vector<SampleResult> samples;
};

inline SampleResult evaluate_sample(const DaySample& s, const ErrorField& eps, const GridModel& grid,
                                    const EvalOptions& opt) {
    SampleResult out;
    out.date = s.date;
    ReserveSolution rs;
    try {
        rs = solve_reserve_opf(grid, NetLoadProfile{s.da}, eps, opt.reserve);
    } catch (const InfeasibleReserve&) {
        out.status = SampleStatus::InfeasibleReserve;
        return out;
    }
    OpfSolution rt;
    try {
        rt = solve_dcopf(grid, NetLoadProfile{s.rt}, opt.opf);
    } catch (const InfeasibleDispatch&) {
        out.status = SampleStatus::InfeasibleRt;
        return out;
    }
    out.cost = rs.cost;
    const Matrix R = rt.p_star - rs.p_da;
    out.up_shortfall = (R - rs.r_up).maxCoeff();
    out.dn_shortfall = opt.downward == DownwardTest::Symmetric ? (-rs.r_dn - R).maxCoeff() : (rs.r_dn - R).maxCoeff();
    out.up_ok = out.up_shortfall <= opt.tol;
    out.dn_ok = out.dn_shortfall <= opt.tol;
    return out;
}

/// Errors must be in MW and indexed like the test set. Infeasible samples
/// are counted, add nothing to C_total and pass neither coverage test.
inline EvalMetrics evaluate(const std::vector<DaySample>& test_set, const std::vector<ErrorField>& errors,
                            const GridModel& grid, const EvalOptions& opt = {}) {
    if (test_set.empty()) throw InsufficientData("evaluate: empty test set");
    if (errors.size() != test_set.size())
        throw DimensionMismatch("evaluate: " + std::to_string(errors.size()) + " error fields for " +
                                std::to_string(test_set.size()) + " test samples");
    for (const auto& e : errors) e.require(ErrorKind::PhysicalMW, "evaluate");

    EvalMetrics m;
    m.n_samples = test_set.size();
    m.samples.resize(test_set.size());
    parallel_for(test_set.size(), [&](std::size_t k) {
        m.samples[k] = evaluate_sample(test_set[k], errors[k], grid, opt);
    });
    std::size_t up = 0, dn = 0;
    for (const auto& r : m.samples) {
        if (r.status != SampleStatus::Ok) {
            ++m.n_infeasible;
            continue;
        }
        m.c_total += r.cost;
        up += r.up_ok;
        dn += r.dn_ok;
    }
    m.i_up = static_cast<double>(up) / static_cast<double>(m.n_samples);
    m.i_dn = static_cast<double>(dn) / static_cast<double>(m.n_samples);
    return m;
}

// ---------------------------------------------------------------------------
// Case tables

enum class CaseKind { None, Robust, Generated, Provided };

struct EvalCase {
    std::string id;
    CaseKind kind{CaseKind::None};
    double r{0.0};
    const GanModel* model{nullptr};     // Generated
    std::uint64_t seed{0};              // Generated
    std::vector<ErrorField> provided;   // Provided, normalized or MW

    static EvalCase none(std::string id = "none") { return {std::move(id), CaseKind::None}; }
    static EvalCase robust(double r, std::string id = "") {
        EvalCase c{id.empty() ? "robust:" + csv::fmt(r) : std::move(id), CaseKind::Robust};
        c.r = r;
        return c;
    }
    static EvalCase generated(const GanModel& m, std::uint64_t seed, std::string id = "generated") {
        EvalCase c{std::move(id), CaseKind::Generated};
        c.model = &m;
        c.seed = seed;
        return c;
    }
    static EvalCase from_errors(std::vector<ErrorField> errors, std::string id = "provided") {
        EvalCase c{std::move(id), CaseKind::Provided};
        c.provided = std::move(errors);
        return c;
    }
};

/// MW error fields for every test sample. Generated errors draw one field per
/// sample conditioned on its label, with noise seeded by (seed, index).
inline std::vector<ErrorField> case_errors(const EvalCase& c, const std::vector<DaySample>& test_set,
                                           SignMode sign) {
    std::vector<ErrorField> out;
    out.reserve(test_set.size());
    auto to_mw = [&](const ErrorField& e, const DaySample& s) {
        return e.kind == ErrorKind::PhysicalMW ? e : physical_error(e, s, day_stats(s), sign);
    };
    switch (c.kind) {
        case CaseKind::None:
            for (const auto& s : test_set)
                out.push_back({Matrix::Zero(s.nodes(), s.hours()), ErrorKind::PhysicalMW});
            break;
        case CaseKind::Robust:
            for (const auto& s : test_set) out.push_back(robust_error(s, c.r));
            break;
        case CaseKind::Generated: {
            if (!c.model) throw ConfigError("generated case '" + c.id + "' has no model");
            for (std::size_t k = 0; k < test_set.size(); ++k) {
                const auto& s = test_set[k];
                if (s.nodes() != c.model->num_nodes() || s.hours() != c.model->horizon)
                    throw DimensionMismatch("generated case '" + c.id + "': model shape differs from test sample");
                auto e = generate(*c.model, s.label, 1, derive_seed(c.seed, k)).front();
                out.push_back(to_mw(e, s));
            }
            break;
        }
        case CaseKind::Provided:
            if (c.provided.size() != test_set.size())
                throw DimensionMismatch("case '" + c.id + "': " + std::to_string(c.provided.size()) +
                                        " error fields for " + std::to_string(test_set.size()) + " test samples");
            for (std::size_t k = 0; k < test_set.size(); ++k) out.push_back(to_mw(c.provided[k], test_set[k]));
            break;
    }
    return out;
}

inline std::vector<EvalMetrics> run_case_table(const std::vector<DaySample>& test_set, const GridModel& grid,
                                               const std::vector<EvalCase>& cases, SignMode sign = SignMode::RoundTrip,
                                               const EvalOptions& opt = {}) {
    std::vector<EvalMetrics> rows;
    rows.reserve(cases.size());
    for (const auto& c : cases) {
        auto m = evaluate(test_set, case_errors(c, test_set, sign), grid, opt);
        m.case_id = c.id;
        m.sign_mode = to_string(sign);
        rows.push_back(std::move(m));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json metrics_json(const EvalMetrics& m) {
    return {{"case_id", m.case_id},           {"c_total", m.c_total},     {"i_up", m.i_up},
            {"i_dn", m.i_dn},                 {"n_infeasible", m.n_infeasible},
            {"n_samples", m.n_samples},       {"sign_mode", m.sign_mode}};
}

inline csv::Writer case_table_csv(const std::vector<EvalMetrics>& rows) {
    csv::Writer w({"case_id", "c_total", "i_up", "i_dn", "n_infeasible", "sign_mode"});
    for (const auto& m : rows)
        w.add(m.case_id, csv::fmt(m.c_total), csv::fmt(m.i_up), csv::fmt(m.i_dn), std::to_string(m.n_infeasible),
              m.sign_mode);
    return w;
}

inline csv::Writer sample_detail_csv(const EvalMetrics& m) {
    csv::Writer w({"date", "status", "cost", "up_ok", "dn_ok", "up_shortfall", "dn_shortfall"});
    for (const auto& r : m.samples)
        w.add(r.date, to_string(r.status), csv::fmt(r.cost), r.up_ok ? "1" : "0", r.dn_ok ? "1" : "0",
              csv::fmt(r.up_shortfall), csv::fmt(r.dn_shortfall));
    return w;
}

}  // namespace oascen
