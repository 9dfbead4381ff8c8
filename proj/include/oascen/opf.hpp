#pragma once

// DC optimal power flow and the reserve-allocation variant.
//
// Angles enter the QPs as phi = base_mva * theta so that line flows read
// b_pu * (phi_i - phi_j) directly in MW; solutions report theta in radians.
// Every hour is an independent QP.

#include <cstddef>
#include <string>
#include <vector>

#include "oascen/fields.hpp"
#include "oascen/grid.hpp"
#include "oascen/qp.hpp"

namespace oascen {

struct OpfOptions {
    double tol{1e-6};
    std::size_t max_iter{50000};
};

struct OpfSolution {
    Matrix p_star;      // MW, generator x hour
    Matrix theta;       // rad, node x hour
    double cost{0.0};   // $, summed over the horizon
    Matrix lmp;         // $/MWh, node x hour
    Matrix rho_lo;      // P >= 0 multipliers
    Matrix rho_hi;      // P <= p_max multipliers
    Matrix beta_lo;     // flow >= -S multipliers, line x hour
    Matrix beta_hi;     // flow <= S multipliers
    Vector eta;         // reference angle multiplier per hour
    std::vector<bool> degenerate;
    double kkt_residual{0.0};

    [[nodiscard]] bool any_degenerate() const {
        for (bool d : degenerate)
            if (d) return true;
        return false;
    }

    /// MW flow on each line (from -> to orientation), line x hour.
    [[nodiscard]] Matrix flows(const GridModel& grid) const {
        Matrix f(grid.num_lines(), theta.cols());
        for (std::size_t l = 0; l < grid.num_lines(); ++l) {
            const auto& line = grid.lines()[l];
            f.row(l) = line.b_pu * grid.base_mva() * (theta.row(line.from) - theta.row(line.to));
        }
        return f;
    }
};

struct ReserveOptions {
    double tol{1e-6};
    std::size_t max_iter{50000};
    /// Tie-break prices on reserves, reported outside the cost.
    double reg_linear{1e-4};      // $/MWh
    double reg_quadratic{1e-4};   // $/MW^2h
    /// Keep the DA schedule itself within generator and line limits.
    bool da_limits{true};
};

struct ReserveSolution {
    Matrix p_da;        // MW, generator x hour
    Matrix r_up;
    Matrix r_dn;
    Matrix theta;       // rad, node x hour (DA)
    Matrix theta_bar;   // rad, node x hour (error superposition)
    double cost{0.0};   // $, DA generation cost only
    double regularizer{0.0};
    std::vector<bool> degenerate;
};

struct ScaleConstants {
    double delta_shift{0.0};
    double delta_scale{1.0};
};

namespace detail {

inline void check_profile(const GridModel& grid, const Matrix& m, const char* what) {
    if (m.rows() != static_cast<Eigen::Index>(grid.num_nodes()))
        throw DimensionMismatch(std::string(what) + ": row count must equal the number of grid nodes");
    if (m.cols() == 0) throw DimensionMismatch(std::string(what) + ": empty horizon");
    if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite values");
}

/// Appends B * (x[a + from] - x[a + to]) style flow coefficients.
inline void add_flow_row(Matrix& A, Eigen::Index row, const Line& line, Eigen::Index offset, double sign = 1.0) {
    A(row, offset + line.from) += sign * line.b_pu;
    A(row, offset + line.to) -= sign * line.b_pu;
}

}  // namespace detail

/// Per-grid QP template for the plain DC-OPF; only b_eq changes per hour.
/// Holds a reference: the grid must outlive the model.
class DcopfModel {
public:
    explicit DcopfModel(const GridModel& grid) : grid_(grid) {
        const auto G = static_cast<Eigen::Index>(grid.num_generators());
        const auto N = static_cast<Eigen::Index>(grid.num_nodes());
        const auto L = static_cast<Eigen::Index>(grid.num_lines());
        const auto n = G + N;
        qp_.Q = Matrix::Zero(n, n);
        qp_.q = Vector::Zero(n);
        for (Eigen::Index g = 0; g < G; ++g) {
            const auto& gen = grid.generators()[g];
            qp_.Q(g, g) = 2.0 * gen.c2;
            qp_.q[g] = gen.c1;
            c0_sum_ += gen.c0;
        }
        qp_.A_eq = Matrix::Zero(N + 1, n);
        qp_.b_eq = Vector::Zero(N + 1);
        for (Eigen::Index g = 0; g < G; ++g) qp_.A_eq(grid.generators()[g].node, g) = 1.0;
        for (const auto& line : grid.lines()) {
            // balance: sum P - sum_j B (phi_i - phi_j) = d
            detail::add_flow_row(qp_.A_eq, line.from, line, G, -1.0);
            detail::add_flow_row(qp_.A_eq, line.to, line, G, 1.0);
        }
        qp_.A_eq(N, G + grid.ref()) = 1.0;

        qp_.A_in = Matrix::Zero(G + L, n);
        qp_.lb = Vector::Zero(G + L);
        qp_.ub = Vector::Zero(G + L);
        for (Eigen::Index g = 0; g < G; ++g) {
            qp_.A_in(g, g) = 1.0;
            qp_.ub[g] = grid.generators()[g].p_max;
        }
        for (Eigen::Index l = 0; l < L; ++l) {
            detail::add_flow_row(qp_.A_in, G + l, grid.lines()[l], G);
            qp_.lb[G + l] = -grid.lines()[l].s_mw;
            qp_.ub[G + l] = grid.lines()[l].s_mw;
        }
    }

    /// Solves one hour; returns the raw QP solution.
    [[nodiscard]] QpSolution solve_hour(const Vector& load, const OpfOptions& opt) const {
        QpProblem p = qp_;
        p.b_eq.head(load.size()) = load;
        return solve_qp(p, opt.tol, opt.max_iter);
    }

    [[nodiscard]] OpfSolution solve(const NetLoadProfile& load, const OpfOptions& opt = {}) const {
        detail::check_profile(grid_, load.mw, "solve_dcopf");
        const auto G = static_cast<Eigen::Index>(grid_.num_generators());
        const auto N = static_cast<Eigen::Index>(grid_.num_nodes());
        const auto L = static_cast<Eigen::Index>(grid_.num_lines());
        const auto T = load.hours();
        OpfSolution out;
        out.p_star.resize(G, T);
        out.theta.resize(N, T);
        out.lmp.resize(N, T);
        out.rho_lo.resize(G, T);
        out.rho_hi.resize(G, T);
        out.beta_lo.resize(L, T);
        out.beta_hi.resize(L, T);
        out.eta.resize(T);
        out.degenerate.assign(static_cast<std::size_t>(T), false);
        for (Eigen::Index t = 0; t < T; ++t) {
            auto s = solve_hour(load.mw.col(t), opt);
            if (s.status == QpStatus::Infeasible)
                throw InfeasibleDispatch("net load at hour " + std::to_string(t + 1) +
                                         " cannot be served within generator and line limits");
            if (s.status != QpStatus::Optimal)
                throw SolverFailure(std::string("DC-OPF hour ") + std::to_string(t + 1) + ": " + to_string(s.status));
            out.p_star.col(t) = s.x_star.head(G);
            out.theta.col(t) = s.x_star.tail(N) / grid_.base_mva();
            out.lmp.col(t) = -s.nu.head(N);
            out.eta[t] = s.nu[N] * grid_.base_mva();
            out.rho_lo.col(t) = s.mu_lo.head(G);
            out.rho_hi.col(t) = s.mu_hi.head(G);
            out.beta_lo.col(t) = s.mu_lo.tail(L);
            out.beta_hi.col(t) = s.mu_hi.tail(L);
            out.degenerate[static_cast<std::size_t>(t)] = s.degenerate;
            out.cost += s.obj + c0_sum_;
            out.kkt_residual = std::max(out.kkt_residual, s.kkt_residual);
        }
        return out;
    }

private:
    const GridModel& grid_;
    QpProblem qp_;
    double c0_sum_{0.0};
};

inline OpfSolution solve_dcopf(const GridModel& grid, const NetLoadProfile& load, const OpfOptions& opt = {}) {
    return DcopfModel(grid).solve(load, opt);
}

/// Reserve-allocation DC-OPF. Variables per hour:
/// [P_da (G), r_up (G), r_dn (G), phi (N), phi_bar (N)].
inline ReserveSolution solve_reserve_opf(const GridModel& grid, const NetLoadProfile& da_load, const ErrorField& eps,
                                         const ReserveOptions& opt = {}) {
    detail::check_profile(grid, da_load.mw, "solve_reserve_opf(da_load)");
    eps.require(ErrorKind::PhysicalMW, "solve_reserve_opf");
    if (eps.values.rows() != da_load.mw.rows() || eps.values.cols() != da_load.mw.cols())
        throw DimensionMismatch("solve_reserve_opf: DA load and error fields have different shapes");
    if (!eps.values.allFinite()) throw ValidationError("solve_reserve_opf: non-finite error values");

    const auto G = static_cast<Eigen::Index>(grid.num_generators());
    const auto N = static_cast<Eigen::Index>(grid.num_nodes());
    const auto L = static_cast<Eigen::Index>(grid.num_lines());
    const auto T = da_load.hours();
    const Eigen::Index iP = 0, iRu = G, iRd = 2 * G, iPhi = 3 * G, iBar = 3 * G + N;
    const auto n = 3 * G + 2 * N;

    QpProblem p;
    p.Q = Matrix::Zero(n, n);
    p.q = Vector::Zero(n);
    for (Eigen::Index g = 0; g < G; ++g) {
        const auto& gen = grid.generators()[g];
        p.Q(iP + g, iP + g) = 2.0 * gen.c2;
        p.q[iP + g] = gen.c1;
        for (auto off : {iRu, iRd}) {
            p.Q(off + g, off + g) = opt.reg_quadratic;
            p.q[off + g] = opt.reg_linear;
        }
    }

    p.A_eq = Matrix::Zero(2 * N + 2, n);
    p.b_eq = Vector::Zero(2 * N + 2);
    for (Eigen::Index g = 0; g < G; ++g) {
        const auto i = static_cast<Eigen::Index>(grid.generators()[g].node);
        p.A_eq(i, iP + g) = 1.0;
        p.A_eq(N + i, iRu + g) = 1.0;
        p.A_eq(N + i, iRd + g) = -1.0;
    }
    for (const auto& line : grid.lines()) {
        detail::add_flow_row(p.A_eq, line.from, line, iPhi, -1.0);
        detail::add_flow_row(p.A_eq, line.to, line, iPhi, 1.0);
        detail::add_flow_row(p.A_eq, N + line.from, line, iBar, -1.0);
        detail::add_flow_row(p.A_eq, N + line.to, line, iBar, 1.0);
    }
    p.A_eq(2 * N, iPhi + grid.ref()) = 1.0;
    p.A_eq(2 * N + 1, iBar + grid.ref()) = 1.0;

    const Eigen::Index rows = 4 * G + (opt.da_limits ? 2 * L : L);
    p.A_in = Matrix::Zero(rows, n);
    p.lb = Vector::Zero(rows);
    p.ub = Vector::Constant(rows, kInf);
    Eigen::Index r = 0;
    for (Eigen::Index g = 0; g < G; ++g, ++r) {
        p.A_in(r, iP + g) = 1.0;
        if (opt.da_limits) p.ub[r] = grid.generators()[g].p_max;
    }
    for (Eigen::Index g = 0; g < G; ++g, ++r) p.A_in(r, iRu + g) = 1.0;
    for (Eigen::Index g = 0; g < G; ++g, ++r) p.A_in(r, iRd + g) = 1.0;
    for (Eigen::Index g = 0; g < G; ++g, ++r) {
        p.A_in(r, iP + g) = 1.0;
        p.A_in(r, iRu + g) = 1.0;
        p.A_in(r, iRd + g) = -1.0;
        p.lb[r] = -kInf;
        p.ub[r] = grid.generators()[g].p_max;
    }
    for (const auto& line : grid.lines()) {
        detail::add_flow_row(p.A_in, r, line, iPhi);
        detail::add_flow_row(p.A_in, r, line, iBar);
        p.lb[r] = -line.s_mw;
        p.ub[r] = line.s_mw;
        ++r;
    }
    if (opt.da_limits) {
        for (const auto& line : grid.lines()) {
            detail::add_flow_row(p.A_in, r, line, iPhi);
            p.lb[r] = -line.s_mw;
            p.ub[r] = line.s_mw;
            ++r;
        }
    }

    ReserveSolution out;
    out.p_da.resize(G, T);
    out.r_up.resize(G, T);
    out.r_dn.resize(G, T);
    out.theta.resize(N, T);
    out.theta_bar.resize(N, T);
    out.degenerate.assign(static_cast<std::size_t>(T), false);
    for (Eigen::Index t = 0; t < T; ++t) {
        p.b_eq.head(N) = da_load.mw.col(t);
        p.b_eq.segment(N, N) = eps.values.col(t);
        auto s = solve_qp(p, opt.tol, opt.max_iter);
        if (s.status == QpStatus::Infeasible)
            throw InfeasibleReserve("forecast error at hour " + std::to_string(t + 1) +
                                    " cannot be covered by deliverable reserves");
        if (s.status != QpStatus::Optimal)
            throw SolverFailure(std::string("reserve OPF hour ") + std::to_string(t + 1) + ": " + to_string(s.status));
        out.p_da.col(t) = s.x_star.segment(iP, G);
        out.r_up.col(t) = s.x_star.segment(iRu, G).cwiseMax(0.0);
        out.r_dn.col(t) = s.x_star.segment(iRd, G).cwiseMax(0.0);
        out.theta.col(t) = s.x_star.segment(iPhi, N) / grid.base_mva();
        out.theta_bar.col(t) = s.x_star.segment(iBar, N) / grid.base_mva();
        out.degenerate[static_cast<std::size_t>(t)] = s.degenerate;
        for (Eigen::Index g = 0; g < G; ++g) {
            const auto& gen = grid.generators()[g];
            const double pg = out.p_da(g, t);
            out.cost += gen.c0 + gen.c1 * pg + gen.c2 * pg * pg;
        }
        const Vector ru = s.x_star.segment(iRu, G), rd = s.x_star.segment(iRd, G);
        out.regularizer += opt.reg_linear * (ru.sum() + rd.sum()) +
                           0.5 * opt.reg_quadratic * (ru.squaredNorm() + rd.squaredNorm());
    }
    return out;
}

/// (cost - delta_shift) / delta_scale, the shift applied once to the
/// horizon total.
inline double scaled_cost(double cost, const ScaleConstants& sc) {
    if (!(sc.delta_scale > 0.0)) throw ConfigError("delta_scale must be positive");
    return (cost - sc.delta_shift) / sc.delta_scale;
}

inline double scaled_cost(const OpfSolution& sol, const ScaleConstants& sc) { return scaled_cost(sol.cost, sc); }

}  // namespace oascen
