#pragma once

// Dense convex QP solver.
//
//   min  1/2 x'Qx + q'x
//   s.t. A_eq x  = b_eq
//        lb <= A_in x <= ub
//
// Operator splitting (ADMM) drives the iterate toward the optimum; the
// active set read off the ADMM iterate is then polished by solving the
// reduced KKT system exactly, with primal-dual active set corrections when
// the guess is slightly off. Duals follow the Lagrangian
//
//   L = 1/2 x'Qx + q'x + nu'(A_eq x - b_eq) + mu_hi'(A_in x - ub) + mu_lo'(lb - A_in x)
//
// so stationarity reads Qx + q + A_eq'nu + A_in'(mu_hi - mu_lo) = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "oascen/errors.hpp"

namespace oascen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QpProblem {
    Matrix Q;
    Vector q;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_in;
    Vector lb;
    Vector ub;

    [[nodiscard]] Eigen::Index num_vars() const { return q.size(); }

    /// Throws DimensionMismatch / ValidationError when the invariants fail.
    void validate(double tol_psd = 1e-9) const {
        const auto n = q.size();
        if (Q.rows() != n || Q.cols() != n) throw DimensionMismatch("Q must be n x n");
        if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n))
            throw DimensionMismatch("equality system has inconsistent dimensions");
        if (A_in.rows() != lb.size() || A_in.rows() != ub.size() || (A_in.rows() > 0 && A_in.cols() != n))
            throw DimensionMismatch("inequality system has inconsistent dimensions");
        if (!Q.isApprox(Q.transpose(), 1e-12) && (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ValidationError("Q is not symmetric");
        for (Eigen::Index i = 0; i < lb.size(); ++i)
            if (lb[i] > ub[i]) throw ValidationError("lb > ub at row " + std::to_string(i));
        if (n > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
            double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
            if (eig.eigenvalues().minCoeff() < -tol_psd * scale) throw ValidationError("Q is not positive semidefinite");
        }
    }
};

enum class QpStatus { Optimal, Infeasible, Unbounded, MaxIter };

inline const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::Unbounded: return "unbounded";
        case QpStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

struct QpSolution {
    Vector x_star;
    double obj{0.0};
    Vector nu;
    Vector mu_lo;
    Vector mu_hi;
    QpStatus status{QpStatus::MaxIter};
    double kkt_residual{kInf};
    /// Some inequality is active with a multiplier below tolerance.
    bool degenerate{false};
    std::size_t iterations{0};
};

struct QpSettings {
    double tol{1e-6};
    std::size_t max_iter{50000};
    double rho{0.1};
    double sigma{1e-6};
    double alpha{1.6};
    double eps_infeasible{1e-5};
    std::size_t polish_first{25};
    std::size_t polish_passes{25};
};

/// Max of stationarity, primal violation and complementarity (absolute).
inline double kkt_residual(const QpProblem& p, const Vector& x, const Vector& nu, const Vector& mu_lo,
                           const Vector& mu_hi) {
    Vector stat = p.Q * x + p.q;
    if (p.A_eq.rows() > 0) stat += p.A_eq.transpose() * nu;
    if (p.A_in.rows() > 0) stat += p.A_in.transpose() * (mu_hi - mu_lo);
    double res = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    if (p.A_eq.rows() > 0) res = std::max(res, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
    if (p.A_in.rows() > 0) {
        Vector ax = p.A_in * x;
        for (Eigen::Index i = 0; i < ax.size(); ++i) {
            res = std::max(res, p.lb[i] - ax[i]);
            res = std::max(res, ax[i] - p.ub[i]);
            res = std::max(res, -mu_lo[i]);
            res = std::max(res, -mu_hi[i]);
            if (std::isfinite(p.lb[i])) res = std::max(res, mu_lo[i] * std::abs(ax[i] - p.lb[i]));
            else res = std::max(res, std::abs(mu_lo[i]));
            if (std::isfinite(p.ub[i])) res = std::max(res, mu_hi[i] * std::abs(p.ub[i] - ax[i]));
            else res = std::max(res, std::abs(mu_hi[i]));
        }
    }
    return res;
}

namespace detail {

/// Stacked constraint form l <= A x <= u used internally; the first n_eq
/// rows are the equalities.
class QpKernel {
public:
    QpKernel(const QpProblem& p, const QpSettings& s) : p_(p), s_(s) {
        n_ = p.q.size();
        n_eq_ = p.A_eq.rows();
        m_ = n_eq_ + p.A_in.rows();
        A_.resize(m_, n_);
        l_.resize(m_);
        u_.resize(m_);
        if (n_eq_ > 0) {
            A_.topRows(n_eq_) = p.A_eq;
            l_.head(n_eq_) = p.b_eq;
            u_.head(n_eq_) = p.b_eq;
        }
        if (p.A_in.rows() > 0) {
            A_.bottomRows(p.A_in.rows()) = p.A_in;
            l_.tail(p.A_in.rows()) = p.lb;
            u_.tail(p.A_in.rows()) = p.ub;
        }
        q_scale_ = 1.0 + (n_ > 0 ? p.q.cwiseAbs().maxCoeff() : 0.0) + (n_ > 0 ? p.Q.cwiseAbs().maxCoeff() : 0.0);
    }

    QpSolution solve() {
        x_ = Vector::Zero(n_);
        z_ = Vector::Zero(m_);
        y_ = Vector::Zero(m_);
        rho_ = s_.rho;
        factorize();

        std::size_t next_polish = s_.polish_first;
        Vector x_prev, y_prev;
        for (std::size_t k = 1; k <= s_.max_iter; ++k) {
            x_prev = x_;
            y_prev = y_;
            iterate();

            if (k % 5 == 0 || k == s_.max_iter) {
                if (certify_infeasible(y_ - y_prev)) {
                    if (auto sol = polish(); sol.status == QpStatus::Optimal) return finish(sol, k);
                    return finish_status(QpStatus::Infeasible, k);
                }
                if (certify_unbounded(x_ - x_prev)) {
                    if (auto sol = polish(); sol.status == QpStatus::Optimal) return finish(sol, k);
                    return finish_status(QpStatus::Unbounded, k);
                }
            }
            if (k == next_polish || k == s_.max_iter) {
                next_polish *= 2;
                if (auto sol = polish(); sol.status == QpStatus::Optimal) return finish(sol, k);
                auto raw = from_admm();
                if (raw.kkt_residual <= s_.tol) return finish(raw, k);
            }
            if (k % 25 == 0) adapt_rho();
        }
        return finish_status(QpStatus::MaxIter, s_.max_iter);
    }

private:
    bool is_eq(Eigen::Index i) const { return l_[i] == u_[i]; }

    double row_rho(Eigen::Index i) const {
        if (is_eq(i)) return rho_ * 1e3;
        if (!std::isfinite(l_[i]) && !std::isfinite(u_[i])) return 1e-6;
        return rho_;
    }

    void factorize() {
        rho_vec_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) rho_vec_[i] = row_rho(i);
        Matrix K = p_.Q;
        K.diagonal().array() += s_.sigma;
        if (m_ > 0) K += A_.transpose() * rho_vec_.asDiagonal() * A_;
        llt_.compute(K);
    }

    void iterate() {
        Vector rhs = s_.sigma * x_ - p_.q;
        if (m_ > 0) rhs += A_.transpose() * (rho_vec_.cwiseProduct(z_) - y_);
        Vector x_tilde = llt_.solve(rhs);
        Vector z_tilde = A_ * x_tilde;
        x_ = s_.alpha * x_tilde + (1.0 - s_.alpha) * x_;
        Vector z_relaxed = s_.alpha * z_tilde + (1.0 - s_.alpha) * z_;
        Vector z_new = z_relaxed + y_.cwiseQuotient(rho_vec_);
        for (Eigen::Index i = 0; i < m_; ++i) z_new[i] = std::clamp(z_new[i], l_[i], u_[i]);
        y_ += rho_vec_.cwiseProduct(z_relaxed - z_new);
        z_ = z_new;
    }

    void adapt_rho() {
        if (m_ == 0) return;
        Vector ax = A_ * x_;
        Vector aty = A_.transpose() * y_;
        double r_prim = (ax - z_).cwiseAbs().maxCoeff();
        double r_dual = (p_.Q * x_ + p_.q + aty).cwiseAbs().maxCoeff();
        double prim_scale = std::max({ax.cwiseAbs().maxCoeff(), z_.cwiseAbs().maxCoeff(), 1e-12});
        double dual_scale = std::max({(p_.Q * x_).cwiseAbs().maxCoeff(), aty.cwiseAbs().maxCoeff(),
                                      p_.q.size() ? p_.q.cwiseAbs().maxCoeff() : 0.0, 1e-12});
        double ratio = std::sqrt((r_prim / prim_scale) / std::max(r_dual / dual_scale, 1e-30));
        double rho_new = std::clamp(rho_ * ratio, 1e-6, 1e6);
        if (rho_new > 5.0 * rho_ || rho_new < rho_ / 5.0) {
            rho_ = rho_new;
            factorize();
        }
    }

    bool certify_infeasible(const Vector& dy) const {
        if (m_ == 0) return false;
        double norm = dy.cwiseAbs().maxCoeff();
        if (norm < 1e-12) return false;
        const double eps = s_.eps_infeasible * norm;
        if ((A_.transpose() * dy).cwiseAbs().maxCoeff() > eps) return false;
        double support = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (dy[i] > 0) {
                if (!std::isfinite(u_[i])) {
                    if (dy[i] > eps) return false;
                } else {
                    support += u_[i] * dy[i];
                }
            } else if (dy[i] < 0) {
                if (!std::isfinite(l_[i])) {
                    if (-dy[i] > eps) return false;
                } else {
                    support += l_[i] * dy[i];
                }
            }
        }
        return support < -eps;
    }

    bool certify_unbounded(const Vector& dx) const {
        if (n_ == 0) return false;
        double norm = dx.cwiseAbs().maxCoeff();
        if (norm < 1e-12) return false;
        const double eps = s_.eps_infeasible * norm;
        if ((p_.Q * dx).cwiseAbs().maxCoeff() > eps) return false;
        if (p_.q.dot(dx) > -eps) return false;
        if (m_ == 0) return true;
        Vector adx = A_ * dx;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (std::isfinite(u_[i]) && adx[i] > eps) return false;
            if (std::isfinite(l_[i]) && adx[i] < -eps) return false;
        }
        return true;
    }

    QpSolution from_admm() const {
        QpSolution sol;
        sol.x_star = x_;
        split_duals(y_, sol);
        sol.kkt_residual = kkt_residual(p_, sol.x_star, sol.nu, sol.mu_lo, sol.mu_hi);
        sol.status = QpStatus::MaxIter;
        return sol;
    }

    void split_duals(const Vector& y, QpSolution& sol) const {
        sol.nu = y.head(n_eq_);
        const auto m_in = m_ - n_eq_;
        sol.mu_lo = (-y.tail(m_in)).cwiseMax(0.0);
        sol.mu_hi = y.tail(m_in).cwiseMax(0.0);
    }

    // 0 inactive, -1 lower bound active, +1 upper bound active, 2 equality.
    std::vector<int> guess_active_set() const {
        std::vector<int> act(static_cast<std::size_t>(m_), 0);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (is_eq(i)) act[i] = 2;
            else if (z_[i] - l_[i] < -y_[i]) act[i] = -1;
            else if (u_[i] - z_[i] < y_[i]) act[i] = 1;
        }
        return act;
    }

    QpSolution polish() const {
        QpSolution out;
        out.status = QpStatus::MaxIter;
        auto act = guess_active_set();
        Vector x(n_), y = Vector::Zero(m_);
        for (std::size_t pass = 0; pass < s_.polish_passes; ++pass) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index i = 0; i < m_; ++i)
                if (act[i] != 0) rows.push_back(i);
            const auto na = static_cast<Eigen::Index>(rows.size());
            Matrix M = Matrix::Zero(n_ + na, n_ + na);
            Vector rhs(n_ + na);
            M.topLeftCorner(n_, n_) = p_.Q;
            rhs.head(n_) = -p_.q;
            for (Eigen::Index r = 0; r < na; ++r) {
                const auto i = rows[r];
                M.block(n_ + r, 0, 1, n_) = A_.row(i);
                M.block(0, n_ + r, n_, 1) = A_.row(i).transpose();
                rhs[n_ + r] = act[i] == 1 ? u_[i] : l_[i];
            }
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
            Vector sol = cod.solve(rhs);
            double resid = (M * sol - rhs).cwiseAbs().maxCoeff();
            if (!std::isfinite(resid) || resid > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
                // Inconsistent guess, typically one bound too many at a degenerate
                // vertex. Release the bound the ADMM duals lean on least.
                Eigen::Index weakest = -1;
                for (Eigen::Index i = 0; i < m_; ++i)
                    if ((act[i] == 1 || act[i] == -1) && (weakest < 0 || std::abs(y_[i]) < std::abs(y_[weakest])))
                        weakest = i;
                if (weakest < 0) return out;
                act[weakest] = 0;
                continue;
            }
            x = sol.head(n_);
            y.setZero();
            for (Eigen::Index r = 0; r < na; ++r) y[rows[r]] = sol[n_ + r];

            bool changed = false;
            Vector ax = A_ * x;
            const double dual_tol = 1e-11 * q_scale_;
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (act[i] == 2) continue;
                const double feas_lo = 1e-9 * (1.0 + std::abs(l_[i]));
                const double feas_hi = 1e-9 * (1.0 + std::abs(u_[i]));
                if (act[i] == 0) {
                    if (ax[i] < l_[i] - feas_lo) { act[i] = -1; changed = true; }
                    else if (ax[i] > u_[i] + feas_hi) { act[i] = 1; changed = true; }
                } else if (act[i] == -1 && y[i] > dual_tol) {
                    act[i] = 0;
                    changed = true;
                } else if (act[i] == 1 && y[i] < -dual_tol) {
                    act[i] = 0;
                    changed = true;
                }
            }
            if (changed) continue;

            out.x_star = x;
            // Clean sign noise on multipliers of active rows.
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (act[i] == -1) y[i] = std::min(y[i], 0.0);
                if (act[i] == 1) y[i] = std::max(y[i], 0.0);
            }
            split_duals(y, out);
            out.kkt_residual = kkt_residual(p_, out.x_star, out.nu, out.mu_lo, out.mu_hi);
            if (out.kkt_residual <= s_.tol) out.status = QpStatus::Optimal;
            return out;
        }
        return out;
    }

    QpSolution finish(QpSolution sol, std::size_t k) const {
        sol.status = QpStatus::Optimal;
        sol.iterations = k;
        sol.obj = 0.5 * sol.x_star.dot(p_.Q * sol.x_star) + p_.q.dot(sol.x_star);
        sol.degenerate = false;
        if (p_.A_in.rows() > 0) {
            Vector ax = p_.A_in * sol.x_star;
            for (Eigen::Index i = 0; i < ax.size(); ++i) {
                if (p_.lb[i] == p_.ub[i]) continue;
                const double act_tol = 1e-7 * (1.0 + std::max(std::abs(ax[i]), 1.0));
                if (std::isfinite(p_.lb[i]) && std::abs(ax[i] - p_.lb[i]) <= act_tol && sol.mu_lo[i] < s_.tol)
                    sol.degenerate = true;
                if (std::isfinite(p_.ub[i]) && std::abs(p_.ub[i] - ax[i]) <= act_tol && sol.mu_hi[i] < s_.tol)
                    sol.degenerate = true;
            }
        }
        return sol;
    }

    QpSolution finish_status(QpStatus status, std::size_t k) const {
        QpSolution sol = from_admm();
        sol.status = status;
        sol.iterations = k;
        sol.obj = 0.5 * x_.dot(p_.Q * x_) + p_.q.dot(x_);
        return sol;
    }

    const QpProblem& p_;
    const QpSettings& s_;
    Eigen::Index n_{0}, n_eq_{0}, m_{0};
    Matrix A_;
    Vector l_, u_;
    Vector x_, z_, y_, rho_vec_;
    double rho_{0.1};
    double q_scale_{1.0};
    Eigen::LLT<Matrix> llt_;
};

}  // namespace detail

inline QpSolution solve_qp(const QpProblem& p, const QpSettings& settings) {
    p.validate();
    detail::QpKernel kernel(p, settings);
    return kernel.solve();
}

inline QpSolution solve_qp(const QpProblem& p, double tol = 1e-6, std::size_t max_iter = 50000) {
    QpSettings s;
    s.tol = tol;
    s.max_iter = max_iter;
    return solve_qp(p, s);
}

}  // namespace oascen
