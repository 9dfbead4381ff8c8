#pragma once

// Desk-scale stand-in for a market dataset: a three-zone meshed grid and
// seeded DA/RT day pairs on it.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oascen/dataprep.hpp"
#include "oascen/grid.hpp"

namespace oascen::synthetic {

/// Zone C is a load pocket fed from the cheap unit at A over a weak line and
/// from the mid-merit unit at B; its local unit is the most expensive.
inline GridModel three_zone_grid() {
    return parse_grid(R"({
      "base_mva": 100,
      "nodes": [{"id": "A", "ref": true}, {"id": "B"}, {"id": "C"}],
      "lines": [
        {"from": "A", "to": "B", "b_pu": 10, "s_mw": 500},
        {"from": "A", "to": "C", "b_pu": 5, "s_mw": 100},
        {"from": "B", "to": "C", "b_pu": 10, "s_mw": 200}
      ],
      "generators": [
        {"id": "gA", "node": "A", "c0": 100, "c1": 12, "c2": 0.01, "p_max": 800},
        {"id": "gB", "node": "B", "c0": 150, "c1": 40, "c2": 0.02, "p_max": 800},
        {"id": "gC", "node": "C", "c0": 50, "c1": 75, "c2": 0.05, "p_max": 300}
      ]
    })");
}

struct DayConfig {
    std::size_t n_days{40};
    int horizon{24};
    std::uint64_t seed{0};
    double rt_sigma{0.08};  // relative RT deviation, per hour
    double rt_rho{0.7};     // hour-to-hour correlation of the deviation
    std::string first_date{"2018-01-01"};
};

/// Peak MW per zone of three_zone_grid().
inline std::vector<double> zone_peaks() { return {110.0, 90.0, 290.0}; }

inline double daily_shape(int t, int horizon) {
    const double h = 24.0 * (t + 0.5) / horizon;
    return 0.6 + 0.35 * std::exp(-std::pow((h - 18.0) / 3.5, 2)) + 0.12 * std::exp(-std::pow((h - 8.0) / 2.5, 2));
}

inline double season_factor(Label q) {
    static const double f[] = {0.92, 0.85, 1.0, 0.88};
    return f[q];
}

/// Days spread evenly over a year from first_date.
inline std::vector<DaySample> make_days(const GridModel& grid, const DayConfig& cfg) {
    const auto peaks = zone_peaks();
    if (grid.num_nodes() != peaks.size()) throw DimensionMismatch("synthetic days need a three-zone grid");
    if (cfg.horizon < 1) throw ConfigError("horizon must be positive");
    if (!(cfg.rt_sigma >= 0.0) || !(std::abs(cfg.rt_rho) < 1.0)) throw ConfigError("bad RT deviation parameters");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    const std::chrono::sys_days start{parse_date(cfg.first_date)};
    const int step = std::max(1, static_cast<int>(365 / std::max<std::size_t>(cfg.n_days, 1)));
    const double innov = std::sqrt(1.0 - cfg.rt_rho * cfg.rt_rho);

    std::vector<DaySample> out;
    out.reserve(cfg.n_days);
    for (std::size_t k = 0; k < cfg.n_days; ++k) {
        const std::chrono::year_month_day ymd{start + std::chrono::days(static_cast<int>(k) * step)};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        DaySample s;
        s.date = buf;
        s.label = assign_label(s.date);
        s.da.resize(3, cfg.horizon);
        s.rt.resize(3, cfg.horizon);
        const double season = season_factor(s.label);
        for (Eigen::Index i = 0; i < 3; ++i) {
            const double level = peaks[i] * season * (1.0 + jitter(rng));
            double x = n01(rng);
            for (int t = 0; t < cfg.horizon; ++t) {
                s.da(i, t) = level * daily_shape(t, cfg.horizon) * (1.0 + 0.02 * n01(rng));
                if (t > 0) x = cfg.rt_rho * x + innov * n01(rng);
                s.rt(i, t) = std::max(0.0, s.da(i, t) * (1.0 + cfg.rt_sigma * x));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace oascen::synthetic
