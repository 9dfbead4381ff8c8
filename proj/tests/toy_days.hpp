#pragma once

#include <random>
#include <string>
#include <vector>

#include "oascen/dataprep.hpp"

namespace oascen::fixtures {

/// Days on the two-node Toy-A grid: node 1 carries a small load, node 2 a
/// large one, RT deviates from DA by up to `spread` (relative).
inline std::vector<DaySample> toy_a_days(std::mt19937_64& rng, std::size_t n, int hours = 3, double spread = 0.1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    static const char* dates[] = {"2018-02-10", "2018-05-10", "2018-08-10", "2018-11-10"};
    std::vector<DaySample> out;
    for (std::size_t k = 0; k < n; ++k) {
        DaySample s;
        s.date = dates[k % 4];
        s.label = assign_label(s.date);
        s.da.resize(2, hours);
        s.rt.resize(2, hours);
        for (int t = 0; t < hours; ++t) {
            s.da(0, t) = 2.0 + 18.0 * u(rng);
            s.da(1, t) = 50.0 + 40.0 * u(rng);
        }
        for (Eigen::Index i = 0; i < 2; ++i)
            for (int t = 0; t < hours; ++t) s.rt(i, t) = s.da(i, t) * (1.0 + spread * (2.0 * u(rng) - 1.0));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace oascen::fixtures
