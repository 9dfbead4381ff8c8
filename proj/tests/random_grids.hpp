#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "oascen/grid.hpp"

namespace oascen::fixtures {

struct RandomGridSpec {
    int max_nodes{4};
    int max_generators{4};
    bool quadratic{false};
};

/// Connected random grid: a random spanning tree plus optional extra lines.
inline GridModel random_grid(std::mt19937_64& rng, const RandomGridSpec& spec) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int N = std::uniform_int_distribution<int>(1, spec.max_nodes)(rng);
    const int G = std::uniform_int_distribution<int>(1, spec.max_generators)(rng);
    std::vector<std::string> nodes;
    for (int i = 0; i < N; ++i) nodes.push_back("n" + std::to_string(i + 1));
    std::vector<Line> lines;
    for (int i = 1; i < N; ++i) {
        const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
        lines.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(i), 5.0 + 15.0 * u(rng),
                         20.0 + 130.0 * u(rng)});
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (u(rng) < 0.3)
                lines.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), 5.0 + 15.0 * u(rng),
                                 20.0 + 130.0 * u(rng)});
    std::vector<GeneratorSpec> gens;
    for (int g = 0; g < G; ++g) {
        GeneratorSpec s;
        s.id = "g" + std::to_string(g + 1);
        s.node = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, N - 1)(rng));
        s.c0 = 10.0 * u(rng);
        s.c1 = 5.0 + 45.0 * u(rng);
        s.c2 = spec.quadratic ? 0.001 + 0.099 * u(rng) : 0.0;
        s.p_max = 30.0 + 120.0 * u(rng);
        gens.push_back(s);
    }
    const auto ref = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, N - 1)(rng));
    return make_grid(100.0, nodes, ref, lines, gens);
}

/// Random nonnegative nodal loads totalling at most `fill` of capacity.
inline Eigen::VectorXd random_load(std::mt19937_64& rng, const GridModel& grid, double fill = 0.8) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double cap = 0.0;
    for (const auto& g : grid.generators()) cap += g.p_max;
    Eigen::VectorXd w(grid.num_nodes());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = u(rng);
    const double total = fill * cap * (0.2 + 0.8 * u(rng));
    return w / std::max(w.sum(), 1e-9) * total;
}

}  // namespace oascen::fixtures
