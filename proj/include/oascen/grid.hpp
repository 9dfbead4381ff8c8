#pragma once

// Transmission network model: nodes (or zones), merged lines, generators.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oascen/errors.hpp"

namespace oascen {

struct GeneratorSpec {
    std::string id;
    std::size_t node{0};  // index into GridModel::nodes
    double c0{0.0};       // $/h
    double c1{0.0};       // $/MWh
    double c2{0.0};       // $/MW^2h
    double p_max{0.0};    // MW

    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

struct Line {
    std::size_t from{0};
    std::size_t to{0};
    double b_pu{0.0};  // susceptance, p.u.
    double s_mw{0.0};  // thermal limit, MW

    friend bool operator==(const Line&, const Line&) = default;
};

/// Immutable after construction through load_grid / make_grid.
class GridModel {
public:
    GridModel() = default;

    [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t num_lines() const noexcept { return lines_.size(); }
    [[nodiscard]] std::size_t num_generators() const noexcept { return generators_.size(); }

    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<Line>& lines() const noexcept { return lines_; }
    [[nodiscard]] const std::vector<GeneratorSpec>& generators() const noexcept { return generators_; }
    [[nodiscard]] std::size_t ref() const noexcept { return ref_; }
    [[nodiscard]] double base_mva() const noexcept { return base_mva_; }

    [[nodiscard]] std::size_t node_index(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw UnknownNode("unknown node '" + id + "'");
        return it->second;
    }

    [[nodiscard]] bool has_node(const std::string& id) const { return index_.count(id) != 0; }

    /// Neighbours of node i, sorted by index.
    [[nodiscard]] const std::vector<std::size_t>& adjacency(std::size_t i) const {
        if (i >= nodes_.size()) throw UnknownNode("node index " + std::to_string(i) + " out of range");
        return adjacency_[i];
    }

    [[nodiscard]] std::set<std::string> adjacency(const std::string& id) const {
        std::set<std::string> out;
        for (auto j : adjacency(node_index(id))) out.insert(nodes_[j]);
        return out;
    }

    /// Generators located at node i.
    [[nodiscard]] std::vector<std::size_t> generators_at(std::size_t i) const {
        std::vector<std::size_t> out;
        for (std::size_t g = 0; g < generators_.size(); ++g)
            if (generators_[g].node == i) out.push_back(g);
        return out;
    }

    friend bool operator==(const GridModel& a, const GridModel& b) {
        return a.nodes_ == b.nodes_ && a.lines_ == b.lines_ && a.generators_ == b.generators_ &&
               a.ref_ == b.ref_ && a.base_mva_ == b.base_mva_;
    }

    friend GridModel make_grid(double, std::vector<std::string>, std::size_t, std::vector<Line>,
                               std::vector<GeneratorSpec>);

private:
    std::vector<std::string> nodes_;
    std::map<std::string, std::size_t> index_;
    std::vector<Line> lines_;
    std::vector<GeneratorSpec> generators_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::size_t ref_{0};
    double base_mva_{100.0};
};

/// Validates and builds a grid. Parallel lines between the same pair are
/// merged (susceptances and limits summed); the first occurrence fixes the
/// orientation.
inline GridModel make_grid(double base_mva, std::vector<std::string> nodes, std::size_t ref,
                           std::vector<Line> lines, std::vector<GeneratorSpec> generators) {
    GridModel g;
    if (!(base_mva > 0.0)) throw ValidationError("base_mva must be positive");
    if (nodes.empty()) throw ValidationError("grid has no nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!g.index_.emplace(nodes[i], i).second)
            throw ValidationError("duplicate node id '" + nodes[i] + "'");
    }
    if (ref >= nodes.size()) throw ValidationError("reference node out of range");

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
    std::vector<Line> merged;
    for (const auto& l : lines) {
        if (l.from >= nodes.size() || l.to >= nodes.size())
            throw ValidationError("line endpoint out of range");
        if (l.from == l.to) throw ValidationError("self-loop line at node '" + nodes[l.from] + "'");
        if (!(l.b_pu > 0.0)) throw ValidationError("line susceptance must be positive");
        if (!(l.s_mw > 0.0)) throw ValidationError("line limit must be positive");
        auto key = std::minmax(l.from, l.to);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, merged.size());
            merged.push_back(l);
        } else {
            merged[it->second].b_pu += l.b_pu;
            merged[it->second].s_mw += l.s_mw;
        }
    }

    std::set<std::string> gen_ids;
    for (const auto& gen : generators) {
        if (!gen_ids.insert(gen.id).second) throw ValidationError("duplicate generator id '" + gen.id + "'");
        if (gen.node >= nodes.size()) throw ValidationError("generator '" + gen.id + "' at unknown node");
        if (!(gen.p_max > 0.0)) throw ValidationError("generator '" + gen.id + "' p_max must be positive");
        if (gen.c2 < 0.0) throw ValidationError("generator '" + gen.id + "' has negative c2");
    }

    g.adjacency_.assign(nodes.size(), {});
    for (const auto& l : merged) {
        g.adjacency_[l.from].push_back(l.to);
        g.adjacency_[l.to].push_back(l.from);
    }
    for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());

    std::vector<bool> reached(nodes.size(), false);
    std::queue<std::size_t> frontier;
    frontier.push(ref);
    reached[ref] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        auto i = frontier.front();
        frontier.pop();
        for (auto j : g.adjacency_[i]) {
            if (!reached[j]) {
                reached[j] = true;
                ++count;
                frontier.push(j);
            }
        }
    }
    if (count != nodes.size()) throw ValidationError("network graph is not connected");

    g.nodes_ = std::move(nodes);
    g.lines_ = std::move(merged);
    g.generators_ = std::move(generators);
    g.ref_ = ref;
    g.base_mva_ = base_mva;
    return g;
}

namespace detail {

inline std::string json_id(const nlohmann::json& v, const char* what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError(std::string(what) + " must be a string or integer");
}

inline double json_number(const nlohmann::json& obj, const char* key, double fallback, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw ParseError(std::string("missing key '") + key + "'");
        return fallback;
    }
    if (!it->is_number()) throw ParseError(std::string("key '") + key + "' must be numeric");
    return it->get<double>();
}

}  // namespace detail

inline GridModel parse_grid(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grid file: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("grid file: top level must be an object");
    for (const char* key : {"nodes", "lines", "generators"})
        if (!doc.contains(key) || !doc[key].is_array())
            throw ParseError(std::string("grid file: '") + key + "' must be a list");

    double base = detail::json_number(doc, "base_mva", 100.0, false);

    std::vector<std::string> nodes;
    std::map<std::string, std::size_t> index;
    std::size_t ref = 0;
    int n_ref = 0;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_object() || !n.contains("id")) throw ParseError("grid file: node entries need an 'id'");
        auto id = detail::json_id(n["id"], "node id");
        if (n.value("ref", false)) {
            ++n_ref;
            ref = nodes.size();
        }
        index.emplace(id, nodes.size());
        nodes.push_back(id);
    }
    if (n_ref != 1) throw ValidationError("grid must have exactly one reference node, found " + std::to_string(n_ref));

    auto lookup = [&](const std::string& id, const std::string& who) {
        auto it = index.find(id);
        if (it == index.end()) throw ValidationError(who + " references unknown node '" + id + "'");
        return it->second;
    };

    std::vector<Line> lines;
    for (const auto& l : doc["lines"]) {
        if (!l.is_object() || !l.contains("from") || !l.contains("to"))
            throw ParseError("grid file: line entries need 'from' and 'to'");
        auto from = detail::json_id(l["from"], "line endpoint");
        auto to = detail::json_id(l["to"], "line endpoint");
        lines.push_back({lookup(from, "line"), lookup(to, "line"), detail::json_number(l, "b_pu", 0, true),
                         detail::json_number(l, "s_mw", 0, true)});
    }

    std::vector<GeneratorSpec> gens;
    for (const auto& g : doc["generators"]) {
        if (!g.is_object() || !g.contains("id") || !g.contains("node"))
            throw ParseError("grid file: generator entries need 'id' and 'node'");
        GeneratorSpec spec;
        spec.id = detail::json_id(g["id"], "generator id");
        spec.node = lookup(detail::json_id(g["node"], "generator node"), "generator '" + spec.id + "'");
        spec.c0 = detail::json_number(g, "c0", 0.0, false);
        spec.c1 = detail::json_number(g, "c1", 0.0, false);
        spec.c2 = detail::json_number(g, "c2", 0.0, false);
        spec.p_max = detail::json_number(g, "p_max", 0.0, true);
        gens.push_back(std::move(spec));
    }
    return make_grid(base, std::move(nodes), ref, std::move(lines), std::move(gens));
}

inline GridModel load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str());
}

inline nlohmann::json grid_to_json(const GridModel& grid) {
    nlohmann::json doc;
    doc["base_mva"] = grid.base_mva();
    doc["nodes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.num_nodes(); ++i)
        doc["nodes"].push_back({{"id", grid.nodes()[i]}, {"ref", i == grid.ref()}});
    doc["lines"] = nlohmann::json::array();
    for (const auto& l : grid.lines())
        doc["lines"].push_back(
            {{"from", grid.nodes()[l.from]}, {"to", grid.nodes()[l.to]}, {"b_pu", l.b_pu}, {"s_mw", l.s_mw}});
    doc["generators"] = nlohmann::json::array();
    for (const auto& g : grid.generators())
        doc["generators"].push_back({{"id", g.id},
                                     {"node", grid.nodes()[g.node]},
                                     {"c0", g.c0},
                                     {"c1", g.c1},
                                     {"c2", g.c2},
                                     {"p_max", g.p_max}});
    return doc;
}

inline void write_grid(const GridModel& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write grid file '" + path + "'");
    out << grid_to_json(grid).dump(2) << '\n';
}

}  // namespace oascen
