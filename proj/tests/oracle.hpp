#pragma once

// Exhaustive-assignment oracle for pattern matching, independent of the
// production matcher: enumerate every assignment of node variables to nodes,
// then every assignment of rel variables to candidate edges between the bound
// endpoints, and filter by all constraints.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "graphmend/gdc.hpp"

namespace graphmend::testing {

inline bool oracle_value_equals(const PropertyValue& a, const PropertyValue& b) {
    auto num = [](const PropertyValue& v, double& out) {
        if (std::holds_alternative<std::int64_t>(v)) {
            out = static_cast<double>(std::get<std::int64_t>(v));
            return true;
        }
        if (std::holds_alternative<double>(v)) {
            out = std::get<double>(v);
            return true;
        }
        return false;
    };
    double x, y;
    if (num(a, x) && num(b, y)) return x == y;
    return a == b;
}

inline std::vector<MatchBinding> oracle_find(const PropertyGraph& g, const GdcQuery& q) {
    std::vector<std::string> node_vars;
    std::map<std::string, std::vector<std::string>> required_labels;
    for (const auto& np : q.node_patterns) {
        if (std::find(node_vars.begin(), node_vars.end(), np.var) == node_vars.end())
            node_vars.push_back(np.var);
        if (np.label) required_labels[np.var].push_back(*np.label);
    }
    std::vector<NodeId> node_ids;
    for (const auto& [id, n] : g.nodes()) node_ids.push_back(id);
    std::vector<EdgeId> edge_ids;
    for (const auto& [id, e] : g.edges()) edge_ids.push_back(id);

    std::vector<MatchBinding> results;
    std::map<std::string, NodeId> node_assignment;

    std::function<void()> assign_edges = [&]() {
        // all node vars fixed; enumerate per-rel candidate lists
        std::vector<std::vector<EdgeId>> candidates(q.rel_patterns.size());
        for (std::size_t r = 0; r < q.rel_patterns.size(); ++r) {
            const RelPattern& rp = q.rel_patterns[r];
            for (const auto& eid : edge_ids) {
                const Edge& e = g.edge(eid);
                if (rp.type && e.type != *rp.type) continue;
                if (e.src != node_assignment.at(rp.src)) continue;
                if (e.dst != node_assignment.at(rp.dst)) continue;
                candidates[r].push_back(eid);
            }
            if (candidates[r].empty()) return;
        }
        std::vector<std::size_t> pick(q.rel_patterns.size(), 0);
        while (true) {
            std::set<EdgeId> used;
            bool distinct = true;
            for (std::size_t r = 0; r < pick.size(); ++r)
                if (!used.insert(candidates[r][pick[r]]).second) distinct = false;
            if (distinct || pick.empty()) {
                MatchBinding b;
                b.node_bindings = node_assignment;
                for (std::size_t r = 0; r < pick.size(); ++r)
                    b.edge_bindings[q.rel_patterns[r].var] = candidates[r][pick[r]];
                bool preds_ok = true;
                for (const auto& p : q.predicates) {
                    const PropertyMap* props = nullptr;
                    if (b.node_bindings.count(p.var))
                        props = &g.node(b.node_bindings.at(p.var)).properties;
                    else if (b.edge_bindings.count(p.var))
                        props = &g.edge(b.edge_bindings.at(p.var)).properties;
                    if (!props || !props->count(p.key)) {
                        preds_ok = false;
                        break;
                    }
                    bool eq = oracle_value_equals(props->at(p.key), p.value);
                    if (p.op == PredicateOp::Eq ? !eq : eq) {
                        preds_ok = false;
                        break;
                    }
                }
                if (preds_ok) {
                    b.violation_id = make_violation_id(b.node_bindings, b.edge_bindings);
                    results.push_back(std::move(b));
                }
            }
            // odometer
            std::size_t r = 0;
            for (; r < pick.size(); ++r) {
                if (++pick[r] < candidates[r].size()) break;
                pick[r] = 0;
            }
            if (r == pick.size()) break;
            if (pick.empty()) break;
        }
    };

    std::function<void(std::size_t)> assign_nodes = [&](std::size_t idx) {
        if (idx == node_vars.size()) {
            assign_edges();
            return;
        }
        const std::string& var = node_vars[idx];
        for (const auto& id : node_ids) {
            bool ok = true;
            if (auto it = required_labels.find(var); it != required_labels.end())
                for (const auto& l : it->second)
                    if (!g.node(id).labels.count(l)) {
                        ok = false;
                        break;
                    }
            if (!ok) continue;
            node_assignment[var] = id;
            assign_nodes(idx + 1);
        }
        node_assignment.erase(var);
    };

    assign_nodes(0);
    std::sort(results.begin(), results.end(),
              [](const MatchBinding& a, const MatchBinding& b) {
                  if (a.violation_id != b.violation_id)
                      return a.violation_id < b.violation_id;
                  return std::tie(a.node_bindings, a.edge_bindings) <
                         std::tie(b.node_bindings, b.edge_bindings);
              });
    return results;
}

inline bool same_bindings(const std::vector<MatchBinding>& a,
                          const std::vector<MatchBinding>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].node_bindings != b[i].node_bindings ||
            a[i].edge_bindings != b[i].edge_bindings)
            return false;
    return true;
}

// Seeded random graph within the oracle's feasible scale.
inline PropertyGraph random_graph(std::uint64_t seed, int max_nodes = 12,
                                  int max_edges = 20) {
    std::mt19937_64 rng(seed);
    PropertyGraph g;
    const char* labels[] = {"Patient", "Medication", "Ingredient", "Allergy"};
    const char* types[] = {"TAKES_MEDICATION", "HAS_INGREDIENT", "ALLERGIC_TO"};
    int n_nodes = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_nodes));
    std::vector<NodeId> nodes;
    for (int i = 0; i < n_nodes; ++i) {
        std::set<std::string> ls;
        if (rng() % 4 != 0) ls.insert(labels[rng() % 4]);
        PropertyMap props;
        if (rng() % 2 == 0) props["id"] = std::string(1, static_cast<char>('a' + rng() % 5));
        nodes.push_back(g.add_node(ls, props));
    }
    int n_edges = static_cast<int>(rng() % static_cast<std::uint64_t>(max_edges + 1));
    for (int i = 0; i < n_edges; ++i) {
        g.add_edge(nodes[rng() % nodes.size()], nodes[rng() % nodes.size()],
                   types[rng() % 3], {});
    }
    return g;
}

// Random pattern rendered as subset Cypher.
inline std::string random_pattern(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const char* labels[] = {"Patient", "Medication", "Ingredient", "Allergy"};
    const char* types[] = {"TAKES_MEDICATION", "HAS_INGREDIENT", "ALLERGIC_TO"};
    int n_vars = 2 + static_cast<int>(rng() % 2);  // 2..3 node vars
    int n_rels = 1 + static_cast<int>(rng() % 3);  // 1..3 rels
    std::vector<std::string> vars;
    for (int i = 0; i < n_vars; ++i) vars.push_back(std::string(1, static_cast<char>('a' + i)));
    std::string text = "MATCH ";
    for (int r = 0; r < n_rels; ++r) {
        if (r > 0) text += ", ";
        std::string src = vars[rng() % vars.size()];
        std::string dst = vars[rng() % vars.size()];
        std::string src_label = rng() % 3 == 0 ? ":" + std::string(labels[rng() % 4]) : "";
        std::string dst_label = rng() % 3 == 0 ? ":" + std::string(labels[rng() % 4]) : "";
        std::string rel_type = rng() % 4 != 0 ? ":" + std::string(types[rng() % 3]) : "";
        text += "(" + src + src_label + ")-[r" + std::to_string(r) + rel_type + "]->(" +
                dst + dst_label + ")";
    }
    text += " RETURN *";
    return text;
}

}  // namespace graphmend::testing
