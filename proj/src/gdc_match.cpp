#include <algorithm>
#include <functional>
#include <set>

#include "graphmend/gdc.hpp"

namespace graphmend {

namespace {

std::string canonical_binding(const std::map<std::string, NodeId>& nodes,
                              const std::map<std::string, EdgeId>& edges) {
    std::string s = "n:";
    for (const auto& [var, id] : nodes) s += var + "=" + id + ";";
    s += "|e:";
    for (const auto& [var, id] : edges) s += var + "=" + id + ";";
    return s;
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

bool numeric_equal(const PropertyValue& a, const PropertyValue& b) {
    auto as_double = [](const PropertyValue& v, double& out) {
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
    double da, db;
    if (as_double(a, da) && as_double(b, db)) return da == db;
    return a == b;
}

struct Step {
    enum Kind { Rel, FreeNode } kind;
    int rel_index = -1;        // into plan rels
    std::string node_var;      // for FreeNode
};

// Shared match-semantics kernel: required labels per var, rel plan ordered for
// connectivity, optional pinned node vars.
class Matcher {
public:
    Matcher(const PropertyGraph& g, const GdcQuery& q,
            const std::map<std::string, NodeId>* pins)
        : g_(g), q_(q), pins_(pins) {
        for (const auto& np : q.node_patterns) {
            auto& req = labels_[np.var];
            if (np.label && std::find(req.begin(), req.end(), *np.label) == req.end())
                req.push_back(*np.label);
        }
        plan_ = make_plan();
    }

    // Returns false from the callback to keep enumerating, true to stop early.
    bool enumerate(const std::function<bool(const MatchBinding&)>& on_match) {
        MatchBinding b;
        std::set<EdgeId> used;
        return recurse(0, b, used, on_match);
    }

private:
    std::vector<Step> make_plan() {
        std::vector<Step> plan;
        std::vector<bool> done(q_.rel_patterns.size(), false);
        std::set<std::string> bound_vars;
        for (std::size_t placed = 0; placed < q_.rel_patterns.size(); ++placed) {
            int pick = -1;
            for (std::size_t i = 0; i < q_.rel_patterns.size(); ++i) {
                if (done[i]) continue;
                const auto& r = q_.rel_patterns[i];
                if (bound_vars.empty() || bound_vars.count(r.src) ||
                    bound_vars.count(r.dst)) {
                    pick = static_cast<int>(i);
                    break;
                }
            }
            if (pick < 0) {  // disconnected pattern: start a new component
                for (std::size_t i = 0; i < q_.rel_patterns.size(); ++i)
                    if (!done[i]) {
                        pick = static_cast<int>(i);
                        break;
                    }
            }
            done[pick] = true;
            bound_vars.insert(q_.rel_patterns[pick].src);
            bound_vars.insert(q_.rel_patterns[pick].dst);
            plan.push_back({Step::Rel, pick, ""});
        }
        for (const auto& np : q_.node_patterns)
            if (!bound_vars.count(np.var)) {
                bound_vars.insert(np.var);
                plan.push_back({Step::FreeNode, -1, np.var});
            }
        return plan;
    }

    bool node_ok(const std::string& var, const NodeId& id) const {
        if (pins_) {
            auto p = pins_->find(var);
            if (p != pins_->end() && p->second != id) return false;
        }
        const Node& n = g_.node(id);
        auto it = labels_.find(var);
        if (it != labels_.end())
            for (const auto& l : it->second)
                if (!n.labels.count(l)) return false;
        return true;
    }

    bool bind_node(const std::string& var, const NodeId& id, MatchBinding& b) const {
        auto it = b.node_bindings.find(var);
        if (it != b.node_bindings.end()) return it->second == id;
        if (!node_ok(var, id)) return false;
        b.node_bindings.emplace(var, id);
        return true;
    }

    bool predicates_hold(const MatchBinding& b) const {
        for (const auto& p : q_.predicates) {
            const PropertyMap* props = nullptr;
            if (auto n = b.node_bindings.find(p.var); n != b.node_bindings.end())
                props = &g_.node(n->second).properties;
            else if (auto e = b.edge_bindings.find(p.var); e != b.edge_bindings.end())
                props = &g_.edge(e->second).properties;
            if (!props) return false;
            auto it = props->find(p.key);
            if (it == props->end()) return false;  // null comparisons never hold
            bool eq = numeric_equal(it->second, p.value);
            if (p.op == PredicateOp::Eq ? !eq : eq) return false;
        }
        return true;
    }

    bool recurse(std::size_t depth, MatchBinding& b, std::set<EdgeId>& used,
                 const std::function<bool(const MatchBinding&)>& on_match) {
        if (depth == plan_.size()) {
            if (!predicates_hold(b)) return false;
            MatchBinding out = b;
            out.violation_id = make_violation_id(out.node_bindings, out.edge_bindings);
            return on_match(out);
        }
        const Step& st = plan_[depth];
        if (st.kind == Step::FreeNode) {
            for (const auto& [id, n] : g_.nodes()) {
                MatchBinding saved = b;
                if (bind_node(st.node_var, id, b)) {
                    if (recurse(depth + 1, b, used, on_match)) return true;
                }
                b = std::move(saved);
            }
            return false;
        }
        const RelPattern& r = q_.rel_patterns[st.rel_index];
        for (const auto& [id, e] : g_.edges()) {
            if (used.count(id)) continue;
            if (r.type && e.type != *r.type) continue;
            MatchBinding saved = b;
            if (bind_node(r.src, e.src, b) && bind_node(r.dst, e.dst, b)) {
                b.edge_bindings.emplace(r.var, id);
                used.insert(id);
                bool stop = recurse(depth + 1, b, used, on_match);
                used.erase(id);
                if (stop) return true;
            }
            b = std::move(saved);
        }
        return false;
    }

    const PropertyGraph& g_;
    const GdcQuery& q_;
    const std::map<std::string, NodeId>* pins_;
    std::map<std::string, std::vector<std::string>> labels_;
    std::vector<Step> plan_;
};

}  // namespace

std::string make_violation_id(const std::map<std::string, NodeId>& node_bindings,
                              const std::map<std::string, EdgeId>& edge_bindings) {
    return fnv1a_hex(canonical_binding(node_bindings, edge_bindings));
}

std::vector<MatchBinding> find_violations(const PropertyGraph& g, const GdcQuery& q) {
    std::vector<MatchBinding> out;
    Matcher(g, q, nullptr).enumerate([&](const MatchBinding& b) {
        out.push_back(b);
        return false;
    });
    std::sort(out.begin(), out.end(), [](const MatchBinding& a, const MatchBinding& b) {
        if (a.violation_id != b.violation_id) return a.violation_id < b.violation_id;
        return canonical_binding(a.node_bindings, a.edge_bindings) <
               canonical_binding(b.node_bindings, b.edge_bindings);
    });
    return out;
}

bool violation_still_present(const PropertyGraph& g, const GdcQuery& q,
                             const MatchBinding& binding) {
    std::map<std::string, NodeId> pins;
    for (const auto& np : q.node_patterns) {
        auto it = binding.node_bindings.find(np.var);
        if (it == binding.node_bindings.end()) continue;
        if (!g.has_node(it->second)) return false;
        pins.emplace(np.var, it->second);
    }
    bool found = false;
    Matcher(g, q, &pins).enumerate([&](const MatchBinding&) {
        found = true;
        return true;
    });
    return found;
}

}  // namespace graphmend
