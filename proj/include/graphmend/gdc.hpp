#pragma once

// Graph denial constraints: a Cypher-subset parser and a backtracking
// pattern matcher. Every match of the compiled pattern is one violation.
//
// Supported subset: `MATCH <path>(, <path>)* [WHERE <v.k op literal> (AND ...)*] RETURN *`
// with directed left-to-right relationships only. Anything else raises
// UnsupportedFeature.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphmend/property_graph.hpp"

namespace graphmend {

struct NodePattern {
    std::string var;
    std::optional<std::string> label;
};

struct RelPattern {
    std::string var;
    std::optional<std::string> type;
    std::string src;  // node var
    std::string dst;  // node var
};

enum class PredicateOp { Eq, Neq };

struct PropertyPredicate {
    std::string var;
    std::string key;
    PredicateOp op;
    PropertyValue value;
};

struct GdcQuery {
    std::vector<NodePattern> node_patterns;
    std::vector<RelPattern> rel_patterns;
    std::vector<PropertyPredicate> predicates;
    std::string source_text;  // verbatim, for prompt embedding
    bool connected = true;    // pattern variable graph is connected

    bool operator==(const GdcQuery& o) const;
};

struct MatchBinding {
    std::map<std::string, NodeId> node_bindings;
    std::map<std::string, EdgeId> edge_bindings;
    std::string violation_id;  // stable hash of the sorted bindings
};

// Stable id so ledgers and journals can reference a violation across runs.
std::string make_violation_id(const std::map<std::string, NodeId>& node_bindings,
                              const std::map<std::string, EdgeId>& edge_bindings);

GdcQuery parse_gdc(const std::string& text);

// Constraint file: the query plus optional leading `-- name:` / `-- template:`
// comment lines (template lines are joined with newlines).
struct ConstraintFile {
    std::string name;
    std::string template_text;
    GdcQuery query;
};
ConstraintFile parse_constraint_file(const std::string& text);
ConstraintFile load_constraint_file(const std::string& path);

// Complete, duplicate-free enumeration, sorted by violation_id.
// Distinct node vars may bind the same node (homomorphism semantics);
// distinct edge vars always bind distinct edges.
std::vector<MatchBinding> find_violations(const PropertyGraph& g, const GdcQuery& q);

// True iff a match exists whose node bindings agree with `binding` on every
// node var (edge ids are free to differ). Bound node gone => false.
bool violation_still_present(const PropertyGraph& g, const GdcQuery& q,
                             const MatchBinding& binding);

}  // namespace graphmend
