#pragma once

// Repair DSL: extracts `<repairs>` blocks from model responses, classifies
// format adherence, applies scripts to a graph snapshot and scores them
// against ground truth.

#include <string>
#include <utility>
#include <vector>

#include "graphmend/gdc.hpp"

namespace graphmend {

enum class OpCode { AddNode, DelNode, AddEdge, DelEdge, UpdNode, UpdEdge, Invalid };

std::string op_code_label(OpCode c);

struct RepairOp {
    OpCode code = OpCode::Invalid;
    std::string raw_code;  // verbatim token, kept for distribution reporting
    std::string target;    // raw field, brackets not yet stripped
    std::vector<std::pair<std::string, std::string>> details;  // ordered key=value pairs
};

struct RepairScript {
    std::vector<RepairOp> ops;
    bool format_ok = false;
    std::string raw_block;
    std::size_t response_chars = 0;
    std::size_t repair_chars = 0;
    int extra_blocks = 0;  // blocks beyond the first; the indecision signal
};

// Never throws; failures are encoded in format_ok.
RepairScript parse_response(const std::string& response);

// Canonical text of a script's block, parseable by parse_response.
std::string serialize(const RepairScript& script);

struct ResolvedTarget {
    enum Kind { NodeRef, EdgeRef, FreshVar } kind;
    std::string id;  // node/edge id, or the fresh variable name
};

// Registers fresh variables created by ADD_NODE / ADD_EDGE within one script.
struct TargetScope {
    std::map<std::string, NodeId> fresh_nodes;
    std::map<std::string, EdgeId> fresh_edges;
};

ResolvedTarget resolve_target(const std::string& target, const MatchBinding& binding,
                              const PropertyGraph& g, const TargetScope* scope = nullptr);

struct ApplyResult {
    PropertyGraph graph;
    int applied_count = 0;
    std::vector<std::string> errors;  // one entry per failed op, ops never abort
};

ApplyResult apply_script(const PropertyGraph& g, const MatchBinding& binding,
                         const RepairScript& script);

struct GroundTruthRepair {
    std::string violation_id;
    std::string edge_var;  // "ra" or "rc"
    EdgeId edge_id;
};

struct Score {
    int format = 0;
    int validity = 0;
    int accuracy = 0;
};

// F = format_ok; V = F and the violation is gone after applying the script;
// A = F and the script is exactly one DEL_EDGE of the ground-truth edge
// (details ignored, target compared by resolved identity).
Score score(const PropertyGraph& g, const GdcQuery& gdc, const MatchBinding& binding,
            const RepairScript& script, const GroundTruthRepair& ground_truth);

}  // namespace graphmend
