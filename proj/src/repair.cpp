#include "graphmend/repair.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace graphmend {

std::string op_code_label(OpCode c) {
    switch (c) {
        case OpCode::AddNode: return "ADD_NODE";
        case OpCode::DelNode: return "DEL_NODE";
        case OpCode::AddEdge: return "ADD_EDGE";
        case OpCode::DelEdge: return "DEL_EDGE";
        case OpCode::UpdNode: return "UPD_NODE";
        case OpCode::UpdEdge: return "UPD_EDGE";
        case OpCode::Invalid: return "INVALID";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Finds `<tag>` allowing whitespace inside the brackets, case-insensitive.
// Returns position of '<' or npos; `end` receives the position past '>'.
std::size_t find_tag(const std::string& text, const std::string& tag, std::size_t from,
                     std::size_t* end) {
    bool closing = !tag.empty() && tag.front() == '/';
    std::string name = closing ? tag.substr(1) : tag;
    std::string low = lower(text);
    for (std::size_t i = from; (i = low.find('<', i)) != std::string::npos; ++i) {
        std::size_t j = i + 1;
        while (j < low.size() && std::isspace(static_cast<unsigned char>(low[j]))) ++j;
        if (closing) {
            if (j >= low.size() || low[j] != '/') continue;
            ++j;
            while (j < low.size() && std::isspace(static_cast<unsigned char>(low[j]))) ++j;
        }
        const std::string& tag_name = closing ? name : tag;
        if (low.compare(j, tag_name.size(), tag_name) != 0) continue;
        j += tag_name.size();
        while (j < low.size() && std::isspace(static_cast<unsigned char>(low[j]))) ++j;
        if (j < low.size() && low[j] == '>') {
            *end = j + 1;
            return i;
        }
    }
    return std::string::npos;
}

OpCode code_from_token(const std::string& token) {
    if (token == "ADD_NODE") return OpCode::AddNode;
    if (token == "DEL_NODE") return OpCode::DelNode;
    if (token == "ADD_EDGE") return OpCode::AddEdge;
    if (token == "DEL_EDGE") return OpCode::DelEdge;
    if (token == "UPD_NODE") return OpCode::UpdNode;
    if (token == "UPD_EDGE") return OpCode::UpdEdge;
    return OpCode::Invalid;
}

std::vector<std::pair<std::string, std::string>> parse_details(const std::string& field) {
    std::vector<std::pair<std::string, std::string>> out;
    if (field == "-" || field.empty()) return out;
    // comma-separated pairs; values may contain spaces
    std::size_t start = 0;
    while (start <= field.size()) {
        std::size_t comma = field.find(',', start);
        std::string token =
            trim(comma == std::string::npos ? field.substr(start)
                                            : field.substr(start, comma - start));
        if (!token.empty()) {
            std::size_t eq = token.find('=');
            if (eq == std::string::npos) {
                out.emplace_back(token, "");
            } else {
                out.emplace_back(trim(token.substr(0, eq)), trim(token.substr(eq + 1)));
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

RepairScript parse_response(const std::string& response) {
    RepairScript script;
    script.response_chars = response.size();

    std::size_t open_end = 0;
    std::size_t open = find_tag(response, "repairs", 0, &open_end);
    if (open == std::string::npos) return script;  // no block, format_ok stays false

    std::size_t close_end = 0;
    std::size_t close = find_tag(response, "/repairs", open_end, &close_end);
    if (close == std::string::npos) return script;

    script.raw_block = response.substr(open, close_end - open);
    script.repair_chars = script.raw_block.size();

    // count additional blocks (the indecision signal)
    std::size_t scan = close_end;
    while (true) {
        std::size_t e = 0;
        std::size_t next = find_tag(response, "repairs", scan, &e);
        if (next == std::string::npos) break;
        std::size_t ce = 0;
        if (find_tag(response, "/repairs", e, &ce) == std::string::npos) break;
        ++script.extra_blocks;
        scan = ce;
    }

    bool all_lines_ok = true;
    std::istringstream in(response.substr(open_end, close - open_end));
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t bar = t.find('|', start);
            if (bar == std::string::npos) {
                fields.push_back(trim(t.substr(start)));
                break;
            }
            fields.push_back(trim(t.substr(start, bar - start)));
            start = bar + 1;
        }
        RepairOp op;
        if (fields.size() != 3) {
            all_lines_ok = false;
            op.code = OpCode::Invalid;
            op.raw_code = fields.empty() ? t : fields[0];
            op.target = fields.size() > 1 ? fields[1] : "";
        } else {
            op.raw_code = fields[0];
            op.code = code_from_token(fields[0]);
            if (op.code == OpCode::Invalid) all_lines_ok = false;
            op.target = fields[1];
            op.details = parse_details(fields[2]);
        }
        script.ops.push_back(std::move(op));
    }

    script.format_ok = !script.ops.empty() && all_lines_ok;
    return script;
}

std::string serialize(const RepairScript& script) {
    std::string out = "<repairs>\n";
    for (const auto& op : script.ops) {
        out += (op.code == OpCode::Invalid ? op.raw_code : op_code_label(op.code));
        out += " | " + op.target + " | ";
        if (op.details.empty()) {
            out += "-";
        } else {
            bool first = true;
            for (const auto& [k, v] : op.details) {
                if (!first) out += ", ";
                first = false;
                out += v.empty() ? k : k + "=" + v;
            }
        }
        out += "\n";
    }
    out += "</repairs>";
    return out;
}

ResolvedTarget resolve_target(const std::string& target, const MatchBinding& binding,
                              const PropertyGraph& g, const TargetScope* scope) {
    std::string name = trim(target);
    if (name.size() >= 2 && name.front() == '[' && name.back() == ']')
        name = trim(name.substr(1, name.size() - 2));
    if (name.empty()) throw UnresolvableTarget(target);

    if (auto e = binding.edge_bindings.find(name); e != binding.edge_bindings.end())
        return {ResolvedTarget::EdgeRef, e->second};
    if (auto n = binding.node_bindings.find(name); n != binding.node_bindings.end())
        return {ResolvedTarget::NodeRef, n->second};
    if (scope) {
        if (auto e = scope->fresh_edges.find(name); e != scope->fresh_edges.end())
            return {ResolvedTarget::EdgeRef, e->second};
        if (auto n = scope->fresh_nodes.find(name); n != scope->fresh_nodes.end())
            return {ResolvedTarget::NodeRef, n->second};
    }
    // raw object ids are accepted as-is
    if (g.has_edge(name)) return {ResolvedTarget::EdgeRef, name};
    if (g.has_node(name)) return {ResolvedTarget::NodeRef, name};
    throw UnresolvableTarget(target);
}

namespace {

PropertyMap details_to_props(const std::vector<std::pair<std::string, std::string>>& details,
                             std::set<std::string>* skip_keys = nullptr) {
    PropertyMap props;
    for (const auto& [k, v] : details) {
        if (skip_keys && skip_keys->count(k)) continue;
        props[k] = v;
    }
    return props;
}

std::string strip_brackets(const std::string& s) {
    std::string t = trim(s);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']')
        t = trim(t.substr(1, t.size() - 2));
    return t;
}

}  // namespace

ApplyResult apply_script(const PropertyGraph& g, const MatchBinding& binding,
                         const RepairScript& script) {
    ApplyResult result;
    result.graph = g.snapshot();
    TargetScope scope;

    for (std::size_t i = 0; i < script.ops.size(); ++i) {
        const RepairOp& op = script.ops[i];
        try {
            switch (op.code) {
                case OpCode::AddNode: {
                    std::set<std::string> labels;
                    std::set<std::string> meta{"label"};
                    for (const auto& [k, v] : op.details)
                        if (k == "label" && !v.empty()) labels.insert(v);
                    NodeId id = result.graph.add_node(labels, details_to_props(op.details, &meta));
                    std::string var = strip_brackets(op.target);
                    if (!var.empty()) scope.fresh_nodes[var] = id;
                    break;
                }
                case OpCode::AddEdge: {
                    std::string src_var, dst_var, type;
                    std::set<std::string> meta{"src", "dst", "type"};
                    for (const auto& [k, v] : op.details) {
                        if (k == "src") src_var = v;
                        else if (k == "dst") dst_var = v;
                        else if (k == "type") type = v;
                    }
                    if (src_var.empty() || dst_var.empty() || type.empty())
                        throw Error("ADD_EDGE requires src=, dst= and type= details");
                    ResolvedTarget src = resolve_target(src_var, binding, result.graph, &scope);
                    ResolvedTarget dst = resolve_target(dst_var, binding, result.graph, &scope);
                    if (src.kind != ResolvedTarget::NodeRef || dst.kind != ResolvedTarget::NodeRef)
                        throw Error("ADD_EDGE endpoints must be nodes");
                    EdgeId id = result.graph.add_edge(src.id, dst.id, type,
                                                      details_to_props(op.details, &meta));
                    std::string var = strip_brackets(op.target);
                    if (!var.empty()) scope.fresh_edges[var] = id;
                    break;
                }
                case OpCode::DelNode: {
                    ResolvedTarget t = resolve_target(op.target, binding, result.graph, &scope);
                    if (t.kind != ResolvedTarget::NodeRef) throw Error("DEL_NODE target is not a node");
                    result.graph.del_node(t.id);
                    break;
                }
                case OpCode::DelEdge: {
                    ResolvedTarget t = resolve_target(op.target, binding, result.graph, &scope);
                    if (t.kind != ResolvedTarget::EdgeRef) throw Error("DEL_EDGE target is not an edge");
                    result.graph.del_edge(t.id);
                    break;
                }
                case OpCode::UpdNode: {
                    ResolvedTarget t = resolve_target(op.target, binding, result.graph, &scope);
                    if (t.kind != ResolvedTarget::NodeRef) throw Error("UPD_NODE target is not a node");
                    result.graph.upd_node(t.id, details_to_props(op.details));
                    break;
                }
                case OpCode::UpdEdge: {
                    ResolvedTarget t = resolve_target(op.target, binding, result.graph, &scope);
                    if (t.kind != ResolvedTarget::EdgeRef) throw Error("UPD_EDGE target is not an edge");
                    result.graph.upd_edge(t.id, details_to_props(op.details));
                    break;
                }
                case OpCode::Invalid:
                    throw Error("invalid op code: " + op.raw_code);
            }
            ++result.applied_count;
        } catch (const std::exception& e) {
            result.errors.push_back("op " + std::to_string(i) + " (" + op.raw_code +
                                    "): " + e.what());
        }
    }
    return result;
}

Score score(const PropertyGraph& g, const GdcQuery& gdc, const MatchBinding& binding,
            const RepairScript& script, const GroundTruthRepair& ground_truth) {
    Score s;
    s.format = script.format_ok ? 1 : 0;
    if (!s.format) return s;

    ApplyResult applied = apply_script(g, binding, script);
    s.validity = violation_still_present(applied.graph, gdc, binding) ? 0 : 1;

    // exact match: one op, DEL_EDGE, resolving to the ground-truth edge
    if (script.ops.size() == 1 && script.ops[0].code == OpCode::DelEdge) {
        try {
            ResolvedTarget t = resolve_target(script.ops[0].target, binding, g);
            if (t.kind == ResolvedTarget::EdgeRef && t.id == ground_truth.edge_id)
                s.accuracy = 1;
        } catch (const UnresolvableTarget&) {
        }
    }
    return s;
}

}  // namespace graphmend
