#include "graphmend/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

namespace graphmend {

std::string EncodingMode::label() const {
    switch (kind) {
        case EncodingKind::M1NodeEdge: return "m1";
        case EncodingKind::CypherPlusMatch: return "cypher";
        case EncodingKind::Template: return "template";
        case EncodingKind::LlmDescribed: return "llm:" + describer;
    }
    return "?";
}

EncodingMode EncodingMode::parse(const std::string& text) {
    if (text == "m1" || text == "graph") return {EncodingKind::M1NodeEdge, ""};
    if (text == "cypher") return {EncodingKind::CypherPlusMatch, ""};
    if (text == "template") return {EncodingKind::Template, ""};
    if (text.rfind("llm:", 0) == 0) return {EncodingKind::LlmDescribed, text.substr(4)};
    throw ConfigError("unknown encoding mode: " + text);
}

std::string example_mode_label(ExampleMode m) {
    switch (m) {
        case ExampleMode::None: return "none";
        case ExampleMode::OneSmall: return "1-small";
        case ExampleMode::TwoSmall: return "2-small";
        case ExampleMode::OneLarge: return "1-large";
        case ExampleMode::TwoMixed: return "2-mixed";
    }
    return "?";
}

ExampleMode parse_example_mode(const std::string& text) {
    if (text == "none") return ExampleMode::None;
    if (text == "1-small") return ExampleMode::OneSmall;
    if (text == "2-small") return ExampleMode::TwoSmall;
    if (text == "1-large") return ExampleMode::OneLarge;
    if (text == "2-mixed") return ExampleMode::TwoMixed;
    throw ConfigError("unknown example mode: " + text);
}

FewShotExamples FewShotExamples::defaults() {
    FewShotExamples ex;
    ex.small1 = "<repairs>\nDEL_EDGE | [ra] | -\n</repairs>";
    ex.small2 = "<repairs>\nUPD_NODE | [i] | id=oxycodone\n</repairs>";
    ex.large1 =
        "<repairs>\n"
        "DEL_EDGE | [rc] | -\n"
        "UPD_NODE | [m] | description=corrected formulation\n"
        "UPD_NODE | [i] | id=verapamil\n"
        "</repairs>";
    return ex;
}

std::vector<std::string> FewShotExamples::blocks_for(ExampleMode m) const {
    switch (m) {
        case ExampleMode::None: return {};
        case ExampleMode::OneSmall: return {small1};
        case ExampleMode::TwoSmall: return {small1, small2};
        case ExampleMode::OneLarge: return {large1};
        case ExampleMode::TwoMixed: return {small1, large1};
    }
    return {};
}

FewShotExamples FewShotExamples::parse(const std::string& fixture_text) {
    FewShotExamples ex;
    std::istringstream in(fixture_text);
    std::string line;
    std::string* current = nullptr;
    auto trim = [](std::string s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t == "[small-1]") current = &ex.small1;
        else if (t == "[small-2]") current = &ex.small2;
        else if (t == "[large-1]") current = &ex.large1;
        else if (current) {
            if (!current->empty()) *current += "\n";
            *current += line;
        }
    }
    FewShotExamples def = defaults();
    if (ex.small1.empty()) ex.small1 = def.small1;
    if (ex.small2.empty()) ex.small2 = def.small2;
    if (ex.large1.empty()) ex.large1 = def.large1;
    ex.small1 = trim(ex.small1);
    ex.small2 = trim(ex.small2);
    ex.large1 = trim(ex.large1);
    return ex;
}

FewShotExamples FewShotExamples::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open examples fixture: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

namespace {

constexpr std::size_t kValueElideLimit = 200;

std::string render_value(const PropertyValue& v) {
    std::string s = to_display(v);
    if (s.size() > kValueElideLimit) {
        s.resize(kValueElideLimit);
        s += "...";
    }
    return s;
}

std::string render_props(const PropertyMap& props) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : props) {
        if (!first) out += ", ";
        first = false;
        out += k + ": " + render_value(v);
    }
    out += "}";
    return out;
}

}  // namespace

std::string encode_m1(const PropertyGraph& g, const MatchBinding& binding) {
    std::string out;
    for (const auto& [var, id] : binding.node_bindings) {
        if (!g.has_node(id)) throw UnboundVariable(var);
        const Node& n = g.node(id);
        std::string labels = "{";
        bool first = true;
        for (const auto& l : n.labels) {
            if (!first) labels += ", ";
            first = false;
            labels += l;
        }
        labels += "}";
        out += "Node " + var + ":" + id + " labels: " + labels +
               ", properties: " + render_props(n.properties) + "\n";
    }
    for (const auto& [var, id] : binding.edge_bindings) {
        if (!g.has_edge(id)) throw UnboundVariable(var);
        const Edge& e = g.edge(id);
        out += "Edge " + var + ":" + e.src + " -> " + e.dst + " type: " + e.type + " " +
               render_props(e.properties) + "\n";
    }
    return out;
}

std::string encode_m2(const std::string& template_text, const PropertyGraph& g,
                      const MatchBinding& binding) {
    static const std::regex placeholder(R"(\{([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\})");
    std::string out;
    auto begin = std::sregex_iterator(template_text.begin(), template_text.end(), placeholder);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        out += template_text.substr(last, static_cast<std::size_t>(m.position()) - last);
        std::string var = m[1].str(), key = m[2].str();
        const PropertyMap* props = nullptr;
        if (auto n = binding.node_bindings.find(var); n != binding.node_bindings.end() &&
                                                      g.has_node(n->second))
            props = &g.node(n->second).properties;
        else if (auto e = binding.edge_bindings.find(var);
                 e != binding.edge_bindings.end() && g.has_edge(e->second))
            props = &g.edge(e->second).properties;
        if (!props) throw MissingPlaceholder(var, key);
        auto p = props->find(key);
        if (p == props->end()) throw MissingPlaceholder(var, key);
        out += to_display(p->second);
        last = static_cast<std::size_t>(m.position() + m.length());
    }
    out += template_text.substr(last);
    return out;
}

std::string encode_m3(Gateway& gateway, const std::string& describer_model,
                      const PropertyGraph& g, const MatchBinding& binding,
                      EncodingCost* cost) {
    std::string m1 = encode_m1(g, binding);
    ModelConfig cfg;
    cfg.name = describer_model;
    std::string system =
        "You translate graph data into plain English. Given a node-edge listing of a "
        "subgraph, write a short natural language description of the inconsistency it "
        "shows. Respond with the description only.";
    GenerationResult r =
        gateway.generate(cfg, system, m1, "m3:" + binding.violation_id);
    if (cost) {
        cost->seconds = r.eval_seconds;
        cost->tokens = r.completion_tokens;
        cost->words = estimate_tokens(r.text);
        cost->lines = static_cast<long>(std::count(r.text.begin(), r.text.end(), '\n')) + 1;
        cost->estimated = r.estimated;
    }
    return r.text;
}

const std::string kOutputFormatSpec =
    "Provide the repairs in the following structured format:\n"
    "\n"
    "<repairs>\n"
    "{op_code} | {target} | {details}\n"
    "</repairs>\n"
    "\n"
    "Each line is one repair operation. `op_code` is one of the allowed operations, "
    "`target` is the affected node or relationship variable from the inconsistency "
    "description, and `details` contains property changes as key=value pairs, or `-` "
    "if there are none.";

namespace {

std::string input_description(const EncodingMode& mode) {
    switch (mode.kind) {
        case EncodingKind::M1NodeEdge:
            return "1. A node-edge listing of an inconsistent subgraph.";
        case EncodingKind::CypherPlusMatch:
            return "1. A Cypher query describing a constraint that must never match.\n"
                   "2. A node-edge listing of one match, i.e. one inconsistency.";
        case EncodingKind::Template:
            return "1. A Cypher query describing a constraint that must never match.\n"
                   "2. A textual description of one inconsistency.";
        case EncodingKind::LlmDescribed:
            return "1. A Cypher query describing a constraint that must never match.\n"
                   "2. A natural language description of one inconsistency.";
    }
    return "";
}

const char* kSystemPromptTemplate =
    "You are an AI assistant for Graph Repair. Your task is to identify factual "
    "inconsistencies and suggest corrections using structured graph operations.\n"
    "\n"
    "You will receive:\n"
    "{INPUT_DESCRIPTION}\n"
    "\n"
    "Allowed repair operations:\n"
    "1. `ADD_NODE` - Add a new node\n"
    "2. `DEL_NODE` - Remove a node\n"
    "3. `ADD_EDGE` - Add a new edge between nodes\n"
    "4. `DEL_EDGE` - Remove an existing edge\n"
    "5. `UPD_NODE` - Modify a node's properties\n"
    "6. `UPD_EDGE` - Modify an edge's properties\n"
    "\n"
    "Suggest only factually accurate repairs. Use the provided format for output. "
    "Keep the suggested number of repair operations small.";

}  // namespace

PromptBundle build_prompt(const GdcQuery& gdc, const PropertyGraph& g,
                          const MatchBinding& binding, const EncodingMode& encoding,
                          ExampleMode example_mode, const PromptContext& ctx) {
    PromptBundle bundle;
    bundle.encoding = encoding;
    bundle.examples = example_mode;
    bundle.violation_id = binding.violation_id;

    std::string system = kSystemPromptTemplate;
    const std::string marker = "{INPUT_DESCRIPTION}";
    system.replace(system.find(marker), marker.size(), input_description(encoding));
    bundle.system = system;

    std::string enc_text;
    switch (encoding.kind) {
        case EncodingKind::M1NodeEdge:
        case EncodingKind::CypherPlusMatch:
            enc_text = encode_m1(g, binding);
            break;
        case EncodingKind::Template:
            if (ctx.template_text.empty())
                throw ConfigError("template encoding selected but no template configured");
            enc_text = encode_m2(ctx.template_text, g, binding);
            break;
        case EncodingKind::LlmDescribed:
            if (!ctx.m3_encoder)
                throw ConfigError("llm encoding selected but no describer available");
            enc_text = ctx.m3_encoder(encoding.describer, g, binding);
            break;
    }

    std::string user;
    if (encoding.includes_cypher()) user += "Constraint query:\n" + gdc.source_text + "\n\n";
    user += "Inconsistency:\n" + enc_text;
    if (!user.empty() && user.back() != '\n') user += "\n";
    user += "\n" + kOutputFormatSpec + "\n";
    std::vector<std::string> blocks = ctx.examples.blocks_for(example_mode);
    if (!blocks.empty()) {
        user += "\nExamples of potential repairs:\n";
        for (const auto& b : blocks) user += "\n" + b + "\n";
    }
    bundle.user = user;
    bundle.char_count = bundle.system.size() + bundle.user.size();
    return bundle;
}

}  // namespace graphmend
