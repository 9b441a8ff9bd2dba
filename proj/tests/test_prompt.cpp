#include <doctest.h>

#include <sstream>

#include "graphmend/prompt.hpp"
#include "graphmend/synthea.hpp"

using namespace graphmend;

namespace {

// p takes Epogen which contains oxycodone; p is allergic to oxycodone.
struct Fixture {
    PropertyGraph g;
    MatchBinding binding;
    GdcQuery query;

    Fixture() {
        NodeId p = g.add_node({"Patient"}, {{"first", std::string("Sanford861")},
                                            {"last", std::string("Fritsch593")}});
        NodeId m = g.add_node({"Medication"},
                              {{"description", std::string("1 ML Epogen 4000 UNT/ML Injection")}});
        NodeId i = g.add_node({"Ingredient"}, {{"id", std::string("oxycodone")}});
        EdgeId rm = g.add_edge(p, m, "TAKES_MEDICATION", {});
        EdgeId rc = g.add_edge(m, i, "HAS_INGREDIENT", {});
        EdgeId ra = g.add_edge(p, i, "ALLERGIC_TO", {});
        binding.node_bindings = {{"p", p}, {"m", m}, {"i", i}};
        binding.edge_bindings = {{"rm", rm}, {"rc", rc}, {"ra", ra}};
        binding.violation_id = make_violation_id(binding.node_bindings, binding.edge_bindings);
        query = parse_constraint_file(kDefaultConstraintFile).query;
    }
};

int count_occurrences(const std::string& haystack, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("encoding mode parse and label round trip") {
    CHECK(EncodingMode::parse("m1").kind == EncodingKind::M1NodeEdge);
    CHECK(EncodingMode::parse("graph").kind == EncodingKind::M1NodeEdge);
    CHECK(EncodingMode::parse("cypher").kind == EncodingKind::CypherPlusMatch);
    CHECK(EncodingMode::parse("template").kind == EncodingKind::Template);
    EncodingMode llm = EncodingMode::parse("llm:mistral");
    CHECK(llm.kind == EncodingKind::LlmDescribed);
    CHECK(llm.describer == "mistral");
    for (const char* t : {"m1", "cypher", "template", "llm:qwen2.5"})
        CHECK(EncodingMode::parse(EncodingMode::parse(t).label()) == EncodingMode::parse(t));
    CHECK_FALSE(EncodingMode::parse("m1").includes_cypher());
    CHECK(EncodingMode::parse("template").includes_cypher());
    CHECK_THROWS_AS(EncodingMode::parse("m4"), ConfigError);
}

TEST_CASE("example mode labels round trip") {
    for (ExampleMode m : {ExampleMode::None, ExampleMode::OneSmall, ExampleMode::TwoSmall,
                          ExampleMode::OneLarge, ExampleMode::TwoMixed})
        CHECK(parse_example_mode(example_mode_label(m)) == m);
    CHECK_THROWS_AS(parse_example_mode("3-small"), ConfigError);
}

TEST_CASE("m1 lists nodes then edges, sorted, deterministic") {
    Fixture f;
    std::string m1 = encode_m1(f.g, f.binding);
    CHECK(m1 == encode_m1(f.g, f.binding));

    // 3 node lines then 3 edge lines, vars in sorted order
    std::vector<std::string> lines;
    std::istringstream in(m1);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == f.binding.node_bindings.size() + f.binding.edge_bindings.size());
    CHECK(lines[0].rfind("Node i:", 0) == 0);
    CHECK(lines[1].rfind("Node m:", 0) == 0);
    CHECK(lines[2].rfind("Node p:", 0) == 0);
    CHECK(lines[3].rfind("Edge ra:", 0) == 0);
    CHECK(lines[4].rfind("Edge rc:", 0) == 0);
    CHECK(lines[5].rfind("Edge rm:", 0) == 0);

    CHECK(lines[2].find("labels: {Patient}") != std::string::npos);
    CHECK(lines[2].find("first: Sanford861") != std::string::npos);
    NodeId m_id = f.binding.node_bindings.at("m");
    NodeId i_id = f.binding.node_bindings.at("i");
    CHECK(lines[4].find(m_id + " -> " + i_id + " type: HAS_INGREDIENT") != std::string::npos);

    // property keys sorted within a line
    CHECK(lines[2].find("first:") < lines[2].find("last:"));
}

TEST_CASE("m1 elides long values and rejects dangling bindings") {
    PropertyGraph g;
    NodeId n = g.add_node({"X"}, {{"blob", std::string(500, 'x')}});
    MatchBinding b;
    b.node_bindings = {{"a", n}};
    std::string m1 = encode_m1(g, b);
    CHECK(m1.find(std::string(200, 'x') + "...") != std::string::npos);
    CHECK(m1.find(std::string(201, 'x')) == std::string::npos);

    MatchBinding bad;
    bad.node_bindings = {{"a", "404"}};
    CHECK_THROWS_AS(encode_m1(g, bad), UnboundVariable);
}

TEST_CASE("m2 reproduces the template paragraph") {
    Fixture f;
    ConstraintFile cf = parse_constraint_file(kDefaultConstraintFile);
    std::string text = encode_m2(cf.template_text, f.g, f.binding);
    CHECK(text ==
          "A person should not be treated with a medicine that contains an ingredient "
          "that the person is allergic to. However, a person (p) (p.first=Sanford861) "
          "takes a medicine (m) (m.description=1 ML Epogen 4000 UNT/ML Injection) which "
          "contains an ingredient (i) (i.id=oxycodone) and (p) is allergic to (i).");
}

TEST_CASE("m2 placeholder handling") {
    Fixture f;
    CHECK(encode_m2("no placeholders here", f.g, f.binding) == "no placeholders here");
    CHECK(encode_m2("{i.id}/{i.id}", f.g, f.binding) == "oxycodone/oxycodone");
    CHECK_THROWS_AS(encode_m2("{q.first}", f.g, f.binding), MissingPlaceholder);
    CHECK_THROWS_AS(encode_m2("{p.missing_key}", f.g, f.binding), MissingPlaceholder);
    try {
        encode_m2("{p.missing_key}", f.g, f.binding);
    } catch (const MissingPlaceholder& e) {
        CHECK(std::string(e.what()).find("missing_key") != std::string::npos);
    }
    // `{p.first}`-shaped text only; braces without var.key pass through
    CHECK(encode_m2("{not a placeholder}", f.g, f.binding) == "{not a placeholder}");
}

TEST_CASE("m3 goes through the gateway and reports cost") {
    Fixture f;
    Gateway gw;
    gw.register_mock("describer", mocks::fixed_text("The patient takes a conflicting drug."));
    EncodingCost cost;
    std::string text = encode_m3(gw, "describer", f.g, f.binding, &cost);
    CHECK(text == "The patient takes a conflicting drug.");
    CHECK(cost.tokens > 0);
    CHECK(cost.seconds > 0.0);
    CHECK(cost.words == 6);
    CHECK(cost.lines == 1);
    CHECK(cost.estimated);

    // describer sees the M1 listing as its user prompt
    gw.register_mock("echo", mocks::echo());
    std::string echoed = encode_m3(gw, "echo", f.g, f.binding);
    CHECK(echoed == encode_m1(f.g, f.binding));
}

TEST_CASE("few shot fixture parsing") {
    FewShotExamples ex = FewShotExamples::parse(
        "[small-1]\n<repairs>\nDEL_EDGE | [x] | -\n</repairs>\n"
        "[large-1]\n<repairs>\nADD_NODE | [n] | label=Ingredient\n</repairs>\n");
    CHECK(ex.small1 == "<repairs>\nDEL_EDGE | [x] | -\n</repairs>");
    CHECK(ex.large1.find("ADD_NODE") != std::string::npos);
    CHECK(ex.small2 == FewShotExamples::defaults().small2);  // falls back

    FewShotExamples def = FewShotExamples::parse("");
    CHECK(def.small1 == FewShotExamples::defaults().small1);

    CHECK(def.blocks_for(ExampleMode::None).empty());
    CHECK(def.blocks_for(ExampleMode::OneSmall) == std::vector<std::string>{def.small1});
    CHECK(def.blocks_for(ExampleMode::TwoSmall) ==
          std::vector<std::string>{def.small1, def.small2});
    CHECK(def.blocks_for(ExampleMode::OneLarge) == std::vector<std::string>{def.large1});
    CHECK(def.blocks_for(ExampleMode::TwoMixed) ==
          std::vector<std::string>{def.small1, def.large1});
}

TEST_CASE("build_prompt assembles system and user parts") {
    Fixture f;
    PromptContext ctx;
    ctx.template_text = parse_constraint_file(kDefaultConstraintFile).template_text;

    for (const char* enc : {"m1", "cypher", "template"}) {
        EncodingMode mode = EncodingMode::parse(enc);
        for (ExampleMode ex : {ExampleMode::None, ExampleMode::OneSmall, ExampleMode::TwoSmall,
                               ExampleMode::OneLarge, ExampleMode::TwoMixed}) {
            PromptBundle b = build_prompt(f.query, f.g, f.binding, mode, ex, ctx);
            CHECK(b.system.rfind("You are an AI assistant for Graph Repair", 0) == 0);
            CHECK(b.system.find("DEL_EDGE") != std::string::npos);
            CHECK(count_occurrences(b.user, "Provide the repairs in the following") == 1);
            CHECK(count_occurrences(b.user, "Inconsistency:") == 1);
            CHECK(count_occurrences(b.user, "Constraint query:") ==
                  (mode.includes_cypher() ? 1 : 0));
            if (mode.includes_cypher())
                CHECK(b.user.find(f.query.source_text) != std::string::npos);
            std::size_t n_blocks = ctx.examples.blocks_for(ex).size();
            CHECK(count_occurrences(b.user, "Examples of potential repairs:") ==
                  (n_blocks > 0 ? 1 : 0));
            CHECK(count_occurrences(b.user, "<repairs>") ==
                  1 + static_cast<int>(n_blocks));  // format spec + examples
            CHECK(b.char_count == b.system.size() + b.user.size());
            CHECK(b.violation_id == f.binding.violation_id);
            // deterministic
            CHECK(build_prompt(f.query, f.g, f.binding, mode, ex, ctx).user == b.user);
        }
    }
}

TEST_CASE("build_prompt encoding selection") {
    Fixture f;
    PromptContext ctx;
    ctx.template_text = parse_constraint_file(kDefaultConstraintFile).template_text;
    ctx.m3_encoder = [](const std::string& describer, const PropertyGraph&,
                        const MatchBinding&) {
        return "described by " + describer;
    };

    PromptBundle m1 = build_prompt(f.query, f.g, f.binding, EncodingMode::parse("m1"),
                                   ExampleMode::None, ctx);
    CHECK(m1.user.find(encode_m1(f.g, f.binding)) != std::string::npos);

    PromptBundle tpl = build_prompt(f.query, f.g, f.binding, EncodingMode::parse("template"),
                                    ExampleMode::None, ctx);
    CHECK(tpl.user.find("Sanford861") != std::string::npos);
    CHECK(tpl.user.find("Node p:") == std::string::npos);

    PromptBundle llm = build_prompt(f.query, f.g, f.binding, EncodingMode::parse("llm:phi4"),
                                    ExampleMode::None, ctx);
    CHECK(llm.user.find("described by phi4") != std::string::npos);

    // system prompt names what the model will receive
    CHECK(m1.system.find("node-edge listing") != std::string::npos);
    CHECK(llm.system.find("natural language description") != std::string::npos);

    PromptContext bare;
    CHECK_THROWS_AS(build_prompt(f.query, f.g, f.binding, EncodingMode::parse("template"),
                                 ExampleMode::None, bare),
                    ConfigError);
    CHECK_THROWS_AS(build_prompt(f.query, f.g, f.binding, EncodingMode::parse("llm:x"),
                                 ExampleMode::None, bare),
                    ConfigError);
}
