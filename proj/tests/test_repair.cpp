#include <doctest.h>

#include "graphmend/repair.hpp"
#include "graphmend/synthea.hpp"

using namespace graphmend;

namespace {

struct Fixture {
    PropertyGraph g;
    MatchBinding binding;
    GdcQuery query;
    GroundTruthRepair truth;

    Fixture() {
        NodeId p = g.add_node({"Patient"}, {{"first", std::string("Sanford861")}});
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
        truth = {binding.violation_id, "rc", rc};
    }
};

// A reasoning-model style response: long prose in <think> tags, then the block.
const char* kReasoningResponse =
    "<think>\n"
    "Okay, so I'm trying to figure out how to fix this\n"
    "inconsistency in the graph. Let me start by\n"
    "understanding what's going on here.\n"
    "\n"
    "I don't see any need to add new nodes or edges\n"
    "here; just removing rc should suffice.\n"
    "</think>\n"
    "\n"
    "<repairs>\n"
    "DEL_EDGE | [rc] | -\n"
    "</repairs>\n";

}  // namespace

TEST_CASE("parse a reasoning-model response") {
    RepairScript s = parse_response(kReasoningResponse);
    CHECK(s.format_ok);
    REQUIRE(s.ops.size() == 1);
    CHECK(s.ops[0].code == OpCode::DelEdge);
    CHECK(s.ops[0].raw_code == "DEL_EDGE");
    CHECK(s.ops[0].target == "[rc]");
    CHECK(s.ops[0].details.empty());  // "-" means no details
    CHECK(s.extra_blocks == 0);
    CHECK(s.response_chars == std::string(kReasoningResponse).size());
    CHECK(s.repair_chars > 0);
    CHECK(s.repair_chars < s.response_chars);
}

TEST_CASE("parse tolerates case and whitespace in tags") {
    for (const char* r : {"<repairs>\nDEL_EDGE | [rc] | -\n</repairs>",
                          "< REPAIRS >\nDEL_EDGE | [rc] | -\n</ Repairs >",
                          "text before <Repairs>\n  DEL_EDGE | [rc] |  - \n</repairs> after"}) {
        RepairScript s = parse_response(r);
        CHECK_MESSAGE(s.format_ok, r);
        REQUIRE(s.ops.size() == 1);
        CHECK(s.ops[0].code == OpCode::DelEdge);
    }
}

TEST_CASE("format failures") {
    CHECK_FALSE(parse_response("").format_ok);
    CHECK_FALSE(parse_response("hello").format_ok);  // no block at all
    CHECK_FALSE(parse_response("<repairs>\n</repairs>").format_ok);  // empty block
    CHECK_FALSE(parse_response("<repairs>\nDEL_EDGE [rc] -\n</repairs>").format_ok);  // no pipes
    CHECK_FALSE(parse_response("<repairs>\nDEL_EDGE | [rc]\n</repairs>").format_ok);  // 2 fields
    CHECK_FALSE(
        parse_response("<repairs>\nDEL_EDGE | [rc] | - | extra\n</repairs>").format_ok);
    CHECK_FALSE(parse_response("<repairs>\nREMOVE_EDGE | [rc] | -\n</repairs>").format_ok);
    CHECK_FALSE(parse_response("<repairs>\nDEL_EDGE | [rc] | -\n").format_ok);  // unclosed

    // one bad line poisons the block but good lines are still parsed
    RepairScript mixed =
        parse_response("<repairs>\nDEL_EDGE | [rc] | -\nFIX_NODE | [i] | -\n</repairs>");
    CHECK_FALSE(mixed.format_ok);
    REQUIRE(mixed.ops.size() == 2);
    CHECK(mixed.ops[1].code == OpCode::Invalid);
    CHECK(mixed.ops[1].raw_code == "FIX_NODE");
}

TEST_CASE("first block wins, extras counted") {
    RepairScript s = parse_response(
        "<repairs>\nDEL_EDGE | [ra] | -\n</repairs>\n"
        "or alternatively:\n"
        "<repairs>\nDEL_EDGE | [rc] | -\n</repairs>\n"
        "<repairs>\nUPD_NODE | [i] | id=x\n</repairs>\n");
    CHECK(s.format_ok);
    REQUIRE(s.ops.size() == 1);
    CHECK(s.ops[0].target == "[ra]");
    CHECK(s.extra_blocks == 2);
}

TEST_CASE("details parse as ordered key=value pairs") {
    RepairScript s = parse_response(
        "<repairs>\nUPD_NODE | [i] | id=oxycodone, note=checked by pharmacist\n</repairs>");
    CHECK(s.format_ok);
    REQUIRE(s.ops.size() == 1);
    REQUIRE(s.ops[0].details.size() == 2);
    CHECK(s.ops[0].details[0] == std::pair<std::string, std::string>{"id", "oxycodone"});
    CHECK(s.ops[0].details[1] ==
          std::pair<std::string, std::string>{"note", "checked by pharmacist"});
}

TEST_CASE("serialize round trips") {
    for (const char* text :
         {"<repairs>\nDEL_EDGE | [rc] | -\n</repairs>",
          "<repairs>\nUPD_NODE | [i] | id=oxycodone\nADD_EDGE | [e1] | src=p, dst=i, type=X\n</repairs>"}) {
        RepairScript s = parse_response(text);
        REQUIRE(s.format_ok);
        RepairScript back = parse_response(serialize(s));
        CHECK(back.format_ok);
        REQUIRE(back.ops.size() == s.ops.size());
        for (std::size_t k = 0; k < s.ops.size(); ++k) {
            CHECK(back.ops[k].code == s.ops[k].code);
            CHECK(back.ops[k].target == s.ops[k].target);
            CHECK(back.ops[k].details == s.ops[k].details);
        }
    }
}

TEST_CASE("resolve_target") {
    Fixture f;
    ResolvedTarget e = resolve_target("[rc]", f.binding, f.g);
    CHECK(e.kind == ResolvedTarget::EdgeRef);
    CHECK(e.id == f.binding.edge_bindings.at("rc"));
    // brackets optional
    CHECK(resolve_target("rc", f.binding, f.g).id == e.id);

    ResolvedTarget n = resolve_target("[p]", f.binding, f.g);
    CHECK(n.kind == ResolvedTarget::NodeRef);
    CHECK(n.id == f.binding.node_bindings.at("p"));

    // raw graph ids resolve too
    CHECK(resolve_target(f.binding.node_bindings.at("i"), f.binding, f.g).kind ==
          ResolvedTarget::NodeRef);

    TargetScope scope;
    scope.fresh_nodes["n1"] = "999";
    CHECK(resolve_target("[n1]", f.binding, f.g, &scope).kind == ResolvedTarget::NodeRef);
    CHECK(resolve_target("[n1]", f.binding, f.g, &scope).id == "999");

    CHECK_THROWS_AS(resolve_target("[zz]", f.binding, f.g), UnresolvableTarget);
}

TEST_CASE("apply DEL_EDGE leaves source untouched") {
    Fixture f;
    RepairScript s = parse_response("<repairs>\nDEL_EDGE | [rc] | -\n</repairs>");
    ApplyResult r = apply_script(f.g, f.binding, s);
    CHECK(r.applied_count == 1);
    CHECK(r.errors.empty());
    CHECK_FALSE(r.graph.has_edge(f.binding.edge_bindings.at("rc")));
    CHECK(f.g.has_edge(f.binding.edge_bindings.at("rc")));  // original intact
    CHECK(find_violations(r.graph, f.query).empty());
}

TEST_CASE("apply DEL_NODE cascades, UPD merges") {
    Fixture f;
    RepairScript s = parse_response(
        "<repairs>\nDEL_NODE | [i] | -\nUPD_NODE | [p] | first=Rosio404\n</repairs>");
    ApplyResult r = apply_script(f.g, f.binding, s);
    CHECK(r.applied_count == 2);
    CHECK_FALSE(r.graph.has_node(f.binding.node_bindings.at("i")));
    CHECK(r.graph.edge_count() == 1);  // only rm survives
    CHECK(std::get<std::string>(
              r.graph.node(f.binding.node_bindings.at("p")).properties.at("first")) ==
          "Rosio404");
}

TEST_CASE("apply ADD_NODE and ADD_EDGE with fresh variables") {
    Fixture f;
    RepairScript s = parse_response(
        "<repairs>\n"
        "ADD_NODE | [n1] | label=Ingredient, id=lisinopril\n"
        "ADD_EDGE | [e1] | src=m, dst=n1, type=HAS_INGREDIENT\n"
        "</repairs>");
    ApplyResult r = apply_script(f.g, f.binding, s);
    CHECK(r.applied_count == 2);
    CHECK(r.errors.empty());
    CHECK(r.graph.node_count() == 4);
    CHECK(r.graph.edge_count() == 4);
    bool found = false;
    for (const auto& [id, e] : r.graph.edges())
        if (e.type == "HAS_INGREDIENT" && e.src == f.binding.node_bindings.at("m") &&
            r.graph.node(e.dst).labels.count("Ingredient") &&
            r.graph.node(e.dst).properties.count("id"))
            found = found || std::get<std::string>(r.graph.node(e.dst).properties.at("id")) ==
                                 "lisinopril";
    CHECK(found);
}

TEST_CASE("apply collects per-op errors without aborting") {
    Fixture f;
    RepairScript s = parse_response(
        "<repairs>\n"
        "DEL_EDGE | [zz] | -\n"
        "DEL_EDGE | [ra] | -\n"
        "ADD_EDGE | [e1] | src=p, dst=i\n"
        "</repairs>");
    // zz unresolvable, ADD_EDGE missing type= detail; middle op still applies
    ApplyResult r = apply_script(f.g, f.binding, s);
    CHECK(r.applied_count == 1);
    CHECK(r.errors.size() == 2);
    CHECK_FALSE(r.graph.has_edge(f.binding.edge_bindings.at("ra")));
}

TEST_CASE("score: perfect repair") {
    Fixture f;
    RepairScript s = parse_response("<repairs>\nDEL_EDGE | [rc] | -\n</repairs>");
    Score sc = score(f.g, f.query, f.binding, s, f.truth);
    CHECK(sc.format == 1);
    CHECK(sc.validity == 1);
    CHECK(sc.accuracy == 1);

    // details are ignored for accuracy; raw edge id target counts too
    RepairScript noisy =
        parse_response("<repairs>\nDEL_EDGE | [rc] | reason=allergy conflict\n</repairs>");
    CHECK(score(f.g, f.query, f.binding, noisy, f.truth).accuracy == 1);
    RepairScript by_id = parse_response(
        "<repairs>\nDEL_EDGE | " + f.truth.edge_id + " | -\n</repairs>");
    CHECK(score(f.g, f.query, f.binding, by_id, f.truth).accuracy == 1);
}

TEST_CASE("score: valid but inaccurate") {
    Fixture f;
    // deleting ra resolves the violation but is not the ground-truth edge (rc)
    RepairScript s = parse_response("<repairs>\nDEL_EDGE | [ra] | -\n</repairs>");
    Score sc = score(f.g, f.query, f.binding, s, f.truth);
    CHECK(sc.format == 1);
    CHECK(sc.validity == 1);
    CHECK(sc.accuracy == 0);

    // correct deletion plus an extra op: still valid, no longer "exactly one DEL_EDGE"
    RepairScript extra = parse_response(
        "<repairs>\nDEL_EDGE | [rc] | -\nUPD_NODE | [i] | id=checked\n</repairs>");
    Score se = score(f.g, f.query, f.binding, extra, f.truth);
    CHECK(se.validity == 1);
    CHECK(se.accuracy == 0);

    // deleting the whole node also clears the violation
    RepairScript node = parse_response("<repairs>\nDEL_NODE | [i] | -\n</repairs>");
    Score sn = score(f.g, f.query, f.binding, node, f.truth);
    CHECK(sn.validity == 1);
    CHECK(sn.accuracy == 0);
}

TEST_CASE("score: formatted but not valid") {
    Fixture f;
    // an update that touches nothing relevant leaves the violation in place
    RepairScript s = parse_response("<repairs>\nUPD_NODE | [p] | note=seen\n</repairs>");
    Score sc = score(f.g, f.query, f.binding, s, f.truth);
    CHECK(sc.format == 1);
    CHECK(sc.validity == 0);
    CHECK(sc.accuracy == 0);

    // deleting the wrong leg of a *different* violation instance:
    // unresolvable target -> op fails -> graph unchanged -> invalid
    RepairScript bad = parse_response("<repairs>\nDEL_EDGE | [zz] | -\n</repairs>");
    Score sb = score(f.g, f.query, f.binding, bad, f.truth);
    CHECK(sb.format == 1);
    CHECK(sb.validity == 0);
}

TEST_CASE("score: unformatted gets zeros even if text hints at the fix") {
    Fixture f;
    RepairScript s = parse_response("You should delete the rc edge.");
    Score sc = score(f.g, f.query, f.binding, s, f.truth);
    CHECK(sc.format == 0);
    CHECK(sc.validity == 0);
    CHECK(sc.accuracy == 0);
}

TEST_CASE("score invariant A <= V <= F over a response corpus") {
    Fixture f;
    const char* corpus[] = {
        kReasoningResponse,
        "<repairs>\nDEL_EDGE | [ra] | -\n</repairs>",
        "<repairs>\nDEL_EDGE | [rm] | -\n</repairs>",
        "<repairs>\nUPD_NODE | [i] | id=other\n</repairs>",
        "<repairs>\nDEL_NODE | [p] | -\n</repairs>",
        "<repairs>\nREMOVE_EDGE | [rc] | -\n</repairs>",
        "no block here",
        "<repairs>\nDEL_EDGE | [rc] | -\n</repairs><repairs>\nDEL_EDGE | [ra] | -\n</repairs>",
    };
    for (const char* r : corpus) {
        Score sc = score(f.g, f.query, f.binding, parse_response(r), f.truth);
        CHECK(sc.accuracy <= sc.validity);
        CHECK(sc.validity <= sc.format);
    }
}
