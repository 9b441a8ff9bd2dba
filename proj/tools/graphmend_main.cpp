#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "graphmend/bench.hpp"

namespace fs = std::filesystem;
using namespace graphmend;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

ConstraintFile constraint_from(const std::string& path) {
    return path.empty() ? default_constraint() : load_constraint_file(path);
}

int cmd_gen(const GenConfig& cfg, const std::string& graph_out,
            const std::string& ledger_out) {
    auto [graph, ledger] = generate(cfg);
    write_file(graph_out, graph.to_json());
    write_file(ledger_out, ledger.to_json());
    ConstraintFile constraint = default_constraint();
    AuditReport report = audit(graph, ledger, constraint.query);
    std::cout << "nodes: " << graph.node_count() << "\n"
              << "edges: " << graph.edge_count() << "\n"
              << "violations: " << report.violations << "\n"
              << "ledger entries: " << report.ledger_entries << "\n"
              << "injected wrong-ingredient edges: "
              << ledger.injected_wrong_ingredient_edges.size() << "\n"
              << "injected allergy edges: " << ledger.injected_allergy_edges.size() << "\n"
              << "audit: " << (report.ok() ? "ok" : "FAILED") << "\n";
    for (const auto& f : report.failures) std::cout << "  " << f << "\n";
    return report.ok() ? 0 : 1;
}

int cmd_detect(const std::string& graph_path, const std::string& constraint_path) {
    PropertyGraph graph = PropertyGraph::from_json(read_file(graph_path));
    ConstraintFile constraint = constraint_from(constraint_path);
    std::vector<MatchBinding> violations = find_violations(graph, constraint.query);
    for (const auto& v : violations) {
        std::cout << v.violation_id;
        for (const auto& [var, id] : v.node_bindings) std::cout << " " << var << "=" << id;
        for (const auto& [var, id] : v.edge_bindings) std::cout << " " << var << "=" << id;
        std::cout << "\n";
    }
    std::cout << violations.size() << " violation(s)\n";
    return 0;
}

int cmd_repair(const std::string& graph_path, const std::string& ledger_path,
               const std::string& constraint_path, const std::string& violation_id,
               const std::string& encoding_text, const std::string& example_text,
               const std::string& model_name, const std::string& endpoint,
               const std::string& mock_name, const std::string& examples_file) {
    PropertyGraph graph = PropertyGraph::from_json(read_file(graph_path));
    GroundTruthLedger ledger;
    if (!ledger_path.empty())
        ledger = GroundTruthLedger::from_json(read_file(ledger_path));
    ConstraintFile constraint = constraint_from(constraint_path);

    std::vector<MatchBinding> violations = find_violations(graph, constraint.query);
    const MatchBinding* violation = nullptr;
    for (const auto& v : violations)
        if (violation_id.empty() || v.violation_id == violation_id) {
            violation = &v;
            break;
        }
    if (!violation) {
        std::cerr << "violation not found: " << violation_id << "\n";
        return 1;
    }

    Gateway gateway;
    register_builtin_mocks(gateway, ledger);
    ModelConfig model;
    model.name = mock_name.empty() ? model_name : mock_name;
    model.endpoint = endpoint;

    PromptContext ctx;
    ctx.template_text = constraint.template_text;
    if (!examples_file.empty()) ctx.examples = FewShotExamples::load(examples_file);
    ctx.m3_encoder = [&gateway](const std::string& describer, const PropertyGraph& g,
                                const MatchBinding& b) {
        return encode_m3(gateway, describer, g, b);
    };

    EncodingMode encoding = EncodingMode::parse(encoding_text);
    ExampleMode example_mode = parse_example_mode(example_text);
    PromptBundle prompt =
        build_prompt(constraint.query, graph, *violation, encoding, example_mode, ctx);

    std::cout << "--- system ---\n" << prompt.system << "\n";
    std::cout << "--- user ---\n" << prompt.user << "\n";

    GenerationResult gen =
        gateway.generate(model, prompt.system, prompt.user, violation->violation_id);
    std::cout << "--- response (" << gen.model << ") ---\n" << gen.text << "\n";

    RepairScript script = parse_response(gen.text);
    GroundTruthRepair truth{violation->violation_id, "", ""};
    if (const LedgerEntry* e = ledger.find_by_violation(violation->violation_id))
        truth = e->repair;
    Score s = score(graph, constraint.query, *violation, script, truth);
    std::cout << "--- score ---\nF=" << s.format << " V=" << s.validity
              << " A=" << s.accuracy << "\n";
    return 0;
}

int cmd_bench(const std::string& plan_path, const std::string& out_override,
              int workers_override, const std::string& endpoint_override) {
    ExperimentPlan plan = ExperimentPlan::load(plan_path);
    if (!out_override.empty()) plan.out_dir = out_override;
    if (workers_override > 0) plan.workers = workers_override;
    if (!endpoint_override.empty())
        for (auto& m : plan.models) m.endpoint = endpoint_override;

    Gateway gateway;
    Runner runner(gateway);
    RunResult result = runner.run(plan);
    Tables tables = aggregate(result.rows, result.encoding_costs);
    report(tables, result.rows, plan.out_dir);
    std::cout << result.rows.size() << " rows -> " << plan.out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& rows_path, const std::string& out_dir) {
    std::vector<MetricsRow> rows = load_journal(rows_path);
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) { return a.key() < b.key(); });
    Tables tables = aggregate(rows);
    report(tables, rows, out_dir);
    std::cout << rows.size() << " rows -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphmend: denial-constraint violation detection and LLM repair benchmark"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate the synthetic medical dataset");
    GenConfig cfg;
    std::string graph_out = "graph.json", ledger_out = "ledger.json";
    gen->add_option("--seed", cfg.seed);
    gen->add_option("--patients", cfg.n_patients);
    gen->add_option("--medications", cfg.n_medications);
    gen->add_option("--ingredients", cfg.n_ingredients);
    gen->add_option("--takes-edges", cfg.n_takes_edges);
    gen->add_option("--p-wrong-ingredient", cfg.p_wrong_ingredient);
    gen->add_option("--p-allergy", cfg.p_allergy);
    gen->add_option("--p-wrong-allergy", cfg.p_wrong_allergy);
    gen->add_option("--out", graph_out, "graph json output path");
    gen->add_option("--ledger", ledger_out, "ledger json output path");

    // detect
    auto* detect = app.add_subcommand("detect", "list violations in a graph");
    std::string d_graph, d_constraint;
    detect->add_option("--graph", d_graph)->required();
    detect->add_option("--constraint", d_constraint, "constraint file (default: shipped)");

    // repair
    auto* repair = app.add_subcommand("repair", "run one violation through a chosen setup");
    std::string r_graph, r_ledger, r_constraint, r_violation, r_encoding = "m1",
                r_examples = "none", r_model = "ground-truth", r_endpoint, r_mock,
                r_examples_file;
    repair->add_option("--graph", r_graph)->required();
    repair->add_option("--ledger", r_ledger);
    repair->add_option("--constraint", r_constraint);
    repair->add_option("--violation", r_violation, "violation id (default: first)");
    repair->add_option("--encoding", r_encoding, "m1 | cypher | template | llm:<model>");
    repair->add_option("--examples", r_examples, "none | 1-small | 2-small | 1-large | 2-mixed");
    repair->add_option("--model", r_model);
    repair->add_option("--endpoint", r_endpoint);
    repair->add_option("--mock", r_mock, "use a built-in mock backend");
    repair->add_option("--examples-file", r_examples_file, "few-shot fixture file");

    // bench
    auto* bench = app.add_subcommand("bench", "run a full experiment plan");
    std::string b_plan, b_out, b_endpoint;
    int b_workers = 0;
    bench->add_option("--plan", b_plan)->required();
    bench->add_option("--out", b_out);
    bench->add_option("--workers", b_workers);
    bench->add_option("--endpoint", b_endpoint, "override every model's endpoint");

    // report
    auto* rep = app.add_subcommand("report", "recompute tables from a row journal");
    std::string p_rows, p_out = "out";
    rep->add_option("--rows", p_rows)->required();
    rep->add_option("--out", p_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(cfg, graph_out, ledger_out);
        if (detect->parsed()) return cmd_detect(d_graph, d_constraint);
        if (repair->parsed())
            return cmd_repair(r_graph, r_ledger, r_constraint, r_violation, r_encoding,
                              r_examples, r_model, r_endpoint, r_mock, r_examples_file);
        if (bench->parsed()) return cmd_bench(b_plan, b_out, b_workers, b_endpoint);
        if (rep->parsed()) return cmd_report(p_rows, p_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
