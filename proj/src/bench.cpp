#include "graphmend/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace graphmend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace

ExperimentPlan ExperimentPlan::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("plan json: " + std::string(e.what()));
    }
    ExperimentPlan plan;
    if (j.contains("dataset")) plan.dataset_path = j["dataset"].get<std::string>();
    if (j.contains("ledger")) plan.ledger_path = j["ledger"].get<std::string>();
    if (j.contains("generate")) {
        GenConfig cfg;
        const json& jg = j["generate"];
        if (jg.contains("seed")) cfg.seed = jg["seed"].get<std::uint64_t>();
        if (jg.contains("patients")) cfg.n_patients = jg["patients"].get<int>();
        if (jg.contains("medications")) cfg.n_medications = jg["medications"].get<int>();
        if (jg.contains("ingredients")) cfg.n_ingredients = jg["ingredients"].get<int>();
        if (jg.contains("allergy_nodes")) cfg.n_allergy_nodes = jg["allergy_nodes"].get<int>();
        if (jg.contains("takes_edges")) cfg.n_takes_edges = jg["takes_edges"].get<int>();
        if (jg.contains("p_wrong_ingredient"))
            cfg.p_wrong_ingredient = jg["p_wrong_ingredient"].get<double>();
        if (jg.contains("p_allergy")) cfg.p_allergy = jg["p_allergy"].get<double>();
        if (jg.contains("p_wrong_allergy"))
            cfg.p_wrong_allergy = jg["p_wrong_allergy"].get<double>();
        plan.gen = cfg;
    }
    if (j.contains("constraint")) plan.constraint_path = j["constraint"].get<std::string>();
    if (!j.contains("models") || j["models"].empty())
        throw ConfigError("plan must list at least one model");
    for (const auto& jm : j["models"]) {
        ModelConfig m;
        m.name = jm.at("name").get<std::string>();
        if (jm.contains("endpoint")) m.endpoint = jm["endpoint"].get<std::string>();
        if (jm.contains("temperature")) m.temperature = jm["temperature"].get<double>();
        if (jm.contains("max_tokens")) m.max_tokens = jm["max_tokens"].get<int>();
        if (jm.contains("timeout_s")) m.timeout_s = jm["timeout_s"].get<double>();
        if (jm.contains("retries")) m.retries = jm["retries"].get<int>();
        if (jm.contains("concurrency")) m.concurrency = jm["concurrency"].get<int>();
        if (m.temperature < 0.0 || m.temperature > 2.0)
            throw ConfigError("temperature must be within [0,2]");
        plan.models.push_back(std::move(m));
    }
    if (!j.contains("encodings") || j["encodings"].empty())
        throw ConfigError("plan must list at least one encoding mode");
    for (const auto& je : j["encodings"])
        plan.encodings.push_back(EncodingMode::parse(je.get<std::string>()));
    if (!j.contains("example_modes") || j["example_modes"].empty())
        throw ConfigError("plan must list at least one example mode");
    for (const auto& je : j["example_modes"])
        plan.example_modes.push_back(parse_example_mode(je.get<std::string>()));
    if (j.contains("runs_per_cell")) plan.runs_per_cell = j["runs_per_cell"].get<int>();
    if (j.contains("workers")) plan.workers = j["workers"].get<int>();
    if (j.contains("limit_violations")) plan.limit_violations = j["limit_violations"].get<int>();
    if (j.contains("cumulative")) plan.cumulative = j["cumulative"].get<bool>();
    if (j.contains("out")) plan.out_dir = j["out"].get<std::string>();
    if (plan.dataset_path.empty() && !plan.gen)
        throw ConfigError("plan needs either \"dataset\" or \"generate\"");
    return plan;
}

ExperimentPlan ExperimentPlan::load(const std::string& path) {
    return from_json(read_file(path));
}

std::string MetricsRow::key() const {
    return model + "\x1f" + encoding_mode + "\x1f" + example_mode + "\x1f" +
           std::to_string(run) + "\x1f" + violation_id;
}

std::string MetricsRow::to_json() const {
    json j;
    j["model"] = model;
    j["encoding_mode"] = encoding_mode;
    j["example_mode"] = example_mode;
    j["run"] = run;
    j["violation_id"] = violation_id;
    j["F"] = F;
    j["V"] = V;
    j["A"] = A;
    j["prompt_eval_s"] = prompt_eval_s;
    j["eval_s"] = eval_s;
    j["tokens"] = tokens;
    j["response_chars"] = response_chars;
    j["repair_chars"] = repair_chars;
    j["n_ops"] = n_ops;
    j["extra_blocks"] = extra_blocks;
    j["op_histogram"] = op_histogram;
    j["error"] = error;
    return j.dump();
}

MetricsRow MetricsRow::from_json(const std::string& line) {
    json j = json::parse(line);
    MetricsRow r;
    r.model = j.at("model").get<std::string>();
    r.encoding_mode = j.at("encoding_mode").get<std::string>();
    r.example_mode = j.at("example_mode").get<std::string>();
    r.run = j.at("run").get<int>();
    r.violation_id = j.at("violation_id").get<std::string>();
    r.F = j.at("F").get<int>();
    r.V = j.at("V").get<int>();
    r.A = j.at("A").get<int>();
    r.prompt_eval_s = j.at("prompt_eval_s").get<double>();
    r.eval_s = j.at("eval_s").get<double>();
    r.tokens = j.at("tokens").get<long>();
    r.response_chars = j.at("response_chars").get<std::size_t>();
    r.repair_chars = j.at("repair_chars").get<std::size_t>();
    r.n_ops = j.at("n_ops").get<int>();
    if (j.contains("extra_blocks")) r.extra_blocks = j["extra_blocks"].get<int>();
    if (j.contains("op_histogram"))
        r.op_histogram = j["op_histogram"].get<std::map<std::string, int>>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    return r;
}

std::vector<MetricsRow> load_journal(const std::string& path) {
    std::vector<MetricsRow> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            rows.push_back(MetricsRow::from_json(line));
        } catch (const json::exception&) {
            // torn tail write from an interrupted run; drop it
        }
    }
    return rows;
}

void register_builtin_mocks(Gateway& gateway, const GroundTruthLedger& ledger) {
    std::map<std::string, std::string> truth;
    for (const auto& e : ledger.entries)
        truth[e.repair.violation_id] =
            "<repairs>\nDEL_EDGE | [" + e.repair.edge_var + "] | -\n</repairs>\n";
    if (!gateway.has_mock("ground-truth"))
        gateway.register_mock("ground-truth", mocks::lookup_table(std::move(truth)));
    if (!gateway.has_mock("garbage")) gateway.register_mock("garbage", mocks::garbage());
    if (!gateway.has_mock("wrong-edge"))
        gateway.register_mock("wrong-edge", mocks::wrong_edge());
    if (!gateway.has_mock("eager")) gateway.register_mock("eager", mocks::eager());
    if (!gateway.has_mock("indecisive"))
        gateway.register_mock("indecisive", mocks::indecisive());
    if (!gateway.has_mock("hallucinate"))
        gateway.register_mock("hallucinate", mocks::hallucinating());
    if (!gateway.has_mock("echo")) gateway.register_mock("echo", mocks::echo());
}

namespace {

struct Cell {
    std::size_t model_idx;
    std::size_t encoding_idx;
    std::size_t example_idx;
    int run;
    std::size_t violation_idx;
};

}  // namespace

RunResult Runner::run(const ExperimentPlan& plan) {
    PropertyGraph graph;
    GroundTruthLedger ledger;
    if (!plan.dataset_path.empty()) {
        graph = PropertyGraph::from_json(read_file(plan.dataset_path));
        if (!plan.ledger_path.empty())
            ledger = GroundTruthLedger::from_json(read_file(plan.ledger_path));
    } else {
        std::tie(graph, ledger) = generate(*plan.gen);
    }

    ConstraintFile constraint = plan.constraint_path.empty()
                                    ? default_constraint()
                                    : load_constraint_file(plan.constraint_path);

    std::vector<MatchBinding> violations = find_violations(graph, constraint.query);
    if (plan.limit_violations > 0 &&
        static_cast<int>(violations.size()) > plan.limit_violations)
        violations.resize(plan.limit_violations);

    register_builtin_mocks(gateway_, ledger);

    fs::create_directories(plan.out_dir);
    std::string journal_path = plan.out_dir + "/rows.jsonl";
    fs::path m3_cache_dir = fs::path(plan.out_dir) / "m3_cache";

    std::map<std::string, MetricsRow> done;
    for (auto& r : load_journal(journal_path)) done.emplace(r.key(), std::move(r));

    // M3 encodings computed once per (describer, violation) and cached on disk
    std::mutex m3_mu;
    std::map<std::string, std::string> m3_memo;
    RunResult result;
    std::mutex result_mu;
    M3Encoder m3 = [&](const std::string& describer, const PropertyGraph& g,
                       const MatchBinding& b) -> std::string {
        std::string key = describer + "_" + b.violation_id;
        {
            std::lock_guard lock(m3_mu);
            auto it = m3_memo.find(key);
            if (it != m3_memo.end()) return it->second;
        }
        fs::path cache_file = m3_cache_dir / (key + ".txt");
        if (fs::exists(cache_file)) {
            std::string text = read_file(cache_file.string());
            std::lock_guard lock(m3_mu);
            m3_memo[key] = text;
            return text;
        }
        EncodingCost cost;
        std::string text = encode_m3(gateway_, describer, g, b, &cost);
        fs::create_directories(m3_cache_dir);
        std::ofstream(cache_file) << text;
        {
            std::lock_guard lock(m3_mu);
            m3_memo[key] = text;
        }
        {
            std::lock_guard lock(result_mu);
            result.encoding_costs.push_back(
                {describer, cost.seconds, cost.tokens, cost.words, cost.lines});
        }
        return text;
    };

    PromptContext ctx;
    ctx.template_text = constraint.template_text;
    ctx.m3_encoder = m3;

    std::vector<Cell> cells;
    for (std::size_t mi = 0; mi < plan.models.size(); ++mi)
        for (std::size_t ei = 0; ei < plan.encodings.size(); ++ei)
            for (std::size_t xi = 0; xi < plan.example_modes.size(); ++xi)
                for (int run = 0; run < plan.runs_per_cell; ++run)
                    for (std::size_t vi = 0; vi < violations.size(); ++vi)
                        cells.push_back({mi, ei, xi, run, vi});

    std::mutex journal_mu;
    std::ofstream journal(journal_path, std::ios::app);
    if (!journal) throw IoError("cannot open journal: " + journal_path);
    std::atomic<int> new_rows{0};
    std::atomic<std::size_t> cursor{0};

    // `working` non-null => cumulative mode: repairs compound onto that graph.
    auto process = [&](const Cell& cell, PropertyGraph* working) {
        const ModelConfig& model = plan.models[cell.model_idx];
        const EncodingMode& encoding = plan.encodings[cell.encoding_idx];
        ExampleMode example_mode = plan.example_modes[cell.example_idx];
        const MatchBinding& violation = violations[cell.violation_idx];

        MetricsRow row;
        row.model = model.name;
        row.encoding_mode = encoding.label();
        row.example_mode = example_mode_label(example_mode);
        row.run = cell.run;
        row.violation_id = violation.violation_id;
        {
            std::lock_guard lock(journal_mu);
            if (done.count(row.key())) return;
        }

        const GroundTruthRepair* truth = nullptr;
        if (const LedgerEntry* e = ledger.find_by_violation(violation.violation_id))
            truth = &e->repair;

        const PropertyGraph& base = working ? *working : graph;
        try {
            PromptBundle prompt =
                build_prompt(constraint.query, base, violation, encoding, example_mode, ctx);
            GenerationResult gen =
                gateway_.generate(model, prompt.system, prompt.user, violation.violation_id);
            RepairScript script = parse_response(gen.text);

            GroundTruthRepair none{violation.violation_id, "", ""};
            Score s = score(base, constraint.query, violation, script,
                            truth ? *truth : none);
            if (working && script.format_ok)
                *working = apply_script(*working, violation, script).graph;
            row.F = s.format;
            row.V = s.validity;
            row.A = truth ? s.accuracy : 0;
            row.prompt_eval_s = gen.prompt_eval_seconds;
            row.eval_s = gen.eval_seconds;
            row.tokens = gen.completion_tokens;
            row.response_chars = script.response_chars;
            row.repair_chars = script.repair_chars;
            row.n_ops = static_cast<int>(script.ops.size());
            row.extra_blocks = script.extra_blocks;
            for (const auto& op : script.ops) {
                std::string label = op.code == OpCode::Invalid
                                        ? "INVALID:" + op.raw_code
                                        : op_code_label(op.code);
                ++row.op_histogram[label];
            }
        } catch (const std::exception& e) {
            row.F = row.V = row.A = 0;
            row.error = e.what();
        }

        {
            std::lock_guard lock(journal_mu);
            journal << row.to_json() << "\n";
            journal.flush();
            done.emplace(row.key(), row);
        }
        ++new_rows;
    };

    auto budget_left = [&] {
        return max_new_rows_ == 0 || new_rows.load() < max_new_rows_;
    };

    int workers = std::max(1, plan.workers);
    if (plan.cumulative) {
        // repairs compound within each (model, encoding, example, run) sequence
        std::map<std::string, PropertyGraph> group_graphs;
        for (const Cell& cell : cells) {
            if (!budget_left()) break;
            std::string group = std::to_string(cell.model_idx) + "/" +
                                std::to_string(cell.encoding_idx) + "/" +
                                std::to_string(cell.example_idx) + "/" +
                                std::to_string(cell.run);
            auto [it, inserted] = group_graphs.try_emplace(group, graph);
            process(cell, &it->second);
        }
    } else if (workers == 1) {
        for (const Cell& cell : cells) {
            if (!budget_left()) break;
            process(cell, nullptr);
        }
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (budget_left()) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= cells.size()) break;
                    process(cells[i], nullptr);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    for (auto& [key, row] : done) result.rows.push_back(row);
    std::sort(result.rows.begin(), result.rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) { return a.key() < b.key(); });
    return result;
}

Tables aggregate(const std::vector<MetricsRow>& rows,
                 const std::vector<EncodingCostRow>& encoding_costs) {
    if (rows.empty()) throw Error("nothing to report");
    Tables t;
    for (const auto& r : rows) {
        if (!(r.A <= r.V && r.V <= r.F))
            throw Error("metric implication chain violated on row " + r.key());
        auto& q1 = t.by_encoding[{r.model, r.encoding_mode}];
        q1.F += r.F;
        q1.V += r.V;
        q1.A += r.A;
        ++q1.n;
        auto& q2 = t.by_example_mode[{r.model, r.example_mode}];
        q2.F += r.F;
        q2.V += r.V;
        q2.A += r.A;
        ++q2.n;
        auto& c = t.cost_by_model[r.model];
        c.prompt_eval_s += r.prompt_eval_s;
        c.eval_s += r.eval_s;
        c.tokens += static_cast<double>(r.tokens);
        c.response_chars += static_cast<double>(r.response_chars);
        c.repair_chars += static_cast<double>(r.repair_chars);
        c.n_ops += r.n_ops;
        ++c.n;
        for (const auto& [op, count] : r.op_histogram)
            t.op_distribution[{r.model, op}] += count;
    }
    auto mean = [](Tables::Quality& q) {
        q.F /= q.n;
        q.V /= q.n;
        q.A /= q.n;
    };
    for (auto& [k, q] : t.by_encoding) mean(q);
    for (auto& [k, q] : t.by_example_mode) mean(q);
    for (auto& [k, c] : t.cost_by_model) {
        c.prompt_eval_s /= c.n;
        c.eval_s /= c.n;
        c.tokens /= c.n;
        c.response_chars /= c.n;
        c.repair_chars /= c.n;
        c.n_ops /= c.n;
    }
    std::vector<EncodingCostRow> sorted_costs = encoding_costs;
    std::sort(sorted_costs.begin(), sorted_costs.end(),
              [](const EncodingCostRow& a, const EncodingCostRow& b) {
                  return std::tie(a.describer, a.tokens, a.words, a.lines, a.seconds) <
                         std::tie(b.describer, b.tokens, b.words, b.lines, b.seconds);
              });
    std::map<std::string, std::pair<EncodingCostRow, int>> acc;
    for (const auto& e : sorted_costs) {
        auto& [sum, n] = acc[e.describer];
        sum.describer = e.describer;
        sum.seconds += e.seconds;
        sum.tokens += e.tokens;
        sum.words += e.words;
        sum.lines += e.lines;
        ++n;
    }
    for (auto& [name, pair] : acc) {
        auto& [sum, n] = pair;
        EncodingCostRow avg = sum;
        avg.seconds /= n;
        avg.tokens /= n;
        avg.words /= n;
        avg.lines /= n;
        t.encoding_cost_by_describer[name] = avg;
    }
    return t;
}

std::string Tables::to_json() const {
    json j;
    j["encoding_quality"] = json::array();
    for (const auto& [key, q] : by_encoding)
        j["encoding_quality"].push_back({{"model", key.first},
                                         {"encoding_mode", key.second},
                                         {"F", q.F},
                                         {"V", q.V},
                                         {"A", q.A},
                                         {"n", q.n}});
    j["example_quality"] = json::array();
    for (const auto& [key, q] : by_example_mode)
        j["example_quality"].push_back({{"model", key.first},
                                        {"example_mode", key.second},
                                        {"F", q.F},
                                        {"V", q.V},
                                        {"A", q.A},
                                        {"n", q.n}});
    j["cost"] = json::array();
    for (const auto& [model, c] : cost_by_model)
        j["cost"].push_back({{"model", model},
                             {"prompt_eval_s", c.prompt_eval_s},
                             {"eval_s", c.eval_s},
                             {"tokens", c.tokens},
                             {"response_chars", c.response_chars},
                             {"repair_chars", c.repair_chars},
                             {"n_ops", c.n_ops},
                             {"n", c.n}});
    j["op_distribution"] = json::array();
    for (const auto& [key, count] : op_distribution)
        j["op_distribution"].push_back(
            {{"model", key.first}, {"op", key.second}, {"count", count}});
    j["encoding_cost"] = json::array();
    for (const auto& [name, e] : encoding_cost_by_describer)
        j["encoding_cost"].push_back({{"describer", name},
                                      {"tokens", e.tokens},
                                      {"words", e.words},
                                      {"lines", e.lines},
                                      {"seconds", e.seconds}});
    return j.dump(2);
}

void report(const Tables& tables, const std::vector<MetricsRow>& rows,
            const std::string& out_dir) {
    if (rows.empty()) throw Error("nothing to report");
    fs::create_directories(out_dir);
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(out_dir) / name);
        if (!out) throw IoError(std::string("cannot write ") + name);
        return out;
    };

    {
        auto out = open("rows.csv");
        out << "model,encoding_mode,example_mode,run,violation_id,F,V,A,prompt_eval_s,"
               "eval_s,tokens,response_chars,repair_chars,n_ops,extra_blocks,error\n";
        for (const auto& r : rows) {
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            out << r.model << ',' << r.encoding_mode << ',' << r.example_mode << ','
                << r.run << ',' << r.violation_id << ',' << r.F << ',' << r.V << ','
                << r.A << ',' << fmt(r.prompt_eval_s) << ',' << fmt(r.eval_s) << ','
                << r.tokens << ',' << r.response_chars << ',' << r.repair_chars << ','
                << r.n_ops << ',' << r.extra_blocks << ',' << err << "\n";
        }
    }
    {
        auto out = open("encoding_quality.csv");
        out << "model,encoding_mode,F,V,A,n\n";
        for (const auto& [key, q] : tables.by_encoding)
            out << key.first << ',' << key.second << ',' << fmt(q.F) << ',' << fmt(q.V)
                << ',' << fmt(q.A) << ',' << q.n << "\n";
    }
    {
        auto out = open("example_quality.csv");
        out << "model,example_mode,F,V,A,n\n";
        for (const auto& [key, q] : tables.by_example_mode)
            out << key.first << ',' << key.second << ',' << fmt(q.F) << ',' << fmt(q.V)
                << ',' << fmt(q.A) << ',' << q.n << "\n";
    }
    {
        auto out = open("cost.csv");
        out << "model,prompt_eval_s,eval_s,tokens,response_chars,repair_chars,n_ops,n\n";
        for (const auto& [model, c] : tables.cost_by_model)
            out << model << ',' << fmt(c.prompt_eval_s) << ',' << fmt(c.eval_s) << ','
                << fmt(c.tokens, 1) << ',' << fmt(c.response_chars, 1) << ','
                << fmt(c.repair_chars, 1) << ',' << fmt(c.n_ops, 1) << ',' << c.n << "\n";
    }
    {
        auto out = open("op_distribution.csv");
        out << "model,op,count\n";
        for (const auto& [key, count] : tables.op_distribution)
            out << key.first << ',' << key.second << ',' << count << "\n";
    }
    {
        auto out = open("encoding_cost.csv");
        out << "describer,tokens,words,lines,seconds\n";
        for (const auto& [name, e] : tables.encoding_cost_by_describer)
            out << name << ',' << e.tokens << ',' << e.words << ',' << e.lines << ','
                << fmt(e.seconds) << "\n";
    }
    {
        auto out = open("report.json");
        out << tables.to_json() << "\n";
    }
}

}  // namespace graphmend
