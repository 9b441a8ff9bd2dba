#pragma once

// Experiment runner: sweeps models x encoding modes x example modes over all
// violations, scores each repair, journals rows for crash-resume and emits
// the aggregate tables (quality matrices, cost means, op distribution).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphmend/gateway.hpp"
#include "graphmend/prompt.hpp"
#include "graphmend/repair.hpp"
#include "graphmend/synthea.hpp"

namespace graphmend {

struct ExperimentPlan {
    std::string dataset_path;           // graph json; empty => generate
    std::string ledger_path;
    std::optional<GenConfig> gen;
    std::string constraint_path;        // empty => shipped default constraint
    std::vector<ModelConfig> models;
    std::vector<EncodingMode> encodings;
    std::vector<ExampleMode> example_modes;
    int runs_per_cell = 1;
    int workers = 1;
    int limit_violations = 0;  // 0 => all
    bool cumulative = false;   // repairs compound across violations (off: per-violation snapshots)
    std::string out_dir = "out";

    static ExperimentPlan from_json(const std::string& text);
    static ExperimentPlan load(const std::string& path);
};

struct MetricsRow {
    std::string model;
    std::string encoding_mode;
    std::string example_mode;
    int run = 0;
    std::string violation_id;
    int F = 0, V = 0, A = 0;
    double prompt_eval_s = 0.0;
    double eval_s = 0.0;
    long tokens = 0;
    std::size_t response_chars = 0;
    std::size_t repair_chars = 0;
    int n_ops = 0;
    int extra_blocks = 0;
    std::map<std::string, int> op_histogram;  // op label (or raw invalid token) -> count
    std::string error;

    std::string key() const;  // journal identity
    std::string to_json() const;
    static MetricsRow from_json(const std::string& line);
};

struct EncodingCostRow {
    std::string describer;
    double seconds = 0.0;
    long tokens = 0;
    long words = 0;
    long lines = 0;
};

struct RunResult {
    std::vector<MetricsRow> rows;
    std::vector<EncodingCostRow> encoding_costs;  // one per fresh M3 encoding
};

class Runner {
public:
    Runner(Gateway& gateway) : gateway_(gateway) {}

    // Journals to <out_dir>/rows.jsonl; existing journal rows are kept and
    // their cells skipped, so an interrupted run resumes to the same result.
    RunResult run(const ExperimentPlan& plan);

    // Test hook: stop after this many newly computed rows (0 = no limit).
    void set_max_new_rows(int n) { max_new_rows_ = n; }

private:
    Gateway& gateway_;
    int max_new_rows_ = 0;
};

struct Tables {
    // (model, encoding) -> mean F/V/A; likewise (model, example mode)
    struct Quality {
        double F = 0, V = 0, A = 0;
        int n = 0;
    };
    std::map<std::pair<std::string, std::string>, Quality> by_encoding;
    std::map<std::pair<std::string, std::string>, Quality> by_example_mode;

    struct Cost {
        double prompt_eval_s = 0, eval_s = 0, tokens = 0, response_chars = 0,
               repair_chars = 0, n_ops = 0;
        int n = 0;
    };
    std::map<std::string, Cost> cost_by_model;
    std::map<std::pair<std::string, std::string>, long> op_distribution;  // (model, op) -> count
    std::map<std::string, EncodingCostRow> encoding_cost_by_describer;    // averaged

    std::string to_json() const;
};

// Asserts the A <= V <= F chain on every row; throws Error on violation.
Tables aggregate(const std::vector<MetricsRow>& rows,
                 const std::vector<EncodingCostRow>& encoding_costs = {});

// Writes rows.csv, encoding_quality.csv, example_quality.csv, cost.csv,
// op_distribution.csv, encoding_cost.csv and report.json under out_dir.
void report(const Tables& tables, const std::vector<MetricsRow>& rows,
            const std::string& out_dir);

std::vector<MetricsRow> load_journal(const std::string& path);

// Registers the built-in deterministic mocks (ground-truth needs the ledger).
void register_builtin_mocks(Gateway& gateway, const GroundTruthLedger& ledger);

}  // namespace graphmend
