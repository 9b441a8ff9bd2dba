#pragma once

// Seeded generator for the synthetic medical property graph with
// parameterized error injection and exact ground-truth labels for every
// induced inconsistency.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graphmend/gdc.hpp"
#include "graphmend/repair.hpp"

namespace graphmend {

struct GenConfig {
    std::uint64_t seed = 42;
    int n_patients = 1171;
    int n_medications = 131;
    int n_ingredients = 113;
    int n_allergy_nodes = 15;  // inert, present for scale fidelity
    int n_takes_edges = 1000;
    double p_wrong_ingredient = 0.15;
    double p_allergy = 0.05;
    double p_wrong_allergy = 0.25;

    void validate() const;
};

struct LedgerEntry {
    NodeId patient;
    NodeId medication;
    NodeId ingredient;
    GroundTruthRepair repair;
};

struct GroundTruthLedger {
    std::vector<LedgerEntry> entries;
    std::set<EdgeId> injected_wrong_ingredient_edges;
    std::set<EdgeId> injected_allergy_edges;

    const LedgerEntry* find(const NodeId& p, const NodeId& m, const NodeId& i) const;
    const LedgerEntry* find_by_violation(const std::string& violation_id) const;

    std::string to_json() const;
    static GroundTruthLedger from_json(const std::string& text);
};

// Deterministic for a fixed config. Ledger violation ids assume the default
// constraint's variable names (p, m, i, rm, rc, ra).
std::pair<PropertyGraph, GroundTruthLedger> generate(const GenConfig& config);

struct AuditReport {
    std::vector<std::string> failures;
    int violations = 0;
    int ledger_entries = 0;
    bool ok() const { return failures.empty(); }
};

// Verifies the ledger<->violations bijection and that each ground-truth
// repair eliminates exactly its own violation.
AuditReport audit(const PropertyGraph& g, const GroundTruthLedger& ledger,
                  const GdcQuery& gdc);

// The shipped default constraint (patient takes a medication containing an
// ingredient the patient is allergic to), with the M2 template attached.
extern const char* kDefaultConstraintFile;
ConstraintFile default_constraint();

}  // namespace graphmend
