#include "graphmend/synthea.hpp"

#include <algorithm>
#include <iterator>
#include <random>
#include <tuple>

#include <json.hpp>

namespace graphmend {

using nlohmann::json;

void GenConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0)
            throw ConfigError(std::string(name) + " must be within [0,1]");
    };
    prob(p_wrong_ingredient, "p_wrong_ingredient");
    prob(p_allergy, "p_allergy");
    prob(p_wrong_allergy, "p_wrong_allergy");
    if (n_patients <= 0 || n_medications <= 0 || n_ingredients <= 0)
        throw ConfigError("node counts must be positive");
    if (n_allergy_nodes < 0) throw ConfigError("n_allergy_nodes must be non-negative");
    if (n_takes_edges <= 0) throw ConfigError("n_takes_edges must be positive");
    if (static_cast<long long>(n_takes_edges) >
        static_cast<long long>(n_patients) * n_medications)
        throw ConfigError("n_takes_edges exceeds distinct patient-medication pairs");
}

namespace {

// Portable deterministic draws: mt19937_64 raw output only, no distribution
// classes (their mapping is implementation-defined).
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    std::uint64_t next() { return engine(); }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    bool coin(double p) {
        return (static_cast<double>(next() >> 11) * 0x1.0p-53) < p;
    }
};

const char* kFirstNames[] = {
    "Rosio", "Sanford", "Dudley", "Marcelina", "Terrence", "Jacinto", "Alva",
    "Keesha", "Wilber", "Gregoria", "Hershel", "Yolonda", "Ferdinand", "Blossom",
    "Donnell", "Margret", "Stanton", "Leonila", "Isidro", "Shanelle", "Aurelio",
    "Dortha", "Cleveland", "Melba", "Rolando", "Cassondra", "Demetrius", "Ellamae",
    "Garfield", "Tambra", "Hobert", "Lizabeth", "Norberto", "Queenie", "Armando",
    "Delphia", "Wilfredo", "Marisela", "Emanuel", "Tresa",
};

const char* kLastNames[] = {
    "Bayer", "Fritsch", "Langworth", "Kshlerin", "Okuneva", "Ritchie", "Zulauf",
    "Gleichner", "Haag", "Dibbert", "Stiedemann", "Prosacco", "Breitenberg",
    "Quitzon", "Reinger", "Carroll", "Monahan", "Kerluke", "Ullrich", "Bartoletti",
    "Schamberger", "Rutherford", "Moen", "Gorczany", "Wisozk", "Effertz", "Kilback",
    "Auer", "Rodriguez", "Windler", "Lemke", "Bergstrom", "Nitzsche", "Pouros",
    "Terry", "Botsford", "Corwin", "Lakin", "Harber", "Sporer",
};

const char* kIngredientBases[] = {
    "verapamil", "oxycodone", "epoetin alfa", "metformin", "lisinopril", "warfarin",
    "amoxicillin", "clopidogrel", "atorvastatin", "omeprazole", "amlodipine",
    "simvastatin", "hydrochlorothiazide", "levothyroxine", "albuterol", "gabapentin",
    "sertraline", "furosemide", "prednisone", "tramadol", "ibuprofen", "naproxen",
    "insulin lispro", "fentanyl", "morphine", "codeine", "aspirin", "clonazepam",
    "losartan", "metoprolol", "carvedilol", "digoxin", "diltiazem", "enalapril",
    "fluoxetine", "citalopram", "escitalopram", "duloxetine", "venlafaxine",
    "alprazolam", "lorazepam", "diazepam", "zolpidem", "montelukast", "cetirizine",
    "loratadine", "fexofenadine", "ranitidine", "pantoprazole", "esomeprazole",
    "ciprofloxacin", "azithromycin", "doxycycline", "cephalexin", "penicillin",
    "nitroglycerin", "isosorbide", "spironolactone", "allopurinol", "colchicine",
};

const char* kSaltSuffixes[] = {
    "hydrochloride", "sodium", "sulfate", "tartrate", "maleate", "citrate",
    "phosphate", "acetate",
};

const char* kMedicationForms[] = {
    "Oral Tablet", "Oral Capsule", "Injection", "Extended Release Oral Tablet",
    "Oral Solution", "Nasal Spray",
};

const int kStrengths[] = {5, 10, 20, 25, 40, 50, 75, 100, 150, 200, 250, 325, 500};

const char* kAllergyNames[] = {
    "Allergy to peanut", "Allergy to mould", "Allergy to bee venom",
    "Allergy to dairy product", "Allergy to tree pollen", "Allergy to grass pollen",
    "Allergy to house dust mite", "Allergy to animal dander", "Allergy to shellfish",
    "Allergy to wheat", "Allergy to soya", "Allergy to fish", "Allergy to egg protein",
    "Allergy to latex", "Allergy to aspirin",
};

std::vector<std::string> make_ingredient_names(int n) {
    std::vector<std::string> names;
    for (const char* base : kIngredientBases) {
        names.emplace_back(base);
        if (static_cast<int>(names.size()) >= n) return names;
    }
    for (const char* suffix : kSaltSuffixes) {
        for (const char* base : kIngredientBases) {
            names.emplace_back(std::string(base) + " " + suffix);
            if (static_cast<int>(names.size()) >= n) return names;
        }
    }
    int k = 2;
    while (static_cast<int>(names.size()) < n) {
        for (const char* base : kIngredientBases) {
            names.emplace_back(std::string(base) + "-" + std::to_string(k));
            if (static_cast<int>(names.size()) >= n) return names;
        }
        ++k;
    }
    return names;
}

}  // namespace

const LedgerEntry* GroundTruthLedger::find(const NodeId& p, const NodeId& m,
                                           const NodeId& i) const {
    for (const auto& e : entries)
        if (e.patient == p && e.medication == m && e.ingredient == i) return &e;
    return nullptr;
}

const LedgerEntry* GroundTruthLedger::find_by_violation(const std::string& vid) const {
    for (const auto& e : entries)
        if (e.repair.violation_id == vid) return &e;
    return nullptr;
}

std::string GroundTruthLedger::to_json() const {
    json out = json::array();
    for (const auto& e : entries) {
        json je;
        je["violation"] = {{"p", e.patient}, {"m", e.medication}, {"i", e.ingredient}};
        je["repair"] = {{"op", "DEL_EDGE"},
                        {"edge_var", e.repair.edge_var},
                        {"edge_id", e.repair.edge_id},
                        {"violation_id", e.repair.violation_id}};
        out.push_back(std::move(je));
    }
    return out.dump(2);
}

GroundTruthLedger GroundTruthLedger::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("ledger json: " + std::string(e.what()));
    }
    GroundTruthLedger ledger;
    for (const auto& je : j) {
        LedgerEntry e;
        e.patient = je.at("violation").at("p").get<std::string>();
        e.medication = je.at("violation").at("m").get<std::string>();
        e.ingredient = je.at("violation").at("i").get<std::string>();
        e.repair.edge_var = je.at("repair").at("edge_var").get<std::string>();
        e.repair.edge_id = je.at("repair").at("edge_id").get<std::string>();
        if (je.at("repair").contains("violation_id"))
            e.repair.violation_id = je.at("repair").at("violation_id").get<std::string>();
        if (e.repair.edge_var != "ra" && e.repair.edge_var != "rc")
            throw ParseError("ledger json: edge_var must be \"ra\" or \"rc\"");
        ledger.entries.push_back(std::move(e));
    }
    return ledger;
}

const char* kDefaultConstraintFile =
    "-- name: medication-allergy\n"
    "-- template: A person should not be treated with a medicine that contains an "
    "ingredient that the person is allergic to. However, a person (p) "
    "(p.first={p.first}) takes a medicine (m) (m.description={m.description}) which "
    "contains an ingredient (i) (i.id={i.id}) and (p) is allergic to (i).\n"
    "MATCH (p:Patient)-[rm:TAKES_MEDICATION]->(m:Medication),\n"
    "      (m)-[rc:HAS_INGREDIENT]->(i:Ingredient),\n"
    "      (p)-[ra:ALLERGIC_TO]->(i)\n"
    "RETURN *\n";

ConstraintFile default_constraint() { return parse_constraint_file(kDefaultConstraintFile); }

std::pair<PropertyGraph, GroundTruthLedger> generate(const GenConfig& config) {
    config.validate();
    Rng rng(config.seed);
    PropertyGraph g;
    GroundTruthLedger ledger;

    std::vector<NodeId> patients;
    patients.reserve(config.n_patients);
    constexpr int n_first = std::size(kFirstNames);
    constexpr int n_last = std::size(kLastNames);
    for (int i = 0; i < config.n_patients; ++i) {
        std::string first = std::string(kFirstNames[rng.below(n_first)]) +
                            std::to_string(rng.below(1000));
        std::string last = std::string(kLastNames[rng.below(n_last)]) +
                           std::to_string(rng.below(1000));
        patients.push_back(g.add_node({"Patient"},
                                      {{"first", first},
                                       {"last", last},
                                       {"id", "patient-" + std::to_string(i)}}));
    }

    for (int i = 0; i < config.n_allergy_nodes; ++i) {
        g.add_node({"Allergy"},
                   {{"description",
                     std::string(kAllergyNames[i % static_cast<int>(std::size(kAllergyNames))])}});
    }

    std::vector<std::string> ingredient_names = make_ingredient_names(config.n_ingredients);
    std::vector<NodeId> ingredients;
    ingredients.reserve(config.n_ingredients);
    for (int i = 0; i < config.n_ingredients; ++i)
        ingredients.push_back(g.add_node({"Ingredient"}, {{"id", ingredient_names[i]}}));

    // medications: 1-3 correct ingredients each, plus an injected-wrong one
    // with p_wrong_ingredient
    std::vector<NodeId> medications;
    std::vector<std::vector<int>> med_ingredients(config.n_medications);
    std::vector<std::map<int, EdgeId>> med_ingredient_edges(config.n_medications);
    std::vector<std::vector<int>> med_wrong(config.n_medications);
    for (int m = 0; m < config.n_medications; ++m) {
        int n_correct = 1 + rng.below(std::min(3, config.n_ingredients));
        std::vector<int> chosen;
        while (static_cast<int>(chosen.size()) < n_correct) {
            int pick = rng.below(config.n_ingredients);
            if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end())
                chosen.push_back(pick);
        }
        int strength = kStrengths[rng.below(static_cast<int>(std::size(kStrengths)))];
        const char* form = kMedicationForms[rng.below(static_cast<int>(std::size(kMedicationForms)))];
        std::string description = ingredient_names[chosen[0]] + " " +
                                  std::to_string(strength) + " MG " + form;
        NodeId med = g.add_node({"Medication"},
                                {{"description", description},
                                 {"code", std::to_string(100000 + rng.below(900000))}});
        medications.push_back(med);
        for (int idx : chosen) {
            EdgeId eid = g.add_edge(med, ingredients[idx], "HAS_INGREDIENT", {});
            med_ingredients[m].push_back(idx);
            med_ingredient_edges[m][idx] = eid;
        }
        if (rng.coin(config.p_wrong_ingredient) &&
            static_cast<int>(chosen.size()) < config.n_ingredients) {
            int wrong;
            do {
                wrong = rng.below(config.n_ingredients);
            } while (std::find(chosen.begin(), chosen.end(), wrong) != chosen.end());
            EdgeId eid = g.add_edge(med, ingredients[wrong], "HAS_INGREDIENT", {});
            med_ingredients[m].push_back(wrong);
            med_ingredient_edges[m][wrong] = eid;
            med_wrong[m].push_back(wrong);
            ledger.injected_wrong_ingredient_edges.insert(eid);
        }
    }

    // consumption edges: distinct (patient, medication) pairs so each
    // violation triple is unique
    std::set<std::pair<int, int>> taken_pairs;
    std::vector<std::tuple<int, int, EdgeId>> takes;
    while (static_cast<int>(takes.size()) < config.n_takes_edges) {
        int p = rng.below(config.n_patients);
        int m = rng.below(config.n_medications);
        if (!taken_pairs.emplace(p, m).second) continue;
        EdgeId eid = g.add_edge(patients[p], medications[m], "TAKES_MEDICATION", {});
        takes.emplace_back(p, m, eid);
    }

    // allergy injection: one draw per consumption edge, dedup on (patient, ingredient)
    std::map<std::pair<int, int>, EdgeId> allergy_edges;  // (patient, ingredient) -> edge
    for (const auto& [p, m, rm_edge] : takes) {
        if (!rng.coin(config.p_allergy)) continue;
        const std::vector<int>& pool = med_ingredients[m];
        const std::vector<int>& wrong = med_wrong[m];
        int ingredient;
        if (!wrong.empty() && rng.coin(config.p_wrong_allergy)) {
            ingredient = wrong[rng.below(static_cast<int>(wrong.size()))];
        } else {
            // prefer a correct ingredient; every med has at least one
            std::vector<int> correct;
            for (int idx : pool)
                if (std::find(wrong.begin(), wrong.end(), idx) == wrong.end())
                    correct.push_back(idx);
            ingredient = correct[rng.below(static_cast<int>(correct.size()))];
        }
        auto key = std::make_pair(p, ingredient);
        if (allergy_edges.count(key)) continue;
        EdgeId eid = g.add_edge(patients[p], ingredients[ingredient], "ALLERGIC_TO", {});
        allergy_edges.emplace(key, eid);
        ledger.injected_allergy_edges.insert(eid);
    }

    // ledger: enumerate every (takes, has_ingredient, allergic_to) triple
    for (const auto& [p, m, rm_edge] : takes) {
        for (int ingredient : med_ingredients[m]) {
            auto a = allergy_edges.find({p, ingredient});
            if (a == allergy_edges.end()) continue;
            EdgeId rc_edge = med_ingredient_edges[m].at(ingredient);
            LedgerEntry entry;
            entry.patient = patients[p];
            entry.medication = medications[m];
            entry.ingredient = ingredients[ingredient];
            bool wrong = ledger.injected_wrong_ingredient_edges.count(rc_edge) != 0;
            entry.repair.edge_var = wrong ? "rc" : "ra";
            entry.repair.edge_id = wrong ? rc_edge : a->second;
            entry.repair.violation_id = make_violation_id(
                {{"p", entry.patient}, {"m", entry.medication}, {"i", entry.ingredient}},
                {{"rm", rm_edge}, {"rc", rc_edge}, {"ra", a->second}});
            ledger.entries.push_back(std::move(entry));
        }
    }
    std::sort(ledger.entries.begin(), ledger.entries.end(),
              [](const LedgerEntry& a, const LedgerEntry& b) {
                  return a.repair.violation_id < b.repair.violation_id;
              });
    return {std::move(g), std::move(ledger)};
}

AuditReport audit(const PropertyGraph& g, const GroundTruthLedger& ledger,
                  const GdcQuery& gdc) {
    AuditReport report;
    std::vector<MatchBinding> violations = find_violations(g, gdc);
    report.violations = static_cast<int>(violations.size());
    report.ledger_entries = static_cast<int>(ledger.entries.size());

    std::set<std::string> covered;
    for (const auto& v : violations) {
        const LedgerEntry* entry = ledger.find_by_violation(v.violation_id);
        if (!entry) {
            report.failures.push_back("unledgered violation " + v.violation_id);
            continue;
        }
        covered.insert(v.violation_id);
        // the ground-truth deletion must eliminate exactly this violation
        PropertyGraph repaired = g.snapshot();
        if (!repaired.has_edge(entry->repair.edge_id)) {
            report.failures.push_back("ground-truth edge missing for " + v.violation_id);
            continue;
        }
        repaired.del_edge(entry->repair.edge_id);
        if (violation_still_present(repaired, gdc, v))
            report.failures.push_back("ground-truth repair does not eliminate " +
                                      v.violation_id);
    }
    for (const auto& e : ledger.entries)
        if (!covered.count(e.repair.violation_id))
            report.failures.push_back("uncovered ledger entry " + e.repair.violation_id);
    return report;
}

}  // namespace graphmend
