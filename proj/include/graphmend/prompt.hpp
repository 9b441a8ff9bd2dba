#pragma once

// Renders a violation into text encodings and assembles the full prompt
// (system prompt + inconsistency description + output-format spec + few-shot
// examples) for every prompting setup.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphmend/gateway.hpp"
#include "graphmend/gdc.hpp"

namespace graphmend {

enum class EncodingKind {
    M1NodeEdge,      // node-edge listing only
    CypherPlusMatch, // query text + node-edge listing
    Template,        // query text + template paragraph
    LlmDescribed,    // query text + description written by a describer model
};

struct EncodingMode {
    EncodingKind kind = EncodingKind::M1NodeEdge;
    std::string describer;  // model name, LlmDescribed only

    bool includes_cypher() const { return kind != EncodingKind::M1NodeEdge; }
    std::string label() const;
    static EncodingMode parse(const std::string& text);  // "m1", "cypher", "template", "llm:<model>"

    bool operator==(const EncodingMode&) const = default;
};

enum class ExampleMode { None, OneSmall, TwoSmall, OneLarge, TwoMixed };

std::string example_mode_label(ExampleMode m);
ExampleMode parse_example_mode(const std::string& text);

// Few-shot blocks are configuration, not code: loaded from a fixture file of
// `[small-1]` / `[small-2]` / `[large-1]` sections, with shipped defaults.
struct FewShotExamples {
    std::string small1;
    std::string small2;
    std::string large1;

    std::vector<std::string> blocks_for(ExampleMode m) const;
    static FewShotExamples defaults();
    static FewShotExamples parse(const std::string& fixture_text);
    static FewShotExamples load(const std::string& path);
};

struct PromptBundle {
    std::string system;
    std::string user;
    EncodingMode encoding;
    ExampleMode examples = ExampleMode::None;
    std::string violation_id;
    std::size_t char_count = 0;
};

struct EncodingCost {
    double seconds = 0.0;
    long tokens = 0;
    long words = 0;
    long lines = 0;
    bool estimated = false;
};

// One line per bound node then per bound edge, variables sorted, properties
// sorted by key, values over 200 chars elided.
std::string encode_m1(const PropertyGraph& g, const MatchBinding& binding);

// Substitutes `{var.key}` placeholders with property values from the binding.
std::string encode_m2(const std::string& template_text, const PropertyGraph& g,
                      const MatchBinding& binding);

// Asks the describer model to write a free-text description of the M1 listing.
std::string encode_m3(Gateway& gateway, const std::string& describer_model,
                      const PropertyGraph& g, const MatchBinding& binding,
                      EncodingCost* cost = nullptr);

// Hook letting the harness cache M3 encodings across repairing models.
using M3Encoder = std::function<std::string(const std::string& describer,
                                            const PropertyGraph&, const MatchBinding&)>;

struct PromptContext {
    FewShotExamples examples = FewShotExamples::defaults();
    std::string template_text;  // required for EncodingKind::Template
    M3Encoder m3_encoder;       // required for EncodingKind::LlmDescribed
};

extern const std::string kOutputFormatSpec;

PromptBundle build_prompt(const GdcQuery& gdc, const PropertyGraph& g,
                          const MatchBinding& binding, const EncodingMode& encoding,
                          ExampleMode example_mode, const PromptContext& ctx);

}  // namespace graphmend
