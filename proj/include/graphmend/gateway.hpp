#pragma once

// Uniform client for text-generation backends: a local-LLM HTTP server and a
// deterministic scripted mock. Captures cost telemetry per request.

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "graphmend/errors.hpp"

namespace graphmend {

struct ModelConfig {
    std::string name;
    std::string endpoint;  // empty => mock registered under `name`
    double temperature = 0.4;
    std::optional<int> max_tokens;
    double timeout_s = 120.0;
    int retries = 0;
    int concurrency = 1;  // in-flight cap per endpoint
};

struct GenerationResult {
    std::string text;
    double prompt_eval_seconds = 0.0;
    double eval_seconds = 0.0;
    double wall_seconds = 0.0;
    long completion_tokens = 0;
    std::optional<long> prompt_tokens;
    bool estimated = false;  // token/duration figures are local estimates
    std::string model;
};

// Maps backend response JSON onto GenerationResult fields. Defaults match the
// common local inference server layout (durations in nanoseconds).
struct BackendAdapter {
    std::string text_field = "response";
    std::string prompt_eval_duration_field = "prompt_eval_duration";
    std::string eval_duration_field = "eval_duration";
    std::string completion_tokens_field = "eval_count";
    std::string prompt_tokens_field = "prompt_eval_count";
    double duration_to_seconds = 1e-9;
    std::string request_path = "/api/generate";

    static BackendAdapter from_json(const std::string& text);
    static BackendAdapter load(const std::string& path);
};

// behavior(system, user, tag) -> completion text; `tag` carries the violation
// id so table-driven mocks can look up per-violation replies.
using MockBehavior =
    std::function<std::string(const std::string& system, const std::string& user,
                              const std::string& tag)>;

class Gateway {
public:
    Gateway() = default;

    void register_mock(const std::string& name, MockBehavior behavior);
    bool has_mock(const std::string& name) const;

    GenerationResult generate(const ModelConfig& config, const std::string& system,
                              const std::string& user, const std::string& tag = "");

    void set_adapter(BackendAdapter adapter) { adapter_ = std::move(adapter); }
    const BackendAdapter& adapter() const { return adapter_; }

    // GRAPHMEND_ENDPOINT, when set, overrides every config's endpoint.
    static std::string endpoint_override();

private:
    GenerationResult generate_http(const ModelConfig& config, const std::string& endpoint,
                                   const std::string& system, const std::string& user);

    class Slot;
    struct EndpointGate {
        std::mutex m;
        std::condition_variable cv;
        int in_flight = 0;
    };
    EndpointGate& gate_for(const std::string& endpoint);

    mutable std::mutex mu_;
    std::map<std::string, MockBehavior> mocks_;
    std::map<std::string, EndpointGate> gates_;
    BackendAdapter adapter_;
};

long estimate_tokens(const std::string& text);  // whitespace-split estimate

namespace mocks {

MockBehavior fixed_text(std::string reply);
MockBehavior lookup_table(std::map<std::string, std::string> by_tag);
MockBehavior echo();                 // repairs block absent; echoes the user text
MockBehavior garbage();              // plain "hello", no repairs block
MockBehavior wrong_edge();           // DEL_EDGE | [rm] | -
MockBehavior eager();                // 9-op block, 3 of them disallowed codes
MockBehavior indecisive();           // two alternative repairs blocks
MockBehavior hallucinating();        // correct deletion plus fabricated updates

}  // namespace mocks

}  // namespace graphmend
