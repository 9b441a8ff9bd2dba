#include "graphmend/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace graphmend {

using nlohmann::json;

long estimate_tokens(const std::string& text) {
    long n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

BackendAdapter BackendAdapter::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("adapter config: " + std::string(e.what()));
    }
    BackendAdapter a;
    auto get = [&j](const char* key, std::string& field) {
        if (j.contains(key)) field = j[key].get<std::string>();
    };
    get("text_field", a.text_field);
    get("prompt_eval_duration_field", a.prompt_eval_duration_field);
    get("eval_duration_field", a.eval_duration_field);
    get("completion_tokens_field", a.completion_tokens_field);
    get("prompt_tokens_field", a.prompt_tokens_field);
    get("request_path", a.request_path);
    if (j.contains("duration_unit")) {
        std::string u = j["duration_unit"].get<std::string>();
        if (u == "ns") a.duration_to_seconds = 1e-9;
        else if (u == "us") a.duration_to_seconds = 1e-6;
        else if (u == "ms") a.duration_to_seconds = 1e-3;
        else if (u == "s") a.duration_to_seconds = 1.0;
        else throw ParseError("adapter config: unknown duration_unit " + u);
    }
    return a;
}

BackendAdapter BackendAdapter::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open adapter config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string Gateway::endpoint_override() {
    const char* v = std::getenv("GRAPHMEND_ENDPOINT");
    return v ? v : "";
}

void Gateway::register_mock(const std::string& name, MockBehavior behavior) {
    std::lock_guard lock(mu_);
    if (mocks_.count(name)) throw DuplicateName(name);
    mocks_.emplace(name, std::move(behavior));
}

bool Gateway::has_mock(const std::string& name) const {
    std::lock_guard lock(mu_);
    return mocks_.count(name) != 0;
}

Gateway::EndpointGate& Gateway::gate_for(const std::string& endpoint) {
    std::lock_guard lock(mu_);
    return gates_[endpoint];
}

namespace {

// RAII in-flight slot against an endpoint gate.
struct SlotGuard {
    Gateway* gw;
    std::mutex& m;
    std::condition_variable& cv;
    int& in_flight;
    SlotGuard(std::mutex& m, std::condition_variable& cv, int& in_flight, int cap)
        : gw(nullptr), m(m), cv(cv), in_flight(in_flight) {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return in_flight < cap; });
        ++in_flight;
    }
    ~SlotGuard() {
        {
            std::lock_guard lock(m);
            --in_flight;
        }
        cv.notify_one();
    }
};

}  // namespace

GenerationResult Gateway::generate(const ModelConfig& config, const std::string& system,
                                   const std::string& user, const std::string& tag) {
    MockBehavior mock;
    {
        std::lock_guard lock(mu_);
        auto it = mocks_.find(config.name);
        if (it != mocks_.end()) mock = it->second;
    }
    if (mock) {
        GenerationResult r;
        r.text = mock(system, user, tag);
        r.model = config.name;
        r.completion_tokens = estimate_tokens(r.text);
        // synthetic clock: deterministic figures derived from sizes
        r.prompt_eval_seconds = 0.001 * static_cast<double>(estimate_tokens(user));
        r.eval_seconds = 0.01 * static_cast<double>(r.completion_tokens);
        r.wall_seconds = r.prompt_eval_seconds + r.eval_seconds;
        r.prompt_tokens = estimate_tokens(system) + estimate_tokens(user);
        r.estimated = true;
        return r;
    }

    std::string endpoint = endpoint_override();
    if (endpoint.empty()) endpoint = config.endpoint;
    if (endpoint.empty())
        throw GatewayError("model " + config.name +
                           " has no endpoint and no registered mock");

    std::exception_ptr last;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        try {
            return generate_http(config, endpoint, system, user);
        } catch (const GatewayError&) {
            last = std::current_exception();
        }
    }
    std::rethrow_exception(last);
}

GenerationResult Gateway::generate_http(const ModelConfig& config,
                                        const std::string& endpoint,
                                        const std::string& system,
                                        const std::string& user) {
    EndpointGate& gate = gate_for(endpoint);
    SlotGuard slot(gate.m, gate.cv, gate.in_flight, std::max(1, config.concurrency));

    httplib::Client client(endpoint);
    client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));

    json req;
    req["model"] = config.name;
    req["system"] = system;
    req["prompt"] = user;
    req["stream"] = false;
    req["options"]["temperature"] = config.temperature;
    if (config.max_tokens) req["options"]["num_predict"] = *config.max_tokens;

    auto start = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(adapter_.request_path, req.dump(), "application/json");
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();

    if (!res) {
        if (res.error() == httplib::Error::ConnectionTimeout ||
            res.error() == httplib::Error::Read)
            throw Timeout("request to " + endpoint + " timed out");
        throw HttpError(0, "request to " + endpoint + " failed: " +
                               httplib::to_string(res.error()));
    }
    if (res->status != 200) throw HttpError(res->status, res->body);

    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw MalformedBackendResponse("backend returned non-JSON body: " +
                                       std::string(e.what()));
    }
    if (!j.contains(adapter_.text_field) || !j[adapter_.text_field].is_string())
        throw MalformedBackendResponse("backend response lacks text field '" +
                                       adapter_.text_field + "'");

    GenerationResult r;
    r.text = j[adapter_.text_field].get<std::string>();
    r.model = config.name;
    r.wall_seconds = wall;

    bool have_native = j.contains(adapter_.eval_duration_field) &&
                       j.contains(adapter_.completion_tokens_field);
    if (have_native) {
        r.eval_seconds =
            j[adapter_.eval_duration_field].get<double>() * adapter_.duration_to_seconds;
        if (j.contains(adapter_.prompt_eval_duration_field))
            r.prompt_eval_seconds = j[adapter_.prompt_eval_duration_field].get<double>() *
                                    adapter_.duration_to_seconds;
        r.completion_tokens = j[adapter_.completion_tokens_field].get<long>();
        if (j.contains(adapter_.prompt_tokens_field))
            r.prompt_tokens = j[adapter_.prompt_tokens_field].get<long>();
    } else {
        r.eval_seconds = wall;
        r.completion_tokens = estimate_tokens(r.text);
        r.estimated = true;
    }
    return r;
}

namespace mocks {

MockBehavior fixed_text(std::string reply) {
    return [reply = std::move(reply)](const std::string&, const std::string&,
                                      const std::string&) { return reply; };
}

MockBehavior lookup_table(std::map<std::string, std::string> by_tag) {
    return [table = std::move(by_tag)](const std::string&, const std::string&,
                                       const std::string& tag) -> std::string {
        auto it = table.find(tag);
        return it == table.end() ? std::string("no entry for tag ") + tag : it->second;
    };
}

MockBehavior echo() {
    return [](const std::string&, const std::string& user, const std::string&) {
        return user;
    };
}

MockBehavior garbage() { return fixed_text("hello"); }

MockBehavior wrong_edge() {
    return fixed_text("<repairs>\nDEL_EDGE | [rm] | -\n</repairs>\n");
}

MockBehavior eager() {
    return fixed_text(
        "<repairs>\n"
        "DEL_EDGE | [ra] | -\n"
        "DEL_EDGE | [rc] | -\n"
        "UPD_NODE | [i] | id=placebo\n"
        "UPD_NODE | [m] | description=sugar pill\n"
        "ADD_NODE | [n1] | label=Ingredient, id=water\n"
        "UPD_EDGE | [rm] | dosage=none\n"
        "REMOVE_EDGE | [rm] | -\n"
        "FIX_NODE | [p] | -\n"
        "MERGE_NODE | [p] | -\n"
        "</repairs>\n");
}

MockBehavior indecisive() {
    return fixed_text(
        "Option A:\n<repairs>\nDEL_EDGE | [ra] | -\n</repairs>\n"
        "Option B:\n<repairs>\nDEL_EDGE | [rc] | -\n</repairs>\n");
}

MockBehavior hallucinating() {
    return fixed_text(
        "<repairs>\n"
        "DEL_EDGE | [ra] | -\n"
        "UPD_NODE | [m] | status=verified\n"
        "UPD_NODE | [p] | reviewed=true\n"
        "</repairs>\n");
}

}  // namespace mocks

}  // namespace graphmend
