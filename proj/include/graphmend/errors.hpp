#pragma once

#include <stdexcept>
#include <string>

namespace graphmend {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownNode : Error {
    explicit UnknownNode(const std::string& id) : Error("unknown node: " + id) {}
};

struct UnknownEdge : Error {
    explicit UnknownEdge(const std::string& id) : Error("unknown edge: " + id) {}
};

// JSON / constraint-file parse failure with position info baked into the message.
struct ParseError : Error {
    using Error::Error;
};

struct SyntaxError : Error {
    SyntaxError(const std::string& msg, int line, int col)
        : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line(line), col(col) {}
    int line;
    int col;
};

struct UnsupportedFeature : Error {
    using Error::Error;
};

struct UnboundVariable : Error {
    explicit UnboundVariable(const std::string& var) : Error("unbound variable: " + var) {}
};

struct MissingPlaceholder : Error {
    MissingPlaceholder(const std::string& var, const std::string& key)
        : Error("unresolvable placeholder {" + var + "." + key + "}"), var(var), key(key) {}
    std::string var;
    std::string key;
};

struct UnresolvableTarget : Error {
    explicit UnresolvableTarget(const std::string& target)
        : Error("unresolvable repair target: " + target) {}
};

struct ConfigError : Error {
    using Error::Error;
};

struct GatewayError : Error {
    using Error::Error;
};

struct Timeout : GatewayError {
    using GatewayError::GatewayError;
};

struct HttpError : GatewayError {
    HttpError(int status, const std::string& msg)
        : GatewayError("http " + std::to_string(status) + ": " + msg), status(status) {}
    int status;
};

struct MalformedBackendResponse : GatewayError {
    using GatewayError::GatewayError;
};

struct DuplicateName : Error {
    explicit DuplicateName(const std::string& name) : Error("duplicate mock name: " + name) {}
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace graphmend
