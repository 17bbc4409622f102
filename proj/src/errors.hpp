#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace kevo {

// Error taxonomy shared by every module. The C API and the CLI map these
// kinds onto numeric status / exit codes; inside the library they travel
// as exceptions.
enum class ErrorKind {
    usage,             // caller passed something malformed (empty seed list, ...)
    config,            // invalid or unreadable configuration
    storage,           // filesystem-level failure
    unknown_id,
    unknown_parent,
    duplicate_id,
    empty_population,
    no_scored_records,
    precondition,      // a documented operation precondition was violated
    role_unconfigured,
    transport_failure, // LLM backend unreachable after bounded retries
    parse_exhausted,   // structured-output repair retries ran out
    wrong_count,
    eval_failure,      // evaluator harness malfunction (not a kernel failure)
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::storage: return "storage";
    case ErrorKind::unknown_id: return "unknown-id";
    case ErrorKind::unknown_parent: return "unknown-parent";
    case ErrorKind::duplicate_id: return "duplicate-id";
    case ErrorKind::empty_population: return "empty-population";
    case ErrorKind::no_scored_records: return "no-evaluated-records";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::role_unconfigured: return "role-unconfigured";
    case ErrorKind::transport_failure: return "transport-failure";
    case ErrorKind::parse_exhausted: return "parse-exhausted";
    case ErrorKind::wrong_count: return "wrong-count";
    case ErrorKind::eval_failure: return "eval-failure";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

// Result of a total text parser: either a value or a human-readable error
// description suitable for feeding back into a repair prompt.
template <class T>
struct Parsed {
    std::optional<T> value;
    std::string error;

    bool ok() const { return value.has_value(); }

    static Parsed success(T v) {
        Parsed p;
        p.value = std::move(v);
        return p;
    }
    static Parsed failure(std::string why) {
        Parsed p;
        p.error = std::move(why);
        return p;
    }
};

} // namespace kevo
