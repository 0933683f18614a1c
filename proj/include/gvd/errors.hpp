// Error hierarchy shared by the library, the C API, and the CLI.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gvd {

// Every failure carries a kind so callers can map it to a process exit code
// without parsing messages: config/format/io style errors exit 2, numeric
// and training failures exit 3.
enum class error_kind {
    config,     // invalid or inconsistent configuration values
    format,     // malformed file contents
    io,         // filesystem failures
    dimension,  // shape mismatch between tensors or datasets
    precondition,  // operation called outside its valid domain
    numeric,    // non-finite values, failed factorizations
    training,   // optimization diverged or produced unusable state
};

class error : public std::runtime_error {
public:
    error(error_kind kind, std::string message, std::string context = {})
        : std::runtime_error(context.empty() ? message : message + " (" + context + ")"),
          kind_(kind),
          message_(std::move(message)),
          context_(std::move(context)) {}

    error_kind kind() const { return kind_; }
    const std::string & message() const { return message_; }
    const std::string & context() const { return context_; }

    const char * kind_name() const {
        switch (kind_) {
            case error_kind::config:       return "config";
            case error_kind::format:       return "format";
            case error_kind::io:           return "io";
            case error_kind::dimension:    return "dimension";
            case error_kind::precondition: return "precondition";
            case error_kind::numeric:      return "numeric";
            case error_kind::training:     return "training";
        }
        return "unknown";
    }

    int exit_code() const {
        switch (kind_) {
            case error_kind::numeric:
            case error_kind::training:
                return 3;
            default:
                return 2;
        }
    }

private:
    error_kind kind_;
    std::string message_;
    std::string context_;
};

}  // namespace gvd
