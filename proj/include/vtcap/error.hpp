#pragma once

#include <stdexcept>
#include <string>

namespace vtcap {

// Error categories map onto the CLI exit-code contract:
// config/usage -> 1, data -> 2, endpoint -> 3.
enum class ErrorKind { Config, Data, Endpoint };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorKind::Config, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorKind::Data, msg) {}
};

// Undecodable input bytes; carries the offending byte offset in the message.
struct DecodeError : DataError {
    DecodeError(const std::string& msg, std::size_t byte_offset)
        : DataError(msg + " at byte offset " + std::to_string(byte_offset)),
          offset(byte_offset) {}
    std::size_t offset;
};

struct EndpointError : Error {
    explicit EndpointError(const std::string& msg) : Error(ErrorKind::Endpoint, msg) {}
};

} // namespace vtcap
