#pragma once

#include <stdexcept>
#include <string>

namespace climalign {

enum class ErrorKind { schema, format, data, config, domain, not_found, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::schema, w) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorKind::format, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorKind::data, w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct NotFoundError : Error {
    explicit NotFoundError(const std::string& w) : Error(ErrorKind::not_found, w) {}
};

struct RuntimeError : Error {
    explicit RuntimeError(const std::string& w) : Error(ErrorKind::runtime, w) {}
};

const char* to_string(ErrorKind k);

}  // namespace climalign
