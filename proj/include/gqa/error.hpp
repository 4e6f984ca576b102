#pragma once

#include <stdexcept>
#include <string>

namespace gqa {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, size_t line)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// Reference to an id that is not defined (yet) in the knowledge base.
class DanglingIdError : public Error {
public:
    DanglingIdError(const std::string& id, size_t line)
        : Error("unknown id '" + id + "'" +
                (line > 0 ? " (line " + std::to_string(line) + ")" : "")),
          id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// Tensor shape disagreement; message reports both shapes.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

}  // namespace gqa
