#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hgd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed dataset line. Carries the 1-based line number and, for empty
/// fields, the offending column name.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string column, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line), column_(std::move(column)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::string column_;
};

class EncodingError : public Error {
public:
    EncodingError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Malformed store or model file. record_id is -1 when the problem is not
/// attributable to a single record (header, truncation).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what, std::int64_t record_id = -1)
        : Error(record_id >= 0 ? "record " + std::to_string(record_id) + ": " + what : what),
          record_id_(record_id) {}
    std::int64_t record_id() const noexcept { return record_id_; }

private:
    std::int64_t record_id_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Zero-norm vector where a direction is required. `index` is the position in
/// the caller's list (or a record id, depending on the raising operation).
class DegenerateVectorError : public Error {
public:
    DegenerateVectorError(std::int64_t index, const std::string& what) : Error(what), index_(index) {}
    std::int64_t index() const noexcept { return index_; }

private:
    std::int64_t index_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class SplitError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace hgd
