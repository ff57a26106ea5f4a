#ifndef MISCLASS_ERRORS_HPP
#define MISCLASS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace misclass {

// Invalid model/data shapes or values; maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Design-matrix / coefficient-length mismatch; names the offending block.
class DimensionError : public ValidationError {
public:
    DimensionError(const std::string& block, const std::string& what)
        : ValidationError("dimension mismatch in " + block + ": " + what), block_(block) {}
    const std::string& block() const { return block_; }

private:
    std::string block_;
};

// Malformed CSV or config file; carries a 1-based line number when known.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& path, long line, const std::string& what)
        : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Filesystem failures; maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite likelihood or similar numeric breakdown.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace misclass

#endif
