#pragma once

#include <stdexcept>
#include <string>

namespace marle {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// bad user input; the message names the offending field
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class DegenerateMomentsError : public Error {
public:
    using Error::Error;
};

class SmallDataError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace marle
