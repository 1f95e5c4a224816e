#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace guadasim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument outside the domain of a model function (e.g. clock <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (bad source text, cyclic DAG, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Events delivered with a timestamp earlier than one already logged.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// A state-machine operation invoked from a state that does not allow it.
class IllegalTransition : public Error {
public:
    using Error::Error;
};

/// Work assigned to a unit that cannot perform it (3D content on a 2D unit).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Configuration validation failure. Carries every violated field rather
/// than just the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems);

    [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

} // namespace guadasim
