#pragma once

#include <stdexcept>
#include <string>

namespace horizonlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller bug: an action outside A(s) was applied.
class InvalidAction : public Error {
public:
    using Error::Error;
};

// A decision was requested at a state with no actions.
class TerminalState : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

// Raised by planners (empty proposal at the root, remote service failure).
class PlanningError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace horizonlab
