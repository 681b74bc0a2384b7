#pragma once

#include <stdexcept>
#include <string>

namespace shardagg {

// Base of every error raised by the simulator. Each subclass maps to one
// failure family so callers (and the CLI exit codes) can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Operation called in the wrong lifecycle state (double finalize, empty
// aggregation, ...).
class StateError : public Error {
public:
    using Error::Error;
};

// A store protocol rule was broken, e.g. overwriting an existing key.
class ProtocolViolation : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class OutOfMemory : public Error {
public:
    OutOfMemory(const std::string& what, double required_mb, double allocated_mb)
        : Error(what), required_mb_(required_mb), allocated_mb_(allocated_mb) {}

    double required_mb() const { return required_mb_; }
    double allocated_mb() const { return allocated_mb_; }

private:
    double required_mb_;
    double allocated_mb_;
};

class Timeout : public Error {
public:
    Timeout(const std::string& what, double elapsed_s, double limit_s)
        : Error(what), elapsed_s_(elapsed_s), limit_s_(limit_s) {}

    double elapsed_s() const { return elapsed_s_; }
    double limit_s() const { return limit_s_; }

private:
    double elapsed_s_;
    double limit_s_;
};

// Raised at plan time when no function size can hold an aggregator.
class Infeasible : public Error {
public:
    Infeasible(const std::string& what, double required_mb, double limit_mb)
        : Error(what), required_mb_(required_mb), limit_mb_(limit_mb) {}

    double required_mb() const { return required_mb_; }
    double limit_mb() const { return limit_mb_; }

private:
    double required_mb_;
    double limit_mb_;
};

// An internal consistency check failed (e.g. executed S3 operations differ
// from the topology's closed-form prediction).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace shardagg
