#pragma once

#include <stdexcept>
#include <string>

namespace bilayer {

// Root of every error raised by the library. Callers that only care about
// "math failed" vs "environment failed" can catch these two bases.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SupercellTooSmall : public Error {
public:
    SupercellTooSmall(long p, long q)
        : Error("supercell too small: p=" + std::to_string(p) + ", q=" + std::to_string(q) +
                " (both must be >= 3)") {}
};

class LatticeMismatch : public Error {
public:
    LatticeMismatch() : Error("algebra elements defined over different lattice constants") {}
};

class EmptyTruncation : public Error {
public:
    explicit EmptyTruncation(double radius)
        : Error("empty truncation: radius " + std::to_string(radius) +
                " is smaller than one lattice constant") {}
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class EdgeSingularity : public Error {
public:
    explicit EdgeSingularity(double energy)
        : Error("edge singularity: energy " + std::to_string(energy) +
                " is at or beyond the rescaled band edge") {}
};

class EigensolverFailure : public Error {
public:
    EigensolverFailure(long p, long q, const std::string& what)
        : Error("eigensolver failed for (p=" + std::to_string(p) + ", q=" + std::to_string(q) +
                "): " + what),
          p_(p), q_(q) {}

    long p() const noexcept { return p_; }
    long q() const noexcept { return q_; }

private:
    long p_;
    long q_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace bilayer
