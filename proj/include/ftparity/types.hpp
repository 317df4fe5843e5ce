// types.hpp — scalar/matrix aliases, ancilla level labels and the error hierarchy

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ftparity {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ancilla transmon levels, ordered by index in the joint space.
enum class Level : int { g = 0, e = 1, f = 2, h = 3 };
inline constexpr int kAncillaLevels = 4;

inline constexpr int index_of(Level l) noexcept { return static_cast<int>(l); }
char level_name(Level l) noexcept;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coherent-state tail beyond the Fock cutoff is not negligible.
class TruncationError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Effective (static) drive requested outside its validity range, or FT assertion failed.
class InvalidDrive : public Error {
public:
    using Error::Error;
};

// Step-size, positivity, zero-norm, non-convergence and fit failures.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

} // namespace ftparity
