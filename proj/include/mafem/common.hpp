#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mafem {

using Vec3 = Eigen::Vector3d;
using Vector = Eigen::VectorXd;

/// Base of every error raised by the library. The C API maps each subclass
/// onto a distinct status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TopologyError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class RefinementError : public Error { using Error::Error; };
class LineageError : public Error { using Error::Error; };
class FactorizationError : public Error { using Error::Error; };
class DimensionError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
/// Two eigenvectors that should be sign-aligned have a negative inner product.
class SignError : public Error { using Error::Error; };

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

/// Number of worker threads used by the element loops (assembly, estimator).
int num_threads();
void set_num_threads(int n);

} // namespace mafem
