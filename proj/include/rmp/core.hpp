#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or bad arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A scenario that parses but violates a declared assumption or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DivergedError : public SolverError {
 public:
  using SolverError::SolverError;
};

class RegressionError : public SolverError {
 public:
  using SolverError::SolverError;
};

// Dense storage indexed [node][path][component].
class PathField {
 public:
  PathField() = default;
  PathField(std::size_t nodes, std::size_t paths, std::size_t width, double fill = 0.0)
      : nodes_(nodes), paths_(paths), width_(width), data_(nodes * paths * width, fill) {}

  std::size_t nodes() const { return nodes_; }
  std::size_t paths() const { return paths_; }
  std::size_t width() const { return width_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t node, std::size_t path, std::size_t c = 0) {
    return data_[(node * paths_ + path) * width_ + c];
  }
  double operator()(std::size_t node, std::size_t path, std::size_t c = 0) const {
    return data_[(node * paths_ + path) * width_ + c];
  }

  std::span<double> row(std::size_t node, std::size_t path) {
    return {data_.data() + (node * paths_ + path) * width_, width_};
  }
  std::span<const double> row(std::size_t node, std::size_t path) const {
    return {data_.data() + (node * paths_ + path) * width_, width_};
  }

  // All paths at one node, path-major.
  std::span<double> slice(std::size_t node) {
    return {data_.data() + node * paths_ * width_, paths_ * width_};
  }
  std::span<const double> slice(std::size_t node) const {
    return {data_.data() + node * paths_ * width_, paths_ * width_};
  }

  // Ensemble mean of one component, summed in path order.
  double mean(std::size_t node, std::size_t c = 0) const {
    double s = 0.0;
    for (std::size_t p = 0; p < paths_; ++p) s += (*this)(node, p, c);
    return s / static_cast<double>(paths_);
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t nodes_ = 0;
  std::size_t paths_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

struct MeanAndError {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and its standard error.
inline MeanAndError sample_mean(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace rmp
