#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid configuration or violated precondition on user input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical domain failure (0^negative, non-finite stencil value, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A combinatorial size cap was exceeded.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::size_t requested)
      : std::runtime_error(what), requested_(requested) {}
  std::size_t requested() const { return requested_; }

 private:
  std::size_t requested_;
};

/// Axis-aligned hyperrectangle. Degenerate sides (lower == upper) are legal.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);

  static Box point(std::span<const double> p);
  static Box interval(double lo, double hi) { return Box({lo}, {hi}); }

  std::size_t dims() const { return lower.size(); }
  double side(std::size_t j) const { return upper[j] - lower[j]; }
  std::vector<double> center() const;
  bool contains(std::span<const double> p, double slack = 0.0) const;
  bool nondegenerate() const;
};

double euclidean_norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

/// Formats with 17 significant digits ("%.17g"); non-finite values as inf/-inf/nan.
std::string format_double(double v);

/// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace gsid
