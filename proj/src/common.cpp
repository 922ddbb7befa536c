#include "gsid/common.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

namespace gsid {

Box::Box(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw ConfigError("box: lower/upper dimension mismatch");
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j])) {
      throw ConfigError("box: lower > upper in dimension " + std::to_string(j));
    }
  }
}

Box Box::point(std::span<const double> p) {
  std::vector<double> v(p.begin(), p.end());
  return Box(v, v);
}

std::vector<double> Box::center() const {
  std::vector<double> c(dims());
  for (std::size_t j = 0; j < dims(); ++j) c[j] = 0.5 * (lower[j] + upper[j]);
  return c;
}

bool Box::contains(std::span<const double> p, double slack) const {
  if (p.size() != dims()) return false;
  for (std::size_t j = 0; j < dims(); ++j) {
    if (p[j] < lower[j] - slack || p[j] > upper[j] + slack) return false;
  }
  return true;
}

bool Box::nondegenerate() const {
  for (std::size_t j = 0; j < dims(); ++j) {
    if (!(side(j) > 0.0)) return false;
  }
  return dims() > 0;
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::random_device rd;
  const fs::path tmp = target.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace gsid
