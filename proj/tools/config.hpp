#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsid/common.hpp"
#include "gsid/estimator.hpp"
#include "gsid/system.hpp"

namespace gsid::cli {

/// Config error tied to the key path where it occurred.
class KeyError : public ConfigError {
 public:
  KeyError(const std::string& path, const std::string& msg) : ConfigError(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Experiment {
  std::vector<double> theta;
  std::vector<double> y_init;
  std::int64_t T = 1024;
  std::uint64_t seed = 1;
  InputPolicy input;
};

struct EnsembleSection {
  int num_runs = 20;
  std::vector<std::int64_t> checkpoints;
};

struct ExcitationSection {
  std::optional<Box> search_box;
  int samples_per_dim = 33;
  int theta_grid_density = 257;
  double tol = 1e-6;
};

struct OutputSection {
  std::string trajectory;
  std::string estimates;
  std::string summary;
  std::string runs;
  std::string report;
};

struct RunConfig {
  std::optional<SystemSpec> system;
  NoiseSpec noise{Gaussian{0.5}};
  EstimatorConfig estimator;
  Experiment experiment;
  EnsembleSection ensemble;
  ExcitationSection excitation;
  OutputSection output;

  const SystemSpec& spec() const;
};

/// Parses and validates a JSON run configuration. Unknown keys and wrong
/// types raise KeyError naming the key path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace gsid::cli
