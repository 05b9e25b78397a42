#pragma once

// Scenario configuration: JSON files describing the model, vehicle,
// horizon(s), sampling, boundary conditions, integrator and output.

#include "reach/boundary.hpp"
#include "reach/propagation.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reach {

/// Invalid or missing configuration entry. `key()` is the JSON path.
class ConfigError : public Error
{
public:
  ConfigError(std::string key, const std::string& what)
    : Error("ConfigError: " + key + ": " + what), key_(std::move(key))
  {
  }
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

struct HorizonSpec
{
  double total = 0.0;     // model time units
  std::size_t stages = 0;
  double dt = 0.0;        // model time units
  std::string label;      // e.g. "200d", "50h"; used for per-horizon output directories
};

struct OrbitConfig
{
  Vec6 x0 = Vec6::Zero();       // nondimensional synodic
  double period = 0.0;          // nondimensional
  std::size_t n_fixed_points = 50;
  double epsilon = 1e-6;
  double horizon = 0.0;         // nondimensional manifold propagation time
  std::size_t intervals = 200;  // output intervals per manifold trajectory
};

struct ScenarioConfig
{
  std::string name;
  Model model = TwoBodyModel{};
  SpacecraftParams spacecraft;
  StateVec x0;                   // model units
  std::vector<HorizonSpec> horizons;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  BoundarySpec boundary;
  IntegratorConfig integrator;
  std::filesystem::path output_dir = "out";
  bool history = false;
  unsigned threads = 0;
  double failure_threshold = 0.01;
  std::optional<OrbitConfig> orbit;
  std::uint64_t hash = 0;        // FNV-1a of the canonical config text

  Dynamics dynamics() const { return Dynamics(model, spacecraft); }
};

/// Command-line overrides applied after parsing.
struct ConfigOverrides
{
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> samples;
  std::optional<std::filesystem::path> output_dir;
  std::optional<double> epsilon;
};

/// Parses JSON text. Relative output directories are kept as written.
ScenarioConfig parse_scenario(const std::string& text, const ConfigOverrides& overrides = {});

/// Reads and parses a file; relative output directories resolve against the
/// current directory.
ScenarioConfig load_scenario(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

const char* model_name(const Model& model);

}  // namespace reach
