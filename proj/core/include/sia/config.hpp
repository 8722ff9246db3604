#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sia/time_integrator.hpp"
#include "sia/verification.hpp"

namespace sia {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { syntax, validation, missing_field };
  ConfigError(Kind kind, std::string field, const std::string& what)
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}
  Kind kind() const { return kind_; }
  /// Dotted path of the offending field ("physics.p"); byte offset for syntax errors.
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

struct DomainConfig {
  double lx = 0.0;
  double ly = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
};

struct TimeConfig {
  double T = 0.0;
  int N = 0;
};

struct PhysicsConfig {
  double p = 0.0;
  double rho_g = 0.0;
  double a_const = 0.0;
  /// Unset: Glen coefficient from (A, rho g, p). double: constant. string: per-triangle CSV.
  std::variant<std::monostate, double, std::filesystem::path> mu;
};

struct PenaltyConfig {
  double kappa = 0.0;
  Regularization reg{};
};

struct ForcingConfig {
  /// constant | linear_t | seasonal | melt | csv
  std::string preset;
  double value = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double mean = 0.0;
  double amplitude = 0.0;
  double period = 0.0;
  double rate = 0.0;
  std::filesystem::path path;
};

struct InitialConfig {
  /// dome | zero | bump | csv
  std::string preset;
  double amplitude = 0.0;
  std::filesystem::path path;
  /// What the CSV holds: "H" (thickness, converted) or "u".
  std::string quantity = "H";
};

struct OutputConfig {
  std::filesystem::path directory = "output";
  int stride = 1;
  std::vector<std::string> formats{"csv"};
  std::vector<std::string> fields{"u"};
};

struct MmsConfig {
  std::vector<std::size_t> meshes{17, 33, 65};
  std::vector<int> steps{10, 20, 40};
  double amplitude = 1.0;
  double rate = 1.0;
  double mu_slope = 0.0;
};

struct RunConfig {
  DomainConfig domain;
  TimeConfig time;
  PhysicsConfig physics;
  PenaltyConfig penalty;
  ForcingConfig forcing;
  InitialConfig initial;
  SolverConfig solver;
  OutputConfig output;
  MmsConfig mms;
  unsigned threads = 1;
};

/// Strict parse of a JSON run configuration. Relative paths resolve against
/// base_dir. Only solver knobs, regularizations, output and mms settings
/// have defaults. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration, defaults included.
nlohmann::json to_json(const RunConfig& config);

/// Initial thickness presets; zero on the boundary.
double dome_thickness(Vec2 x, double lx, double ly, double amplitude);
double bump_thickness(Vec2 x, double lx, double ly, double amplitude);

/// Ready-to-run objects built from a configuration (reads referenced CSVs).
struct Setup {
  StructuredMesh mesh;
  PhysicalParams params;
  TimeGrid grid;
  RunOptions options;
};

Setup build_setup(const RunConfig& config);

}  // namespace sia
