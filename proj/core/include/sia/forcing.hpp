#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "sia/geometry.hpp"

namespace sia {

/// a(t, x) = value.
struct ConstantForcing {
  double value = 0.0;
};

/// a(t, x) = a0 + a1 t.
struct LinearTimeForcing {
  double a0 = 0.0;
  double a1 = 0.0;
};

/// a(t, x) = mean + amplitude sin(2 pi t / period) b(x), with b the
/// unit-height quadratic bump 16 x(Lx-x) y(Ly-y) / (Lx^2 Ly^2).
struct SeasonalForcing {
  double mean = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
};

/// a(t, x) = -rate, rate > 0: uniform ablation.
struct MeltForcing {
  double rate = 0.0;
};

/// Nodal time series, piecewise linear in t, held constant outside
/// [times.front(), times.back()].
struct GriddedForcing {
  std::vector<double> times;
  std::vector<NodalField> values;
};

/// Arbitrary a(t, x), e.g. a manufactured source.
struct FunctionForcing {
  std::function<double(double, Vec2)> f;
  std::string label = "function";
};

/// Net accumulation rate a~(t, x) entering the right-hand side.
class Forcing {
 public:
  using Spec = std::variant<ConstantForcing, LinearTimeForcing, SeasonalForcing, MeltForcing,
                            GriddedForcing, FunctionForcing>;

  Forcing() : spec_(ConstantForcing{}) {}
  Forcing(Spec spec) : spec_(std::move(spec)) {}  // NOLINT(google-explicit-constructor)

  const Spec& spec() const { return spec_; }

  double evaluate(double t, const StructuredMesh& mesh, std::size_t node) const;

  /// True when every nodal value is affine in t, so slab averages are exact
  /// at the midpoint.
  bool polynomial_in_time() const;

  /// True when a(t, x) >= 0 for all t, x (checked structurally, conservative).
  bool nonnegative() const;

  /// Nodal values of (1/(t1-t0)) int_{t0}^{t1} a(t) dt. Exact for presets
  /// affine in t and for gridded series, two-point Gauss in t otherwise.
  NodalField slab_average(const StructuredMesh& mesh, double t0, double t1) const;

  void validate(const StructuredMesh& mesh) const;

  std::string describe() const;

 private:
  Spec spec_;
};

}  // namespace sia
