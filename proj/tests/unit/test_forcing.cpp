#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sia/time_integrator.hpp"

using namespace sia;

namespace {
const StructuredMesh& mesh() {
  static const StructuredMesh m = StructuredMesh::build(5, 5, 2.0, 1.0);
  return m;
}
}  // namespace

TEST(Forcing, PresetValues) {
  const std::size_t c = mesh().node_index(2, 2);
  EXPECT_EQ(Forcing(ConstantForcing{1.5}).evaluate(0.3, mesh(), c), 1.5);
  EXPECT_DOUBLE_EQ(Forcing(LinearTimeForcing{1.0, 2.0}).evaluate(0.25, mesh(), c), 1.5);
  EXPECT_EQ(Forcing(MeltForcing{0.7}).evaluate(3.0, mesh(), c), -0.7);
  // Bump equals one at the centre of the domain.
  const Forcing s(SeasonalForcing{0.1, 2.0, 4.0});
  EXPECT_NEAR(s.evaluate(1.0, mesh(), c), 2.1, 1e-14);
  EXPECT_NEAR(s.evaluate(1.0, mesh(), 0), 0.1, 1e-14);
}

TEST(Forcing, SignClassification) {
  EXPECT_TRUE(Forcing(ConstantForcing{0.0}).nonnegative());
  EXPECT_FALSE(Forcing(MeltForcing{1.0}).nonnegative());
  EXPECT_TRUE(Forcing(SeasonalForcing{1.0, 0.5, 1.0}).nonnegative());
  EXPECT_FALSE(Forcing(SeasonalForcing{0.1, 0.5, 1.0}).nonnegative());
  EXPECT_TRUE(Forcing(LinearTimeForcing{0.0, 1.0}).nonnegative());
}

TEST(Forcing, SlabAverageConstantAndLinear) {
  const TimeGrid grid{1.0, 4};
  const auto a = average_forcing(Forcing(ConstantForcing{3.0}), 2, grid, mesh());
  for (double v : a) EXPECT_EQ(v, 3.0);
  // (1/ell) int_{0.25}^{0.5} (1 + 2t) dt = 1 + 2 * 0.375
  const auto b = average_forcing(Forcing(LinearTimeForcing{1.0, 2.0}), 1, grid, mesh());
  for (double v : b) EXPECT_NEAR(v, 1.75, 1e-15);
}

TEST(Forcing, SlabAverageQuadraticByGauss) {
  // a = t^2: exact slab mean (t1^3 - t0^3) / (3 ell).
  const Forcing f(FunctionForcing{[](double t, Vec2) { return t * t; }, "t2"});
  const TimeGrid grid{2.0, 5};
  for (int n = 0; n < grid.N; ++n) {
    const double t0 = grid.time(n);
    const double t1 = grid.time(n + 1);
    const double exact = (t1 * t1 * t1 - t0 * t0 * t0) / (3.0 * grid.ell());
    for (double v : average_forcing(f, n, grid, mesh())) EXPECT_NEAR(v, exact, 1e-14);
  }
  EXPECT_THROW(average_forcing(f, grid.N, grid, mesh()), std::out_of_range);
}

TEST(Forcing, SeasonalAverageMatchesClosedForm) {
  const SeasonalForcing s{0.3, 1.2, 1.0};
  const Forcing f(s);
  const TimeGrid grid{1.0, 40};
  const std::size_t c = mesh().node_index(2, 2);
  for (int n = 0; n < grid.N; n += 7) {
    const double t0 = grid.time(n);
    const double t1 = grid.time(n + 1);
    const double w = 2.0 * std::numbers::pi / s.period;
    const double exact = s.mean + s.amplitude * (std::cos(w * t0) - std::cos(w * t1)) / (w * grid.ell());
    // Two-point Gauss error for a sinusoid scales like (w ell)^4.
    EXPECT_NEAR(average_forcing(f, n, grid, mesh())[c], exact, 1e-5);
  }
}

TEST(Forcing, GriddedPiecewiseLinear) {
  GriddedForcing g;
  g.times = {0.0, 1.0, 3.0};
  g.values = {NodalField(mesh().num_nodes(), 0.0), NodalField(mesh().num_nodes(), 2.0),
              NodalField(mesh().num_nodes(), -2.0)};
  const Forcing f(g);
  EXPECT_NO_THROW(f.validate(mesh()));
  EXPECT_DOUBLE_EQ(f.evaluate(0.5, mesh(), 3), 1.0);
  EXPECT_DOUBLE_EQ(f.evaluate(2.0, mesh(), 3), 0.0);
  EXPECT_DOUBLE_EQ(f.evaluate(-1.0, mesh(), 3), 0.0);
  EXPECT_DOUBLE_EQ(f.evaluate(5.0, mesh(), 3), -2.0);
  // Slab [0.5, 1.5] straddles the knot at 1: mean of the hat = (0.75*0.5*... ) computed piecewise.
  const auto avg = f.slab_average(mesh(), 0.5, 1.5);
  const double exact = 0.5 * (1.0 + 2.0) / 2.0 + 0.5 * (2.0 + 1.0) / 2.0;
  EXPECT_NEAR(avg[0], exact, 1e-15);

  GriddedForcing bad = g;
  bad.times = {0.0, 2.0, 1.0};
  EXPECT_THROW(Forcing(bad).validate(mesh()), std::invalid_argument);
  bad = g;
  bad.values.pop_back();
  EXPECT_THROW(Forcing(bad).validate(mesh()), std::invalid_argument);
}

TEST(Forcing, Describe) {
  EXPECT_EQ(Forcing(MeltForcing{2.0}).describe(), "melt(rate=2)");
  EXPECT_EQ(Forcing(ConstantForcing{0.5}).describe(), "constant(value=0.5)");
}
