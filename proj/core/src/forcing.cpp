#include "sia/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sia {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double unit_bump(const StructuredMesh& mesh, Vec2 x) {
  const double lx = mesh.lx();
  const double ly = mesh.ly();
  return 16.0 * x.x * (lx - x.x) * x.y * (ly - x.y) / (lx * lx * ly * ly);
}

double gridded_value(const GriddedForcing& g, double t, std::size_t node) {
  const auto& ts = g.times;
  if (t <= ts.front()) return g.values.front()[node];
  if (t >= ts.back()) return g.values.back()[node];
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return (1.0 - w) * g.values[k - 1][node] + w * g.values[k][node];
}

}  // namespace

double Forcing::evaluate(double t, const StructuredMesh& mesh, std::size_t node) const {
  return std::visit(
      overloaded{
          [](const ConstantForcing& c) { return c.value; },
          [&](const LinearTimeForcing& l) { return l.a0 + l.a1 * t; },
          [&](const SeasonalForcing& s) {
            return s.mean + s.amplitude * std::sin(2.0 * std::numbers::pi * t / s.period) *
                                unit_bump(mesh, mesh.node(node));
          },
          [](const MeltForcing& m) { return -m.rate; },
          [&](const GriddedForcing& g) { return gridded_value(g, t, node); },
          [&](const FunctionForcing& f) { return f.f(t, mesh.node(node)); },
      },
      spec_);
}

bool Forcing::polynomial_in_time() const {
  return std::holds_alternative<ConstantForcing>(spec_) ||
         std::holds_alternative<LinearTimeForcing>(spec_) ||
         std::holds_alternative<MeltForcing>(spec_);
}

bool Forcing::nonnegative() const {
  return std::visit(
      overloaded{
          [](const ConstantForcing& c) { return c.value >= 0.0; },
          [](const LinearTimeForcing& l) { return l.a0 >= 0.0 && l.a1 >= 0.0; },
          [](const SeasonalForcing& s) { return s.mean >= std::abs(s.amplitude); },
          [](const MeltForcing&) { return false; },
          [](const GriddedForcing& g) {
            for (const auto& v : g.values)
              if (std::any_of(v.begin(), v.end(), [](double a) { return a < 0.0; })) return false;
            return true;
          },
          [](const FunctionForcing&) { return false; },
      },
      spec_);
}

NodalField Forcing::slab_average(const StructuredMesh& mesh, double t0, double t1) const {
  NodalField out(mesh.num_nodes());
  if (polynomial_in_time()) {
    const double mid = 0.5 * (t0 + t1);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = evaluate(mid, mesh, n);
    return out;
  }
  if (const auto* g = std::get_if<GriddedForcing>(&spec_); g && t1 > t0) {
    // Piecewise linear: midpoint rule on each piece between knots is exact.
    std::vector<double> cuts{t0};
    for (double tk : g->times)
      if (tk > t0 && tk < t1) cuts.push_back(tk);
    cuts.push_back(t1);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double w = (cuts[k + 1] - cuts[k]) / (t1 - t0);
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += w * gridded_value(*g, mid, n);
    }
    return out;
  }
  const double half = 0.5 * (t1 - t0);
  const double mid = 0.5 * (t0 + t1);
  const double off = half / std::numbers::sqrt3;
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = 0.5 * (evaluate(mid - off, mesh, n) + evaluate(mid + off, mesh, n));
  }
  return out;
}

void Forcing::validate(const StructuredMesh& mesh) const {
  std::visit(overloaded{
                 [](const ConstantForcing& c) {
                   if (!std::isfinite(c.value)) throw std::invalid_argument("constant forcing must be finite");
                 },
                 [](const LinearTimeForcing& l) {
                   if (!std::isfinite(l.a0) || !std::isfinite(l.a1))
                     throw std::invalid_argument("linear_t coefficients must be finite");
                 },
                 [](const SeasonalForcing& s) {
                   if (!(s.period > 0.0)) throw std::invalid_argument("seasonal period must be positive");
                 },
                 [](const MeltForcing& m) {
                   if (!(m.rate > 0.0)) throw std::invalid_argument("melt rate must be positive");
                 },
                 [&](const GriddedForcing& g) {
                   if (g.times.empty() || g.times.size() != g.values.size())
                     throw std::invalid_argument("gridded forcing needs one nodal row per time");
                   if (!std::is_sorted(g.times.begin(), g.times.end()) ||
                       std::adjacent_find(g.times.begin(), g.times.end()) != g.times.end())
                     throw std::invalid_argument("gridded forcing times must be strictly increasing");
                   for (const auto& v : g.values)
                     if (v.size() != mesh.num_nodes())
                       throw std::invalid_argument("gridded forcing row size does not match mesh");
                 },
                 [](const FunctionForcing& f) {
                   if (!f.f) throw std::invalid_argument("function forcing is empty");
                 },
             },
             spec_);
}

std::string Forcing::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ConstantForcing& c) { os << "constant(value=" << c.value << ")"; },
                 [&](const LinearTimeForcing& l) { os << "linear_t(a0=" << l.a0 << ";a1=" << l.a1 << ")"; },
                 [&](const SeasonalForcing& s) {
                   os << "seasonal(mean=" << s.mean << ";amplitude=" << s.amplitude
                      << ";period=" << s.period << ")";
                 },
                 [&](const MeltForcing& m) { os << "melt(rate=" << m.rate << ")"; },
                 [&](const GriddedForcing& g) { os << "gridded(samples=" << g.times.size() << ")"; },
                 [&](const FunctionForcing& f) { os << f.label; },
             },
             spec_);
  return os.str();
}

}  // namespace sia
