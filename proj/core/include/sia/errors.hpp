#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sia {

/// Newton iteration cap hit before the residual tolerance was reached.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

/// NaN/Inf encountered, or a singular derivative requested.
class NumericalBreakdown : public std::runtime_error {
 public:
  NumericalBreakdown(const std::string& what, std::size_t node)
      : std::runtime_error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a sink for non-fatal diagnostics; returns the previous one.
/// The default writes to std::clog.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace sia
