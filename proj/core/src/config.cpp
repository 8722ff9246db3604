#include "sia/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "sia/io.hpp"

namespace sia {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& constraint) {
  throw ConfigError(ConfigError::Kind::validation, field, field + ": " + constraint);
}

/// Strict view of one JSON object: every key must be listed, required keys
/// must be present.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> keys) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) invalid(path_.empty() ? "<root>" : path_, "must be an object");
    for (const auto& [key, value] : j.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
        invalid(field(key), "unknown key '" + key + "'");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const {
    if (!j_.contains(key))
      throw ConfigError(ConfigError::Kind::missing_field, field(key), "missing required field " + field(key));
    return j_.at(key);
  }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) invalid(field(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(field(key), "must be finite");
    return d;
  }
  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) invalid(field(key), "must be an integer");
    return v.get<long long>();
  }
  long long integer_or(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) invalid(field(key), "must be a string");
    return v.get<std::string>();
  }

  Section section(const char* key, std::initializer_list<const char*> keys) const {
    return Section(at(key), field(key), keys);
  }

 private:
  const json& j_;
  std::string path_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

void positive(const Section& s, const char* key, double v) {
  if (!(v > 0.0)) invalid(s.field(key), "must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::syntax, std::to_string(e.byte),
                      "JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  const Section root(doc, "", {"domain", "time", "physics", "penalty", "forcing", "initial", "solver", "output", "mms",
                               "threads"});
  RunConfig cfg;

  {
    const Section s = root.section("domain", {"Lx", "Ly", "nx", "ny"});
    cfg.domain.lx = s.number("Lx");
    cfg.domain.ly = s.number("Ly");
    positive(s, "Lx", cfg.domain.lx);
    positive(s, "Ly", cfg.domain.ly);
    const long long nx = s.integer("nx");
    const long long ny = s.integer("ny");
    if (nx < 3) invalid(s.field("nx"), "must be at least 3");
    if (ny < 3) invalid(s.field("ny"), "must be at least 3");
    cfg.domain.nx = static_cast<std::size_t>(nx);
    cfg.domain.ny = static_cast<std::size_t>(ny);
  }
  {
    const Section s = root.section("time", {"T", "N"});
    cfg.time.T = s.number("T");
    positive(s, "T", cfg.time.T);
    const long long n = s.integer("N");
    if (n < 1) invalid(s.field("N"), "must be at least 1");
    cfg.time.N = static_cast<int>(n);
  }
  {
    const Section s = root.section("physics", {"p", "rho_g", "A_const", "mu"});
    cfg.physics.p = s.number("p");
    if (!(cfg.physics.p > 1.0)) invalid(s.field("p"), "must exceed 1");
    cfg.physics.rho_g = s.number("rho_g");
    positive(s, "rho_g", cfg.physics.rho_g);
    cfg.physics.a_const = s.number("A_const");
    positive(s, "A_const", cfg.physics.a_const);
    if (s.has("mu")) {
      const json& mu = s.at("mu");
      if (mu.is_number()) {
        cfg.physics.mu = s.number("mu");
        positive(s, "mu", std::get<double>(cfg.physics.mu));
      } else if (mu.is_string()) {
        cfg.physics.mu = resolve(base_dir, mu.get<std::string>());
      } else {
        invalid(s.field("mu"), "must be a number or a CSV path");
      }
    }
  }
  {
    const Section s = root.section("penalty", {"kappa", "delta", "eps"});
    cfg.penalty.kappa = s.number("kappa");
    positive(s, "kappa", cfg.penalty.kappa);
    cfg.penalty.reg.delta = s.number_or("delta", Regularization{}.delta);
    cfg.penalty.reg.eps = s.number_or("eps", Regularization{}.eps);
    if (cfg.penalty.reg.delta < 0.0) invalid(s.field("delta"), "must be nonnegative");
    if (cfg.penalty.reg.eps < 0.0) invalid(s.field("eps"), "must be nonnegative");
  }
  {
    const json& f = root.at("forcing");
    if (!f.is_object()) invalid("forcing", "must be an object");
    ForcingConfig& fc = cfg.forcing;
    if (f.contains("csv")) {
      const Section s(f, "forcing", {"csv"});
      fc.preset = "csv";
      fc.path = resolve(base_dir, s.string("csv"));
    } else {
      const std::string preset = Section(f, "forcing", {"preset", "value", "a0", "a1", "mean", "amplitude", "period", "rate"})
                                     .string("preset");
      fc.preset = preset;
      if (preset == "constant") {
        const Section s(f, "forcing", {"preset", "value"});
        fc.value = s.number("value");
      } else if (preset == "linear_t") {
        const Section s(f, "forcing", {"preset", "a0", "a1"});
        fc.a0 = s.number("a0");
        fc.a1 = s.number("a1");
      } else if (preset == "seasonal") {
        const Section s(f, "forcing", {"preset", "mean", "amplitude", "period"});
        fc.mean = s.number("mean");
        fc.amplitude = s.number("amplitude");
        fc.period = s.number("period");
        positive(s, "period", fc.period);
      } else if (preset == "melt") {
        const Section s(f, "forcing", {"preset", "rate"});
        fc.rate = s.number("rate");
        positive(s, "rate", fc.rate);
      } else {
        invalid("forcing.preset", "unknown preset '" + preset + "' (constant, linear_t, seasonal, melt)");
      }
    }
  }
  {
    const json& f = root.at("initial");
    if (!f.is_object()) invalid("initial", "must be an object");
    InitialConfig& ic = cfg.initial;
    if (f.contains("csv")) {
      const Section s(f, "initial", {"csv", "quantity"});
      ic.preset = "csv";
      ic.path = resolve(base_dir, s.string("csv"));
      if (s.has("quantity")) {
        ic.quantity = s.string("quantity");
        if (ic.quantity != "H" && ic.quantity != "u") invalid(s.field("quantity"), "must be \"H\" or \"u\"");
      }
    } else {
      const Section s(f, "initial", {"preset", "amplitude"});
      ic.preset = s.string("preset");
      if (ic.preset == "zero") {
        if (s.has("amplitude")) invalid(s.field("amplitude"), "not used by the zero preset");
      } else if (ic.preset == "dome" || ic.preset == "bump") {
        ic.amplitude = s.number("amplitude");
        if (ic.amplitude < 0.0) invalid(s.field("amplitude"), "must be nonnegative");
      } else {
        invalid("initial.preset", "unknown preset '" + ic.preset + "' (dome, zero, bump)");
      }
    }
  }
  if (root.has("solver")) {
    const Section s = root.section("solver", {"tol_residual", "max_newton", "max_backtrack", "armijo_c", "cg_tol", "cg_max"});
    SolverConfig& sc = cfg.solver;
    sc.tol_residual = s.number_or("tol_residual", sc.tol_residual);
    sc.max_newton = static_cast<int>(s.integer_or("max_newton", sc.max_newton));
    sc.max_backtrack = static_cast<int>(s.integer_or("max_backtrack", sc.max_backtrack));
    sc.armijo_c = s.number_or("armijo_c", sc.armijo_c);
    sc.cg_tol = s.number_or("cg_tol", sc.cg_tol);
    sc.cg_max = static_cast<int>(s.integer_or("cg_max", sc.cg_max));
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      invalid("solver", e.what());
    }
  }
  if (root.has("output")) {
    const Section s = root.section("output", {"directory", "stride", "formats", "fields"});
    OutputConfig& oc = cfg.output;
    if (s.has("directory")) oc.directory = resolve(base_dir, s.string("directory"));
    oc.stride = static_cast<int>(s.integer_or("stride", 1));
    if (oc.stride < 1) invalid(s.field("stride"), "must be at least 1");
    auto string_list = [&](const char* key, std::initializer_list<const char*> allowed) {
      const json& v = s.at(key);
      if (!v.is_array() || v.empty()) invalid(s.field(key), "must be a nonempty array of strings");
      std::vector<std::string> out;
      for (const auto& e : v) {
        if (!e.is_string()) invalid(s.field(key), "must contain strings");
        const auto str = e.get<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return str == a; }))
          invalid(s.field(key), "unsupported entry '" + str + "'");
        out.push_back(str);
      }
      return out;
    };
    if (s.has("formats")) oc.formats = string_list("formats", {"csv", "vtk"});
    if (s.has("fields")) oc.fields = string_list("fields", {"u", "H"});
  } else if (!base_dir.empty()) {
    cfg.output.directory = base_dir / cfg.output.directory;
  }
  if (root.has("mms")) {
    const Section s = root.section("mms", {"meshes", "steps", "amplitude", "rate", "mu_slope"});
    MmsConfig& mc = cfg.mms;
    auto int_list = [&](const char* key, long long min) {
      const json& v = s.at(key);
      if (!v.is_array() || v.empty()) invalid(s.field(key), "must be a nonempty array of integers");
      std::vector<long long> out;
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < min)
          invalid(s.field(key), "entries must be integers >= " + std::to_string(min));
        out.push_back(e.get<long long>());
      }
      return out;
    };
    if (s.has("meshes")) {
      mc.meshes.clear();
      for (long long v : int_list("meshes", 3)) mc.meshes.push_back(static_cast<std::size_t>(v));
    }
    if (s.has("steps")) {
      mc.steps.clear();
      for (long long v : int_list("steps", 1)) mc.steps.push_back(static_cast<int>(v));
    }
    mc.amplitude = s.number_or("amplitude", mc.amplitude);
    positive(s, "amplitude", mc.amplitude);
    mc.rate = s.number_or("rate", mc.rate);
    mc.mu_slope = s.number_or("mu_slope", mc.mu_slope);
    if (!(mc.mu_slope > -1.0)) invalid(s.field("mu_slope"), "must exceed -1 so that mu stays positive");
  }
  if (root.has("threads")) {
    const long long t = root.integer("threads");
    if (t < 1) invalid("threads", "must be at least 1");
    cfg.threads = static_cast<unsigned>(t);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Kind::validation, path.string(), "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  json j;
  j["domain"] = {{"Lx", c.domain.lx}, {"Ly", c.domain.ly}, {"nx", c.domain.nx}, {"ny", c.domain.ny}};
  j["time"] = {{"T", c.time.T}, {"N", c.time.N}};
  json phys = {{"p", c.physics.p}, {"rho_g", c.physics.rho_g}, {"A_const", c.physics.a_const}};
  if (const auto* d = std::get_if<double>(&c.physics.mu)) phys["mu"] = *d;
  if (const auto* p = std::get_if<std::filesystem::path>(&c.physics.mu)) phys["mu"] = p->string();
  j["physics"] = phys;
  j["penalty"] = {{"kappa", c.penalty.kappa}, {"delta", c.penalty.reg.delta}, {"eps", c.penalty.reg.eps}};
  const ForcingConfig& f = c.forcing;
  if (f.preset == "csv") j["forcing"] = {{"csv", f.path.string()}};
  if (f.preset == "constant") j["forcing"] = {{"preset", "constant"}, {"value", f.value}};
  if (f.preset == "linear_t") j["forcing"] = {{"preset", "linear_t"}, {"a0", f.a0}, {"a1", f.a1}};
  if (f.preset == "seasonal")
    j["forcing"] = {{"preset", "seasonal"}, {"mean", f.mean}, {"amplitude", f.amplitude}, {"period", f.period}};
  if (f.preset == "melt") j["forcing"] = {{"preset", "melt"}, {"rate", f.rate}};
  const InitialConfig& i = c.initial;
  if (i.preset == "csv") j["initial"] = {{"csv", i.path.string()}, {"quantity", i.quantity}};
  else if (i.preset == "zero") j["initial"] = {{"preset", "zero"}};
  else j["initial"] = {{"preset", i.preset}, {"amplitude", i.amplitude}};
  j["solver"] = {{"tol_residual", c.solver.tol_residual}, {"max_newton", c.solver.max_newton},
                 {"max_backtrack", c.solver.max_backtrack}, {"armijo_c", c.solver.armijo_c},
                 {"cg_tol", c.solver.cg_tol},           {"cg_max", c.solver.cg_max}};
  j["output"] = {{"directory", c.output.directory.string()},
                 {"stride", c.output.stride},
                 {"formats", c.output.formats},
                 {"fields", c.output.fields}};
  j["mms"] = {{"meshes", c.mms.meshes}, {"steps", c.mms.steps}, {"amplitude", c.mms.amplitude},
              {"rate", c.mms.rate},     {"mu_slope", c.mms.mu_slope}};
  j["threads"] = c.threads;
  return j;
}

double dome_thickness(Vec2 x, double lx, double ly, double amplitude) {
  // Circular cap of radius 0.4 min(Lx, Ly) centred in the domain.
  const double r = 0.4 * std::min(lx, ly);
  const double dx = x.x - 0.5 * lx;
  const double dy = x.y - 0.5 * ly;
  const double s = 1.0 - (dx * dx + dy * dy) / (r * r);
  return s > 0.0 ? amplitude * std::sqrt(s) : 0.0;
}

double bump_thickness(Vec2 x, double lx, double ly, double amplitude) {
  const double r = 0.25 * std::min(lx, ly);
  const double dx = x.x - 0.5 * lx;
  const double dy = x.y - 0.5 * ly;
  const double s = 1.0 - (dx * dx + dy * dy) / (r * r);
  return s > 0.0 ? amplitude * s * s : 0.0;
}

Setup build_setup(const RunConfig& c) {
  StructuredMesh mesh = StructuredMesh::build(c.domain.nx, c.domain.ny, c.domain.lx, c.domain.ly);

  PhysicalParams params;
  params.p = c.physics.p;
  params.alpha = alpha_of(c.physics.p);
  params.rho_g = c.physics.rho_g;
  params.a_const = c.physics.a_const;
  if (const auto* path = std::get_if<std::filesystem::path>(&c.physics.mu)) {
    params.mu = read_triangle_csv(*path, mesh);
    params.mu1 = *std::min_element(params.mu.begin(), params.mu.end());
    params.mu2 = *std::max_element(params.mu.begin(), params.mu.end());
    if (!(params.mu1 > 0.0)) invalid("physics.mu", "per-triangle values must be positive");
  } else {
    const double mu = std::holds_alternative<double>(c.physics.mu)
                          ? std::get<double>(c.physics.mu)
                          : glen_mu(c.physics.a_const, c.physics.rho_g, c.physics.p);
    params.mu.assign(mesh.num_triangles(), mu);
    params.mu1 = params.mu2 = mu;
  }

  const ForcingConfig& f = c.forcing;
  if (f.preset == "constant") params.forcing = Forcing(ConstantForcing{f.value});
  else if (f.preset == "linear_t") params.forcing = Forcing(LinearTimeForcing{f.a0, f.a1});
  else if (f.preset == "seasonal") params.forcing = Forcing(SeasonalForcing{f.mean, f.amplitude, f.period});
  else if (f.preset == "melt") params.forcing = Forcing(MeltForcing{f.rate});
  else if (f.preset == "csv") params.forcing = Forcing(read_gridded_forcing_csv(f.path, mesh));

  const InitialConfig& i = c.initial;
  NodalField thickness;
  if (i.preset == "zero") {
    thickness = mesh.zero_field();
  } else if (i.preset == "dome") {
    thickness = sample(mesh, [&](Vec2 x) { return dome_thickness(x, mesh.lx(), mesh.ly(), i.amplitude); });
  } else if (i.preset == "bump") {
    thickness = sample(mesh, [&](Vec2 x) { return bump_thickness(x, mesh.lx(), mesh.ly(), i.amplitude); });
  } else {
    thickness = read_field_csv(i.path, mesh);
  }
  params.u0.resize(mesh.num_nodes());
  for (std::size_t n = 0; n < thickness.size(); ++n) {
    if (mesh.is_boundary(n)) {
      params.u0[n] = 0.0;
      continue;
    }
    if (thickness[n] < 0.0) invalid("initial", "negative value at node " + std::to_string(n));
    params.u0[n] = (i.preset == "csv" && i.quantity == "u") ? thickness[n] : u_from_thickness(thickness[n], params.p);
  }

  try {
    params.validate(mesh);
  } catch (const std::invalid_argument& e) {
    invalid("physics", e.what());
  }

  RunOptions options;
  options.kappa = c.penalty.kappa;
  options.reg = c.penalty.reg;
  options.solver = c.solver;
  options.threads = c.threads;
  return Setup{std::move(mesh), std::move(params), TimeGrid{c.time.T, c.time.N}, options};
}

}  // namespace sia
