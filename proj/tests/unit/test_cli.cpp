#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "sia/cli.hpp"
#include "support.hpp"

using namespace sia;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sia::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

json base_config(const fs::path& out_dir) {
  return {{"domain", {{"Lx", 1.0}, {"Ly", 1.0}, {"nx", 9}, {"ny", 9}}},
          {"time", {{"T", 0.2}, {"N", 4}}},
          {"physics", {{"p", 3.0}, {"rho_g", 1.0}, {"A_const", 1.0}, {"mu", 1.0}}},
          {"penalty", {{"kappa", 1e-2}}},
          {"forcing", {{"preset", "melt"}, {"rate", 2.0}}},
          {"initial", {{"preset", "dome"}, {"amplitude", 1.0}}},
          {"output", {{"directory", out_dir.string()}, {"formats", {"csv", "vtk"}}, {"fields", {"u", "H"}}}}};
}

fs::path write_config(const test::TempDir& dir, const json& doc, const std::string& name = "run.json") {
  test::write_text(dir / name, doc.dump());
  return dir / name;
}

}  // namespace

TEST(Cli, RunWritesStatesMonitorsAndManifest) {
  const test::TempDir dir;
  const auto cfg = write_config(dir, base_config(dir / "out"));
  const auto r = invoke({"run", cfg.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* f : {"config.resolved.json", "monitors.csv", "trajectory.json", "states/u_00000.csv",
                        "states/u_00004.csv", "states/H_00004.vtk", "states/u_00002.vtk"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  EXPECT_NE(r.out.find("vi_residual"), std::string::npos);
  EXPECT_NE(r.out.find("est1"), std::string::npos);

  const auto m = invoke({"monitors", (dir / "out").string(), "-o", (dir / "again.csv").string()});
  ASSERT_EQ(m.code, cli::kExitOk) << m.err;
  // Recomputed monitors match the run's own record.
  auto data_lines = [](const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
      if (!l.empty() && l[0] != '#') out.push_back(l);
    return out;
  };
  EXPECT_EQ(data_lines(test::read_text(dir / "again.csv")), data_lines(test::read_text(dir / "out" / "monitors.csv")));
}

TEST(Cli, ZeroRunGivesZeroMonitors) {
  const test::TempDir dir;
  json doc = base_config(dir / "out");
  doc["initial"] = {{"preset", "zero"}};
  doc["forcing"] = {{"preset", "constant"}, {"value", 0.0}};
  test::WarningCapture quiet;
  const auto r = invoke({"run", write_config(dir, doc).string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto text = test::read_text(dir / "out" / "monitors.csv");
  EXPECT_NE(text.find("\n0,0,0,0,0,0,0,0,1,0,0\n"), std::string::npos) << text;
}

TEST(Cli, ConfigErrorsExitTwo) {
  const test::TempDir dir;
  json doc = base_config(dir / "out");
  doc["physics"]["p"] = 1.0;
  auto r = invoke({"run", write_config(dir, doc).string()});
  EXPECT_EQ(r.code, cli::kExitConfigError);
  EXPECT_NE(r.err.find("physics.p"), std::string::npos) << r.err;

  test::write_text(dir / "broken.json", "{ not json");
  EXPECT_EQ(invoke({"run", (dir / "broken.json").string()}).code, cli::kExitConfigError);
  EXPECT_EQ(invoke({"run", (dir / "absent.json").string()}).code, cli::kExitConfigError);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitConfigError);
  EXPECT_EQ(invoke({}).code, cli::kExitConfigError);
  const auto cfg = write_config(dir, base_config(dir / "out"), "ok.json");
  EXPECT_EQ(invoke({"sweep", cfg.string(), "--kappas", "1e-2,1e-1"}).code, cli::kExitConfigError);
  EXPECT_EQ(invoke({"sweep", cfg.string(), "--kappas", "a,b"}).code, cli::kExitConfigError);
}

TEST(Cli, SolverFailureExitsOneWithPartialStates) {
  const test::TempDir dir;
  json doc = base_config(dir / "out");
  doc["solver"] = {{"max_newton", 1}};
  const auto r = invoke({"run", write_config(dir, doc).string()});
  EXPECT_EQ(r.code, cli::kExitSolverFailure);
  EXPECT_NE(r.err.find("solver failure"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "states" / "u_00000.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "monitors.csv"));
}

TEST(Cli, SweepWritesOneRowPerKappa) {
  const test::TempDir dir;
  const auto cfg = write_config(dir, base_config(dir / "out"));
  const auto r = invoke({"sweep", cfg.string(), "--kappas", "1e-1,1e-2,1e-3,1e-4", "-j", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto text = test::read_text(dir / "out" / "sweep.csv");
  std::istringstream in(text);
  int rows = 0;
  bool header = false;
  for (std::string l; std::getline(in, l);) {
    if (l.empty() || l[0] == '#') continue;
    if (!header) {
      header = true;
      EXPECT_EQ(l.rfind("kappa,ok,neg_norm", 0), 0u);
      continue;
    }
    ++rows;
    EXPECT_EQ(l.find(",1,"), l.find(',')) << l;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(dir / "out" / "kappa_0.001" / "monitors.csv"));
  EXPECT_NE(r.out.find("decay orders"), std::string::npos);
}

TEST(Cli, MmsWritesTable) {
  const test::TempDir dir;
  json doc = base_config(dir / "out");
  doc["mms"] = {{"meshes", {5, 9}}, {"steps", {2}}, {"rate", 0.0}};
  const auto r = invoke({"mms", write_config(dir, doc).string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto text = test::read_text(dir / "out" / "mms.csv");
  EXPECT_NE(text.find("n,N,h,ell,error\n5,2,0.25,0.1,"), std::string::npos) << text;
  EXPECT_NE(r.out.find("spatial orders"), std::string::npos);
}

TEST(Cli, VerifyPasses) {
  const auto r = invoke({"verify", "--samples", "2000", "--problems", "4"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("oracle 4/4"), std::string::npos) << r.out;
}

TEST(Cli, RunsAreByteIdentical) {
  const test::TempDir dir;
  json doc = base_config(dir / "a");
  const auto ca = write_config(dir, doc, "a.json");
  doc["output"]["directory"] = (dir / "b").string();
  const auto cb = write_config(dir, doc, "b.json");
  ASSERT_EQ(invoke({"run", ca.string()}).code, cli::kExitOk);
  ASSERT_EQ(invoke({"run", cb.string(), "-t", "1"}).code, cli::kExitOk);
  for (const char* f : {"monitors.csv", "states/u_00004.csv", "states/H_00003.vtk"}) {
    auto strip = [](const std::string& text) {
      // Metadata lines carry the output directory through the echoed config.
      std::string body;
      std::istringstream in(text);
      for (std::string l; std::getline(in, l);)
        if (l.rfind("# config=", 0) != 0 && l.find('{') == std::string::npos) body += l + "\n";
      return body;
    };
    EXPECT_EQ(strip(test::read_text(dir / "a" / f)), strip(test::read_text(dir / "b" / f))) << f;
  }
}

TEST(Cli, MonitorsRejectsStridedOutput) {
  const test::TempDir dir;
  json doc = base_config(dir / "out");
  doc["output"]["stride"] = 2;
  ASSERT_EQ(invoke({"run", write_config(dir, doc).string()}).code, cli::kExitOk);
  const auto r = invoke({"monitors", (dir / "out").string()});
  EXPECT_NE(r.code, cli::kExitOk);
  EXPECT_NE(r.err.find("stride"), std::string::npos) << r.err;
}
