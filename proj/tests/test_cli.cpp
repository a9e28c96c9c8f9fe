#include "anderson/cli.hpp"
#include "anderson/error.hpp"
#include "anderson/run_config.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace anderson;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("anderson_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  const auto path = dir / "config.json";
  std::ofstream(path) << cfg.dump(2);
  return path;
}

json base_model(double h = 0.02, int d = 1) {
  return {{"d", d}, {"h", h}, {"distribution", {{"type", "uniform"}, {"a", 1.0}}}};
}

json dos_config(double h = 0.02) {
  return {{"model", base_model(h)},
          {"window", {{"I", {-0.2, 0.2}}, {"delta", 0.8}, {"delta_prime", 0.4}}},
          {"grid", {{"start", -0.2}, {"stop", 0.2}, {"step", 0.02}}}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string config_error(const json& cfg) {
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("dos sweep writes a 21-row CSV and a report") {
  const auto dir = scratch("dos");
  const auto cfg = write_config(dir, dos_config());
  const auto r = run({"dos", "--config", cfg.string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == "lambda,n,tail_bound,k_used");
  std::ifstream csv(dir / "out" / "dos.csv");
  std::stringstream file;
  file << csv.rdbuf();
  CHECK(file.str() == r.out);
  const json report = json::parse(std::ifstream(dir / "out" / "report.json"));
  CHECK(report["command"] == "dos");
  CHECK(report["results"]["values"].size() == 21);
  CHECK(report["certificates"]["ratio"].get<double>() < 0.25);
  CHECK(report["tool"] == kToolName);
}

TEST_CASE("dos above the convergence threshold exits 2 without output") {
  const auto dir = scratch("diverge");
  const auto cfg = write_config(dir, dos_config(0.2));
  const auto r = run({"dos", "--config", cfg.string(), "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(r.err.find("rho") != std::string::npos);
}

TEST_CASE("dos between max_ratio and one is a capacity refusal") {
  auto c = dos_config(0.05);  // rho ~ 0.61
  const auto dir = scratch("capacity");
  const auto r = run({"dos", "--config", write_config(dir, c).string()});
  CHECK(r.code == 3);
  c["expansion"] = {{"max_ratio", 0.7}, {"K_max", 40}};
  const auto again = run({"dos", "--config", write_config(dir, c).string()});
  CHECK(again.code == 3);  // K = 40 exceeds the d = 1 enumeration cap
}

TEST_CASE("strong disorder dos is refused with exit 3") {
  const json c = {{"model", {{"d", 1}, {"h", 1.0}, {"distribution", {{"type", "uniform"}, {"a", 8.0}}}}},
                  {"window", {{"I", {-1.0, 1.0}}}}};
  const auto dir = scratch("strong");
  const auto r = run({"dos", "--config", write_config(dir, c).string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("(-6, 6)") != std::string::npos);
  const auto reg = run({"regime", "--config", write_config(dir, c).string()});
  REQUIRE(reg.code == 0);
  const json rep = json::parse(reg.out);
  CHECK(rep["results"]["uniform"]["eligible"] == true);
  CHECK(rep["results"]["uniform"]["interval"] == json({-6.0, 6.0}));
}

TEST_CASE("malformed window names the field") {
  auto c = dos_config();
  c["window"]["delta_prime"] = 0.9;
  const auto dir = scratch("malformed");
  const auto r = run({"dos", "--config", write_config(dir, c).string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("window.delta_prime") != std::string::npos);
}

TEST_CASE("paths, moments and regime diagnostics") {
  const auto dir = scratch("diag");
  json c = {{"model", base_model(0.0)}, {"paths", {{"k", 4}}}};
  auto r = run({"paths", "--config", write_config(dir, c).string()});
  REQUIRE(r.code == 0);
  auto rep = json::parse(r.out);
  CHECK(rep["results"]["count"] == 6);
  CHECK(rep["results"]["walks"].size() == 6);

  c = {{"model", base_model(0.0)}, {"moments", {{"z", {0.0, 1.0}}, {"max_order", 5}}}};
  r = run({"moments", "--config", write_config(dir, c).string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "ell,re,im,method");
  CHECK(rows[1] == "0,1,0,closed-form");
  CHECK(rows[3].rfind("2,-0.5,", 0) == 0);

  c = {{"model", base_model(0.0)},
       {"window", {{"I", {-0.2, 0.2}}, {"delta", 0.8}, {"delta_prime", 0.4}}},
       {"moments", {{"z", {0.1, 0.0}}, {"max_order", 3}}}};
  r = run({"moments", "--config", write_config(dir, c).string()});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[1].find("contour") != std::string::npos);

  c = {{"model", base_model(0.0)}, {"moments", {{"z", {0.1, 0.0}}}}};
  CHECK(run({"moments", "--config", write_config(dir, c).string()}).code == 1);

  c = {{"model", base_model(0.02)}, {"paths", {{"k", 2}, {"l", 2}, {"R", 0}}}};
  r = run({"paths", "--config", write_config(dir, c).string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["results"]["count"] == 6);
}

TEST_CASE("validate verdicts and seeds") {
  const auto dir = scratch("validate");
  json c = {{"model", base_model()},
            {"window", {{"I", {-0.2, 0.2}}, {"delta", 0.8}, {"delta_prime", 0.4}}},
            {"resolvent", {{"z", {0.1, 0.5}}}},
            {"box", {{"L", 101}, {"samples", 200}}},
            {"validate", {{"target", "resolvent"}}}};
  auto r = run({"validate", "--config", write_config(dir, c).string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("box.seed") != std::string::npos);

  r = run({"validate", "--config", write_config(dir, c).string(), "--seed", "17"});
  REQUIRE((r.code == 0 || r.code == 4));
  json rep = json::parse(r.out);
  for (const char* key : {"expansion_value", "tail_bound", "mc_mean", "mc_stderr", "z", "params", "verdict"})
    CHECK(rep["results"].contains(key));
  CHECK(rep["seed"] == 17);
  CHECK(rep["config"]["box"]["seed"] == 17);

  // A truncated expansion: the verdict must be consistent with its numbers.
  c["expansion"] = {{"K_max", 1}, {"tolerance", 1e-12}};
  c["box"]["seed"] = 5;
  r = run({"validate", "--config", write_config(dir, c).string()});
  rep = json::parse(r.out);
  const bool pass = rep["results"]["difference"].get<double>() <=
                    rep["results"]["tail_bound"].get<double>() + 3.0 * rep["results"]["mc_stderr"].get<double>();
  CHECK(rep["results"]["verdict"] == (pass ? "pass" : "fail"));
  CHECK(r.code == (pass ? 0 : 4));
}

TEST_CASE("reports reproduce their run") {
  const auto dir = scratch("roundtrip");
  json c = {{"model", base_model()},
            {"correlation",
             {{"E1", 0.3}, {"E2", -0.3}, {"delta", 0.25}, {"z1", {0.3, 0.4}}, {"z2", {-0.3, -0.4}}}},
            {"box", {{"L", 51}, {"samples", 50}, {"seed", 3}}},
            {"validate", {{"target", "correlation"}}}};
  const auto first = run({"validate", "--config", write_config(dir, c).string(), "--out", (dir / "a").string()});
  REQUIRE((first.code == 0 || first.code == 4));
  const auto second =
      run({"validate", "--config", (dir / "a" / "report.json").string(), "--out", (dir / "b").string()});
  REQUIRE(second.code == first.code);
  json a = json::parse(first.out), b = json::parse(second.out);
  a.erase("timings");
  b.erase("timings");
  CHECK(a == b);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("worker count does not change reports") {
  const auto dir = scratch("workers");
  const auto cfg = write_config(dir, dos_config()).string();
  CHECK(run({"resolvent", "--config", cfg}).code == 1);  // no resolvent block
  const auto d1 = run({"dos", "--config", cfg, "--workers", "1"});
  const auto d4 = run({"dos", "--config", cfg, "--workers", "4"});
  CHECK(d1.out == d4.out);
}

TEST_CASE("command line errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"dos"}).code == 1);
  CHECK(run({"frobnicate", "--config", "x.json"}).code == 1);
  CHECK(run({"dos", "--config", "/nonexistent/config.json"}).code == 1);
  CHECK(run({"dos", "--config", "x.json", "--workers", "0"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  const auto dir = scratch("errors");
  std::ofstream(dir / "broken.json") << "{ not json";
  const auto r = run({"dos", "--config", (dir / "broken.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("parse") != std::string::npos);
}

TEST_CASE("config schema rejects invariant violations with field paths") {
  const json good = dos_config();
  CHECK(config_error(good) == "<accepted>");
  auto with = [&](const std::string& pointer, const json& value) {
    json c = good;
    c[json::json_pointer(pointer)] = value;
    return config_error(c);
  };
  CHECK(with("/model/d", 0) == "model.d");
  CHECK(with("/model/d", 1.5) == "model.d");
  CHECK(with("/model/h", -1.0) == "model.h");
  CHECK(with("/model/h", "x") == "model.h");
  CHECK(with("/model/distribution/type", "cauchy") == "model.distribution.type");
  CHECK(with("/model/distribution/a", 0.0) == "model.distribution.a");
  CHECK(with("/model/colour", 1) == "model.colour");
  CHECK(with("/window/I", json({0.2, -0.2})) == "window.I");
  CHECK(with("/window/delta", -0.1) == "window.delta");
  CHECK(with("/window/delta_prime", 0.8) == "window.delta_prime");
  CHECK(with("/window/delta", 5.0) == "window");
  CHECK(with("/grid/step", 0.0) == "grid.step");
  CHECK(with("/expansion/tolerance", 0.0) == "expansion.tolerance");
  CHECK(with("/expansion/max_ratio", 1.0) == "expansion.max_ratio");
  CHECK(with("/expansion/K_max", -1) == "expansion.K_max");
  CHECK(with("/expansion/K_max", 1001) == "expansion.K_max");
  CHECK(with("/box", json{{"L", 4}, {"samples", 10}}) == "box.L");
  CHECK(with("/box", json{{"L", 5}, {"samples", 1}}) == "box.samples");
  CHECK(with("/box", json{{"L", 5}, {"samples", 10}, {"seed", -1}}) == "box.seed");
  CHECK(with("/paths", json{{"k", -1}}) == "paths.k");
  CHECK(with("/paths", json{{"k", 2}, {"start", {0, 0}}}) == "paths.start");
  CHECK(with("/paths", json{{"k", 2}, {"R", 17}}) == "paths.R");
  CHECK(with("/moments", json{{"z", {1.0}}}) == "moments.z");
  CHECK(with("/validate", json{{"target", "spectrum"}}) == "validate.target");
  CHECK(with("/validate", json{{"bin", 0.0}}) == "validate.bin");
  CHECK(with("/resolvent", json{{"z", {0.0, 1.0}}, {"n", {1, 2}}}) == "resolvent.n");
  json corr = {{"E1", 0.3}, {"E2", 0.2}, {"delta", 0.25}, {"z1", {0.3, 0.4}}, {"z2", {-0.3, -0.4}}};
  CHECK(with("/correlation", corr) == "correlation");
  corr["E2"] = -0.3;
  corr["A1"] = {{"type", "shift"}, {"axis", 1}};
  CHECK(with("/correlation", corr) == "correlation.A1.axis");
  corr["A1"] = {{"type", "stencil"}, {"entries", {{{"offset", {1}}, {"value", {1.0}}}}}};
  CHECK(with("/correlation", corr) == "correlation.A1.entries[0].value");
  json poly = {{"type", "polynomial"}, {"support", {-1.0, 1.0}}, {"coefficients", {1.0}}};
  CHECK(with("/model/distribution", poly) == "model.distribution.coefficients");
  poly["coefficients"] = {0.75, 0.0, -0.75};
  CHECK(with("/model/distribution", poly) == "<accepted>");
  CHECK(config_error(json::array()) == "<root>");
  CHECK(config_error(json{{"window", good["window"]}}) == "model");
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(fs::path(ANDERSON_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json" || entry.path().filename() == "run_config.schema.json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}
