#include "anderson/cli.hpp"

#include "anderson/dos_service.hpp"
#include "anderson/error.hpp"
#include "anderson/parallel.hpp"
#include "anderson/run_config.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>

namespace anderson {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_logger_mt("anderson_dos");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("ANDERSON_DOS_LOG")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_number(double x) { return fmt::format("{:.17g}", x); }

struct Output {
  json results = json::object();
  json certificates = json::object();
  std::string csv;       // primary data for curve-like commands
  std::string csv_name;  // file name under --out
  ExitCode code = ExitCode::ok;
};

// ---------------------------------------------------------------- dos

GridSpec default_grid(const ContinuationWindow& win) {
  if (win.b == win.a) return GridSpec{{win.a}};
  GridSpec g = GridSpec::uniform(win.a, win.b, (win.b - win.a) / 20.0);
  g.points.back() = win.b;
  return g;
}

// Refuses sweeps whose series cannot be certified at desk scale: rho >= 1
// is a divergence unless the uniform law is in the analytic regime where only
// the enumeration depth is lacking; 1 > rho > max_ratio is a capacity limit.
void check_sweep_feasible(const RunConfig& cfg, const ContinuationWindow& win, const GridSpec& grid) {
  const double rho = convergence_ratio(cfg.model, win);
  if (rho >= 1.0) {
    const auto rep = regime_report(cfg.model, &win);
    if (rep.uniform && cfg.model.h > 0.0 && rep.uniform->eligible) {
      const auto& u = *rep.uniform;
      const bool inside = grid.points.front() > u.interval.first && grid.points.back() < u.interval.second;
      if (inside && u.sharp_ratio < 1.0) {
        const double k_needed = std::ceil(std::log(cfg.expansion.tol) / std::log(u.sharp_ratio));
        throw CapacityError(fmt::format(
            "the averaged resolvent is analytic on ({:.6g}, {:.6g}) but a certified curve needs about {:.0f} "
            "walk orders at ratio {:.4g}; walk enumeration is capped at {} in d = {}",
            u.interval.first, u.interval.second, k_needed, u.sharp_ratio,
            cfg.expansion.limits.max_length_for(cfg.model.d), cfg.model.d));
      }
    }
    throw DivergenceError(fmt::format("walk expansion ratio rho = {:.6g} >= 1; reduce h or widen the window", rho));
  }
  if (rho > cfg.max_ratio)
    throw CapacityError(fmt::format("walk expansion ratio rho = {:.6g} exceeds expansion.max_ratio = {:.6g}", rho,
                                    cfg.max_ratio));
}

Output cmd_dos(const RunConfig& cfg) {
  const auto& win = cfg.require_window();
  const GridSpec grid = cfg.grid ? *cfg.grid : default_grid(win);
  if (grid.points.empty()) throw ConfigError("grid is empty", "grid");
  if (grid.points.front() < win.a || grid.points.back() > win.b)
    throw ConfigError("grid points must lie inside window.I", "grid");
  check_sweep_feasible(cfg, win, grid);

  const DosCurve curve = dos_sweep(cfg.model, win, grid, cfg.expansion);
  Output out;
  out.csv_name = "dos.csv";
  out.csv = "lambda,n,tail_bound,k_used\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out.csv += fmt::format("{},{},{},{}\n", csv_number(curve.grid[i]), csv_number(curve.values[i]),
                           csv_number(curve.tails[i]), curve.K_used[i]);
  out.results = {{"grid", curve.grid},
                 {"values", curve.values},
                 {"tails", curve.tails},
                 {"K_used", curve.K_used},
                 {"ratio", curve.ratio},
                 {"tol", curve.tol}};
  double worst_tail = 0.0;
  for (double t : curve.tails) worst_tail = std::max(worst_tail, t);
  out.certificates = {{"ratio", curve.ratio}, {"C", win.C},
                      {"delta", win.delta},   {"delta_prime", win.delta_prime},
                      {"max_tail_bound", worst_tail}};
  if (cfg.model.dist.is_even())
    if (const auto excess = symmetry_excess(curve)) out.certificates["symmetry_excess"] = *excess;
  return out;
}

// ---------------------------------------------------------------- resolvent / correlation

Output cmd_resolvent(const RunConfig& cfg) {
  const auto& win = cfg.require_window();
  if (!cfg.resolvent) throw ConfigError("required block is missing", "resolvent");
  const auto& rc = *cfg.resolvent;
  const SeriesResult r = resolvent_element(cfg.model, win, rc.n, rc.m, rc.z, cfg.expansion);
  Output out;
  out.results = to_json(r);
  out.results["z"] = to_json(rc.z);
  out.results["n"] = to_json(rc.n);
  out.results["m"] = to_json(rc.m);
  out.certificates = {{"ratio", r.ratio}, {"tail_bound", r.tail_bound}, {"C", win.C}, {"converged", r.converged()}};
  return out;
}

CorrelationWindows correlation_windows(const RunConfig& cfg) {
  const auto& cc = *cfg.correlation;
  return CorrelationWindows::make(cfg.model.dist, cc.e1, cc.e2, *cc.delta);
}

Output cmd_correlation(const RunConfig& cfg) {
  if (!cfg.correlation) throw ConfigError("required block is missing", "correlation");
  const auto& cc = *cfg.correlation;
  const auto win = correlation_windows(cfg);
  const SeriesResult r = correlation_element(cfg.model, win, cc.a1, cc.a2, cc.z1, cc.z2, cfg.expansion);
  Output out;
  out.results = to_json(r);
  out.results["z1"] = to_json(cc.z1);
  out.results["z2"] = to_json(cc.z2);
  out.certificates = {{"ratio", r.ratio},
                      {"tail_bound", r.tail_bound},
                      {"C", win.C},
                      {"kappa", correlation_distance(cfg.model.dist, win, cc.z1, cc.z2)},
                      {"converged", r.converged()}};
  return out;
}

// ---------------------------------------------------------------- validate

Output cmd_validate(const RunConfig& cfg) {
  const ValidateConfig vc = cfg.validate.value_or(ValidateConfig{});
  const auto& bc = cfg.require_box();
  const std::uint64_t seed = cfg.require_seed();
  const BoxSpec box = BoxSpec::make(cfg.model.d, bc.L);

  double expansion_tail = 0.0, mc_stderr = 0.0, allowance = 0.0;
  json expansion_value, mc_mean, where;
  double distance = 0.0;
  Output out;

  if (vc.target == "resolvent") {
    const auto& win = cfg.require_window();
    if (!cfg.resolvent) throw ConfigError("required block is missing", "resolvent");
    const auto& rc = *cfg.resolvent;
    if (rc.n != origin(cfg.model.d) || rc.m != origin(cfg.model.d))
      throw ConfigError("validation compares the (0, 0) element; n and m must be the origin", "resolvent");
    const SeriesResult r = resolvent_element(cfg.model, win, rc.n, rc.m, rc.z, cfg.expansion);
    const McEstimate mc = mc_resolvent(box, cfg.model, rc.z, bc.samples, seed);
    expansion_value = to_json(r.value);
    mc_mean = to_json(mc.mean);
    expansion_tail = r.tail_bound;
    mc_stderr = mc.std_error;
    distance = std::abs(r.value - mc.mean);
    allowance = expansion_tail + 3.0 * mc_stderr;
    where = {{"z", to_json(rc.z)}};
    out.results["K_used"] = r.K_used;
    out.certificates = {{"ratio", r.ratio}, {"tail_bound", r.tail_bound}};
  } else if (vc.target == "correlation") {
    if (!cfg.correlation) throw ConfigError("required block is missing", "correlation");
    const auto& cc = *cfg.correlation;
    const SeriesResult r =
        correlation_element(cfg.model, correlation_windows(cfg), cc.a1, cc.a2, cc.z1, cc.z2, cfg.expansion);
    const McEstimate mc = mc_correlation(box, cfg.model, cc.a1, cc.a2, cc.z1, cc.z2, bc.samples, seed);
    expansion_value = to_json(r.value);
    mc_mean = to_json(mc.mean);
    expansion_tail = r.tail_bound;
    mc_stderr = mc.std_error;
    distance = std::abs(r.value - mc.mean);
    allowance = expansion_tail + 3.0 * mc_stderr;
    where = {{"z1", to_json(cc.z1)}, {"z2", to_json(cc.z2)}};
    out.results["K_used"] = r.K_used;
    out.certificates = {{"ratio", r.ratio}, {"tail_bound", r.tail_bound}};
  } else {
    const auto& win = cfg.require_window();
    const DosPoint p = dos_at(cfg.model, win, vc.lambda, cfg.expansion);
    const DosHistogram hist = dos_histogram(box, cfg.model, vc.lambda, vc.bin, bc.samples, seed);
    expansion_value = p.value;
    mc_mean = hist.full.mean.real();
    expansion_tail = p.tail_bound;
    mc_stderr = hist.full.std_error;
    distance = std::abs(p.value - hist.full.mean.real());
    allowance = expansion_tail + 3.0 * mc_stderr + hist.bias;
    where = {{"lambda", vc.lambda}, {"bin", vc.bin}};
    out.results["K_used"] = p.K_used;
    out.results["bin_bias"] = hist.bias;
    out.results["half_bin_mean"] = hist.half.mean.real();
    out.certificates = {{"ratio", convergence_ratio(cfg.model, win)}, {"tail_bound", p.tail_bound}};
  }

  const bool pass = distance <= allowance;
  out.results.update(json{{"target", vc.target},
                          {"expansion_value", expansion_value},
                          {"tail_bound", expansion_tail},
                          {"mc_mean", mc_mean},
                          {"mc_stderr", mc_stderr},
                          {"params", cfg.doc.at("model")},
                          {"difference", distance},
                          {"allowance", allowance},
                          {"verdict", pass ? "pass" : "fail"}});
  out.results.update(where);
  out.code = pass ? ExitCode::ok : ExitCode::validation_failed;
  return out;
}

// ---------------------------------------------------------------- diagnostics

Output cmd_paths(const RunConfig& cfg) {
  if (!cfg.paths) throw ConfigError("required block is missing", "paths");
  const auto& pc = *cfg.paths;
  const int d = cfg.model.d;
  const WalkLimits& limits = cfg.expansion.limits;
  Output out;
  out.results = {{"d", d}, {"k", pc.k}, {"start", to_json(pc.start)}, {"end", to_json(pc.end)}};
  if (pc.l < 0) {
    const std::uint64_t count = count_paths(d, pc.k, pc.start, pc.end, limits);
    out.results["count"] = count;
    constexpr std::uint64_t kListLimit = 1000;
    if (count <= kListLimit) {
      json walks = json::array();
      enumerate_paths(
          d, pc.k, pc.start, pc.end,
          [&](const WalkPath& p) {
            json w = json::array();
            for (const auto& s : p.sites) w.push_back(to_json(s));
            walks.push_back(std::move(w));
          },
          limits);
      out.results["walks"] = std::move(walks);
    }
  } else {
    const cplx total = fold_correlation_paths(
        d, pc.k, pc.l, pc.R, pc.start, pc.end,
        [](const VisitProfile&, const VisitProfile&, const Junction&) { return cplx(1.0); }, limits);
    out.results["l"] = pc.l;
    out.results["R"] = pc.R;
    out.results["count"] = static_cast<std::uint64_t>(std::llround(total.real()));
  }
  return out;
}

MomentTable compute_moments(const RunConfig& cfg, const MomentsConfig& mc) {
  const auto& dist = cfg.model.dist;
  if (const auto* u = std::get_if<Uniform>(&dist.law()); u && mc.z.imag() > 0.0)
    return moment_table_closed(u->a, mc.z, mc.max_order);
  if (cfg.window) return moment_table(dist, *cfg.window, mc.z, mc.max_order, cfg.expansion.quad);
  if (mc.z.imag() != 0.0) return moment_table_direct(dist, mc.z, mc.max_order, cfg.expansion.quad);
  throw ConfigError("a real z needs a window block to continue the moments", "moments.z");
}

Output cmd_moments(const RunConfig& cfg) {
  if (!cfg.moments) throw ConfigError("required block is missing", "moments");
  const MomentTable t = compute_moments(cfg, *cfg.moments);
  Output out;
  out.csv_name = "moments.csv";
  out.csv = "ell,re,im,method\n";
  json values = json::array();
  for (int l = 0; l <= t.max_order(); ++l) {
    out.csv += fmt::format("{},{},{},{}\n", l, csv_number(t[l].real()), csv_number(t[l].imag()), to_string(t.method));
    values.push_back(to_json(t[l]));
  }
  out.results = {{"z", to_json(t.z)}, {"values", values}, {"method", to_string(t.method)}};
  return out;
}

Output cmd_regime(const RunConfig& cfg) {
  const ContinuationWindow* win = cfg.window ? &*cfg.window : nullptr;
  const RegimeReport rep = regime_report(cfg.model, win);
  Output out;
  auto opt = [](const std::optional<double>& x) { return x ? finite_or_null(*x) : json(nullptr); };
  out.results = {{"ratio", opt(rep.ratio)},
                 {"h_threshold", opt(rep.h_threshold)},
                 {"exclusion_width", opt(rep.exclusion_width)}};
  if (rep.uniform) {
    const auto& u = *rep.uniform;
    out.results["uniform"] = {{"threshold", u.threshold},
                              {"eligible", u.eligible},
                              {"interval", {u.interval.first, u.interval.second}},
                              {"best_delta", finite_or_null(u.best_delta)},
                              {"sharp_ratio", finite_or_null(u.sharp_ratio)}};
  } else {
    out.results["uniform"] = nullptr;
  }
  if (rep.ratio) out.certificates["ratio"] = *rep.ratio;
  return out;
}

using Command = std::function<Output(const RunConfig&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"dos", cmd_dos},         {"resolvent", cmd_resolvent}, {"correlation", cmd_correlation},
      {"validate", cmd_validate}, {"paths", cmd_paths},       {"moments", cmd_moments},
      {"regime", cmd_regime}};
  return table;
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> table{
      {"dos", "density of states curve on the window grid (CSV)"},
      {"resolvent", "averaged resolvent element with its tail certificate"},
      {"correlation", "averaged two-resolvent correlation with its tail certificate"},
      {"validate", "compare the expansion against a finite-box Monte Carlo estimate"},
      {"paths", "count and list lattice walks"},
      {"moments", "moment table B_0..B_L at one energy (CSV)"},
      {"regime", "convergence ratio, thresholds and analytic interval"}};
  return table;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string(), "--out");
  f << text;
  if (!f) throw ConfigError("write failed for " + path.string(), "--out");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disorder-averaged resolvents and density of states of the lattice Anderson model", kToolName};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  int n_workers = 1;
  std::optional<std::uint64_t> seed;
  for (const auto& [name, text] : descriptions()) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("--config", config_path, "run configuration (JSON); a previous report is accepted too")
        ->required();
    sub->add_option("--out", out_dir, "directory for report.json and CSV output");
    sub->add_option("--workers", n_workers, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "overrides box.seed");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const auto log = logger();

  try {
    set_workers(n_workers);
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(config_path, seed);
    log->info("{}: config {} loaded, {} worker(s)", command, config_path, n_workers);
    const Output result = commands().at(command)(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log->info("{}: finished in {:.3f} s", command, seconds);

    json seed_json = nullptr;
    if (cfg.box && cfg.box->seed) seed_json = *cfg.box->seed;
    const json report = {{"tool", kToolName},
                         {"tool_version", kToolVersion},
                         {"command", command},
                         {"config", cfg.doc},
                         {"results", result.results},
                         {"certificates", result.certificates},
                         {"seed", seed_json},
                         {"timings", {{"wall_seconds", seconds}, {"workers", n_workers}}}};
    const std::string report_text = report.dump(2) + "\n";

    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", report_text);
      if (!result.csv.empty()) write_file(fs::path(out_dir) / result.csv_name, result.csv);
    }
    out << (result.csv.empty() ? report_text : result.csv);
    out.flush();
    if (result.code == ExitCode::validation_failed) err << "validation failed: see results.verdict\n";
    return static_cast<int>(result.code);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerical);
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace anderson
