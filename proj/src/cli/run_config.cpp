#include "anderson/run_config.hpp"

#include "anderson/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace anderson {

using nlohmann::json;

namespace {

// A JSON object together with its dotted path, for field-path diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("must be an object", path_.empty() ? "<root>" : path_);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError("required field is missing", at(key));
    return j_.at(key);
  }

  Node child(const std::string& key) const { return Node(raw(key), at(key)); }

  double number(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError("must be a finite number", at(key));
    return v.get<double>();
  }

  std::optional<double> opt_number(const std::string& key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  long long integer(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError("must be an integer", at(key));
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("must be a nonnegative integer", at(key));
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError("must be a string", at(key));
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError("must be true or false", at(key));
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError("must be an array of numbers", at(key));
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("must be an array of numbers", at(key));
      out.push_back(x.get<double>());
    }
    return out;
  }

  cplx complex(const std::string& key) const {
    const auto v = numbers(key);
    if (v.size() != 2) throw ConfigError("must be [re, im]", at(key));
    return {v[0], v[1]};
  }

  LatticeSite site(const std::string& key, int d) const {
    const auto& v = raw(key);
    if (!v.is_array() || static_cast<int>(v.size()) != d)
      throw ConfigError("must be an integer array of length d=" + std::to_string(d), at(key));
    LatticeSite s(d);
    for (int i = 0; i < d; ++i) {
      if (!v[i].is_number_integer()) throw ConfigError("must be an integer array", at(key));
      s[i] = v[i].get<int>();
    }
    return s;
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items())
      if (!allowed.contains(k)) throw ConfigError("unknown field", at(k));
  }

 private:
  const json& j_;
  std::string path_;
};

DistributionSpec parse_distribution(const Node& n) {
  const auto type = n.string("type");
  if (type == "uniform") {
    n.allow_only({"type", "a"});
    const double a = n.number("a");
    if (!(a > 0.0)) throw ConfigError("must be positive", n.at("a"));
    return DistributionSpec::uniform(a);
  }
  if (type == "polynomial") {
    n.allow_only({"type", "support", "coefficients"});
    const auto support = n.numbers("support");
    if (support.size() != 2) throw ConfigError("must be [lo, hi]", n.at("support"));
    const auto c = n.numbers("coefficients");
    try {
      return DistributionSpec::polynomial(support[0], support[1], Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
    } catch (const ConfigError& e) {
      throw ConfigError(e.message(), n.at(e.field().empty() ? "type" : e.field()));
    }
  }
  throw ConfigError("must be \"uniform\" or \"polynomial\"", n.at("type"));
}

LocalOperator parse_operator(const Node& n, int d) {
  const auto type = n.string("type");
  LocalOperator op = LocalOperator::identity(d);
  if (type == "identity") {
    n.allow_only({"type", "adjoint"});
  } else if (type == "zero") {
    n.allow_only({"type", "adjoint"});
    op = LocalOperator::zero(d);
  } else if (type == "shift") {
    n.allow_only({"type", "axis", "step", "adjoint"});
    const auto axis = n.has("axis") ? n.integer("axis") : 0;
    const auto step = n.has("step") ? n.integer("step") : 1;
    if (axis < 0 || axis >= d) throw ConfigError("must lie in [0, d)", n.at("axis"));
    if (std::abs(step) > 16) throw ConfigError("must satisfy |step| <= 16", n.at("step"));
    op = LocalOperator::shift(d, static_cast<int>(axis), static_cast<int>(step));
  } else if (type == "stencil") {
    n.allow_only({"type", "entries", "adjoint"});
    const auto& entries = n.raw("entries");
    if (!entries.is_array()) throw ConfigError("must be an array", n.at("entries"));
    std::vector<LocalOperator::Entry> list;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Node e(entries[i], n.at("entries") + "[" + std::to_string(i) + "]");
      e.allow_only({"offset", "value"});
      const auto offset = e.site("offset", d);
      if (offset.size() && offset.cwiseAbs().maxCoeff() > 16) throw ConfigError("must satisfy |offset| <= 16", e.at("offset"));
      list.push_back({offset, e.complex("value")});
    }
    op = LocalOperator::from_stencil(d, std::move(list));
  } else {
    throw ConfigError("must be identity, zero, shift or stencil", n.at("type"));
  }
  return n.boolean("adjoint", false) ? op.adjoint() : op;
}

}  // namespace

const ContinuationWindow& RunConfig::require_window() const {
  if (!window) throw ConfigError("required block is missing", "window");
  return *window;
}

const BoxConfig& RunConfig::require_box() const {
  if (!box) throw ConfigError("required block is missing", "box");
  return *box;
}

std::uint64_t RunConfig::require_seed() const {
  const auto& b = require_box();
  if (!b.seed) throw ConfigError("required field is missing (or pass --seed)", "box.seed");
  return *b.seed;
}

RunConfig parse_config(const json& input, std::optional<std::uint64_t> seed_override) {
  json doc = input;
  if (doc.is_object() && doc.contains("command") && doc.contains("config")) doc = json(input.at("config"));

  const Node root(doc, "");
  root.allow_only({"model", "window", "expansion", "grid", "resolvent", "correlation", "box", "paths", "moments",
                   "validate"});
  RunConfig cfg;

  // model
  const Node model = root.child("model");
  model.allow_only({"d", "h", "distribution"});
  const auto d = model.integer("d");
  if (d < 1 || d > kMaxDimension) throw ConfigError("must lie in [1, 8]", "model.d");
  const double h = model.number("h");
  if (h < 0.0) throw ConfigError("must be >= 0", "model.h");
  cfg.model = ModelParams::make(static_cast<int>(d), h, parse_distribution(model.child("distribution")));
  const int dim = cfg.model.d;

  // expansion options
  if (root.has("expansion")) {
    const Node e = root.child("expansion");
    e.allow_only({"tolerance", "K_max", "max_ratio", "max_walk_length"});
    if (e.has("tolerance")) cfg.expansion.tol = e.number("tolerance");
    if (!(cfg.expansion.tol > 0.0)) throw ConfigError("must be positive", "expansion.tolerance");
    if (e.has("K_max")) {
      const auto k = e.integer("K_max");
      if (k < 0 || k > 1000) throw ConfigError("must lie in [0, 1000]", "expansion.K_max");
      cfg.expansion.K_max = static_cast<int>(k);
    }
    if (e.has("max_ratio")) cfg.max_ratio = e.number("max_ratio");
    if (!(cfg.max_ratio > 0.0 && cfg.max_ratio < 1.0)) throw ConfigError("must lie in (0, 1)", "expansion.max_ratio");
    if (e.has("max_walk_length")) {
      cfg.expansion.limits.max_length.clear();
      for (double v : e.numbers("max_walk_length")) {
        if (v < 0 || v > 100 || v != std::floor(v))
          throw ConfigError("entries must be integers in [0, 100]", "expansion.max_walk_length");
        cfg.expansion.limits.max_length.push_back(static_cast<int>(v));
      }
    }
  }
  doc["expansion"]["tolerance"] = cfg.expansion.tol;
  doc["expansion"]["K_max"] = cfg.expansion.K_max;
  doc["expansion"]["max_ratio"] = cfg.max_ratio;
  doc["expansion"]["max_walk_length"] = cfg.expansion.limits.max_length;

  // window
  if (root.has("window")) {
    const Node w = root.child("window");
    w.allow_only({"I", "delta", "delta_prime"});
    const auto interval = w.numbers("I");
    if (interval.size() != 2 || !(interval[0] <= interval[1]))
      throw ConfigError("must be [a, b] with a <= b", "window.I");
    const auto delta = w.opt_number("delta");
    const auto delta_prime = w.opt_number("delta_prime");
    if (delta && !(*delta > 0.0)) throw ConfigError("must be positive", "window.delta");
    if (delta && delta_prime && !(*delta_prime > 0.0 && *delta_prime < *delta))
      throw ConfigError("must satisfy 0 < delta_prime < delta", "window.delta_prime");
    try {
      if (delta) {
        cfg.window = ContinuationWindow::make(cfg.model.dist, interval[0], interval[1], *delta,
                                              delta_prime.value_or(0.5 * *delta));
      } else {
        auto def = ContinuationWindow::make_default(cfg.model.dist, interval[0], interval[1]);
        cfg.window = delta_prime ? ContinuationWindow::make(cfg.model.dist, def.a, def.b, def.delta, *delta_prime) : def;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(e.message(), e.field().empty() ? "window" : e.field());
    }
    doc["window"]["delta"] = cfg.window->delta;
    doc["window"]["delta_prime"] = cfg.window->delta_prime;
  }

  // grid
  if (root.has("grid")) {
    const Node g = root.child("grid");
    if (g.has("points")) {
      g.allow_only({"points"});
      cfg.grid = GridSpec{g.numbers("points")};
    } else {
      g.allow_only({"start", "stop", "step"});
      cfg.grid = GridSpec::uniform(g.number("start"), g.number("stop"), g.number("step"));
    }
    cfg.grid->validate();
  }

  if (root.has("resolvent")) {
    const Node r = root.child("resolvent");
    r.allow_only({"z", "n", "m"});
    cfg.resolvent = ResolventConfig{r.complex("z"), r.has("n") ? r.site("n", dim) : origin(dim),
                                    r.has("m") ? r.site("m", dim) : origin(dim)};
  }

  if (root.has("correlation")) {
    const Node c = root.child("correlation");
    c.allow_only({"E1", "E2", "delta", "z1", "z2", "A1", "A2"});
    CorrelationConfig cc;
    cc.e1 = c.number("E1");
    cc.e2 = c.number("E2");
    cc.delta = c.opt_number("delta");
    cc.z1 = c.complex("z1");
    cc.z2 = c.complex("z2");
    cc.a1 = c.has("A1") ? parse_operator(c.child("A1"), dim) : LocalOperator::identity(dim);
    cc.a2 = c.has("A2") ? parse_operator(c.child("A2"), dim) : LocalOperator::identity(dim);
    try {
      const auto win = cc.delta ? CorrelationWindows::make(cfg.model.dist, cc.e1, cc.e2, *cc.delta)
                                : CorrelationWindows::make_default(cfg.model.dist, cc.e1, cc.e2);
      cc.delta = win.delta;
    } catch (const ConfigError& e) {
      throw ConfigError(e.message(), e.field().empty() ? "correlation" : e.field());
    }
    doc["correlation"]["delta"] = *cc.delta;
    cfg.correlation = std::move(cc);
  }

  if (root.has("box")) {
    const Node b = root.child("box");
    b.allow_only({"L", "samples", "seed"});
    BoxConfig bc;
    const auto L = b.integer("L");
    if (L < 3 || L % 2 == 0 || L > 50'000'001) throw ConfigError("must be odd and >= 3", "box.L");
    bc.L = static_cast<int>(L);
    const auto samples = b.integer("samples");
    if (samples < 2) throw ConfigError("must be >= 2", "box.samples");
    bc.samples = static_cast<std::size_t>(samples);
    if (b.has("seed")) bc.seed = b.unsigned_integer("seed");
    if (seed_override) bc.seed = seed_override;
    if (bc.seed) doc["box"]["seed"] = *bc.seed;
    BoxSpec::make(dim, bc.L);
    cfg.box = bc;
  } else if (seed_override) {
    throw ConfigError("--seed given but the config has no box block", "box");
  }

  if (root.has("paths")) {
    const Node p = root.child("paths");
    p.allow_only({"k", "l", "R", "start", "end"});
    PathsConfig pc;
    pc.k = static_cast<int>(p.integer("k"));
    if (pc.k < 0) throw ConfigError("must be >= 0", "paths.k");
    if (p.has("l")) {
      pc.l = static_cast<int>(p.integer("l"));
      if (pc.l < 0) throw ConfigError("must be >= 0", "paths.l");
    }
    if (p.has("R")) {
      pc.R = static_cast<int>(p.integer("R"));
      if (pc.R < 0 || pc.R > 16) throw ConfigError("must lie in [0, 16]", "paths.R");
    }
    pc.start = p.has("start") ? p.site("start", dim) : origin(dim);
    pc.end = p.has("end") ? p.site("end", dim) : origin(dim);
    cfg.paths = pc;
  }

  if (root.has("moments")) {
    const Node m = root.child("moments");
    m.allow_only({"z", "max_order"});
    MomentsConfig mc{m.complex("z"), m.has("max_order") ? static_cast<int>(m.integer("max_order")) : 5};
    if (mc.max_order < 0 || mc.max_order > 200) throw ConfigError("must lie in [0, 200]", "moments.max_order");
    cfg.moments = mc;
  }

  if (root.has("validate")) {
    const Node v = root.child("validate");
    v.allow_only({"target", "lambda", "bin"});
    ValidateConfig vc;
    if (v.has("target")) vc.target = v.string("target");
    if (vc.target != "resolvent" && vc.target != "correlation" && vc.target != "dos")
      throw ConfigError("must be resolvent, correlation or dos", "validate.target");
    if (v.has("lambda")) vc.lambda = v.number("lambda");
    if (v.has("bin")) vc.bin = v.number("bin");
    if (!(vc.bin > 0.0)) throw ConfigError("must be positive", "validate.bin");
    cfg.validate = vc;
  }

  cfg.doc = std::move(doc);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  return parse_config(doc, seed_override);
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const LatticeSite& s) {
  json out = json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(s[i]);
  return out;
}

json to_json(const SeriesResult& r) {
  json terms = json::array();
  for (const auto& t : r.terms) terms.push_back(to_json(t));
  return {{"value", to_json(r.value)},   {"tail_bound", r.tail_bound}, {"K_used", r.K_used},
          {"ratio", r.ratio},            {"tolerance", r.tol},         {"converged", r.converged()},
          {"terms", terms},              {"term_bounds", r.term_bounds}};
}

json to_json(const McEstimate& e) {
  return {{"mean", to_json(e.mean)}, {"stderr", e.std_error}, {"samples", e.samples}, {"seed", e.seed}};
}

}  // namespace anderson
