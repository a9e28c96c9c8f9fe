#include "anderson/dos_service.hpp"

#include "anderson/error.hpp"
#include "anderson/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace anderson {

DosPoint dos_at(const ModelParams& params, const ContinuationWindow& win, double lambda,
                const ExpansionOptions& opts) {
  const double slack = 1e-12 * std::max(1.0, std::abs(lambda));
  if (lambda < win.a - slack || lambda > win.b + slack)
    throw ConfigError("lambda = " + std::to_string(lambda) + " lies outside the window interval");
  const SeriesResult r = resolvent_element(params, win, origin(params.d), origin(params.d), cplx(lambda, 0.0), opts);
  return {r.value.imag() / std::numbers::pi, r.tail_bound / std::numbers::pi, r.K_used};
}

GridSpec GridSpec::uniform(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("must be positive", "grid.step");
  if (stop < start) throw ConfigError("stop must be >= start", "grid.stop");
  GridSpec g;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 0.5)) + 1;
  g.points.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) g.points.push_back(start + static_cast<double>(i) * step);
  return g;
}

void GridSpec::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1])) throw ConfigError("grid must be strictly increasing", "grid.points");
}

DosCurve dos_sweep(const ModelParams& params, const ContinuationWindow& win, const GridSpec& grid,
                   const ExpansionOptions& opts) {
  grid.validate();
  DosCurve curve;
  curve.grid = grid.points;
  curve.tol = opts.tol;
  curve.ratio = convergence_ratio(params, win);
  std::vector<DosPoint> pts(grid.points.size());
  parallel_for(pts.size(), [&](std::size_t i) { pts[i] = dos_at(params, win, grid.points[i], opts); });
  for (const auto& p : pts) {
    curve.values.push_back(p.value);
    curve.tails.push_back(p.tail_bound);
    curve.K_used.push_back(p.K_used);
  }
  return curve;
}

std::optional<double> symmetry_excess(const DosCurve& curve) {
  std::optional<double> worst;
  const auto n = curve.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = n; j-- > i;) {
      if (std::abs(curve.grid[i] + curve.grid[j]) > 1e-12 * std::max(1.0, std::abs(curve.grid[i]))) continue;
      const double excess =
          std::abs(curve.values[i] - curve.values[j]) - curve.tails[i] - curve.tails[j];
      worst = worst ? std::max(*worst, excess) : excess;
    }
  }
  return worst;
}

double uniform_regime_threshold(int d) {
  const double two_d = 2.0 * d;
  return two_d * (std::log(two_d) + std::numbers::pi);
}

RegimeReport regime_report(const ModelParams& params, const ContinuationWindow* win) {
  RegimeReport rep;
  if (win) {
    rep.ratio = convergence_ratio(params, *win);
    rep.h_threshold = win->gap() / (2.0 * params.d * win->C);
    rep.exclusion_width = diagonal_exclusion_width(params, *win);
  }
  if (const auto* u = std::get_if<Uniform>(&params.dist.law())) {
    RegimeReport::UniformRegime reg;
    const double two_d = 2.0 * params.d;
    reg.threshold = uniform_regime_threshold(params.d);
    reg.interval = {-u->a + two_d * params.h, u->a - two_d * params.h};
    if (params.h > 0.0) {
      const double scaled = u->a / params.h;
      reg.eligible = scaled > reg.threshold;
      reg.best_delta = best_uniform_delta(scaled);
      reg.sharp_ratio = std::isnan(reg.best_delta) ? std::numeric_limits<double>::quiet_NaN() : two_d / reg.best_delta;
    } else {
      reg.eligible = true;
      reg.best_delta = std::numeric_limits<double>::quiet_NaN();
      reg.sharp_ratio = 0.0;
    }
    rep.uniform = reg;
  }
  return rep;
}

}  // namespace anderson
