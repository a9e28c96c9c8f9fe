#pragma once

#include "anderson/error.hpp"
#include "anderson/quadrature.hpp"

#include <Eigen/Core>

#include <complex>
#include <string>
#include <vector>

namespace anderson {

using cplx = std::complex<double>;

// A smooth contour piece parametrised by t in [0, 1]: either the straight
// segment from -> to, or the circular arc center + radius e^{i theta} with
// theta running from theta0 to theta1.
class ContourPiece {
 public:
  static ContourPiece segment(cplx from, cplx to);
  static ContourPiece arc(cplx center, double radius, double theta0, double theta1);

  cplx point(double t) const;
  cplx derivative(double t) const;  // dw/dt
  cplx start() const { return point(0.0); }
  cplx finish() const { return point(1.0); }
  double length() const;
  double distance_to(cplx z) const;
  bool is_arc() const { return arc_; }

 private:
  bool arc_ = false;
  cplx from_{}, to_{};
  cplx center_{};
  double radius_ = 0.0, theta0_ = 0.0, theta1_ = 0.0;
};

struct Contour {
  std::vector<ContourPiece> pieces;

  double length() const;
  double distance_to(cplx z) const;  // +inf for an empty contour
  // Consecutive pieces share endpoints to within tol.
  bool contiguous(double tol = 1e-12) const;
};

// Adaptive Gauss-Legendre integration of a vector-valued integrand along a
// contour. integrand(w, out) writes f_j(w) into out (length n). Each piece is
// refined by doubling its panel count until no component changes by more
// than max(abs_tol, rel_tol * integral of |f_j|). Throws NumericalError when
// a piece exceeds its node budget.
template <class Integrand>
Eigen::VectorXcd integrate_contour(const Contour& contour, Eigen::Index n, const Integrand& integrand,
                                   const QuadratureOptions& opts = {}) {
  static thread_local int cached_order = 0;
  static thread_local GaussLegendreRule<double> rule;
  if (cached_order != opts.order) {
    rule = gauss_legendre<double>(opts.order);
    cached_order = opts.order;
  }

  Eigen::VectorXcd total = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd values(n);

  auto evaluate = [&](const ContourPiece& piece, int panels, Eigen::VectorXcd& sum, Eigen::VectorXd& scale) {
    sum.setZero(n);
    scale.setZero(n);
    const double width = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double left = p * width;
      for (int q = 0; q < opts.order; ++q) {
        const double t = left + 0.5 * width * (rule.nodes[q] + 1.0);
        const cplx w = piece.point(t);
        const cplx jac = piece.derivative(t) * (0.5 * width * rule.weights[q]);
        integrand(w, values);
        sum += values * jac;
        scale += (values.cwiseAbs() * std::abs(jac)).matrix();
      }
    }
  };

  Eigen::VectorXcd coarse(n), fine(n);
  Eigen::VectorXd scale(n);
  for (const auto& piece : contour.pieces) {
    if (piece.length() == 0.0) continue;
    int panels = 1;
    evaluate(piece, panels, coarse, scale);
    for (;;) {
      panels *= 2;
      if (panels * opts.order > opts.max_nodes_per_piece)
        throw NumericalError("contour quadrature did not converge within " +
                             std::to_string(opts.max_nodes_per_piece) + " nodes per piece");
      evaluate(piece, panels, fine, scale);
      const Eigen::VectorXd change = (fine - coarse).cwiseAbs();
      const Eigen::VectorXd allowed = (opts.rel_tol * scale.array()).max(opts.abs_tol).matrix();
      coarse.swap(fine);
      if ((change.array() <= allowed.array()).all()) break;
    }
    total += coarse;
  }
  return total;
}

}  // namespace anderson
