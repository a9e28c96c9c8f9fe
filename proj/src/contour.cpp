#include "anderson/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace anderson {

ContourPiece ContourPiece::segment(cplx from, cplx to) {
  ContourPiece p;
  p.from_ = from;
  p.to_ = to;
  return p;
}

ContourPiece ContourPiece::arc(cplx center, double radius, double theta0, double theta1) {
  ContourPiece p;
  p.arc_ = true;
  p.center_ = center;
  p.radius_ = radius;
  p.theta0_ = theta0;
  p.theta1_ = theta1;
  return p;
}

cplx ContourPiece::point(double t) const {
  if (!arc_) return from_ + (to_ - from_) * t;
  return center_ + std::polar(radius_, theta0_ + (theta1_ - theta0_) * t);
}

cplx ContourPiece::derivative(double t) const {
  if (!arc_) return to_ - from_;
  const double theta = theta0_ + (theta1_ - theta0_) * t;
  return cplx(0.0, theta1_ - theta0_) * std::polar(radius_, theta);
}

double ContourPiece::length() const {
  return arc_ ? radius_ * std::abs(theta1_ - theta0_) : std::abs(to_ - from_);
}

double ContourPiece::distance_to(cplx z) const {
  if (!arc_) {
    const cplx d = to_ - from_;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(z - from_);
    const double t = std::clamp(((z - from_) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(z - (from_ + d * t));
  }
  const double lo = std::min(theta0_, theta1_);
  const double hi = std::max(theta0_, theta1_);
  const cplx rel = z - center_;
  double phi = std::arg(rel);
  const double two_pi = 2.0 * std::numbers::pi;
  while (phi < lo) phi += two_pi;
  while (phi >= lo + two_pi) phi -= two_pi;
  if (phi <= hi) return std::abs(std::abs(rel) - radius_);
  return std::min(std::abs(z - start()), std::abs(z - finish()));
}

double Contour::length() const {
  double s = 0.0;
  for (const auto& p : pieces) s += p.length();
  return s;
}

double Contour::distance_to(cplx z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) d = std::min(d, p.distance_to(z));
  return d;
}

bool Contour::contiguous(double tol) const {
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (std::abs(pieces[i].start() - pieces[i - 1].finish()) > tol) return false;
  return true;
}

}  // namespace anderson
