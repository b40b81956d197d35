#pragma once

// One-dimensional root finding and minimization used by the asymptotic solvers.

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ddc/error.hpp"

namespace ddc::numeric {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Safeguarded secant/bisection (Brent) on a sign-changing bracket [lo, hi].
/// Stops when the bracket is narrower than `xtol` (absolute) or |f| <= ftol.
template <class F>
RootResult find_root(F&& f, double lo, double hi, double xtol = 1e-14, double ftol = 0.0,
                     int max_iter = 500) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  if ((fa > 0) == (fb > 0)) {
    throw NoRoot("find_root: f does not change sign on [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 1; it <= max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || std::abs(fb) <= ftol) return {b, fb, it};
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
    fb = f(b);
  }
  return {b, fb, max_iter};
}

/// Grows [lo, hi] geometrically around a monotone function until the sign changes.
/// `increasing` tells which side to move: for an increasing f we need f(lo) < 0 < f(hi).
template <class F>
std::pair<double, double> expand_bracket(F&& f, double lo, double hi, bool increasing,
                                         double limit = 1e8) {
  const double sgn = increasing ? 1.0 : -1.0;
  double width = hi - lo;
  while (sgn * f(lo) > 0) {
    hi = lo;
    width *= 2.0;
    lo -= width;
    if (lo < -limit) throw BracketFailure("expand_bracket: no sign change below");
  }
  width = hi - lo;
  while (sgn * f(hi) < 0) {
    lo = hi;
    width *= 2.0;
    hi += width;
    if (hi > limit) throw BracketFailure("expand_bracket: no sign change above");
  }
  return {lo, hi};
}

struct MinResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Golden-section search for a unimodal f on [a, b].
template <class F>
MinResult golden_section(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 400) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (std::abs(b - a) > xtol && it < max_iter) {
    ++it;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? MinResult{c, fc, it} : MinResult{d, fd, it};
}

/// Minimizes a convex coercive f over the real line: the search starts on [-1, 1],
/// each side is doubled while f keeps decreasing, then golden-section refines.
template <class F>
MinResult minimize_convex(F&& f, double xtol = 1e-10, double limit = 1e6) {
  double hi = 1.0;
  double f_hi = f(hi);
  for (double next = 2.0 * hi, f_next = f(next); f_next < f_hi; next *= 2.0, f_next = f(next)) {
    if (next > limit) throw BracketFailure("minimize_convex: objective not coercive above");
    hi = next;
    f_hi = f_next;
  }
  double lo = -1.0;
  double f_lo = f(lo);
  for (double next = 2.0 * lo, f_next = f(next); f_next < f_lo; next *= 2.0, f_next = f(next)) {
    if (next < -limit) throw BracketFailure("minimize_convex: objective not coercive below");
    lo = next;
    f_lo = f_next;
  }
  // The minimizer lies within one doubling of the last improving points.
  return golden_section(f, 2.0 * lo, 2.0 * hi, xtol);
}

}  // namespace ddc::numeric
