#pragma once

#include <cmath>
#include <utility>

namespace cbpsk {

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
/// Stops once the bracket is narrower than `tolerance`. Returns (argmax, max).
template <typename F>
std::pair<double, double> golden_section_maximize(F&& f, double lo, double hi, double tolerance,
                                                  int max_iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iterations && (b - a) > tolerance; ++i) {
    if (fc >= fd) {
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
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace cbpsk
