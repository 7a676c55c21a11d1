#pragma once

// Brute-force reference computations used only by the test suites. None of these
// go through the library code paths they are compared against.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

inline int sylvester_entry(std::size_t j, std::size_t l) {
  return (std::popcount(j & l) % 2) ? -1 : 1;
}

/// (1/sqrt(L)) H v by explicit O(L^2) matrix product.
inline Eigen::VectorXcd naive_circuit(const Eigen::VectorXcd& v) {
  const auto n = v.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(k) += static_cast<double>(sylvester_entry(static_cast<std::size_t>(k), static_cast<std::size_t>(j))) * v(j);
    }
  }
  return out / std::sqrt(static_cast<double>(n));
}

/// Mutual information per bin from the explicit L x (L + 1) transition matrix,
/// uniform input; the last output column is the erasure flag.
inline double channel_matrix_mi(double p, double q, int length) {
  const int outputs = length + 1;
  std::vector<double> w(static_cast<std::size_t>(length * outputs));
  const double erase = 1.0 - p - (length - 1) * q;
  for (int x = 0; x < length; ++x) {
    for (int y = 0; y < length; ++y) w[static_cast<std::size_t>(x * outputs + y)] = (x == y) ? p : q;
    w[static_cast<std::size_t>(x * outputs + length)] = erase;
  }
  std::vector<double> py(static_cast<std::size_t>(outputs), 0.0);
  for (int x = 0; x < length; ++x)
    for (int y = 0; y < outputs; ++y) py[static_cast<std::size_t>(y)] += w[static_cast<std::size_t>(x * outputs + y)] / length;
  double info = 0.0;
  for (int x = 0; x < length; ++x) {
    for (int y = 0; y < outputs; ++y) {
      const double t = w[static_cast<std::size_t>(x * outputs + y)];
      if (t > 0.0) info += t / length * std::log2(t / py[static_cast<std::size_t>(y)]);
    }
  }
  return info / length;
}

/// <|sum_j s_j e^{i phi_j}|^4> by direct O(L^4) enumeration of index quadruples,
/// using <e^{i n phi}> = e^{-n^2 sigma^2 / 2} for each distinct index.
inline double fourth_moment_enumerated(const std::vector<int>& signs, double sigma) {
  const int n = static_cast<int>(signs.size());
  double total = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const int idx[4] = {a, b, c, d};
          const int chg[4] = {+1, -1, +1, -1};
          double character = 1.0;
          for (int i = 0; i < 4; ++i) {
            bool first = true;
            for (int k = 0; k < i; ++k) first = first && idx[k] != idx[i];
            if (!first) continue;
            int net = 0;
            for (int k = 0; k < 4; ++k)
              if (idx[k] == idx[i]) net += chg[k];
            character *= std::exp(-0.5 * net * net * sigma * sigma);
          }
          total += signs[a] * signs[b] * signs[c] * signs[d] * character;
        }
  return total;
}

/// Probability that exactly the detectors in `mask` click, ports independent
/// with click probabilities 1 - e^{-mu_k}.
inline double click_pattern_probability(const Eigen::VectorXd& mu, unsigned mask) {
  double prob = 1.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    const double silent = std::exp(-mu(k));
    prob *= (mask & (1u << k)) ? 1.0 - silent : silent;
  }
  return prob;
}

}  // namespace oracle
