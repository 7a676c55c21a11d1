#include "cbpsk/information.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace cbpsk {

namespace {

// x log2 x with the 0 log 0 = 0 convention.
double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

std::string_view to_string(MiMethod method) {
  switch (method) {
    case MiMethod::exact: return "exact";
    case MiMethod::simplified: return "simplified";
    case MiMethod::closed_form: return "closed_form";
  }
  return "unknown";
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary entropy argument outside [0, 1]");
  return -xlog2x(x) - xlog2x(1.0 - x);
}

double gec_bits_per_bin(double p, double q, double length) {
  constexpr double kSlack = 1e-12;
  if (!(length >= 1.0)) throw DomainError("sequence length must be at least 1");
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
    throw DomainError("probabilities must lie in [0, 1]");
  }
  const double wrong = (length - 1.0) * q;
  const double clicked = p + wrong;
  if (clicked > 1.0 + kSlack) throw DomainError("p + (L - 1) q exceeds 1");
  if (clicked == 0.0 || length == 1.0) return 0.0;

  const double first = p / length * std::log2(length);
  const double second = clicked / length * binary_entropy(std::min(1.0, p / clicked));
  // log2(1 - 1/L) < 0, so the third term adds information.
  const double third = q * (1.0 - 1.0 / length) * std::log1p(-1.0 / length) / std::numbers::ln2;
  return first - second - third;
}

MiResult mutual_info_gec(const ChannelProbs& probs, double length) {
  MiResult out;
  out.bits_per_bin = gec_bits_per_bin(probs.p, probs.q, length);
  out.length = length;
  out.method = MiMethod::exact;
  out.probs = probs;
  out.outside_validity = probs.outside_validity;
  return out;
}

double noiseless_erasure_bits(double nbar, double length) {
  if (!(length >= 1.0)) throw DomainError("sequence length must be at least 1");
  if (!(nbar >= 0.0)) throw DomainError("mean photon number must be nonnegative");
  return -std::expm1(-length * nbar) * std::log2(length) / length;
}

MiResult simplified_mi(double p, const CodeConfig& config, const NoiseModel& noise) {
  validate(config);
  validate(noise);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p outside [0, 1]");
  const double coherence = std::exp(-noise.sigma * noise.sigma);
  const double value = p / config.length * std::log2(config.length) -
                       config.nbar * binary_entropy(coherence);
  MiResult out;
  out.bits_per_bin = std::max(0.0, value);
  out.length = config.length;
  out.method = MiMethod::simplified;
  out.outside_validity = config.length < 8.0;
  return out;
}

PieOptimum pie_poisson_optimum(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("Pi(x) requires 0 < x < 1");
  // Maximise over u = ln M on [0, ln(50 / x)], beyond which the rate is negligible.
  auto rate = [x](double u) {
    const double m = std::exp(u);
    return -std::expm1(-m * x) * (u / std::numbers::ln2) / (m * x);
  };
  const double upper = std::log(50.0 / x);
  // Bracket with a coarse scan, then polish with Brent.
  constexpr int kScan = 400;
  int best = 0;
  double best_value = -1.0;
  for (int i = 0; i <= kScan; ++i) {
    const double v = rate(upper * i / kScan);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = upper * std::max(0, best - 1) / kScan;
  const double hi = upper * std::min(kScan, best + 1) / kScan;
  const auto [u, neg] = boost::math::tools::brent_find_minima(
      [&](double v) { return -rate(v); }, lo, hi, std::numeric_limits<double>::digits / 2);
  PieOptimum out;
  out.value = std::max(-neg, best_value);
  out.best_length = -neg >= best_value ? std::exp(u) : std::exp(upper * best / kScan);
  return out;
}

double pie_poisson(double x) { return pie_poisson_optimum(x).value; }

MiResult closed_form_mi(double nbar, const NoiseModel& noise) {
  validate(noise);
  if (!(nbar > 0.0 && nbar < 0.1)) throw DomainError("closed form requires 0 < nbar < 0.1");
  const double coherence = std::exp(-noise.sigma * noise.sigma);
  const PieOptimum pie = pie_poisson_optimum((2.0 - coherence) * nbar);
  const double value = coherence * nbar * pie.value - nbar * binary_entropy(coherence);
  MiResult out;
  out.bits_per_bin = std::max(0.0, value);
  // PPM order that maximises Pi at the effective argument.
  out.length = pie.best_length;
  out.method = MiMethod::closed_form;
  return out;
}

double helstrom_linear(double nbar) {
  if (!(nbar >= 0.0)) throw DomainError("mean photon number must be nonnegative");
  return 2.0 / std::numbers::ln2 * nbar;
}

double holevo_leading(double nbar) {
  if (!(nbar > 0.0 && nbar < 1.0)) throw DomainError("holevo_leading requires 0 < nbar < 1");
  return -nbar * std::log2(nbar);
}

}  // namespace cbpsk
