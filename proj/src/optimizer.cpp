#include "cbpsk/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbpsk/golden_section.hpp"

namespace cbpsk {

namespace {

struct Scan {
  double best_length = 1.0;
  double best_value = 0.0;
  std::vector<TracePoint> trace;
  TracePoint left;
  TracePoint right;
};

// Log-spaced guard scan over [lo, hi] followed by golden-section refinement on ln L
// around the best grid point. The grid value wins if refinement does worse.
template <typename F>
Scan maximize_over_length(F&& objective, double lo, double hi, const OptimizerSettings& settings) {
  const double decades = std::log10(hi / lo);
  const int count = std::max(3, static_cast<int>(std::ceil(decades * settings.points_per_decade)) + 1);
  Scan scan;
  scan.trace.reserve(static_cast<std::size_t>(count));
  for (double length : log_grid(lo, hi, count)) scan.trace.push_back({length, objective(length)});

  const auto best = std::max_element(scan.trace.begin(), scan.trace.end(),
                                     [](const TracePoint& a, const TracePoint& b) { return a.bits < b.bits; });
  if (!(best->bits > 0.0)) throw NoOptimumError("objective is zero over the whole length range");
  const auto index = static_cast<std::size_t>(best - scan.trace.begin());
  scan.left = scan.trace[index == 0 ? 0 : index - 1];
  scan.right = scan.trace[std::min(index + 1, scan.trace.size() - 1)];

  const auto [log_length, value] = golden_section_maximize(
      [&](double u) { return objective(std::exp(u)); }, std::log(scan.left.length),
      std::log(scan.right.length), settings.relative_tolerance);
  if (value >= best->bits) {
    scan.best_length = std::exp(log_length);
    scan.best_value = value;
  } else {
    scan.best_length = best->length;
    scan.best_value = best->bits;
  }
  return scan;
}

void check_nbar(double nbar) {
  if (!(nbar > 0.0 && nbar < 0.1)) throw DomainError("optimisation requires 0 < nbar < 0.1");
}

}  // namespace

ChannelProbs channel_probs(ProbMethod method, const CodeConfig& config, const NoiseModel& noise) {
  switch (method) {
    case ProbMethod::bound: return bound_pq(config, noise);
    case ProbMethod::expansion: return second_order_pq(config, noise);
    case ProbMethod::monte_carlo: break;
  }
  throw DomainError("Monte Carlo probabilities are not available as a deterministic objective");
}

std::vector<LengthPoint> mi_vs_length(double nbar, const NoiseModel& noise, ProbMethod method,
                                      std::span<const double> lengths,
                                      const std::optional<McSettings>& mc) {
  std::vector<LengthPoint> out;
  out.reserve(lengths.size());
  for (double length : lengths) {
    const CodeConfig config{nbar, length};
    validate(config);
    ChannelProbs probs;
    if (method == ProbMethod::monte_carlo) {
      if (!mc) throw DomainError("Monte Carlo requires a sample budget and seed");
      const auto integral = static_cast<std::uint64_t>(length);
      if (static_cast<double>(integral) != length || !std::has_single_bit(integral)) {
        throw DomainError("Monte Carlo lengths must be powers of two");
      }
      const HadamardMatrix matrix(static_cast<unsigned>(std::countr_zero(integral)));
      probs = estimate_pq_mc(matrix, nbar, noise, mc->samples, mc->seed, mc->shards);
      if (length >= 2.0 && probs.p + (length - 1.0) * probs.q > 1.0) {
        probs.q = (1.0 - probs.p) / (length - 1.0);
        probs.normalization_capped = true;
      }
    } else {
      probs = channel_probs(method, config, noise);
    }
    out.push_back({length, mutual_info_gec(probs, length)});
  }
  return out;
}

OptimizationResult optimize_continuous(double nbar, const NoiseModel& noise, ProbMethod method,
                                       const OptimizerSettings& settings) {
  check_nbar(nbar);
  validate(noise);
  Scan scan = maximize_over_length(
      [&](double length) {
        const ChannelProbs probs = channel_probs(method, {nbar, length}, noise);
        return gec_bits_per_bin(probs.p, probs.q, length);
      },
      settings.min_length, settings.max_length_factor / nbar, settings);
  OptimizationResult out;
  out.method = method;
  out.best_length = scan.best_length;
  out.best_mi = mutual_info_gec(channel_probs(method, {nbar, scan.best_length}, noise), scan.best_length);
  out.trace = std::move(scan.trace);
  out.left_neighbor = scan.left;
  out.right_neighbor = scan.right;
  return out;
}

OptimizationResult optimize_noiseless_exact(double nbar, const OptimizerSettings& settings) {
  check_nbar(nbar);
  Scan scan = maximize_over_length([&](double length) { return noiseless_erasure_bits(nbar, length); },
                                   settings.min_length, settings.max_length_factor / nbar, settings);
  OptimizationResult out;
  out.method = ProbMethod::bound;
  out.best_length = scan.best_length;
  ChannelProbs exact;
  exact.p = -std::expm1(-scan.best_length * nbar);
  out.best_mi = mutual_info_gec(exact, scan.best_length);
  out.best_mi.bits_per_bin = scan.best_value;
  out.trace = std::move(scan.trace);
  out.left_neighbor = scan.left;
  out.right_neighbor = scan.right;
  return out;
}

OptimizationResult optimize_discrete(double nbar, const NoiseModel& noise, ProbMethod method,
                                     unsigned max_exponent) {
  if (max_exponent > 24) throw DomainError("max_exponent must not exceed 24");
  validate(CodeConfig{nbar, 1.0});
  validate(noise);
  OptimizationResult out;
  out.method = method;
  std::size_t best = 0;
  std::vector<MiResult> results;
  for (unsigned m = 0; m <= max_exponent; ++m) {
    const double length = std::ldexp(1.0, static_cast<int>(m));
    results.push_back(mutual_info_gec(channel_probs(method, {nbar, length}, noise), length));
    out.trace.push_back({length, results.back().bits_per_bin});
    if (results.back().bits_per_bin > results[best].bits_per_bin) best = m;
  }
  if (!(results[best].bits_per_bin > 0.0)) {
    throw NoOptimumError("mutual information is zero for every power-of-two length");
  }
  out.best_length = out.trace[best].length;
  out.best_mi = results[best];
  out.left_neighbor = out.trace[best == 0 ? 0 : best - 1];
  out.right_neighbor = out.trace[std::min<std::size_t>(best + 1, out.trace.size() - 1)];
  return out;
}

std::string_view to_string(RatioMethod method) {
  switch (method) {
    case RatioMethod::bound: return "bound";
    case RatioMethod::expansion: return "expansion";
    case RatioMethod::closed_form: return "closed";
  }
  return "unknown";
}

RatioMethod parse_ratio_method(std::string_view name) {
  if (name == "bound") return RatioMethod::bound;
  if (name == "expansion") return RatioMethod::expansion;
  if (name == "closed" || name == "closed_form") return RatioMethod::closed_form;
  throw DomainError("unknown ratio method '" + std::string(name) + "'");
}

std::vector<RatioPoint> ratio_curve(std::span<const double> nbar_grid, const NoiseModel& noise,
                                    RatioMethod method, const OptimizerSettings& settings) {
  std::vector<RatioPoint> out;
  out.reserve(nbar_grid.size());
  for (double nbar : nbar_grid) {
    check_nbar(nbar);
    RatioPoint point;
    point.nbar = nbar;
    point.mi_noiseless = optimize_noiseless_exact(nbar, settings).best_mi.bits_per_bin;
    try {
      switch (method) {
        case RatioMethod::bound:
          point.mi_sigma = optimize_continuous(nbar, noise, ProbMethod::bound, settings).best_mi.bits_per_bin;
          break;
        case RatioMethod::expansion:
          point.mi_sigma =
              optimize_continuous(nbar, noise, ProbMethod::expansion, settings).best_mi.bits_per_bin;
          break;
        case RatioMethod::closed_form:
          point.mi_sigma = closed_form_mi(nbar, noise).bits_per_bin;
          break;
      }
    } catch (const NoOptimumError&) {
      point.mi_sigma = 0.0;
    }
    point.ratio = point.mi_sigma / point.mi_noiseless;
    out.push_back(point);
  }
  return out;
}

bool is_unimodal(std::span<const double> values) {
  if (values.empty()) return true;
  const auto peak = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  for (std::size_t i = 1; i <= peak; ++i) {
    if (values[i] < values[i - 1]) return false;
  }
  for (std::size_t i = peak + 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) return false;
  }
  return true;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw DomainError("invalid log grid");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

}  // namespace cbpsk
