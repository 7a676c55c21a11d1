#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cbpsk/information.hpp"

namespace cbpsk {

struct McSettings {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned shards = 1;
};

/// p and q for a (possibly non-integer) length from the bound pair or the
/// second-order expansion. Monte Carlo is rejected here; see mi_vs_length.
ChannelProbs channel_probs(ProbMethod method, const CodeConfig& config, const NoiseModel& noise);

struct LengthPoint {
  double length = 1.0;
  MiResult mi;
};

/// I(L) at each requested length. Monte Carlo needs `mc` and power-of-two lengths.
std::vector<LengthPoint> mi_vs_length(double nbar, const NoiseModel& noise, ProbMethod method,
                                      std::span<const double> lengths,
                                      const std::optional<McSettings>& mc = std::nullopt);

struct TracePoint {
  double length = 1.0;
  double bits = 0.0;
};

struct OptimizationResult {
  double best_length = 1.0;
  MiResult best_mi;
  ProbMethod method = ProbMethod::bound;
  /// Coarse-grid samples in increasing L; the refined optimum is not included.
  std::vector<TracePoint> trace;
  /// Grid neighbours bracketing the optimum (local-maximum certificate).
  TracePoint left_neighbor;
  TracePoint right_neighbor;
};

struct OptimizerSettings {
  int points_per_decade = 16;
  double relative_tolerance = 1e-6;
  double min_length = 2.0;
  /// Upper end of the scan is max_length_factor / nbar.
  double max_length_factor = 10.0;
};

OptimizationResult optimize_continuous(double nbar, const NoiseModel& noise, ProbMethod method,
                                       const OptimizerSettings& settings = {});

/// Reference I_0: the exact noiseless erasure rate optimised over continuous L.
OptimizationResult optimize_noiseless_exact(double nbar, const OptimizerSettings& settings = {});

OptimizationResult optimize_discrete(double nbar, const NoiseModel& noise, ProbMethod method,
                                     unsigned max_exponent = 24);

enum class RatioMethod { bound, expansion, closed_form };

std::string_view to_string(RatioMethod method);
RatioMethod parse_ratio_method(std::string_view name);

struct RatioPoint {
  double nbar = 0.0;
  double mi_sigma = 0.0;
  double mi_noiseless = 0.0;
  double ratio = 0.0;
};

std::vector<RatioPoint> ratio_curve(std::span<const double> nbar_grid, const NoiseModel& noise,
                                    RatioMethod method, const OptimizerSettings& settings = {});

/// True if the sequence rises (weakly) to a single peak and then falls (weakly).
bool is_unimodal(std::span<const double> values);

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace cbpsk
