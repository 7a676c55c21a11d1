#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "cbpsk/hadamard.hpp"

namespace cbpsk {

/// Independent zero-mean Gaussian phase on every symbol, std. dev. in radians.
struct NoiseModel {
  double sigma = 0.0;
};

void validate(const NoiseModel& noise);

using PhaseRealization = Eigen::VectorXd;
using IntensityVector = Eigen::VectorXd;

enum class ProbMethod { bound, expansion, monte_carlo };

std::string_view to_string(ProbMethod method);
ProbMethod parse_prob_method(std::string_view name);

/// Correct-word probability p and per-wrong-port probability q.
struct ChannelProbs {
  double p = 0.0;
  double q = 0.0;
  ProbMethod method = ProbMethod::bound;
  double p_stderr = 0.0;
  double q_stderr = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// Expansion used outside L*nbar < 0.5, or produced a negative value that was clamped.
  bool outside_validity = false;
  /// q was lowered to (1 - p) / (L - 1) so that p + (L - 1) q <= 1.
  bool normalization_capped = false;
};

/// Expansion validity threshold on the sequence energy L * nbar.
inline constexpr double kExpansionValidityLimit = 0.5;

PhaseRealization sample_phases(const NoiseModel& noise, std::size_t length, std::mt19937_64& rng);

/// mu_k = (nbar / L) |sum_j e^{i phi_j} h_kj h_jl|^2 for every output port k.
IntensityVector output_intensities(const HadamardMatrix& matrix, std::size_t word,
                                   const CodeConfig& config, const PhaseRealization& phases);

/// Probability that only detector `port` clicks, for one phase realization:
/// (e^{mu_k} - 1) e^{-sum_j mu_j}.
double exclusive_click_probability(const IntensityVector& intensities, std::size_t port);

/// Phase-averaged <mu_k^(l)>; `diagonal` selects k == l.
double mean_intensity_analytic(const CodeConfig& config, const NoiseModel& noise, bool diagonal);

/// <|sum_j s_j e^{i phi_j}|^4> for a sign pattern with `plus_fraction * L` entries
/// equal to +1 and the rest -1, as an exact coincidence-pattern sum over the 15
/// ways the four summation indices can coincide. Valid for real L >= 1.
double fourth_moment(double length, double plus_fraction, double sigma);

/// Second moment <mu^2> of one output port (diagonal or off-diagonal).
double second_moment_intensity(const CodeConfig& config, const NoiseModel& noise, bool diagonal);

ChannelProbs second_order_pq(const CodeConfig& config, const NoiseModel& noise);

double p_lower_bound(const CodeConfig& config, const NoiseModel& noise);
double q_upper_bound(const CodeConfig& config, const NoiseModel& noise);

/// Bound pair assembled for use in the mutual information; q is capped at
/// (1 - p) / (L - 1), which remains an upper bound on the true q.
ChannelProbs bound_pq(const CodeConfig& config, const NoiseModel& noise);

// ---------------------------------------------------------------------------
// Monte Carlo estimation of p and q.
//
// Samples are grouped in fixed blocks of kMcBlockSize; each block draws from
// its own generator seeded from (seed, block index). A shard owns a contiguous
// range of blocks, and merging always combines block statistics in block order,
// so the merged estimate is bit-identical for any shard count.

inline constexpr std::uint64_t kMcBlockSize = 256;

struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  void merge(const RunningStats& other);
  double variance() const;
  double stderr_of_mean() const;
};

struct McBlockStats {
  RunningStats p;
  RunningStats q;
};

struct McShard {
  std::uint64_t first_block = 0;
  std::vector<McBlockStats> blocks;
};

McShard run_mc_shard(const HadamardMatrix& matrix, double nbar, const NoiseModel& noise,
                     std::uint64_t samples, std::uint64_t seed, unsigned shard_index,
                     unsigned shard_count);

ChannelProbs merge_mc_shards(std::span<const McShard> shards, std::uint64_t samples,
                             std::uint64_t seed);

/// Average of the exclusive click probability over sampled phases for word 0:
/// p at port 0, q pooled over the L - 1 other ports. Shards run on separate threads.
ChannelProbs estimate_pq_mc(const HadamardMatrix& matrix, double nbar, const NoiseModel& noise,
                            std::uint64_t samples, std::uint64_t seed, unsigned shards = 1);

struct PortClickEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd stderr_;
};

/// Per-port click probabilities for an arbitrary word, without pooling.
PortClickEstimate estimate_port_clicks_mc(const HadamardMatrix& matrix, std::size_t word,
                                          double nbar, const NoiseModel& noise,
                                          std::uint64_t samples, std::uint64_t seed);

}  // namespace cbpsk
