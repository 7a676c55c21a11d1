#include "cbpsk/phase_channel.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

namespace cbpsk {

namespace {

constexpr int kMaxDegree = 4;
constexpr int kMaxExponent = 8;

using Poly = std::array<double, kMaxDegree + 1>;  // coefficients of L^0 .. L^4

Poly poly_mul_linear(const Poly& poly, double slope, double offset) {
  // poly * (slope * L + offset)
  Poly out{};
  for (int d = 0; d <= kMaxDegree; ++d) {
    out[d] += poly[d] * offset;
    if (d + 1 <= kMaxDegree) out[d + 1] += poly[d] * slope;
  }
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out{};
  for (int i = 0; i <= kMaxDegree; ++i) {
    for (int j = 0; i + j <= kMaxDegree; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// (fraction * L)(fraction * L - 1)...(fraction * L - r + 1)
Poly falling_factorial(double fraction, int r) {
  Poly out{};
  out[0] = 1.0;
  for (int i = 0; i < r; ++i) out = poly_mul_linear(out, fraction, -static_cast<double>(i));
  return out;
}

struct PatternTable {
  // coefficient[e][d]: contribution of L^d multiplying |<e^{i phi}>|^{2e/2} = x^e,
  // where x = e^{-sigma^2 / 2}.
  std::array<Poly, kMaxExponent + 1> coefficient{};
};

// Positions 0 and 2 carry e^{+i phi}, positions 1 and 3 carry e^{-i phi}.
PatternTable build_pattern_table(double plus_fraction) {
  PatternTable table;
  constexpr std::array<int, 4> charge = {+1, -1, +1, -1};
  std::array<int, 4> block_of{};
  // Restricted growth strings enumerate the 15 set partitions of 4 positions.
  auto visit = [&](auto&& self, int pos, int blocks) -> void {
    if (pos == 4) {
      std::array<int, 4> net{};
      std::array<int, 4> size{};
      for (int i = 0; i < 4; ++i) {
        net[block_of[i]] += charge[i];
        ++size[block_of[i]];
      }
      int exponent = 0;
      for (int b = 0; b < blocks; ++b) exponent += net[b] * net[b];
      // Each block gets a distinct index; it is either a + or a - position of s.
      for (unsigned mask = 0; mask < (1u << blocks); ++mask) {
        int n_minus = 0;
        int sign = 1;
        for (int b = 0; b < blocks; ++b) {
          if (mask & (1u << b)) {
            ++n_minus;
            if (size[b] % 2 == 1) sign = -sign;
          }
        }
        const Poly count = poly_mul(falling_factorial(plus_fraction, blocks - n_minus),
                                    falling_factorial(1.0 - plus_fraction, n_minus));
        for (int d = 0; d <= kMaxDegree; ++d) table.coefficient[exponent][d] += sign * count[d];
      }
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      block_of[pos] = b;
      self(self, pos + 1, std::max(blocks, b + 1));
    }
  };
  visit(visit, 0, 0);
  return table;
}

const PatternTable& pattern_table(double plus_fraction) {
  static const PatternTable diagonal = build_pattern_table(1.0);
  static const PatternTable balanced = build_pattern_table(0.5);
  if (plus_fraction == 1.0) return diagonal;
  if (plus_fraction == 0.5) return balanced;
  thread_local PatternTable other;
  thread_local double other_fraction = -1.0;
  if (other_fraction != plus_fraction) {
    other = build_pattern_table(plus_fraction);
    other_fraction = plus_fraction;
  }
  return other;
}

// Coefficients c_d of L^d in <|S|^4>. Written as sum_e a_de (x^e - 1) + sum_e a_de
// so the sigma = 0 value is an exact dyadic sum.
Poly fourth_moment_coefficients(double plus_fraction, double sigma) {
  const PatternTable& table = pattern_table(plus_fraction);
  Poly out{};
  for (int e = 0; e <= kMaxExponent; ++e) {
    const double shift = std::expm1(-0.5 * e * sigma * sigma);
    for (int d = 0; d <= kMaxDegree; ++d) {
      out[d] += table.coefficient[e][d] * shift;
    }
  }
  for (int d = 0; d <= kMaxDegree; ++d) {
    double exact = 0.0;
    for (int e = 0; e <= kMaxExponent; ++e) exact += table.coefficient[e][d];
    out[d] += exact;
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 block_generator(std::uint64_t seed, std::uint64_t block) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(block + 0x632be59bd9b4e019ULL)));
}

// Workspace shared by the per-sample evaluation; word 0 only.
struct WordZeroSampler {
  std::size_t length;
  double amplitude;
  double energy;
  std::normal_distribution<double> gauss;
  AmplitudeVector field;

  WordZeroSampler(std::size_t l, double nbar, double sigma)
      : length(l),
        amplitude(std::sqrt(nbar / static_cast<double>(l))),
        energy(static_cast<double>(l) * nbar),
        gauss(0.0, sigma > 0.0 ? sigma : 1.0),
        field(static_cast<Eigen::Index>(l)) {}

  // Fills `field` with output amplitudes for one phase realization; the 1/sqrt(L)
  // circuit normalisation is folded into `amplitude`.
  void draw(std::mt19937_64& rng, bool noisy) {
    for (Eigen::Index j = 0; j < field.size(); ++j) {
      if (noisy) {
        const double phi = gauss(rng);
        field(j) = std::complex<double>(amplitude * std::cos(phi), amplitude * std::sin(phi));
      } else {
        field(j) = amplitude;
      }
    }
    fwht_inplace(field);
  }
};

}  // namespace

void validate(const NoiseModel& noise) {
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw DomainError("phase noise sigma must be finite and nonnegative");
  }
}

std::string_view to_string(ProbMethod method) {
  switch (method) {
    case ProbMethod::bound: return "bound";
    case ProbMethod::expansion: return "expansion";
    case ProbMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

ProbMethod parse_prob_method(std::string_view name) {
  if (name == "bound") return ProbMethod::bound;
  if (name == "expansion") return ProbMethod::expansion;
  if (name == "monte_carlo" || name == "mc") return ProbMethod::monte_carlo;
  throw DomainError("unknown probability method '" + std::string(name) + "'");
}

PhaseRealization sample_phases(const NoiseModel& noise, std::size_t length, std::mt19937_64& rng) {
  validate(noise);
  PhaseRealization phases = PhaseRealization::Zero(static_cast<Eigen::Index>(length));
  if (noise.sigma == 0.0) return phases;
  std::normal_distribution<double> gauss(0.0, noise.sigma);
  for (Eigen::Index j = 0; j < phases.size(); ++j) phases(j) = gauss(rng);
  return phases;
}

IntensityVector output_intensities(const HadamardMatrix& matrix, std::size_t word,
                                   const CodeConfig& config, const PhaseRealization& phases) {
  validate(config);
  if (static_cast<std::size_t>(phases.size()) != matrix.dim()) {
    throw DimensionError("phase realization length does not match the matrix dimension");
  }
  if (config.length != static_cast<double>(matrix.dim())) {
    throw DimensionError("code length does not match the matrix dimension");
  }
  AmplitudeVector field = encode_word(matrix, word, config.nbar);
  for (Eigen::Index j = 0; j < field.size(); ++j) {
    field(j) *= std::polar(1.0, phases(j));
  }
  return circuit_transform(matrix, field).cwiseAbs2();
}

double exclusive_click_probability(const IntensityVector& intensities, std::size_t port) {
  if (port >= static_cast<std::size_t>(intensities.size())) {
    throw IndexError("port index " + std::to_string(port) + " out of range");
  }
  const double total = intensities.sum();
  const double value = std::expm1(intensities(static_cast<Eigen::Index>(port))) * std::exp(-total);
  return std::clamp(value, 0.0, 1.0);
}

double mean_intensity_analytic(const CodeConfig& config, const NoiseModel& noise, bool diagonal) {
  validate(config);
  validate(noise);
  const double decay = std::exp(-noise.sigma * noise.sigma);
  if (diagonal) return config.nbar * (1.0 + (config.length - 1.0) * decay);
  return -config.nbar * std::expm1(-noise.sigma * noise.sigma);
}

double fourth_moment(double length, double plus_fraction, double sigma) {
  const Poly c = fourth_moment_coefficients(plus_fraction, sigma);
  double value = 0.0;
  for (int d = kMaxDegree; d >= 0; --d) value = value * length + c[d];
  return value;
}

double second_moment_intensity(const CodeConfig& config, const NoiseModel& noise, bool diagonal) {
  validate(config);
  validate(noise);
  if (!diagonal && config.length < 2.0) return 0.0;
  // (nbar / L)^2 <|S|^4> = nbar^2 sum_d c_d L^(d - 2)
  const Poly c = fourth_moment_coefficients(diagonal ? 1.0 : 0.5, noise.sigma);
  const double inv = 1.0 / config.length;
  double value = c[0] * inv * inv + c[1] * inv + c[2] + c[3] * config.length +
                 c[4] * config.length * config.length;
  return config.nbar * config.nbar * value;
}

ChannelProbs second_order_pq(const CodeConfig& config, const NoiseModel& noise) {
  validate(config);
  validate(noise);
  const double energy = config.length * config.nbar;
  // e^{-E}(<e^mu> - 1) truncated at second order in nbar:
  //   <mu> + <mu^2>/2 - E <mu>
  auto truncated = [&](bool diagonal) {
    const double mu = mean_intensity_analytic(config, noise, diagonal);
    const double mu2 = second_moment_intensity(config, noise, diagonal);
    return mu + 0.5 * mu2 - energy * mu;
  };
  ChannelProbs out;
  out.method = ProbMethod::expansion;
  const double p = truncated(true);
  const double q = config.length >= 2.0 ? truncated(false) : 0.0;
  out.outside_validity = energy >= kExpansionValidityLimit || p < 0.0 || q < 0.0;
  out.p = std::clamp(p, 0.0, 1.0);
  out.q = std::clamp(q, 0.0, 1.0);
  if (config.length >= 2.0 && out.p + (config.length - 1.0) * out.q > 1.0) {
    out.q = (1.0 - out.p) / (config.length - 1.0);
    out.normalization_capped = true;
    out.outside_validity = true;
  }
  return out;
}

double p_lower_bound(const CodeConfig& config, const NoiseModel& noise) {
  validate(config);
  validate(noise);
  const double leak = -std::expm1(-noise.sigma * noise.sigma);
  const double energy = config.length * config.nbar;
  // exp[-(L-1) nbar leak] - exp(-L nbar); the factored form avoids cancellation
  // when the two exponents are close.
  const double gap = energy - (config.length - 1.0) * config.nbar * leak;
  const double value = gap < 1.0 ? std::exp(-energy) * std::expm1(gap)
                                 : std::exp(gap - energy) - std::exp(-energy);
  return std::clamp(value, 0.0, 1.0);
}

double q_upper_bound(const CodeConfig& config, const NoiseModel& noise) {
  validate(config);
  validate(noise);
  return -config.nbar * std::expm1(-noise.sigma * noise.sigma);
}

ChannelProbs bound_pq(const CodeConfig& config, const NoiseModel& noise) {
  ChannelProbs out;
  out.method = ProbMethod::bound;
  out.p = p_lower_bound(config, noise);
  if (config.length < 2.0) return out;
  out.q = std::min(q_upper_bound(config, noise), 1.0);
  const double cap = (1.0 - out.p) / (config.length - 1.0);
  if (out.q > cap) {
    out.q = cap;
    out.normalization_capped = true;
  }
  return out;
}

void RunningStats::push(double x) {
  count += 1.0;
  const double delta = x - mean;
  mean += delta / count;
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0.0) return;
  if (count == 0.0) {
    *this = other;
    return;
  }
  const double total = count + other.count;
  const double delta = other.mean - mean;
  mean += delta * other.count / total;
  m2 += other.m2 + delta * delta * count * other.count / total;
  count = total;
}

double RunningStats::variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }

double RunningStats::stderr_of_mean() const {
  return count > 0.0 ? std::sqrt(variance() / count) : 0.0;
}

McShard run_mc_shard(const HadamardMatrix& matrix, double nbar, const NoiseModel& noise,
                     std::uint64_t samples, std::uint64_t seed, unsigned shard_index,
                     unsigned shard_count) {
  validate(noise);
  if (!(nbar >= 0.0)) throw DomainError("mean photon number must be nonnegative");
  if (shard_count == 0 || shard_index >= shard_count) {
    throw DomainError("invalid shard index/count");
  }
  const std::uint64_t total_blocks = (samples + kMcBlockSize - 1) / kMcBlockSize;
  const std::uint64_t first = total_blocks * shard_index / shard_count;
  const std::uint64_t last = total_blocks * (shard_index + 1) / shard_count;

  const std::size_t length = matrix.dim();
  WordZeroSampler sampler(length, nbar, noise.sigma);
  const bool noisy = noise.sigma > 0.0;
  const double damping = std::exp(-sampler.energy);
  const double off_ports = static_cast<double>(length - 1);

  McShard shard;
  shard.first_block = first;
  shard.blocks.reserve(last - first);
  for (std::uint64_t block = first; block < last; ++block) {
    std::mt19937_64 rng = block_generator(seed, block);
    const std::uint64_t begin = block * kMcBlockSize;
    const std::uint64_t count = std::min(kMcBlockSize, samples - begin);
    McBlockStats stats;
    for (std::uint64_t s = 0; s < count; ++s) {
      sampler.draw(rng, noisy);
      stats.p.push(std::expm1(std::norm(sampler.field(0))) * damping);
      double wrong = 0.0;
      for (Eigen::Index k = 1; k < sampler.field.size(); ++k) {
        wrong += std::expm1(std::norm(sampler.field(k)));
      }
      stats.q.push(length > 1 ? wrong / off_ports * damping : 0.0);
    }
    shard.blocks.push_back(stats);
  }
  return shard;
}

ChannelProbs merge_mc_shards(std::span<const McShard> shards, std::uint64_t samples,
                             std::uint64_t seed) {
  std::vector<const McShard*> ordered;
  for (const auto& shard : shards) ordered.push_back(&shard);
  std::sort(ordered.begin(), ordered.end(),
            [](const McShard* a, const McShard* b) { return a->first_block < b->first_block; });
  RunningStats p;
  RunningStats q;
  for (const McShard* shard : ordered) {
    for (const auto& block : shard->blocks) {
      p.merge(block.p);
      q.merge(block.q);
    }
  }
  ChannelProbs out;
  out.method = ProbMethod::monte_carlo;
  out.p = p.mean;
  out.q = q.mean;
  out.p_stderr = p.stderr_of_mean();
  out.q_stderr = q.stderr_of_mean();
  out.samples = samples;
  out.seed = seed;
  return out;
}

ChannelProbs estimate_pq_mc(const HadamardMatrix& matrix, double nbar, const NoiseModel& noise,
                            std::uint64_t samples, std::uint64_t seed, unsigned shards) {
  if (samples == 0) throw DomainError("Monte Carlo needs at least one sample");
  if (shards == 0) shards = 1;
  std::vector<McShard> results(shards);
  if (shards == 1) {
    results[0] = run_mc_shard(matrix, nbar, noise, samples, seed, 0, 1);
  } else {
    std::vector<std::future<McShard>> pending;
    for (unsigned s = 0; s < shards; ++s) {
      pending.push_back(std::async(std::launch::async, [&, s] {
        return run_mc_shard(matrix, nbar, noise, samples, seed, s, shards);
      }));
    }
    for (unsigned s = 0; s < shards; ++s) results[s] = pending[s].get();
  }
  return merge_mc_shards(results, samples, seed);
}

PortClickEstimate estimate_port_clicks_mc(const HadamardMatrix& matrix, std::size_t word,
                                          double nbar, const NoiseModel& noise,
                                          std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("Monte Carlo needs at least one sample");
  const CodeConfig config{nbar, static_cast<double>(matrix.dim())};
  const auto n = static_cast<Eigen::Index>(matrix.dim());
  std::vector<RunningStats> ports(static_cast<std::size_t>(n));
  std::mt19937_64 rng(splitmix64(seed));
  for (std::uint64_t s = 0; s < samples; ++s) {
    const IntensityVector mu =
        output_intensities(matrix, word, config, sample_phases(noise, matrix.dim(), rng));
    for (Eigen::Index k = 0; k < n; ++k) {
      ports[static_cast<std::size_t>(k)].push(exclusive_click_probability(mu, static_cast<std::size_t>(k)));
    }
  }
  PortClickEstimate out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.mean(k) = ports[static_cast<std::size_t>(k)].mean;
    out.stderr_(k) = ports[static_cast<std::size_t>(k)].stderr_of_mean();
  }
  return out;
}

}  // namespace cbpsk
