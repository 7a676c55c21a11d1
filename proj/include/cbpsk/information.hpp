#pragma once

#include <optional>
#include <string_view>

#include "cbpsk/phase_channel.hpp"

namespace cbpsk {

enum class MiMethod { exact, simplified, closed_form };

std::string_view to_string(MiMethod method);

/// Mutual information per time bin, in bits.
struct MiResult {
  double bits_per_bin = 0.0;
  double length = 1.0;
  MiMethod method = MiMethod::exact;
  std::optional<ChannelProbs> probs;
  bool outside_validity = false;
};

/// H(x) in bits with H(0) = H(1) = 0.
double binary_entropy(double x);

/// Mutual information per bin of the L-ary erasure channel that also scrambles
/// its input uniformly: correct output w.p. p, each wrong output w.p. q, erasure
/// otherwise. Accepts real L >= 1.
double gec_bits_per_bin(double p, double q, double length);

MiResult mutual_info_gec(const ChannelProbs& probs, double length);

/// Noiseless erasure channel: (1/L) [1 - e^{-L nbar}] log2 L.
double noiseless_erasure_bits(double nbar, double length);

/// (p / L) log2 L - nbar H(e^{-sigma^2}), floored at zero.
MiResult simplified_mi(double p, const CodeConfig& config, const NoiseModel& noise);

struct PieOptimum {
  double value = 0.0;     ///< Pi(x), bits per photon
  double best_length = 1.0;  ///< maximising PPM order M
};

/// Photon information efficiency of Poissonian PPM:
/// max over real M >= 1 of [1 - e^{-M x}] log2(M) / (M x), for 0 < x < 1.
PieOptimum pie_poisson_optimum(double x);
double pie_poisson(double x);

/// e^{-sigma^2} nbar Pi((2 - e^{-sigma^2}) nbar) - nbar H(e^{-sigma^2}), floored at zero.
MiResult closed_form_mi(double nbar, const NoiseModel& noise);

/// Individual-detection baseline (2 / ln 2) nbar.
double helstrom_linear(double nbar);

/// Leading-order Holevo quantity nbar log2(1 / nbar), 0 < nbar < 1.
double holevo_leading(double nbar);

}  // namespace cbpsk
