#include "cbpsk/hadamard.hpp"

#include <cmath>

namespace cbpsk {

void validate(const CodeConfig& config) {
  if (!(config.nbar >= 0.0) || !std::isfinite(config.nbar)) {
    throw DomainError("mean photon number must be finite and nonnegative");
  }
  if (!(config.length >= 1.0) || !std::isfinite(config.length)) {
    throw DomainError("sequence length must be finite and at least 1");
  }
}

HadamardMatrix::HadamardMatrix(unsigned order, unsigned max_order) : order_(order) {
  if (order > max_order) {
    throw SizeError("Hadamard order " + std::to_string(order) + " exceeds cap " +
                    std::to_string(max_order));
  }
}

SignMatrix HadamardMatrix::dense() const {
  if (order_ > kMaxDenseOrder) {
    throw SizeError("refusing to materialise a dense Hadamard matrix of order " +
                    std::to_string(order_));
  }
  const auto n = static_cast<Eigen::Index>(dim());
  SignMatrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l < n; ++l) {
      out(j, l) = static_cast<std::int8_t>(entry(static_cast<std::size_t>(j), static_cast<std::size_t>(l)));
    }
  }
  return out;
}

HadamardMatrix sylvester(unsigned order, unsigned max_order) {
  return HadamardMatrix(order, max_order);
}

bool is_hadamard(const SignMatrix& entries) {
  const Eigen::Index n = entries.rows();
  if (n == 0 || entries.cols() != n) return false;
  if (!std::has_single_bit(static_cast<std::size_t>(n))) return false;
  if ((entries.array() != 1 && entries.array() != -1).any()) return false;
  if (entries != entries.transpose()) return false;
  const Eigen::MatrixXi wide = entries.cast<int>();
  const Eigen::MatrixXi gram = wide * wide.transpose();
  return gram == Eigen::MatrixXi::Identity(n, n) * static_cast<int>(n);
}

AmplitudeVector encode_word(const HadamardMatrix& matrix, std::size_t word, double nbar) {
  if (word >= matrix.dim()) {
    throw IndexError("word index " + std::to_string(word) + " out of range for L = " +
                     std::to_string(matrix.dim()));
  }
  if (!(nbar >= 0.0)) throw DomainError("mean photon number must be nonnegative");
  const double amplitude = std::sqrt(nbar);
  const auto n = static_cast<Eigen::Index>(matrix.dim());
  AmplitudeVector out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j) = amplitude * matrix.entry(static_cast<std::size_t>(j), word);
  }
  return out;
}

}  // namespace cbpsk
