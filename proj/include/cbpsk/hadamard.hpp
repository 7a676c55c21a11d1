#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>

#include "cbpsk/errors.hpp"

namespace cbpsk {

using AmplitudeVector = Eigen::VectorXcd;
using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Mean photon number per time bin and codeword length.
///
/// `length` is real-valued so the optimizer can treat L as continuous;
/// anything that touches an actual matrix requires an integral power of two.
struct CodeConfig {
  double nbar = 0.0;
  double length = 1.0;
};

void validate(const CodeConfig& config);

/// Sylvester-type Hadamard matrix of dimension L = 2^order.
///
/// Entries are generated on demand as (-1)^popcount(j & l), so the object is
/// O(1) in memory for any order up to the cap. Indices are 0-based: the
/// 1-based word label l = 1..L corresponds to index l - 1 here.
class HadamardMatrix {
 public:
  static constexpr unsigned kDefaultMaxOrder = 20;
  /// Largest order for which dense() will materialise the matrix.
  static constexpr unsigned kMaxDenseOrder = 14;

  explicit HadamardMatrix(unsigned order, unsigned max_order = kDefaultMaxOrder);

  unsigned order() const { return order_; }
  std::size_t dim() const { return std::size_t{1} << order_; }

  int entry(std::size_t row, std::size_t col) const {
    return (std::popcount(row & col) & 1) ? -1 : 1;
  }

  SignMatrix dense() const;

 private:
  unsigned order_;
};

HadamardMatrix sylvester(unsigned order,
                         unsigned max_order = HadamardMatrix::kDefaultMaxOrder);

/// Exact integer check of symmetry, orthogonality (H * H^T = L * I) and
/// power-of-two dimension.
bool is_hadamard(const SignMatrix& entries);

/// Pulse amplitudes h_jl * sqrt(nbar) of the Hadamard word in column `word`.
AmplitudeVector encode_word(const HadamardMatrix& matrix, std::size_t word, double nbar);

/// In-place unnormalised Walsh-Hadamard butterfly in Sylvester (natural) order.
template <typename Derived>
void fwht_inplace(Eigen::DenseBase<Derived>& values) {
  const Eigen::Index n = values.size();
  for (Eigen::Index half = 1; half < n; half *= 2) {
    for (Eigen::Index start = 0; start < n; start += 2 * half) {
      for (Eigen::Index j = start; j < start + half; ++j) {
        const auto a = values(j);
        const auto b = values(j + half);
        values(j) = a + b;
        values(j + half) = a - b;
      }
    }
  }
}

/// Apply the rescaled Hadamard circuit (h_kj / sqrt(L)) to `input`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> circuit_transform(
    const HadamardMatrix& matrix, const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  if (static_cast<std::size_t>(input.size()) != matrix.dim()) {
    throw DimensionError("circuit_transform: input length " + std::to_string(input.size()) +
                         " does not match matrix dimension " + std::to_string(matrix.dim()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = input;
  fwht_inplace(out);
  out *= typename Eigen::NumTraits<Scalar>::Real(1) /
         std::sqrt(static_cast<typename Eigen::NumTraits<Scalar>::Real>(matrix.dim()));
  return out;
}

}  // namespace cbpsk
