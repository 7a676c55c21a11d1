#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cbpsk/hadamard.hpp"
#include "oracles.hpp"

using namespace cbpsk;

namespace {

Eigen::VectorXcd random_complex(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

}  // namespace

TEST_CASE("sylvester base cases") {
  SignMatrix h0 = sylvester(0).dense();
  CHECK(h0.rows() == 1);
  CHECK(h0(0, 0) == 1);

  SignMatrix h1 = sylvester(1).dense();
  SignMatrix expected(2, 2);
  expected << 1, 1, 1, -1;
  CHECK(h1 == expected);
}

TEST_CASE("sylvester(3) satisfies H H^T = 8 I by explicit multiplication") {
  const SignMatrix h = sylvester(3).dense();
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      int dot = 0;
      for (int j = 0; j < 8; ++j) dot += h(r, j) * h(c, j);
      CHECK(dot == (r == c ? 8 : 0));
    }
  }
}

TEST_CASE("sylvester entries follow the popcount rule and pass the invariants up to order 12") {
  for (unsigned m = 0; m <= 12; ++m) {
    const HadamardMatrix h = sylvester(m);
    CHECK(h.dim() == (std::size_t{1} << m));
    if (m <= 10) CHECK(is_hadamard(h.dense()));
  }
  // Order 11 and 12: exact row-orthogonality via integer dot products on sampled pairs
  // plus symmetry of the generator.
  for (unsigned m : {11u, 12u}) {
    const HadamardMatrix h = sylvester(m);
    std::mt19937_64 rng(m);
    std::uniform_int_distribution<std::size_t> pick(0, h.dim() - 1);
    for (int t = 0; t < 20; ++t) {
      const std::size_t a = pick(rng), b = pick(rng);
      long dot = 0;
      for (std::size_t j = 0; j < h.dim(); ++j) dot += h.entry(a, j) * h.entry(b, j);
      CHECK(dot == (a == b ? static_cast<long>(h.dim()) : 0));
      CHECK(h.entry(a, b) == h.entry(b, a));
    }
  }
}

TEST_CASE("is_hadamard rejects broken matrices") {
  SignMatrix h = sylvester(2).dense();
  CHECK(is_hadamard(h));
  h(0, 1) = -1;
  CHECK_FALSE(is_hadamard(h));
  SignMatrix three = SignMatrix::Ones(3, 3);
  CHECK_FALSE(is_hadamard(three));
}

TEST_CASE("order cap raises a size error") {
  CHECK_THROWS_AS(sylvester(21), SizeError);
  CHECK_THROWS_AS(sylvester(5, 4), SizeError);
  CHECK_NOTHROW(sylvester(20));
  CHECK_THROWS_AS(sylvester(16).dense(), SizeError);
}

TEST_CASE("encode_word") {
  const HadamardMatrix h = sylvester(1);
  const AmplitudeVector a = encode_word(h, 0, 0.25);
  CHECK(a(0) == std::complex<double>(0.5, 0.0));
  CHECK(a(1) == std::complex<double>(0.5, 0.0));
  const AmplitudeVector b = encode_word(h, 1, 1.0);
  CHECK(b(0) == std::complex<double>(1.0, 0.0));
  CHECK(b(1) == std::complex<double>(-1.0, 0.0));
  CHECK(encode_word(sylvester(4), 7, 0.0).isZero(0.0));
  CHECK_THROWS_AS(encode_word(h, 2, 1.0), IndexError);
}

TEST_CASE("circuit maps a noiseless word onto a single port") {
  const double nbar = 0.3;
  for (unsigned m : {1u, 3u, 6u}) {
    const HadamardMatrix h = sylvester(m);
    const auto length = static_cast<double>(h.dim());
    for (std::size_t l : {std::size_t{0}, h.dim() - 1, h.dim() / 2}) {
      const AmplitudeVector out = circuit_transform(h, encode_word(h, l, nbar));
      for (Eigen::Index k = 0; k < out.size(); ++k) {
        const double expected = (static_cast<std::size_t>(k) == l) ? std::sqrt(length * nbar) : 0.0;
        CHECK(std::abs(out(k) - expected) < 1e-12);
      }
    }
  }
}

TEST_CASE("circuit of the zero vector is zero and length mismatch is rejected") {
  const HadamardMatrix h = sylvester(3);
  CHECK(circuit_transform(h, AmplitudeVector::Zero(8)).isZero(0.0));
  CHECK_THROWS_AS(circuit_transform(h, AmplitudeVector::Zero(4)), DimensionError);
}

TEST_CASE("butterfly agrees with the naive matrix product for L <= 64") {
  std::mt19937_64 rng(42);
  for (unsigned m = 0; m <= 6; ++m) {
    const HadamardMatrix h = sylvester(m);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXcd v = random_complex(static_cast<Eigen::Index>(h.dim()), rng);
      const Eigen::VectorXcd fast = circuit_transform(h, v);
      const Eigen::VectorXcd slow = oracle::naive_circuit(v);
      CHECK((fast - slow).norm() / slow.norm() < 1e-12);
    }
  }
}

TEST_CASE("energy conservation for random complex inputs, L = 2 .. 1024") {
  std::mt19937_64 rng(7);
  for (unsigned m = 1; m <= 10; ++m) {
    const HadamardMatrix h = sylvester(m);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXcd v = random_complex(static_cast<Eigen::Index>(h.dim()), rng);
      const double in = v.squaredNorm();
      worst = std::max(worst, std::abs(circuit_transform(h, v).squaredNorm() - in) / in);
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("circuit applied twice recovers a real input") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (unsigned m : {1u, 4u, 9u}) {
    const HadamardMatrix h = sylvester(m);
    Eigen::VectorXd v(static_cast<Eigen::Index>(h.dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    const Eigen::VectorXd back = circuit_transform(h, circuit_transform(h, v));
    CHECK((back - v).norm() / v.norm() < 1e-12);
  }
}
