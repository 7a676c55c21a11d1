#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cbpsk/golden_section.hpp"
#include "cbpsk/optimizer.hpp"

using namespace cbpsk;

namespace {

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<double> bits(const std::vector<LengthPoint>& curve) {
  std::vector<double> out;
  for (const auto& pt : curve) out.push_back(pt.mi.bits_per_bin);
  return out;
}

double argmax_length(const std::vector<LengthPoint>& curve) {
  return std::max_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
           return a.mi.bits_per_bin < b.mi.bits_per_bin;
         })->length;
}

}  // namespace

TEST_CASE("golden_section_maximize and helpers") {
  const auto [x, fx] = golden_section_maximize([](double t) { return -(t - 1.3) * (t - 1.3) + 2.0; }, 0.0, 4.0, 1e-10);
  CHECK(x == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(fx == doctest::Approx(2.0).epsilon(1e-15));

  CHECK(is_unimodal(std::vector<double>{1, 2, 3, 3, 2, 0, 0}));
  CHECK(is_unimodal(std::vector<double>{5, 4, 3}));
  CHECK_FALSE(is_unimodal(std::vector<double>{1, 3, 2, 4}));

  const auto grid = log_grid(1e-4, 1e2, 7);
  CHECK(grid.front() == 1e-4);
  CHECK(grid.back() == 1e2);
  CHECK(grid[3] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mi_vs_length curves") {
  const auto lengths = powers_of_two(4, 18);
  SUBCASE("noiseless curve is unimodal with an interior maximum") {
    const auto curve = mi_vs_length(1e-5, {0.0}, ProbMethod::bound, lengths);
    const auto values = bits(curve);
    CHECK(is_unimodal(values));
    const double peak = argmax_length(curve);
    CHECK(peak > lengths.front());
    CHECK(peak < lengths.back());
  }
  SUBCASE("bound and expansion peaks are close at sigma = 0.3") {
    const double a = argmax_length(mi_vs_length(1e-5, {0.3}, ProbMethod::bound, lengths));
    const double b = argmax_length(mi_vs_length(1e-5, {0.3}, ProbMethod::expansion, lengths));
    CHECK(std::max(a, b) / std::min(a, b) <= 2.0);
  }
  SUBCASE("sigma = 1.7 expansion breaks down") {
    const auto curve = mi_vs_length(1e-5, {1.7}, ProbMethod::expansion, lengths);
    bool flagged = false;
    bool vanished = false;
    for (const auto& pt : curve) {
      flagged = flagged || pt.mi.outside_validity;
      vanished = vanished || pt.mi.probs->p == 0.0;
    }
    CHECK(flagged);
    CHECK(vanished);
  }
  SUBCASE("Monte Carlo points") {
    const McSettings mc{2000, 5, 1};
    const std::vector<double> small{16.0, 64.0};
    const auto curve = mi_vs_length(1e-3, {0.3}, ProbMethod::monte_carlo, small, mc);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].mi.probs->method == ProbMethod::monte_carlo);
    CHECK(curve[0].mi.probs->samples == 2000);
    CHECK(curve[1].mi.bits_per_bin > 0.0);
    const std::vector<double> odd{24.0};
    CHECK_THROWS_AS(mi_vs_length(1e-3, {0.3}, ProbMethod::monte_carlo, odd, mc), DomainError);
    CHECK_THROWS_AS(mi_vs_length(1e-3, {0.3}, ProbMethod::monte_carlo, small), DomainError);
  }
}

TEST_CASE("optimize_continuous") {
  const double nbar = 1e-5;
  const OptimizationResult clean = optimize_continuous(nbar, {0.0}, ProbMethod::bound);
  SUBCASE("self-consistent optimum nbar << L nbar << 1") {
    CHECK(clean.best_length * nbar > nbar);
    CHECK(clean.best_length * nbar < 1.0);
  }
  SUBCASE("noiseless optimum equals nbar Pi(nbar)") {
    CHECK(std::abs(clean.best_mi.bits_per_bin / (nbar * pie_poisson(nbar)) - 1.0) < 1e-6);
  }
  SUBCASE("mild dephasing barely moves the optimal length") {
    const OptimizationResult noisy = optimize_continuous(nbar, {0.3}, ProbMethod::bound);
    CHECK(std::max(noisy.best_length, clean.best_length) / std::min(noisy.best_length, clean.best_length) < 2.0);
  }
  SUBCASE("local-maximum certificate and refinement monotonicity") {
    for (ProbMethod method : {ProbMethod::bound, ProbMethod::expansion}) {
      const OptimizationResult r = optimize_continuous(nbar, {0.5}, method);
      CHECK(r.best_mi.bits_per_bin >= r.left_neighbor.bits);
      CHECK(r.best_mi.bits_per_bin >= r.right_neighbor.bits);
      double grid_best = 0.0;
      for (const auto& pt : r.trace) grid_best = std::max(grid_best, pt.bits);
      CHECK(r.best_mi.bits_per_bin >= grid_best);
    }
  }
  SUBCASE("stable under doubling the coarse grid density") {
    OptimizerSettings dense;
    dense.points_per_decade = 32;
    for (ProbMethod method : {ProbMethod::bound, ProbMethod::expansion}) {
      const double a = optimize_continuous(nbar, {0.3}, method).best_mi.bits_per_bin;
      const double b = optimize_continuous(nbar, {0.3}, method, dense).best_mi.bits_per_bin;
      CHECK(std::abs(a - b) / a < 1e-6);
    }
  }
  SUBCASE("self-consistency window over nbar <= 1e-3, sigma <= 1") {
    for (double n : {1e-3, 1e-5, 1e-8, 1e-11}) {
      for (double sigma : {0.0, 0.3, 0.7, 1.0}) {
        for (ProbMethod method : {ProbMethod::bound, ProbMethod::expansion}) {
          const OptimizationResult r = optimize_continuous(n, {sigma}, method);
          CHECK(r.best_length * n > n);
          CHECK(r.best_length * n < 1.0);
        }
      }
    }
  }
  CHECK_THROWS_AS(optimize_continuous(0.0, {0.3}, ProbMethod::bound), DomainError);
  CHECK_THROWS_AS(optimize_continuous(1e-5, {0.3}, ProbMethod::monte_carlo), DomainError);
}

TEST_CASE("optimize_discrete") {
  for (double nbar : {1e-3, 1e-5, 1e-7}) {
    for (double sigma : {0.0, 0.3}) {
      const OptimizationResult disc = optimize_discrete(nbar, {sigma}, ProbMethod::bound);
      const OptimizationResult cont = optimize_continuous(nbar, {sigma}, ProbMethod::bound);
      const auto length = static_cast<std::uint64_t>(disc.best_length);
      CHECK(std::has_single_bit(length));
      CHECK(disc.best_mi.bits_per_bin <= cont.best_mi.bits_per_bin * (1 + 1e-12));
      CHECK(disc.best_mi.bits_per_bin >= 0.9 * cont.best_mi.bits_per_bin);
    }
  }
  CHECK_THROWS_AS(optimize_discrete(0.0, {0.3}, ProbMethod::bound), NoOptimumError);
  CHECK_THROWS_AS(optimize_discrete(1e-5, {0.3}, ProbMethod::bound, 25), DomainError);
}

TEST_CASE("ratio_curve") {
  const std::vector<double> grid{1e-3, 1e-5, 1e-7, 1e-9};
  SUBCASE("noiseless ratio is one") {
    for (RatioMethod method : {RatioMethod::bound, RatioMethod::closed_form}) {
      for (const auto& pt : ratio_curve(grid, {0.0}, method)) CHECK(std::abs(pt.ratio - 1.0) < 1e-3);
    }
    // The expansion drops the (L nbar)^3 term of 1 - e^{-L nbar}, which costs ~2% at nbar = 1e-3.
    for (const auto& pt : ratio_curve(grid, {0.0}, RatioMethod::expansion)) {
      CHECK(pt.ratio <= 1.0);
      CHECK(pt.ratio > 0.975);
    }
  }
  SUBCASE("sigma = 0.3 climbs toward e^{-0.09} from below") {
    const double asymptote = std::exp(-0.09);
    for (RatioMethod method : {RatioMethod::bound, RatioMethod::expansion, RatioMethod::closed_form}) {
      const auto curve = ratio_curve(grid, {0.3}, method);
      for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(curve[i].ratio >= 0.0);
        CHECK(curve[i].ratio < asymptote);
        if (i > 0) CHECK(curve[i].ratio > curve[i - 1].ratio);
      }
    }
  }
  SUBCASE("weaker dephasing converges faster") {
    const std::vector<double> tiny{1e-9};
    const double weak = ratio_curve(tiny, {0.3}, RatioMethod::closed_form)[0].ratio;
    const double strong = ratio_curve(tiny, {1.0}, RatioMethod::closed_form)[0].ratio;
    CHECK(std::abs(weak / std::exp(-0.09) - 1.0) < std::abs(strong / std::exp(-1.0) - 1.0));
  }
  SUBCASE("closed-form gap is nonincreasing as nbar decreases") {
    const std::vector<double> fine{1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
    for (double sigma : {0.3, 0.7, 1.0}) {
      double previous = INFINITY;
      for (const auto& pt : ratio_curve(fine, {sigma}, RatioMethod::closed_form)) {
        const double gap = std::abs(pt.ratio - std::exp(-sigma * sigma));
        CHECK(gap <= previous);
        CHECK(pt.ratio >= 0.0);
        CHECK(pt.ratio <= 1.0);
        previous = gap;
      }
    }
  }
}
