#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "onsetblend/climatology.hpp"
#include "onsetblend/rng.hpp"

using namespace onsetblend;

namespace {

// Independent solve-the-equation reference: direct pairwise functional sums
// (diagonal included explicitly) and fixed-point iteration instead of
// bisection. Lives only in test code.
double sj_reference(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double sqrt2pi = std::sqrt(2.0 * M_PI);

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double h = (n - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double scale = std::min(sd, (quantile(0.75) - quantile(0.25)) / 1.349);

  auto phi4 = [&](double h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = (x[i] - x[j]) / h;
        const double d2 = d * d;
        sum += ((d2 - 6.0) * d2 + 3.0) * std::exp(-0.5 * d2);
      }
    }
    return sum / (n * (n - 1.0) * std::pow(h, 5) * sqrt2pi);
  };
  auto phi6 = [&](double h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = (x[i] - x[j]) / h;
        const double d2 = d * d;
        sum += (((d2 - 15.0) * d2 + 45.0) * d2 - 15.0) * std::exp(-0.5 * d2);
      }
    }
    return sum / (n * (n - 1.0) * std::pow(h, 7) * sqrt2pi);
  };

  const double a = 0.920 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 0.912 * scale * std::pow(n, -1.0 / 9.0);
  const double sd_a = phi4(a);
  const double td = -phi6(b);
  const double alpha_const = 1.357 * std::pow(sd_a / td, 1.0 / 7.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(M_PI) * n);

  double h = 1.06 * sd * std::pow(n, -0.2);
  for (int iter = 0; iter < 200; ++iter) {
    const double pilot = alpha_const * std::pow(h, 5.0 / 7.0);
    const double next = std::pow(c1 / phi4(pilot), 0.2);
    if (std::abs(next - h) < 1e-10) return next;
    h = next;
  }
  return h;
}

double uniform_cdf(double x, double lo, double hi) {
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace

TEST_CASE("bandwidth selection is scale equivariant") {
  // The root itself is exactly equivariant; the bisection stops at an
  // absolute 1e-4 day tolerance, which bounds the observable deviation.
  const double h1 = clim::sheather_jones_bandwidth({0.0, 10.0});
  const double h2 = clim::sheather_jones_bandwidth({0.0, 20.0});
  CHECK(h2 == Catch::Approx(2.0 * h1).margin(3e-4));
}

TEST_CASE("bandwidth for standard normal draws matches the reference") {
  Rng rng(314159);
  std::vector<double> draws(1000);
  for (auto& v : draws) v = rng.normal();

  bool fallback = false;
  const double sigma = clim::sheather_jones_bandwidth(draws, &fallback);
  CHECK_FALSE(fallback);
  CHECK(sigma > 0.15);
  CHECK(sigma < 0.45);

  const double reference = sj_reference(draws);
  CHECK(sigma == Catch::Approx(reference).margin(5e-4));
}

TEST_CASE("identical points are a degenerate sample") {
  CHECK_THROWS_MATCHES(clim::sheather_jones_bandwidth({170.0, 170.0, 170.0}), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::degenerate_sample; }));
}

TEST_CASE("single-kernel density values") {
  const double sigma = 3.0;
  clim::ClimatologyKde kde("g", {200.0}, sigma, {0.0, 400.0});
  CHECK(kde.pdf(200.0) ==
        Catch::Approx(1.0 / (sigma * std::sqrt(2.0 * M_PI))).margin(1e-9));
  CHECK(kde.cdf(200.0) == Catch::Approx(0.5).margin(1e-9));  // symmetric support
}

TEST_CASE("kde integrates to one over its support") {
  Rng rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> doys;
    const int n = 3 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) doys.push_back(rng.uniform(130.0, 260.0));
    const double sigma = rng.uniform(2.0, 6.0);
    clim::ClimatologyKde kde("g", doys, sigma);

    const double lo = kde.support().lo, hi = kde.support().hi;
    const double step = 0.1;
    double integral = 0.5 * (kde.pdf(lo) + kde.pdf(hi));
    const int cells = static_cast<int>(std::round((hi - lo) / step));
    for (int k = 1; k < cells; ++k) integral += kde.pdf(lo + step * k);
    integral *= step;
    CHECK(integral == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("weekly bins split a uniform distribution evenly") {
  const double init = 150.0;
  const auto p = clim::weekly_bin_probs(
      [&](double x) { return uniform_cdf(x, init, init + 35.0); }, init);
  for (int j = 0; j < 5; ++j) CHECK(p[static_cast<std::size_t>(j)] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("mass beyond four weeks lands in the later bin") {
  clim::ClimatologyKde kde("g", {190.0}, 0.1);
  const auto p = clim::static_bin_probs(kde, 150.0);
  CHECK(p[4] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("a point mass ten days out is a week-2 forecast") {
  clim::ClimatologyKde kde("g", {160.0}, 0.05);
  const auto p = clim::static_bin_probs(kde, 150.0);
  CHECK(p[1] == Catch::Approx(1.0).margin(1e-6));
  for (std::size_t j : {0u, 2u, 3u, 4u}) CHECK(p[j] == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("evolving probabilities renormalize the remaining mass") {
  const auto one_week = clim::conditional_weekly_bin_probs(
      [](double x) { return uniform_cdf(x, 0.0, 10.0); }, 5.0);
  CHECK(one_week[0] == Catch::Approx(1.0).margin(1e-12));

  const auto four_weeks = clim::conditional_weekly_bin_probs(
      [](double x) { return uniform_cdf(x, 0.0, 35.0); }, 7.0);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(four_weeks[j] == Catch::Approx(0.25).margin(1e-12));
  CHECK(four_weeks[4] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("evolving equals static divided by survival") {
  Rng rng(909);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> doys;
    const int n = 2 + static_cast<int>(rng.below(25));
    for (int i = 0; i < n; ++i) doys.push_back(rng.uniform(110.0, 290.0));
    const double sigma = rng.uniform(1.0, 15.0);
    clim::ClimatologyKde kde("g", doys, sigma);
    const double init = rng.uniform(95.0, 280.0);
    const double survival = 1.0 - kde.cdf(init);
    if (!(survival > 1e-12)) continue;

    const auto statics = clim::static_bin_probs(kde, init);
    const auto evolving = clim::evolving_bin_probs(kde, init);
    statics.validate(1e-9);
    evolving.validate(1e-9);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(evolving[j] * survival == Catch::Approx(statics[j]).margin(1e-12));
    }
  }
}

TEST_CASE("week-1 evolving probability is non-decreasing past the mode") {
  clim::ClimatologyKde kde("g", {170.0}, 8.0);
  double previous = 0.0;
  for (double init = 170.0; init <= 296.0; init += 1.0) {
    const double week1 = clim::evolving_bin_probs(kde, init)[0];
    CHECK(week1 >= previous - 1e-12);
    previous = week1;
  }
}

TEST_CASE("an init date past the support is a zero-survival error") {
  clim::ClimatologyKde kde("g", {170.0, 180.0}, 5.0);
  CHECK_THROWS_MATCHES(clim::evolving_bin_probs(kde, 304.0), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::zero_survival; }));
  CHECK_THROWS_MATCHES(
      clim::conditional_weekly_bin_probs([](double) { return 1.0; }, 200.0), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == Errc::zero_survival; }));
}

TEST_CASE("mass before the init date counts as the later bin") {
  // A season whose onset has climatologically already passed: the static
  // distribution keeps that mass in bin 5 (and stays a proper distribution),
  // while conditioning has nothing left to renormalize.
  clim::ClimatologyKde kde("g", {150.0}, 0.5);
  const auto statics = clim::static_bin_probs(kde, 200.0);
  CHECK(statics[4] == Catch::Approx(1.0).margin(1e-9));
  for (std::size_t j = 0; j < 4; ++j) CHECK(statics[j] == Catch::Approx(0.0).margin(1e-9));
  CHECK_THROWS_AS(clim::evolving_bin_probs(kde, 200.0), Error);
}

TEST_CASE("leave-one-out climatology keeps positive density everywhere") {
  Rng rng(424242);
  std::vector<double> doys;
  for (int i = 0; i < 12; ++i) doys.push_back(rng.uniform(140.0, 220.0));
  for (std::size_t held_out = 0; held_out < doys.size(); ++held_out) {
    std::vector<double> train;
    for (std::size_t i = 0; i < doys.size(); ++i)
      if (i != held_out) train.push_back(doys[i]);
    const auto kde = clim::fit_climatology("g", train);
    CHECK(kde.pdf(doys[held_out]) > 0.0);
    CHECK(kde.pdf(kde.support().lo) > 0.0);
    CHECK(kde.pdf(kde.support().hi) > 0.0);
  }
}

TEST_CASE("silverman fallback flag reaches the caller through fit_climatology") {
  bool fallback = false;
  const auto kde = clim::fit_climatology("g", {170.0, 170.0, 170.0}, {}, 1.5, &fallback);
  CHECK(fallback);
  CHECK(kde.bandwidth() == 1.5);
}
