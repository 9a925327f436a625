#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "onsetblend/errors.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace clim {

inline constexpr double kSqrt2Pi = 2.5066282746310002;

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }
// Upper tail with full relative precision where 1 - cdf would round to zero.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / 1.4142135623730951); }

namespace detail {

// Type-7 quantile (linear interpolation between order statistics).
inline double quantile(std::vector<double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double sample_sd(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

// min(sd, IQR/1.349), the usual robust scale for bandwidth selection.
inline double robust_scale(const std::vector<double>& x) {
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double sd = sample_sd(x);
  double scale = std::min(sd, iqr / 1.349);
  if (scale <= 0.0) scale = sd;
  return scale;
}

// Pairwise kernel-functional sums for the plug-in equations. phi4 and phi6
// are the 4th and 6th derivatives of the Gaussian density.
inline double phi4_sum(const std::vector<double>& x, double h) {
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = (x[i] - x[j]) / h;
      const double d2 = d * d;
      sum += std::exp(-0.5 * d2) * ((d2 - 6.0) * d2 + 3.0);
    }
  }
  sum = 2.0 * sum + n * 3.0;  // diagonal terms
  return sum / (n * (n - 1.0) * std::pow(h, 5) * kSqrt2Pi);
}

inline double phi6_sum(const std::vector<double>& x, double h) {
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = (x[i] - x[j]) / h;
      const double d2 = d * d;
      sum += std::exp(-0.5 * d2) * (((d2 - 15.0) * d2 + 45.0) * d2 - 15.0);
    }
  }
  sum = 2.0 * sum - n * 15.0;
  return sum / (n * (n - 1.0) * std::pow(h, 7) * kSqrt2Pi);
}

}  // namespace detail

//! Silverman rule-of-thumb bandwidth (the fallback when the plug-in
//! root-finding fails to bracket).
inline double silverman_bandwidth(const std::vector<double>& points) {
  if (points.size() < 2) throw Error(Errc::degenerate_sample, "need at least two points");
  const double scale = detail::robust_scale(points);
  if (!(scale > 0.0))
    throw Error(Errc::degenerate_sample, "all sample points identical");
  return 0.9 * scale * std::pow(static_cast<double>(points.size()), -0.2);
}

//! Sheather-Jones solve-the-equation plug-in bandwidth with a Gaussian
//! kernel. The selected h solves
//!   h = ( R(K) / (n * SD(alpha2(h))) )^{1/5}
//! where SD estimates the integrated squared second density derivative with
//! the pilot bandwidth alpha2(h) = 1.357 (SD(a)/TD(b))^{1/7} h^{5/7}, and the
//! stage-one bandwidths a, b follow the normal-reference rules. Root-finding
//! is bracketed bisection (1e-4 tolerance, 200 iterations). When bracketing
//! or the pilot functionals fail, falls back to the Silverman rule and sets
//! *used_fallback.
inline double sheather_jones_bandwidth(const std::vector<double>& points,
                                       bool* used_fallback = nullptr) {
  if (used_fallback) *used_fallback = false;
  if (points.size() < 2) throw Error(Errc::degenerate_sample, "need at least two points");
  const double scale = detail::robust_scale(points);
  if (!(scale > 0.0)) throw Error(Errc::degenerate_sample, "all sample points identical");

  const double n = static_cast<double>(points.size());
  const double a = 0.920 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 0.912 * scale * std::pow(n, -1.0 / 9.0);
  const double sd_a = detail::phi4_sum(points, a);
  const double td = -detail::phi6_sum(points, b);

  auto fallback = [&]() {
    if (used_fallback) *used_fallback = true;
    return silverman_bandwidth(points);
  };
  if (!(sd_a > 0.0) || !(td > 0.0) || !std::isfinite(sd_a) || !std::isfinite(td))
    return fallback();

  const double c1 = 1.0 / (2.0 * std::sqrt(M_PI) * n);
  const double alpha_const = 1.357 * std::pow(sd_a / td, 1.0 / 7.0);
  auto objective = [&](double h) {
    const double pilot = alpha_const * std::pow(h, 5.0 / 7.0);
    const double sd = detail::phi4_sum(points, pilot);
    if (!(sd > 0.0) || !std::isfinite(sd)) return std::nan("");
    return std::pow(c1 / sd, 0.2) - h;
  };

  const double hmax = 1.144 * scale * std::pow(n, -0.2);
  double lo = 0.1 * hmax;
  double hi = hmax;
  double f_lo = objective(lo);
  double f_hi = objective(hi);
  int expand = 0;
  while ((std::isnan(f_lo) || std::isnan(f_hi) || f_lo * f_hi > 0.0) && expand < 30) {
    if (std::isnan(f_lo) || (f_lo > 0.0 && f_hi > 0.0)) {
      hi *= 1.4;
      f_hi = objective(hi);
    } else {
      lo *= 0.5;
      f_lo = objective(lo);
    }
    ++expand;
  }
  if (std::isnan(f_lo) || std::isnan(f_hi) || f_lo * f_hi > 0.0) return fallback();

  for (int iter = 0; iter < 200 && (hi - lo) > 1e-4; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = objective(mid);
    if (std::isnan(f_mid)) return fallback();
    if (f_lo * f_mid <= 0.0) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Truncation window for the onset-date density, in day-of-year units.
struct Support {
  double lo = 91.0;   // Apr 1 (non-leap)
  double hi = 304.0;  // Oct 31

  bool contains(double x) const { return x >= lo && x <= hi; }
};

//! Gaussian-mixture onset-date climatology: one kernel per historical onset
//! day-of-year, truncated to `support` and renormalized.
class ClimatologyKde {
 public:
  ClimatologyKde(std::string grid_id, std::vector<double> onset_doys, double bandwidth,
                 Support support = {})
      : grid_id_(std::move(grid_id)),
        doys_(std::move(onset_doys)),
        sigma_(bandwidth),
        support_(support) {
    if (doys_.empty()) throw Error(Errc::empty_history, "no onset dates for " + grid_id_);
    if (!(sigma_ > 0.0)) throw Error(Errc::invalid_config, "bandwidth must be > 0");
    double z = 0.0;
    for (double d : doys_) {
      z += normal_cdf((support_.hi - d) / sigma_) - normal_cdf((support_.lo - d) / sigma_);
    }
    mass_ = z / static_cast<double>(doys_.size());
    if (!(mass_ > 0.0))
      throw Error(Errc::invalid_config, "no kernel mass inside the support window");
  }

  const std::string& grid_id() const { return grid_id_; }
  const std::vector<double>& onset_doys() const { return doys_; }
  double bandwidth() const { return sigma_; }
  const Support& support() const { return support_; }

  double pdf(double x) const {
    if (!support_.contains(x)) return 0.0;
    double s = 0.0;
    for (double d : doys_) s += normal_pdf((x - d) / sigma_) / sigma_;
    return s / (static_cast<double>(doys_.size()) * mass_);
  }

  double cdf(double x) const {
    if (x <= support_.lo) return 0.0;
    if (x >= support_.hi) return 1.0;
    double s = 0.0;
    for (double d : doys_) {
      s += normal_cdf((x - d) / sigma_) - normal_cdf((support_.lo - d) / sigma_);
    }
    return s / (static_cast<double>(doys_.size()) * mass_);
  }

  // P(onset > x), computed from complementary CDFs so deep-tail survival
  // keeps relative precision instead of collapsing to 1 - 1.
  double survival(double x) const {
    if (x <= support_.lo) return 1.0;
    if (x >= support_.hi) return 0.0;
    double s = 0.0;
    for (double d : doys_) {
      s += normal_sf((x - d) / sigma_) - normal_sf((support_.hi - d) / sigma_);
    }
    return s / (static_cast<double>(doys_.size()) * mass_);
  }

 private:
  std::string grid_id_;
  std::vector<double> doys_;
  double sigma_;
  Support support_;
  double mass_ = 1.0;
};

//! Fit the climatology for one grid cell: Sheather-Jones bandwidth over the
//! historical onset days-of-year, with a floor for degenerate samples.
inline ClimatologyKde fit_climatology(const std::string& grid_id, std::vector<double> onset_doys,
                                      Support support = {}, double floor_bandwidth = 1.0,
                                      bool* used_fallback = nullptr) {
  if (onset_doys.size() < 2)
    throw Error(Errc::empty_history, "need at least two onset years for " + grid_id);
  double sigma;
  const bool degenerate =
      std::all_of(onset_doys.begin(), onset_doys.end(),
                  [&](double d) { return d == onset_doys.front(); });
  if (degenerate) {
    sigma = floor_bandwidth;
    if (used_fallback) *used_fallback = true;
  } else {
    sigma = std::max(sheather_jones_bandwidth(onset_doys, used_fallback), 1e-6);
  }
  return ClimatologyKde(grid_id, std::move(onset_doys), sigma, support);
}

// Weekly bin probabilities from any cumulative distribution function over
// day-of-year. Bin j covers (init + 7(j-1), init + 7j]; bin 5 holds all later
// mass plus, for the static (unconditional) distribution, any mass at or
// before the init date.
template <class Cdf>
BinProbs weekly_bin_probs(Cdf&& cdf, double init_doy) {
  BinProbs out;
  double prev = cdf(init_doy);
  const double at_init = prev;
  for (int j = 1; j <= 4; ++j) {
    const double cur = cdf(init_doy + 7.0 * j);
    out[static_cast<std::size_t>(j - 1)] = std::max(0.0, cur - prev);
    prev = cur;
  }
  out[4] = std::max(0.0, 1.0 - prev) + at_init;
  return out;
}

// Conditional (evolving-expectations) version: the same window masses divided
// by the survival probability P(onset > init).
template <class Cdf>
BinProbs conditional_weekly_bin_probs(Cdf&& cdf, double init_doy) {
  const double at_init = cdf(init_doy);
  const double survival = 1.0 - at_init;
  if (!(survival > 0.0))
    throw Error(Errc::zero_survival, "no onset mass remains after the init date");
  BinProbs out;
  double prev = at_init;
  for (int j = 1; j <= 4; ++j) {
    const double cur = cdf(init_doy + 7.0 * j);
    out[static_cast<std::size_t>(j - 1)] = std::max(0.0, cur - prev) / survival;
    prev = cur;
  }
  out[4] = std::max(0.0, 1.0 - prev) / survival;
  return out;
}

inline BinProbs static_bin_probs(const ClimatologyKde& kde, double init_doy) {
  return weekly_bin_probs([&](double x) { return kde.cdf(x); }, init_doy);
}

// KDE overload works in survival space: conditioning on onset > init stays
// accurate even when the init date is far into the climatology's tail.
inline BinProbs evolving_bin_probs(const ClimatologyKde& kde, double init_doy) {
  const double base = kde.survival(init_doy);
  if (!(base > 0.0))
    throw Error(Errc::zero_survival, "no onset mass remains after the init date");
  BinProbs out;
  double prev = base;
  for (int j = 1; j <= 4; ++j) {
    const double cur = kde.survival(init_doy + 7.0 * j);
    out[static_cast<std::size_t>(j - 1)] = std::max(0.0, prev - cur) / base;
    prev = cur;
  }
  out[4] = std::max(0.0, prev) / base;
  return out;
}

inline BinProbs static_bin_probs(const ClimatologyKde& kde, Date init) {
  return static_bin_probs(kde, static_cast<double>(init.day_of_year()));
}

inline BinProbs evolving_bin_probs(const ClimatologyKde& kde, Date init) {
  return evolving_bin_probs(kde, static_cast<double>(init.day_of_year()));
}

}  // namespace clim
}  // namespace onsetblend
