#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "onsetblend/errors.hpp"
#include "onsetblend/optim.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace blend {

inline constexpr int kLeadBins = 4;
inline constexpr int kOutcomeCols = 4;  // non-reference outcomes (bin 5 is the reference)
inline constexpr int kTermsPerBin = 10;
inline constexpr int kColumns = kTermsPerBin * kLeadBins;  // 40
inline constexpr int kBaseFeatures = 5 * kLeadBins;        // pi, alpha, nu, beta, mu per bin

// Clamp into [0.0001, 0.99], then logit.
inline double winsorize_logit(double p) {
  const double q = std::clamp(p, 0.0001, 0.99);
  return std::log(q / (1.0 - q));
}

// Predictor set for one forecast instance (grid cell x init date).
struct FeatureRow {
  std::string grid_id;
  Date init;
  int year = 0;
  std::array<double, kLeadBins> pi{};     // logit evolving probability, week j
  std::array<double, kLeadBins> alpha{};  // model A: max 5-day rainfall starting in week j, minus threshold
  std::array<double, kLeadBins> nu{};     // model B: same
  std::array<double, kLeadBins> beta{};   // model A: min 10-day rainfall starting in week j
  std::array<double, kLeadBins> mu{};     // model B: same
  int outcome = kNumBins;                 // observed bin, 1..5

  double base(int f, int j) const {
    switch (f) {
      case 0: return pi[static_cast<std::size_t>(j)];
      case 1: return alpha[static_cast<std::size_t>(j)];
      case 2: return nu[static_cast<std::size_t>(j)];
      case 3: return beta[static_cast<std::size_t>(j)];
      default: return mu[static_cast<std::size_t>(j)];
    }
  }
};

struct FeatureConfig {
  // The 10-day minimum is "computed analogously" to the 5-day maximum; by
  // default no threshold is subtracted (intercepts absorb constant shifts).
  bool subtract_threshold_from_dry = false;
};

namespace detail {

inline std::vector<double> lead_prefix_sums(const ForecastEnsemble& ens) {
  std::vector<double> prefix(ens.lead_days + 1, 0.0);
  for (std::size_t l = 1; l <= ens.lead_days; ++l) {
    prefix[l] = prefix[l - 1] + ens.daily_mean(l);
  }
  return prefix;
}

// Extreme window sum over windows of `width` days starting on a lead day in
// week j (lead days 7j+1 .. 7j+7, 0-based j), truncated to windows that fit
// the horizon.
inline double extreme_window(const std::vector<double>& prefix, int lead_days, int j, int width,
                             bool maximize) {
  const int first = 7 * j + 1;
  const int last_start = std::min(7 * j + 7, lead_days - width + 1);
  if (first > last_start)
    throw Error(Errc::lead_window_exceeds_horizon,
                "no " + std::to_string(width) + "-day window starting in week " +
                    std::to_string(j + 1) + " fits " + std::to_string(lead_days) + " lead days");
  double best = maximize ? -1e300 : 1e300;
  for (int s = first; s <= last_start; ++s) {
    const double sum = prefix[static_cast<std::size_t>(s + width - 1)] -
                       prefix[static_cast<std::size_t>(s - 1)];
    best = maximize ? std::max(best, sum) : std::min(best, sum);
  }
  return best;
}

}  // namespace detail

// Assemble the predictor set from the evolving-expectations probabilities and
// the two models' ensemble rainfall forecasts. Ensemble rainfall is collapsed
// to the member mean per lead day before any window is taken.
inline FeatureRow build_features(const BinProbs& evolving, const ForecastEnsemble& ens_a,
                                 const ForecastEnsemble& ens_b, double threshold_mm,
                                 const FeatureConfig& fc = {}) {
  if (ens_a.grid_id != ens_b.grid_id || ens_a.init != ens_b.init)
    throw Error(Errc::invalid_config, "ensembles A and B must share grid cell and init date");
  FeatureRow row;
  row.grid_id = ens_a.grid_id;
  row.init = ens_a.init;
  row.year = ens_a.init.year();

  const auto prefix_a = detail::lead_prefix_sums(ens_a);
  const auto prefix_b = detail::lead_prefix_sums(ens_b);
  const double dry_offset = fc.subtract_threshold_from_dry ? threshold_mm : 0.0;
  for (int j = 0; j < kLeadBins; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    row.pi[js] = winsorize_logit(evolving[js]);
    row.alpha[js] =
        detail::extreme_window(prefix_a, static_cast<int>(ens_a.lead_days), j, 5, true) -
        threshold_mm;
    row.nu[js] =
        detail::extreme_window(prefix_b, static_cast<int>(ens_b.lead_days), j, 5, true) -
        threshold_mm;
    row.beta[js] =
        detail::extreme_window(prefix_a, static_cast<int>(ens_a.lead_days), j, 10, false) -
        dry_offset;
    row.mu[js] =
        detail::extreme_window(prefix_b, static_cast<int>(ens_b.lead_days), j, 10, false) -
        dry_offset;
  }
  return row;
}

// Multinomial-logit blend. Coefficients t(l, j, j') live on an internally
// standardized feature scale; the standardization constants are part of the
// model. Term order l: 1, pi, alpha, nu, pi*alpha, pi*nu, alpha*nu,
// pi*alpha*nu, beta, mu. Interactions are products of the standardized
// base features.
struct BlendModel {
  Eigen::MatrixXd coefficients;  // kColumns x kOutcomeCols
  Eigen::VectorXd feat_mean;     // kBaseFeatures (pi x4, alpha x4, nu x4, beta x4, mu x4)
  Eigen::VectorXd feat_scale;
  double ridge = 1e-6;
  bool converged = false;
  double final_grad_norm = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;

  double t(int l, int j, int jp) const {
    return coefficients(l * kLeadBins + j, jp - 1);
  }
};

namespace detail {

inline void standardized_base(const FeatureRow& row, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& scale, double* s) {
  for (int f = 0; f < 5; ++f) {
    for (int j = 0; j < kLeadBins; ++j) {
      const int b = f * kLeadBins + j;
      s[b] = (row.base(f, j) - mean(b)) / scale(b);
    }
  }
}

// Fill the 40 design columns from the 20 standardized base features.
inline void fill_columns(const double* s, double* x) {
  for (int j = 0; j < kLeadBins; ++j) {
    const double pi = s[0 * kLeadBins + j];
    const double al = s[1 * kLeadBins + j];
    const double nu = s[2 * kLeadBins + j];
    const double be = s[3 * kLeadBins + j];
    const double mu = s[4 * kLeadBins + j];
    x[0 * kLeadBins + j] = 1.0;
    x[1 * kLeadBins + j] = pi;
    x[2 * kLeadBins + j] = al;
    x[3 * kLeadBins + j] = nu;
    x[4 * kLeadBins + j] = pi * al;
    x[5 * kLeadBins + j] = pi * nu;
    x[6 * kLeadBins + j] = al * nu;
    x[7 * kLeadBins + j] = pi * al * nu;
    x[8 * kLeadBins + j] = be;
    x[9 * kLeadBins + j] = mu;
  }
}

inline BinProbs softmax_scores(const Eigen::Vector4d& scores) {
  double m = 0.0;
  for (int k = 0; k < kOutcomeCols; ++k) m = std::max(m, scores(k));
  double denom = std::exp(-m);
  Eigen::Vector4d e;
  for (int k = 0; k < kOutcomeCols; ++k) {
    e(k) = std::exp(scores(k) - m);
    denom += e(k);
  }
  BinProbs out;
  for (int k = 0; k < kOutcomeCols; ++k) out[static_cast<std::size_t>(k)] = e(k) / denom;
  out[4] = std::exp(-m) / denom;
  return out;
}

}  // namespace detail

struct FitOptions {
  double ridge = 1e-6;
  double grad_tol = 1e-8;
  int max_iterations = 500;
};

// Standardized design matrix plus the ridge-penalized mean negative
// log-likelihood and its gradient. The objective is convex; reference bin 5
// carries a fixed zero score.
class BlendDesign {
 public:
  BlendDesign(const std::vector<FeatureRow>& rows, double ridge) : ridge_(ridge) {
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw Error(Errc::single_class, "no training rows");
    {
      const int first = rows.front().outcome;
      if (std::all_of(rows.begin(), rows.end(),
                      [&](const FeatureRow& r) { return r.outcome == first; }))
        throw Error(Errc::single_class, "training outcomes contain a single class");
    }
    for (const auto& row : rows) {
      if (row.outcome < 1 || row.outcome > kNumBins)
        throw Error(Errc::invalid_config, "outcome bin outside 1..5");
      for (int f = 0; f < 5; ++f)
        for (int j = 0; j < kLeadBins; ++j)
          if (!std::isfinite(row.base(f, j)))
            throw Error(Errc::invalid_config, "non-finite feature value");
    }

    mean_ = Eigen::VectorXd::Zero(kBaseFeatures);
    scale_ = Eigen::VectorXd::Ones(kBaseFeatures);
    for (int b = 0; b < kBaseFeatures; ++b) {
      const int f = b / kLeadBins;
      const int j = b % kLeadBins;
      double mean = 0.0;
      for (const auto& row : rows) mean += row.base(f, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& row : rows) {
        const double d = row.base(f, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      mean_(b) = mean;
      scale_(b) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }

    design_.resize(n, kColumns);
    outcome_col_.resize(static_cast<std::size_t>(n));
    double s[kBaseFeatures];
    double x[kColumns];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      detail::standardized_base(row, mean_, scale_, s);
      detail::fill_columns(s, x);
      for (int c = 0; c < kColumns; ++c) design_(i, c) = x[c];
      outcome_col_[static_cast<std::size_t>(i)] = row.outcome - 1;  // 4 = reference bin
    }
    scores_.resize(n, kOutcomeCols);
    probs_.resize(n, kOutcomeCols);
  }

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const Eigen::Index n = design_.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::Map<const Eigen::MatrixXd> t_mat(theta.data(), kColumns, kOutcomeCols);
    scores_.noalias() = design_ * t_mat;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = 0.0;
      for (int k = 0; k < kOutcomeCols; ++k) m = std::max(m, scores_(i, k));
      double denom = std::exp(-m);
      for (int k = 0; k < kOutcomeCols; ++k) denom += std::exp(scores_(i, k) - m);
      const double lse = m + std::log(denom);
      const int yc = outcome_col_[static_cast<std::size_t>(i)];
      nll += lse - (yc < kOutcomeCols ? scores_(i, yc) : 0.0);
      for (int k = 0; k < kOutcomeCols; ++k) {
        probs_(i, k) = std::exp(scores_(i, k) - lse) - (k == yc ? 1.0 : 0.0);
      }
    }
    grad.resize(kColumns * kOutcomeCols);
    Eigen::Map<Eigen::MatrixXd> g_mat(grad.data(), kColumns, kOutcomeCols);
    g_mat.noalias() = design_.transpose() * probs_ * inv_n;
    g_mat.noalias() += 2.0 * ridge_ * t_mat;
    return nll * inv_n + ridge_ * t_mat.squaredNorm();
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }
  Eigen::Index size() const { return design_.rows(); }

 private:
  double ridge_;
  Eigen::MatrixXd design_;
  std::vector<int> outcome_col_;
  Eigen::VectorXd mean_, scale_;
  mutable Eigen::MatrixXd scores_, probs_;
};

// Maximum-likelihood fit by BFGS. Throws SingleClass when fewer than two
// outcome classes are present and NonConvergence when the gradient tolerance
// is not reached within the iteration budget.
inline BlendModel fit_blend(const std::vector<FeatureRow>& rows, const FitOptions& opts = {}) {
  BlendDesign design(rows, opts.ridge);

  optim::BfgsOptions bopts;
  bopts.grad_tol = opts.grad_tol;
  bopts.max_iterations = opts.max_iterations;
  auto result = optim::minimize_bfgs(std::ref(design),
                                     Eigen::VectorXd::Zero(kColumns * kOutcomeCols), bopts);

  BlendModel model;
  model.ridge = opts.ridge;
  model.feat_mean = design.mean();
  model.feat_scale = design.scale();
  model.coefficients =
      Eigen::Map<const Eigen::MatrixXd>(result.x.data(), kColumns, kOutcomeCols);
  model.converged = result.converged;
  model.final_grad_norm = result.grad_max_norm;
  model.iterations = result.iterations;
  model.objective_history = std::move(result.f_history);
  if (!result.converged) {
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%.3e", result.grad_max_norm);
    throw Error(Errc::non_convergence,
                std::string("blend fit stopped with gradient max-norm ") + detail);
  }
  return model;
}

inline BinProbs predict_blend(const BlendModel& model, const FeatureRow& row) {
  double s[kBaseFeatures];
  double x[kColumns];
  detail::standardized_base(row, model.feat_mean, model.feat_scale, s);
  detail::fill_columns(s, x);
  Eigen::Vector4d scores = Eigen::Vector4d::Zero();
  for (int c = 0; c < kColumns; ++c) {
    for (int k = 0; k < kOutcomeCols; ++k) scores(k) += x[c] * model.coefficients(c, k);
  }
  return detail::softmax_scores(scores);
}

// Coefficients re-expressed on the raw (unstandardized) monomial basis
// (1, pi, alpha, nu, pi*alpha, pi*nu, alpha*nu, pi*alpha*nu, beta, mu) per
// lead bin. predict_raw(destandardized_coefficients(m), row) reproduces
// predict_blend(m, row).
inline Eigen::MatrixXd destandardized_coefficients(const BlendModel& model) {
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(kColumns, kOutcomeCols);
  for (int j = 0; j < kLeadBins; ++j) {
    const double u_pi = 1.0 / model.feat_scale(0 * kLeadBins + j);
    const double v_pi = -model.feat_mean(0 * kLeadBins + j) * u_pi;
    const double u_al = 1.0 / model.feat_scale(1 * kLeadBins + j);
    const double v_al = -model.feat_mean(1 * kLeadBins + j) * u_al;
    const double u_nu = 1.0 / model.feat_scale(2 * kLeadBins + j);
    const double v_nu = -model.feat_mean(2 * kLeadBins + j) * u_nu;
    const double u_be = 1.0 / model.feat_scale(3 * kLeadBins + j);
    const double v_be = -model.feat_mean(3 * kLeadBins + j) * u_be;
    const double u_mu = 1.0 / model.feat_scale(4 * kLeadBins + j);
    const double v_mu = -model.feat_mean(4 * kLeadBins + j) * u_mu;
    auto col = [&](int l) { return l * kLeadBins + j; };
    for (int k = 0; k < kOutcomeCols; ++k) {
      const auto t = [&](int l) { return model.coefficients(col(l), k); };
      auto add = [&](int l, double v) { raw(col(l), k) += v; };
      add(0, t(0));
      add(1, t(1) * u_pi), add(0, t(1) * v_pi);
      add(2, t(2) * u_al), add(0, t(2) * v_al);
      add(3, t(3) * u_nu), add(0, t(3) * v_nu);
      add(4, t(4) * u_pi * u_al), add(1, t(4) * u_pi * v_al), add(2, t(4) * v_pi * u_al),
          add(0, t(4) * v_pi * v_al);
      add(5, t(5) * u_pi * u_nu), add(1, t(5) * u_pi * v_nu), add(3, t(5) * v_pi * u_nu),
          add(0, t(5) * v_pi * v_nu);
      add(6, t(6) * u_al * u_nu), add(2, t(6) * u_al * v_nu), add(3, t(6) * v_al * u_nu),
          add(0, t(6) * v_al * v_nu);
      add(7, t(7) * u_pi * u_al * u_nu), add(4, t(7) * u_pi * u_al * v_nu),
          add(5, t(7) * u_pi * v_al * u_nu), add(6, t(7) * v_pi * u_al * u_nu),
          add(1, t(7) * u_pi * v_al * v_nu), add(2, t(7) * v_pi * u_al * v_nu),
          add(3, t(7) * v_pi * v_al * u_nu), add(0, t(7) * v_pi * v_al * v_nu);
      add(8, t(8) * u_be), add(0, t(8) * v_be);
      add(9, t(9) * u_mu), add(0, t(9) * v_mu);
    }
  }
  return raw;
}

inline BinProbs predict_raw(const Eigen::MatrixXd& raw_coeffs, const FeatureRow& row) {
  Eigen::Vector4d scores = Eigen::Vector4d::Zero();
  for (int j = 0; j < kLeadBins; ++j) {
    const double pi = row.pi[static_cast<std::size_t>(j)];
    const double al = row.alpha[static_cast<std::size_t>(j)];
    const double nu = row.nu[static_cast<std::size_t>(j)];
    const double be = row.beta[static_cast<std::size_t>(j)];
    const double mu = row.mu[static_cast<std::size_t>(j)];
    const double terms[kTermsPerBin] = {1.0,     pi,      al,           nu, pi * al,
                                        pi * nu, al * nu, pi * al * nu, be, mu};
    for (int l = 0; l < kTermsPerBin; ++l) {
      for (int k = 0; k < kOutcomeCols; ++k) {
        scores(k) += terms[l] * raw_coeffs(l * kLeadBins + j, k);
      }
    }
  }
  return detail::softmax_scores(scores);
}

}  // namespace blend
}  // namespace onsetblend
