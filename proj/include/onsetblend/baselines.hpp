#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "onsetblend/blend.hpp"
#include "onsetblend/errors.hpp"
#include "onsetblend/eval.hpp"
#include "onsetblend/onset.hpp"
#include "onsetblend/optim.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace baselines {

// Raw ensemble onset probabilities: the fraction of members whose forecast
// trajectory triggers onset in each bin. Deterministic models (one member)
// produce one-hot vectors.
inline BinProbs raw_model_bin_probs(const DailyRainSeries& pre_init_truth,
                                    const ForecastEnsemble& ensemble,
                                    const onset::OnsetConfig& config,
                                    std::optional<Date> mok_date = std::nullopt) {
  if (config.mok_policy.kind == MokKind::true_mok && !mok_date)
    throw Error(Errc::invalid_config,
                "raw model evaluation needs ClimMok/NoFilter or an explicit MOK date");
  BinProbs probs;
  std::vector<double> member(ensemble.lead_days);
  for (std::size_t m = 0; m < ensemble.members; ++m) {
    for (std::size_t l = 1; l <= ensemble.lead_days; ++l) member[l - 1] = ensemble.at(m, l);
    const int bin = onset::detect_forecast_onset(pre_init_truth, member, ensemble.init, config,
                                                 mok_date);
    probs[static_cast<std::size_t>(bin - 1)] += 1.0;
  }
  for (auto& p : probs.p) p /= static_cast<double>(ensemble.members);
  return probs;
}

struct PlattBin {
  double a = 1.0;
  double b = 0.0;
  bool degenerate = false;  // bin never/always occurred in training -> passthrough
};

struct PlattParams {
  std::array<PlattBin, kNumBins> bins;
};

namespace detail {

// Two-parameter logistic MLE: Newton direction with backtracking on the
// convex negative log-likelihood. Winsorized-logit scores sit at extreme
// values for deterministic components, where an undamped Newton step
// overshoots badly.
inline PlattBin fit_logistic(const std::vector<double>& scores, const std::vector<bool>& labels) {
  PlattBin fit;
  std::size_t positives = 0;
  for (bool l : labels) positives += l ? 1 : 0;
  if (positives == 0 || positives == labels.size()) {
    fit.degenerate = true;
    return fit;
  }

  auto nll_at = [&](double a, double b) {
    double nll = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      // log(1 + exp(z)) - y z, overflow-safe
      nll += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - (labels[i] ? z : 0.0);
    }
    return nll;
  };

  double a = 1.0, b = 0.0;
  double nll = nll_at(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double e = p - (labels[i] ? 1.0 : 0.0);
      const double w = std::max(p * (1.0 - p), 1e-12);
      ga += e * scores[i];
      gb += e;
      haa += w * scores[i] * scores[i];
      hab += w * scores[i];
      hbb += w;
    }
    if (std::max(std::abs(ga), std::abs(gb)) < 1e-10) break;
    const double det = haa * hbb - hab * hab;
    if (!(det > 1e-30)) break;
    const double da = -(ga * hbb - gb * hab) / det;
    const double db = -(gb * haa - ga * hab) / det;
    double step = 1.0;
    bool accepted = false;
    while (step > 1e-12) {
      const double trial = nll_at(a + step * da, b + step * db);
      if (trial <= nll + 1e-12) {
        a += step * da;
        b += step * db;
        nll = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  fit.a = a;
  fit.b = b;
  return fit;
}

}  // namespace detail

// Per-bin Platt scaling fitted on winsorized-logit scores of the raw
// probabilities against the occurred/not indicator.
inline PlattParams platt_fit(const std::vector<BinProbs>& raw_probs,
                             const std::vector<int>& outcomes) {
  if (raw_probs.size() != outcomes.size() || raw_probs.empty())
    throw Error(Errc::invalid_config, "platt_fit needs aligned, nonempty inputs");
  PlattParams params;
  for (int bin = 1; bin <= kNumBins; ++bin) {
    std::vector<double> scores;
    std::vector<bool> labels;
    scores.reserve(raw_probs.size());
    for (std::size_t i = 0; i < raw_probs.size(); ++i) {
      scores.push_back(blend::winsorize_logit(raw_probs[i][static_cast<std::size_t>(bin - 1)]));
      labels.push_back(outcomes[i] == bin);
    }
    params.bins[static_cast<std::size_t>(bin - 1)] = detail::fit_logistic(scores, labels);
  }
  return params;
}

// Apply per-bin calibration and renormalize to a proper distribution.
inline BinProbs platt_apply(const PlattParams& params, const BinProbs& raw) {
  BinProbs out;
  for (std::size_t j = 0; j < kNumBins; ++j) {
    const auto& bin = params.bins[j];
    const double s = blend::winsorize_logit(raw[j]);
    const double z = bin.a * s + bin.b;
    out[j] = 1.0 / (1.0 + std::exp(-z));
  }
  const double total = out.sum();
  if (!(total > 0.0)) throw Error(Errc::invalid_config, "calibrated probabilities sum to zero");
  for (auto& p : out.p) p /= total;
  return out;
}

struct EnsembleWeights {
  std::vector<double> w;
  double rpss = 0.0;
  bool refined = true;  // false when BFGS did not reach tolerance (grid result kept)
};

// Convex combination of component probability vectors.
inline BinProbs mme_predict(const std::vector<double>& weights,
                            const std::vector<BinProbs>& component_probs) {
  if (weights.size() != component_probs.size() || weights.empty())
    throw Error(Errc::invalid_config, "weights and components must align");
  BinProbs out;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (std::size_t j = 0; j < kNumBins; ++j) out[j] += weights[k] * component_probs[k][j];
  }
  return out;
}

namespace detail {

// All K-part compositions of `steps` (weights in 1/steps increments), in
// lexicographic order of the weight vector.
inline void enumerate_compositions(int parts, int steps, std::vector<int>& current,
                                   std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(steps);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int take = 0; take <= steps; ++take) {
    current.push_back(take);
    enumerate_compositions(parts - 1, steps - take, current, out);
    current.pop_back();
  }
}

inline double mean_rps_of_weights(const std::vector<double>& w,
                                  const std::vector<std::vector<BinProbs>>& components,
                                  const std::vector<int>& outcomes) {
  const std::size_t n = outcomes.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cum = 0.0;
    for (std::size_t j = 0; j < kNumBins; ++j) {
      double p = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) p += w[k] * components[k][i][j];
      const double y = (static_cast<int>(j) + 1 == outcomes[i]) ? 1.0 : 0.0;
      cum += y - p;
      total += cum * cum;
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace detail

// Post-hoc ensemble weights maximizing the RPSS of the weighted-average
// probabilities: exhaustive grid search at 0.1 resolution (lexicographic
// tie-break), then BFGS refinement on a softmax reparameterization of the
// simplex starting from the best grid point.
inline EnsembleWeights optimize_mme_weights(const std::vector<std::vector<BinProbs>>& components,
                                            const std::vector<int>& outcomes,
                                            double climatology_rps_value) {
  const std::size_t k = components.size();
  if (k < 2) throw Error(Errc::invalid_config, "need at least two component models");
  for (const auto& comp : components) {
    if (comp.size() != outcomes.size())
      throw Error(Errc::invalid_config, "component predictions must align with outcomes");
  }
  if (outcomes.empty()) throw Error(Errc::empty_set, "no outcomes to optimize against");
  if (!(climatology_rps_value > 0.0))
    throw Error(Errc::zero_climatology_score, "climatology RPS must be > 0");

  std::vector<std::vector<int>> grid;
  std::vector<int> scratch;
  detail::enumerate_compositions(static_cast<int>(k), 10, scratch, grid);

  // Near-ties (floating noise between mathematically equal mixtures) keep the
  // first, i.e. lexicographically smallest, grid point.
  constexpr double kTieTol = 1e-12;
  std::vector<double> best_w;
  double best_rps = 1e300;
  for (const auto& point : grid) {
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = point[i] / 10.0;
    const double value = detail::mean_rps_of_weights(w, components, outcomes);
    if (value < best_rps - kTieTol) {
      best_rps = value;
      best_w = w;
    }
  }

  // Softmax reparameterization keeps iterates on the simplex.
  const std::size_t n = outcomes.size();
  auto objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    const double zmax = z.maxCoeff();
    Eigen::VectorXd w = (z.array() - zmax).exp();
    w /= w.sum();
    Eigen::VectorXd dw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double cum_diff = 0.0;
      Eigen::VectorXd cum_comp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < kNumBins; ++j) {
        double p = 0.0;
        for (std::size_t c = 0; c < k; ++c) p += w(static_cast<Eigen::Index>(c)) * components[c][i][j];
        const double y = (static_cast<int>(j) + 1 == outcomes[i]) ? 1.0 : 0.0;
        cum_diff += y - p;
        for (std::size_t c = 0; c < k; ++c)
          cum_comp(static_cast<Eigen::Index>(c)) += components[c][i][j];
        total += cum_diff * cum_diff;
        dw -= 2.0 * cum_diff * cum_comp;
      }
    }
    total /= static_cast<double>(n);
    dw /= static_cast<double>(n);
    const double wg = w.dot(dw);
    grad = w.array() * (dw.array() - wg);
    return total;
  };

  Eigen::VectorXd z0(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    z0(static_cast<Eigen::Index>(i)) = std::log(std::max(best_w[i], 1e-4));
  optim::BfgsOptions opts;
  opts.grad_tol = 1e-8;
  opts.max_iterations = 300;
  auto result = optim::minimize_bfgs(objective, z0, opts);

  EnsembleWeights out;
  out.w = best_w;
  double final_rps = best_rps;
  if (result.f < best_rps - kTieTol) {
    const double zmax = result.x.maxCoeff();
    Eigen::VectorXd w = (result.x.array() - zmax).exp();
    w /= w.sum();
    out.w.assign(w.data(), w.data() + w.size());
    final_rps = result.f;
  }
  out.refined = result.converged;
  out.rpss = 1.0 - final_rps / climatology_rps_value;
  return out;
}

}  // namespace baselines
}  // namespace onsetblend
