#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "onsetblend/errors.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace eval {

// One scored forecast: a probability vector and the observed outcome bin
// (1-based), with enough metadata for per-year decompositions.
struct ScoredForecast {
  std::vector<double> probs;
  int outcome = 0;
  std::string grid_id;
  Date init;
  int year = 0;
};

using ScoredSet = std::vector<ScoredForecast>;

inline ScoredForecast scored(const BinProbs& p, int outcome, std::string grid_id = {},
                             Date init = {}, int year = 0) {
  ScoredForecast f;
  f.probs.assign(p.p.begin(), p.p.end());
  f.outcome = outcome;
  f.grid_id = std::move(grid_id);
  f.init = init;
  f.year = year;
  return f;
}

// Brier score: mean over forecasts of the squared error summed over bins.
inline double brier(const ScoredSet& set) {
  if (set.empty()) throw Error(Errc::empty_set, "brier of empty set");
  double total = 0.0;
  for (const auto& f : set) {
    for (std::size_t j = 0; j < f.probs.size(); ++j) {
      const double y = (static_cast<int>(j) + 1 == f.outcome) ? 1.0 : 0.0;
      const double d = y - f.probs[j];
      total += d * d;
    }
  }
  return total / static_cast<double>(set.size());
}

// Ranked probability score: squared error of the cumulative distributions.
inline double rps(const ScoredSet& set) {
  if (set.empty()) throw Error(Errc::empty_set, "rps of empty set");
  double total = 0.0;
  for (const auto& f : set) {
    double cum = 0.0;
    for (std::size_t k = 0; k < f.probs.size(); ++k) {
      const double y = (static_cast<int>(k) + 1 == f.outcome) ? 1.0 : 0.0;
      cum += y - f.probs[k];
      total += cum * cum;
    }
  }
  return total / static_cast<double>(set.size());
}

// Binary Brier score restricted to one bin (1-based), as used for the
// per-lead decomposition.
inline double binary_brier(const ScoredSet& set, int bin) {
  if (set.empty()) throw Error(Errc::empty_set, "brier of empty set");
  double total = 0.0;
  for (const auto& f : set) {
    const double y = (f.outcome == bin) ? 1.0 : 0.0;
    const double d = y - f.probs[static_cast<std::size_t>(bin - 1)];
    total += d * d;
  }
  return total / static_cast<double>(set.size());
}

enum class TiePolicy { strict, half };

// AUC over pooled forecast-bin pairs: each (forecast, bin) is a binary case
// with score p and label 1 iff the outcome fell in that bin. `strict` counts
// only strictly higher positive scores; `half` credits ties 0.5.
inline double auc_pairs(const std::vector<std::pair<double, bool>>& cases, TiePolicy policy) {
  std::vector<std::pair<double, bool>> sorted = cases;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positives = 0.0, negatives = 0.0;
  for (const auto& c : sorted) (c.second ? positives : negatives) += 1.0;
  if (positives == 0.0) throw Error(Errc::no_positives, "no occurred forecast-bin pairs");
  if (negatives == 0.0) throw Error(Errc::no_negatives, "no non-occurred forecast-bin pairs");

  double greater = 0.0;  // (positive, negative) pairs with p_pos > p_neg
  double tied = 0.0;
  double negatives_below = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    double group_pos = 0.0, group_neg = 0.0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      (sorted[j].second ? group_pos : group_neg) += 1.0;
      ++j;
    }
    greater += group_pos * negatives_below;
    tied += group_pos * group_neg;
    negatives_below += group_neg;
    i = j;
  }
  const double denom = positives * negatives;
  return policy == TiePolicy::strict ? greater / denom : (greater + 0.5 * tied) / denom;
}

inline std::vector<std::pair<double, bool>> forecast_bin_cases(const ScoredSet& set,
                                                               std::optional<int> only_bin = {}) {
  std::vector<std::pair<double, bool>> cases;
  for (const auto& f : set) {
    for (std::size_t j = 0; j < f.probs.size(); ++j) {
      const int bin = static_cast<int>(j) + 1;
      if (only_bin && bin != *only_bin) continue;
      cases.emplace_back(f.probs[j], f.outcome == bin);
    }
  }
  return cases;
}

inline double auc(const ScoredSet& set, TiePolicy policy = TiePolicy::half) {
  if (set.empty()) throw Error(Errc::empty_set, "auc of empty set");
  return auc_pairs(forecast_bin_cases(set), policy);
}

// Skill relative to a climatology value of the same metric: 1 - x/x_clim.
inline double skill(double metric_value, double climatology_value) {
  if (!(climatology_value > 0.0))
    throw Error(Errc::zero_climatology_score, "climatology score must be > 0");
  return 1.0 - metric_value / climatology_value;
}

struct ReliabilityDecile {
  double mean_predicted = 0.0;
  double observed_frequency = 0.0;
  std::size_t count = 0;
};

struct Reliability {
  std::vector<ReliabilityDecile> deciles;        // 10 equal-count groups by p
  std::array<std::size_t, 10> histogram_counts;  // p in [0,.1), ..., [.9,1]
  std::array<double, 10> histogram_heights;      // normalized: first bin == 1
};

// Decile reliability table plus the probability histogram. Forecast-bin pairs
// are sorted by (p, insertion index); the histogram is normalized so the
// [0, 0.1) bin has height one (falling back to the tallest bin when that bin
// is empty).
inline Reliability reliability(const ScoredSet& set) {
  if (set.empty()) throw Error(Errc::empty_set, "reliability of empty set");
  struct Pair {
    double p;
    bool hit;
    std::size_t order;
  };
  std::vector<Pair> pairs;
  pairs.reserve(set.size() * kNumBins);
  std::size_t order = 0;
  for (const auto& f : set) {
    for (std::size_t j = 0; j < f.probs.size(); ++j) {
      pairs.push_back({f.probs[j], f.outcome == static_cast<int>(j) + 1, order++});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.order < b.order;
  });

  Reliability rel;
  const std::size_t n = pairs.size();
  const std::size_t base = n / 10;
  const std::size_t remainder = n % 10;
  std::size_t pos = 0;
  for (std::size_t d = 0; d < 10; ++d) {
    const std::size_t size = base + (d < remainder ? 1 : 0);
    ReliabilityDecile dec;
    dec.count = size;
    for (std::size_t i = 0; i < size; ++i, ++pos) {
      dec.mean_predicted += pairs[pos].p;
      dec.observed_frequency += pairs[pos].hit ? 1.0 : 0.0;
    }
    if (size > 0) {
      dec.mean_predicted /= static_cast<double>(size);
      dec.observed_frequency /= static_cast<double>(size);
    }
    rel.deciles.push_back(dec);
  }

  rel.histogram_counts.fill(0);
  for (const auto& pr : pairs) {
    auto idx = static_cast<std::size_t>(std::min(9.0, std::floor(pr.p * 10.0)));
    rel.histogram_counts[idx] += 1;
  }
  double ref = static_cast<double>(rel.histogram_counts[0]);
  if (ref == 0.0)
    ref = static_cast<double>(*std::max_element(rel.histogram_counts.begin(),
                                                rel.histogram_counts.end()));
  for (std::size_t b = 0; b < 10; ++b) {
    rel.histogram_heights[b] =
        ref > 0.0 ? static_cast<double>(rel.histogram_counts[b]) / ref : 0.0;
  }
  return rel;
}

struct PerLeadScores {
  int bin = 0;
  double brier = 0.0;
  double bss = 0.0;
  std::optional<double> auc;  // absent when the bin never/always occurred
};

struct PerYearScores {
  int year = 0;
  double brier = 0.0;
  double bss = 0.0;
  std::optional<double> auc;
  std::size_t count = 0;
};

struct PerGridScores {
  std::string grid_id;
  double brier = 0.0;
  double bss = 0.0;
  std::optional<double> auc;
  std::size_t count = 0;
};

struct EvalReport {
  double brier = 0.0;
  double rps = 0.0;
  double auc = 0.0;
  double bss = 0.0;
  double rpss = 0.0;
  std::vector<PerLeadScores> per_lead;
  std::vector<PerYearScores> per_year;
  std::vector<PerGridScores> per_grid;
  Reliability reliability;
};

// Full verification report for a model against the static-climatology
// baseline scored on the same instances.
inline EvalReport evaluate(const ScoredSet& model, const ScoredSet& climatology,
                           TiePolicy policy = TiePolicy::half) {
  if (model.size() != climatology.size())
    throw Error(Errc::invalid_config, "model and climatology sets differ in size");
  EvalReport report;
  report.brier = brier(model);
  report.rps = rps(model);
  report.auc = auc(model, policy);
  report.bss = skill(report.brier, brier(climatology));
  report.rpss = skill(report.rps, rps(climatology));
  report.reliability = reliability(model);

  for (int bin = 1; bin <= kNumBins; ++bin) {
    PerLeadScores lead;
    lead.bin = bin;
    lead.brier = binary_brier(model, bin);
    lead.bss = skill(lead.brier, binary_brier(climatology, bin));
    try {
      lead.auc = auc_pairs(forecast_bin_cases(model, bin), policy);
    } catch (const Error&) {
      lead.auc.reset();
    }
    report.per_lead.push_back(lead);
  }

  std::map<int, ScoredSet> model_by_year, clim_by_year;
  std::map<std::string, ScoredSet> model_by_grid, clim_by_grid;
  for (std::size_t i = 0; i < model.size(); ++i) {
    model_by_year[model[i].year].push_back(model[i]);
    clim_by_year[model[i].year].push_back(climatology[i]);
    model_by_grid[model[i].grid_id].push_back(model[i]);
    clim_by_grid[model[i].grid_id].push_back(climatology[i]);
  }
  for (const auto& [year, subset] : model_by_year) {
    PerYearScores ys;
    ys.year = year;
    ys.count = subset.size();
    ys.brier = brier(subset);
    ys.bss = skill(ys.brier, brier(clim_by_year[year]));
    try {
      ys.auc = auc(subset, policy);
    } catch (const Error&) {
      ys.auc.reset();
    }
    report.per_year.push_back(ys);
  }
  for (const auto& [grid, subset] : model_by_grid) {
    PerGridScores gs;
    gs.grid_id = grid;
    gs.count = subset.size();
    gs.brier = brier(subset);
    gs.bss = skill(gs.brier, brier(clim_by_grid[grid]));
    try {
      gs.auc = auc(subset, policy);
    } catch (const Error&) {
      gs.auc.reset();
    }
    report.per_grid.push_back(gs);
  }
  return report;
}

// Leave-one-year-out harness. For each distinct year, `train` receives every
// instance from the other years and returns a model state; `predict` maps
// (state, instance) to probabilities. The scored output carries each
// instance's own metadata, concatenated in year order.
template <class Instance, class TrainFn, class PredictFn>
ScoredSet leave_one_year_out(const std::vector<Instance>& instances, TrainFn&& train,
                             PredictFn&& predict) {
  std::vector<int> years;
  for (const auto& inst : instances) years.push_back(inst.year);
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  if (years.size() < 2)
    throw Error(Errc::invalid_config, "leave-one-year-out needs at least two years");

  ScoredSet out;
  for (int held_out : years) {
    std::vector<Instance> train_set;
    for (const auto& inst : instances) {
      if (inst.year != held_out) train_set.push_back(inst);
    }
    auto state = train(train_set);
    for (const auto& inst : instances) {
      if (inst.year != held_out) continue;
      out.push_back(scored(predict(state, inst), inst.outcome, inst.grid_id, inst.init,
                           inst.year));
    }
  }
  return out;
}

}  // namespace eval
}  // namespace onsetblend
