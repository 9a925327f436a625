#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "onsetblend/errors.hpp"
#include "onsetblend/rng.hpp"

namespace onsetblend {
namespace decision {

// Finite decision problem: actions x states payoff matrix and a prior over
// states. When an income matrix and a utility map are supplied, the payoff is
// their composition.
struct DecisionProblem {
  std::vector<std::vector<double>> payoff;                 // [action][state]
  std::optional<std::vector<std::vector<double>>> income;  // [action][state]
  std::function<double(double)> utility;                   // income -> utility
  std::vector<double> prior;

  std::size_t num_actions() const { return payoff.size(); }
  std::size_t num_states() const { return prior.size(); }

  void validate(double tol = 1e-9) const {
    if (payoff.empty() || prior.empty())
      throw Error(Errc::invalid_config, "decision problem needs actions and states");
    double mass = 0.0;
    for (double p : prior) {
      if (p < -tol || p > 1.0 + tol)
        throw Error(Errc::invalid_config, "prior probability outside [0,1]");
      mass += p;
    }
    if (std::abs(mass - 1.0) > tol)
      throw Error(Errc::invalid_config, "prior does not sum to 1");
    for (const auto& row : payoff) {
      if (row.size() != prior.size())
        throw Error(Errc::invalid_config, "payoff matrix shape mismatch");
      for (double g : row) {
        if (!std::isfinite(g)) throw Error(Errc::invalid_config, "non-finite payoff");
      }
    }
    if (income) {
      if (!utility) throw Error(Errc::invalid_config, "income matrix given without a utility map");
      if (income->size() != payoff.size())
        throw Error(Errc::invalid_config, "income matrix shape mismatch");
      for (std::size_t a = 0; a < payoff.size(); ++a) {
        if ((*income)[a].size() != prior.size())
          throw Error(Errc::invalid_config, "income matrix shape mismatch");
        for (std::size_t s = 0; s < prior.size(); ++s) {
          if (std::abs(utility((*income)[a][s]) - payoff[a][s]) > 1e-12)
            throw Error(Errc::invalid_config, "payoff is not utility(income)");
        }
      }
    }
  }
};

// Calibrated signal structure: a marginal over signals and a posterior over
// states per signal. Consistency with the prior (the posteriors average back
// to it) is the model's calibration requirement.
struct ForecastScheme {
  std::vector<double> signal_prob;
  std::vector<std::vector<double>> posterior;  // [signal][state]

  std::size_t num_signals() const { return signal_prob.size(); }

  void validate(const std::vector<double>& prior, double tol = 1e-9) const {
    if (signal_prob.empty() || posterior.size() != signal_prob.size())
      throw Error(Errc::inconsistent_scheme, "scheme shape mismatch");
    for (std::size_t s = 0; s < posterior.size(); ++s) {
      if (posterior[s].size() != prior.size())
        throw Error(Errc::inconsistent_scheme, "posterior dimension mismatch");
      double mass = 0.0;
      for (double p : posterior[s]) mass += p;
      if (std::abs(mass - 1.0) > tol)
        throw Error(Errc::inconsistent_scheme, "posterior does not sum to 1");
    }
    for (std::size_t w = 0; w < prior.size(); ++w) {
      double mixed = 0.0;
      for (std::size_t s = 0; s < posterior.size(); ++s)
        mixed += signal_prob[s] * posterior[s][w];
      if (std::abs(mixed - prior[w]) > tol)
        throw Error(Errc::inconsistent_scheme,
                    "posteriors do not average back to the prior (mis-calibrated scheme)");
    }
  }
};

inline double expected_payoff(const DecisionProblem& problem, std::size_t action,
                              const std::vector<double>& belief) {
  double value = 0.0;
  for (std::size_t w = 0; w < belief.size(); ++w) value += belief[w] * problem.payoff[action][w];
  return value;
}

// Expected-utility maximizer under a belief; ties break to the lowest action
// index.
inline std::size_t optimal_action(const DecisionProblem& problem,
                                  const std::vector<double>& belief) {
  std::size_t best = 0;
  double best_value = expected_payoff(problem, 0, belief);
  for (std::size_t a = 1; a < problem.num_actions(); ++a) {
    const double value = expected_payoff(problem, a, belief);
    if (value > best_value) {
      best = a;
      best_value = value;
    }
  }
  return best;
}

// Expected utility gain from acting on the scheme's posteriors instead of the
// prior (the value of the forecast scheme to this decision maker).
inline double scheme_value(const DecisionProblem& problem, const ForecastScheme& scheme) {
  problem.validate();
  scheme.validate(problem.prior);
  const std::size_t prior_action = optimal_action(problem, problem.prior);
  double gain = 0.0;
  for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
    const std::size_t posterior_action = optimal_action(problem, scheme.posterior[s]);
    for (std::size_t w = 0; w < problem.num_states(); ++w) {
      gain += scheme.signal_prob[s] * scheme.posterior[s][w] *
              (problem.payoff[posterior_action][w] - problem.payoff[prior_action][w]);
    }
  }
  return gain;
}

struct IncomeEffect {
  double utility_gain = 0.0;
  double income_change = 0.0;
};

// Joint effect of forecast-informed actions on expected utility and expected
// income. Risk-averse utilities allow the two to move in opposite directions.
inline IncomeEffect expected_income_effect(const DecisionProblem& problem,
                                           const ForecastScheme& scheme) {
  if (!problem.income) throw Error(Errc::missing_income, "problem has no income matrix");
  problem.validate();
  scheme.validate(problem.prior);
  const auto& income = *problem.income;
  const std::size_t prior_action = optimal_action(problem, problem.prior);
  IncomeEffect effect;
  for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
    const std::size_t posterior_action = optimal_action(problem, scheme.posterior[s]);
    for (std::size_t w = 0; w < problem.num_states(); ++w) {
      const double weight = scheme.signal_prob[s] * scheme.posterior[s][w];
      effect.utility_gain +=
          weight * (problem.payoff[posterior_action][w] - problem.payoff[prior_action][w]);
      effect.income_change += weight * (income[posterior_action][w] - income[prior_action][w]);
    }
  }
  return effect;
}

// Value of the probabilistic scheme vs a deterministic coarsening of it. The
// deterministic receiver best-responds to each message's induced posterior.
// Returns (value_probabilistic, value_deterministic); the first is never
// below the second (Blackwell direction).
inline std::pair<double, double> compare_probabilistic_vs_deterministic(
    const DecisionProblem& problem, const ForecastScheme& scheme,
    const std::vector<int>& coarsening) {
  problem.validate();
  scheme.validate(problem.prior);
  if (coarsening.size() != scheme.num_signals())
    throw Error(Errc::invalid_config, "coarsening must map every signal");

  int num_messages = 0;
  for (int m : coarsening) num_messages = std::max(num_messages, m + 1);
  std::vector<double> message_prob(static_cast<std::size_t>(num_messages), 0.0);
  std::vector<std::vector<double>> message_posterior(
      static_cast<std::size_t>(num_messages),
      std::vector<double>(problem.num_states(), 0.0));
  for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
    const auto m = static_cast<std::size_t>(coarsening[s]);
    message_prob[m] += scheme.signal_prob[s];
    for (std::size_t w = 0; w < problem.num_states(); ++w)
      message_posterior[m][w] += scheme.signal_prob[s] * scheme.posterior[s][w];
  }
  std::vector<std::size_t> message_action(static_cast<std::size_t>(num_messages));
  for (std::size_t m = 0; m < message_prob.size(); ++m) {
    if (message_prob[m] > 0.0) {
      for (auto& p : message_posterior[m]) p /= message_prob[m];
      message_action[m] = optimal_action(problem, message_posterior[m]);
    } else {
      message_action[m] = optimal_action(problem, problem.prior);
    }
  }

  const std::size_t prior_action = optimal_action(problem, problem.prior);
  double value_prob = 0.0, value_det = 0.0;
  for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
    const std::size_t full_action = optimal_action(problem, scheme.posterior[s]);
    const std::size_t det_action = message_action[static_cast<std::size_t>(coarsening[s])];
    for (std::size_t w = 0; w < problem.num_states(); ++w) {
      const double weight = scheme.signal_prob[s] * scheme.posterior[s][w];
      value_prob += weight * (problem.payoff[full_action][w] - problem.payoff[prior_action][w]);
      value_det += weight * (problem.payoff[det_action][w] - problem.payoff[prior_action][w]);
    }
  }
  return {value_prob, value_det};
}

struct ChangeBound {
  double expected_changes = 0.0;   // expected number of decision makers changing an action
  int strictly_benefiting = 0;     // those with strictly positive scheme value
};

// Decision-change lower bound across a population: the number who strictly
// benefit is at least the expected number who change a decision. Requires
// unique optima under the prior and every posterior; near-ties are rejected.
inline ChangeBound decision_change_bound(const std::vector<DecisionProblem>& problems,
                                         const std::vector<ForecastScheme>& schemes,
                                         double uniqueness_tol = 1e-9) {
  if (problems.size() != schemes.size())
    throw Error(Errc::invalid_config, "one scheme per problem required");
  auto require_unique = [&](const DecisionProblem& problem, const std::vector<double>& belief) {
    const std::size_t best = optimal_action(problem, belief);
    const double best_value = expected_payoff(problem, best, belief);
    for (std::size_t a = 0; a < problem.num_actions(); ++a) {
      if (a == best) continue;
      if (expected_payoff(problem, a, belief) >= best_value - uniqueness_tol)
        throw Error(Errc::non_unique_optimum, "optimal action not unique");
    }
    return best;
  };

  ChangeBound bound;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& problem = problems[i];
    const auto& scheme = schemes[i];
    problem.validate();
    scheme.validate(problem.prior);
    const std::size_t prior_action = require_unique(problem, problem.prior);
    double change_prob = 0.0;
    for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
      if (require_unique(problem, scheme.posterior[s]) != prior_action)
        change_prob += scheme.signal_prob[s];
    }
    bound.expected_changes += change_prob;
    if (scheme_value(problem, scheme) > 1e-12) bound.strictly_benefiting += 1;
  }
  return bound;
}

// The crop-insurance example: sqrt utility, 10% drought prior, incomes
// chosen so insurance is unattractive without further information.
inline DecisionProblem insurance_problem() {
  DecisionProblem problem;
  problem.income = {{
      {100.0, 0.0},  // no insurance: (no drought, drought)
      {81.0, 16.0},  // insurance
  }};
  problem.utility = [](double x) { return std::sqrt(x); };
  problem.payoff.resize(2, std::vector<double>(2));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t w = 0; w < 2; ++w) problem.payoff[a][w] = std::sqrt((*problem.income)[a][w]);
  problem.prior = {0.9, 0.1};
  return problem;
}

// 80% of the time the system signals no drought; 20% of the time it signals
// an elevated 50% drought risk.
inline ForecastScheme insurance_scheme() {
  ForecastScheme scheme;
  scheme.signal_prob = {0.8, 0.2};
  scheme.posterior = {{1.0, 0.0}, {0.5, 0.5}};
  return scheme;
}

// Random problem/scheme generators for the property sweeps.
inline DecisionProblem random_problem(Rng& rng, std::size_t max_actions = 4,
                                      std::size_t max_states = 4) {
  DecisionProblem problem;
  const std::size_t actions = 2 + rng.below(max_actions - 1);
  const std::size_t states = 2 + rng.below(max_states - 1);
  problem.payoff.assign(actions, std::vector<double>(states));
  for (auto& row : problem.payoff)
    for (auto& g : row) g = rng.uniform(-10.0, 10.0);
  problem.prior.assign(states, 0.0);
  double total = 0.0;
  for (auto& p : problem.prior) {
    p = rng.uniform(0.05, 1.0);
    total += p;
  }
  for (auto& p : problem.prior) p /= total;
  return problem;
}

// Consistent-by-construction scheme: random signal likelihoods per state,
// posteriors via Bayes against the problem's prior.
inline ForecastScheme random_scheme(const std::vector<double>& prior, Rng& rng,
                                    std::size_t max_signals = 4) {
  const std::size_t signals = 2 + rng.below(max_signals - 1);
  const std::size_t states = prior.size();
  std::vector<std::vector<double>> likelihood(states, std::vector<double>(signals));
  for (std::size_t w = 0; w < states; ++w) {
    double total = 0.0;
    for (auto& l : likelihood[w]) {
      l = rng.uniform(0.05, 1.0);
      total += l;
    }
    for (auto& l : likelihood[w]) l /= total;
  }
  ForecastScheme scheme;
  scheme.signal_prob.assign(signals, 0.0);
  scheme.posterior.assign(signals, std::vector<double>(states, 0.0));
  for (std::size_t s = 0; s < signals; ++s) {
    for (std::size_t w = 0; w < states; ++w)
      scheme.signal_prob[s] += prior[w] * likelihood[w][s];
    for (std::size_t w = 0; w < states; ++w)
      scheme.posterior[s][w] = prior[w] * likelihood[w][s] / scheme.signal_prob[s];
  }
  return scheme;
}

}  // namespace decision
}  // namespace onsetblend
