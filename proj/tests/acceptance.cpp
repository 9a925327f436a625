// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code and checks its runtime
// budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "onsetblend/baselines.hpp"
#include "onsetblend/blend.hpp"
#include "onsetblend/climatology.hpp"
#include "onsetblend/csv.hpp"
#include "onsetblend/decision.hpp"
#include "onsetblend/eval.hpp"
#include "onsetblend/ingest.hpp"
#include "onsetblend/onset.hpp"
#include "onsetblend/pipeline.hpp"
#include "onsetblend/rng.hpp"
#include "support/onset_oracle.hpp"

using namespace onsetblend;

namespace {

struct Criterion {
  std::vector<std::string> failures;

  void expect(bool condition, const std::string& message) {
    if (!condition) failures.push_back(message);
  }
  void expect_near(double actual, double wanted, double tol, const std::string& label) {
    if (!(std::abs(actual - wanted) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: got %.12g, wanted %.12g (tol %.3g)", label.c_str(),
                    actual, wanted, tol);
      failures.push_back(buf);
    }
  }
};

int g_failed = 0;

void run_criterion(int number, const std::string& name, double time_limit_s,
                   const std::function<void(Criterion&)>& body) {
  Criterion crit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(crit);
  } catch (const std::exception& e) {
    crit.failures.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0.0 && elapsed > time_limit_s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "runtime %.1f s exceeded the %.0f s budget", elapsed,
                  time_limit_s);
    crit.failures.push_back(buf);
  }
  if (crit.failures.empty()) {
    std::printf("PASS criterion %d: %s (%.2f s)\n", number, name.c_str(), elapsed);
  } else {
    ++g_failed;
    std::printf("FAIL criterion %d: %s (%.2f s)\n", number, name.c_str(), elapsed);
    for (const auto& failure : crit.failures) std::printf("     - %s\n", failure.c_str());
  }
  std::fflush(stdout);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

BinProbs softmax_probs(Rng& rng, double sigma) {
  BinProbs p;
  double total = 0.0;
  for (auto& v : p.p) {
    v = std::exp(rng.normal(0.0, sigma));
    total += v;
  }
  for (auto& v : p.p) v /= total;
  return p;
}

int sample_outcome(const BinProbs& q, Rng& rng) {
  double u = rng.uniform();
  for (int bin = 1; bin <= 5; ++bin) {
    u -= q[static_cast<std::size_t>(bin - 1)];
    if (u <= 0.0) return bin;
  }
  return 5;
}

blend::FeatureRow random_feature_row(Rng& rng) {
  blend::FeatureRow row;
  for (int j = 0; j < 4; ++j) {
    const auto js = static_cast<std::size_t>(j);
    row.pi[js] = rng.normal(0.0, 1.0);
    row.alpha[js] = rng.normal(0.0, 1.0);
    row.nu[js] = rng.normal(0.0, 1.0);
    row.beta[js] = rng.normal(0.0, 1.0);
    row.mu[js] = rng.normal(0.0, 1.0);
  }
  row.outcome = 1 + static_cast<int>(rng.below(5));
  return row;
}

double oracle_auc(const std::vector<std::pair<double, bool>>& cases, eval::TiePolicy policy) {
  double greater = 0.0, tied = 0.0, positives = 0.0, negatives = 0.0;
  for (const auto& pos : cases) {
    if (!pos.second) continue;
    positives += 1.0;
    for (const auto& neg : cases) {
      if (neg.second) continue;
      if (pos.first > neg.first) greater += 1.0;
      else if (pos.first == neg.first) tied += 1.0;
    }
  }
  for (const auto& c : cases)
    if (!c.second) negatives += 1.0;
  return (greater + (policy == eval::TiePolicy::half ? 0.5 * tied : 0.0)) /
         (positives * negatives);
}

eval::ScoredForecast scored2(std::vector<double> probs, int outcome) {
  eval::ScoredForecast f;
  f.probs = std::move(probs);
  f.outcome = outcome;
  return f;
}

// Shared world results between criteria 6 and 7.
struct WorldResults {
  pipeline::PipelineOutputs loocv;
  pipeline::PipelineOutputs split;
};
std::optional<WorldResults> g_world;

pipeline::RunConfig acceptance_world_config() {
  pipeline::RunConfig cfg;
  cfg.synth.seed = 20250601;
  cfg.synth.n_years = 30;
  cfg.synth.start_year = 1995;
  cfg.synth.n_cells = 3;
  cfg.synth.members_a = 1;
  cfg.synth.members_b = 10;
  cfg.synth.rho = {0.9, 0.6, 0.3, 0.1};
  cfg.ridge = 1e-3;  // ~1.2k rows for 160 coefficients wants real regularization
  cfg.out_dir = "acceptance_world";
  return cfg;
}

void criterion1(Criterion& c) {
  using namespace decision;
  const auto problem = insurance_problem();
  const auto scheme = insurance_scheme();
  c.expect_near((*problem.income)[0][0], 100.0, 0.0, "income(no-ins, no drought)");
  c.expect_near((*problem.income)[0][1], 0.0, 0.0, "income(no-ins, drought)");
  c.expect_near((*problem.income)[1][0], 81.0, 0.0, "income(ins, no drought)");
  c.expect_near((*problem.income)[1][1], 16.0, 0.0, "income(ins, drought)");

  const double eu_no_ins = expected_payoff(problem, 0, problem.prior);
  const double eu_ins = expected_payoff(problem, 1, problem.prior);
  c.expect_near(eu_no_ins, 9.0, 1e-9, "EU(no insurance)");
  c.expect_near(eu_ins, 8.5, 1e-9, "EU(insurance)");

  double income_no_ins = 0.0, income_ins = 0.0;
  for (std::size_t w = 0; w < 2; ++w) {
    income_no_ins += problem.prior[w] * (*problem.income)[0][w];
    income_ins += problem.prior[w] * (*problem.income)[1][w];
  }
  c.expect_near(income_no_ins, 90.0, 1e-9, "E[income | no insurance]");
  c.expect_near(income_ins, 74.5, 1e-9, "E[income | insurance]");

  const double gain = scheme_value(problem, scheme);
  c.expect_near(eu_no_ins + gain, 9.3, 1e-9, "EU(forecast-informed)");
  const auto effect = expected_income_effect(problem, scheme);
  c.expect_near(income_no_ins + effect.income_change, 89.7, 0.05, "E[income | forecast]");
}

void criterion2(Criterion& c) {
  c.expect_near(eval::brier({scored2({1, 0, 0, 0, 0}, 1)}), 0.0, 0.0, "brier perfect");
  c.expect_near(eval::brier({scored2({0.6, 0.4, 0, 0, 0}, 1)}), 0.32, 1e-15, "brier 0.32");
  c.expect_near(eval::brier({scored2({0.2, 0.2, 0.2, 0.2, 0.2}, 1)}), 0.80, 1e-15, "brier 0.80");
  c.expect_near(eval::rps({scored2({0, 0, 1, 0, 0}, 3)}), 0.0, 0.0, "rps perfect");
  c.expect_near(eval::rps({scored2({0.6, 0.4, 0, 0, 0}, 1)}), 0.16, 1e-15, "rps 0.16");
  c.expect_near(eval::rps({scored2({0.2, 0.2, 0.2, 0.2, 0.2}, 1)}), 1.20, 1e-15, "rps 1.20");

  using Cases = std::vector<std::pair<double, bool>>;
  c.expect(eval::auc_pairs(Cases{{0.7, true}, {0.3, false}}, eval::TiePolicy::half) == 1.0,
           "auc separated");
  c.expect(eval::auc_pairs(Cases{{0.5, true}, {0.5, false}}, eval::TiePolicy::strict) == 0.0,
           "auc tie strict");
  c.expect(eval::auc_pairs(Cases{{0.5, true}, {0.5, false}}, eval::TiePolicy::half) == 0.5,
           "auc tie half");
  c.expect_near(eval::auc_pairs(Cases{{0.9, true}, {0.6, true}, {0.4, false}, {0.7, false}},
                                eval::TiePolicy::strict),
                0.75, 0.0, "auc 0.75");

  Rng rng(1002);
  int exercised = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Cases cases;
    const int n = 2 + static_cast<int>(rng.below(60));
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      const double p = static_cast<double>(rng.below(15)) / 15.0;
      const bool label = rng.uniform() < 0.5;
      has_pos |= label;
      has_neg |= !label;
      cases.emplace_back(p, label);
    }
    if (!has_pos || !has_neg) continue;
    ++exercised;
    c.expect(eval::auc_pairs(cases, eval::TiePolicy::strict) ==
                 oracle_auc(cases, eval::TiePolicy::strict),
             "fast strict AUC != oracle on set " + std::to_string(trial));
    c.expect(eval::auc_pairs(cases, eval::TiePolicy::half) ==
                 oracle_auc(cases, eval::TiePolicy::half),
             "fast half AUC != oracle on set " + std::to_string(trial));
  }
  c.expect(exercised > 450, "AUC oracle sweep under-sampled");

  // Two-bin Brier-RPS identity: RPS equals the single-bin Brier score, and
  // the all-bins Brier (Eq. 1 convention) is exactly twice the RPS.
  for (int trial = 0; trial < 300; ++trial) {
    eval::ScoredSet set;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      const double p = rng.uniform();
      set.push_back(scored2({p, 1.0 - p}, 1 + static_cast<int>(rng.below(2))));
    }
    const double rps_value = eval::rps(set);
    c.expect(std::abs(eval::binary_brier(set, 1) - rps_value) <= 1e-12,
             "two-bin RPS != binary Brier");
    c.expect(std::abs(eval::brier(set) - 2.0 * rps_value) <= 1e-12,
             "two-bin Brier != 2 x RPS");
  }
}

void criterion3(Criterion& c) {
  Rng rng(77031);
  int present = 0, absent = 0;
  std::array<int, 3> variant_count{};
  for (int trial = 0; trial < 1000; ++trial) {
    const int length = 150 + static_cast<int>(rng.below(120));
    DailyRainSeries series;
    series.grid_id = "g";
    series.start = Date::from_ymd(2000, 4, 1);
    series.values.resize(static_cast<std::size_t>(length));
    for (auto& v : series.values) {
      const double u = rng.uniform();
      if (u < 0.45) v = 0.0;
      else if (u < 0.75) v = rng.uniform(0.0, 3.0);
      else v = rng.uniform(0.0, 15.0);
    }
    onset::OnsetConfig cfg;
    cfg.spell_total_mm = rng.uniform(15.0, 35.0);
    std::optional<Date> mok;
    const int variant = static_cast<int>(rng.below(3));
    ++variant_count[static_cast<std::size_t>(variant)];
    if (variant == 0) {
      cfg.mok_policy = MokPolicy::none();
      cfg.season_start = MonthDay{5, 1};
    } else if (variant == 1) {
      cfg.mok_policy = MokPolicy::clim_mok(MonthDay{6, static_cast<unsigned>(1 + rng.below(2))});
    } else {
      cfg.mok_policy = MokPolicy::true_mok();
      mok = Date::from_ymd(2000, 5, 1) + static_cast<int>(rng.below(60));
    }

    const auto expected = testing::oracle_detect(series, cfg, mok, 2000);
    if (std::holds_alternative<testing::OracleTooShort>(expected)) {
      try {
        onset::detect_onset(series, cfg, mok);
        c.expect(false, "missing SeriesTooShort on trial " + std::to_string(trial));
      } catch (const Error&) {
      }
      continue;
    }
    const auto detected = onset::detect_onset(series, cfg, mok);
    if (std::holds_alternative<Date>(expected)) {
      ++present;
      c.expect(detected.has_value() && *detected == std::get<Date>(expected),
               "onset mismatch on trial " + std::to_string(trial));
    } else {
      ++absent;
      c.expect(!detected.has_value(), "spurious onset on trial " + std::to_string(trial));
    }
  }
  c.expect(present > 100, "too few onset-present cases");
  c.expect(absent > 100, "too few onset-absent cases");
  for (int count : variant_count) c.expect(count > 200, "a MOK variant was under-sampled");
}

void criterion4(Criterion& c) {
  Rng rng(40001);
  {
    std::vector<blend::FeatureRow> rows;
    for (int i = 0; i < 50; ++i) rows.push_back(random_feature_row(rng));
    const blend::BlendDesign design(rows, 1e-6);
    Eigen::VectorXd theta(blend::kColumns * blend::kOutcomeCols);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal(0.0, 0.3);
    Eigen::VectorXd grad, dummy;
    design(theta, grad);
    const double h = 1e-5;
    double max_err = 0.0;
    Eigen::VectorXd probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      probe(i) = theta(i) + h;
      const double up = design(probe, dummy);
      probe(i) = theta(i) - h;
      const double down = design(probe, dummy);
      probe(i) = theta(i);
      const double fd = (up - down) / (2.0 * h);
      max_err = std::max(max_err, std::abs(fd - grad(i)) /
                                      std::max({1.0, std::abs(fd), std::abs(grad(i))}));
    }
    c.expect(max_err < 1e-6,
             "gradient vs central differences: max relative error " + std::to_string(max_err));
  }
  {
    std::vector<blend::FeatureRow> rows;
    const std::array<int, 5> counts = {100, 200, 300, 200, 200};
    for (int bin = 1; bin <= 5; ++bin) {
      for (int i = 0; i < counts[static_cast<std::size_t>(bin - 1)]; ++i) {
        blend::FeatureRow row;
        row.outcome = bin;
        rows.push_back(row);
      }
    }
    blend::FitOptions opts;
    opts.ridge = 0.0;
    const auto model = blend::fit_blend(rows, opts);
    const auto probs = blend::predict_blend(model, rows.front());
    const std::array<double, 5> freq = {0.1, 0.2, 0.3, 0.2, 0.2};
    for (std::size_t j = 0; j < 5; ++j)
      c.expect_near(probs[j], freq[j], 1e-6, "intercept-only frequency bin " + std::to_string(j + 1));
  }
  {
    const double spread = 2.5;
    auto term_scale = [&](int l) {
      if (l == 0) return 1.0;
      if (l == 4 || l == 5 || l == 6) return spread * spread;
      if (l == 7) return spread * spread * spread;
      return spread;
    };
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(blend::kColumns, blend::kOutcomeCols);
    for (int k = 0; k < blend::kOutcomeCols; ++k) {
      const double intercept = rng.uniform(-0.2, 0.2);
      for (int j = 0; j < blend::kLeadBins; ++j) truth(j, k) = intercept;
      for (int l = 1; l < blend::kTermsPerBin; ++l)
        for (int j = 0; j < blend::kLeadBins; ++j)
          truth(l * blend::kLeadBins + j, k) = rng.uniform(-0.3, 0.3) / term_scale(l);
    }
    std::vector<blend::FeatureRow> rows;
    rows.reserve(20000);
    for (int i = 0; i < 20000; ++i) {
      blend::FeatureRow row;
      for (int j = 0; j < 4; ++j) {
        const auto js = static_cast<std::size_t>(j);
        row.pi[js] = rng.normal(0.0, spread);
        row.alpha[js] = rng.normal(0.0, spread);
        row.nu[js] = rng.normal(0.0, spread);
        row.beta[js] = rng.normal(0.0, spread);
        row.mu[js] = rng.normal(0.0, spread);
      }
      row.outcome = sample_outcome(blend::predict_raw(truth, row), rng);
      rows.push_back(std::move(row));
    }
    blend::FitOptions opts;
    opts.ridge = 1e-8;
    const auto model = blend::fit_blend(rows, opts);
    const auto recovered = blend::destandardized_coefficients(model);
    const double max_err = (recovered - truth).cwiseAbs().maxCoeff();
    c.expect(max_err < 0.05,
             "parameter recovery: max absolute error " + std::to_string(max_err));
  }
}

void criterion5(Criterion& c) {
  Rng rng(50005);
  int exercised = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> doys;
    const int n = 2 + static_cast<int>(rng.below(25));
    for (int i = 0; i < n; ++i) doys.push_back(rng.uniform(110.0, 290.0));
    clim::ClimatologyKde kde("g", doys, rng.uniform(1.0, 15.0));
    const double init = rng.uniform(95.0, 280.0);
    const double survival = 1.0 - kde.cdf(init);
    if (!(survival > 1e-12)) continue;
    ++exercised;
    const auto statics = clim::static_bin_probs(kde, init);
    const auto evolving = clim::evolving_bin_probs(kde, init);
    for (std::size_t j = 0; j < 4; ++j) {
      c.expect(std::abs(evolving[j] * survival - statics[j]) <= 1e-12,
               "evolving * survival != static on trial " + std::to_string(trial));
    }
  }
  c.expect(exercised > 900, "evolving algebra sweep under-sampled");

  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> doys;
    const int n = 3 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) doys.push_back(rng.uniform(130.0, 260.0));
    clim::ClimatologyKde kde("g", doys, rng.uniform(2.0, 6.0));
    const double lo = kde.support().lo, hi = kde.support().hi, step = 0.1;
    double integral = 0.5 * (kde.pdf(lo) + kde.pdf(hi));
    const int cells = static_cast<int>(std::round((hi - lo) / step));
    for (int k = 1; k < cells; ++k) integral += kde.pdf(lo + step * k);
    integral *= step;
    c.expect(std::abs(integral - 1.0) <= 1e-6,
             "KDE normalization off by " + std::to_string(integral - 1.0));
  }
}

void criterion6(Criterion& c) {
  auto cfg = acceptance_world_config();
  WorldResults results{pipeline::run_models(cfg, pipeline::build_world(cfg)), {}};

  const double rpss_blend = results.loocv.reports.at("blend").rpss;
  const double rpss_evolving = results.loocv.reports.at("evolving").rpss;
  const double rpss_static = results.loocv.reports.at("static").rpss;
  c.expect(rpss_static == 0.0, "static climatology RPSS must be exactly zero");
  c.expect(rpss_evolving >= 0.01,
           "evolving RPSS " + std::to_string(rpss_evolving) + " not >= 0.01");
  c.expect(rpss_blend - rpss_evolving >= 0.01,
           "blend RPSS " + std::to_string(rpss_blend) + " does not beat evolving " +
               std::to_string(rpss_evolving) + " by 0.01");

  auto split_cfg = cfg;
  split_cfg.cv_mode = "split";
  for (int y = 1995; y <= 2014; ++y) split_cfg.train_years.push_back(y);
  for (int y = 2015; y <= 2024; ++y) split_cfg.test_years.push_back(y);
  results.split = pipeline::run_models(split_cfg, pipeline::build_world(split_cfg));

  const double split_blend = results.split.reports.at("blend").rpss;
  const double split_mme = results.split.reports.at("mme").rpss;
  c.expect(split_blend - split_mme >= 0.01,
           "held-out blend RPSS " + std::to_string(split_blend) +
               " does not beat the post-hoc MME " + std::to_string(split_mme) + " by 0.01");

  g_world = std::move(results);
}

void criterion7(Criterion& c) {
  c.expect(g_world.has_value(), "world results unavailable (criterion 6 crashed)");
  if (!g_world) return;
  const auto& report = g_world->loocv.reports.at("blend");
  int checked = 0;
  for (const auto& dec : report.reliability.deciles) {
    if (dec.count < 200) continue;
    ++checked;
    c.expect(std::abs(dec.mean_predicted - dec.observed_frequency) < 0.05,
             "blend reliability decile off by " +
                 std::to_string(std::abs(dec.mean_predicted - dec.observed_frequency)));
  }
  c.expect(checked >= 8, "too few populated deciles with >= 200 pairs");

  Rng rng(70007);
  std::vector<BinProbs> raw;
  std::vector<int> outcomes;
  for (int i = 0; i < 5000; ++i) {
    const auto q = softmax_probs(rng, 1.0);
    BinProbs overconfident;
    for (std::size_t j = 0; j < 5; ++j)
      overconfident[j] = 1.0 / (1.0 + std::exp(-2.0 * logit(q[j])));
    raw.push_back(overconfident);
    outcomes.push_back(sample_outcome(q, rng));
  }
  const auto params = baselines::platt_fit(raw, outcomes);
  for (std::size_t j = 0; j < 5; ++j) {
    c.expect_near(params.bins[j].a, 0.5, 0.1, "Platt slope for bin " + std::to_string(j + 1));
  }
}

void criterion8(Criterion& c) {
  using namespace decision;
  Rng rng(80008);
  for (int trial = 0; trial < 100; ++trial) {
    const auto problem = random_problem(rng, 4, 4);
    const auto scheme = random_scheme(problem.prior, rng, 4);
    std::vector<int> coarsening(scheme.num_signals());
    for (auto& m : coarsening) m = static_cast<int>(rng.below(2));
    const auto [vp, vd] = compare_probabilistic_vs_deterministic(problem, scheme, coarsening);
    c.expect(vp >= vd - 1e-12, "probabilistic < deterministic on trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const auto problem = random_problem(rng);
    const auto scheme = random_scheme(problem.prior, rng);
    c.expect(scheme_value(problem, scheme) >= -1e-12,
             "negative scheme value on trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DecisionProblem> problems;
    std::vector<ForecastScheme> schemes;
    const int farmers = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < farmers; ++i) {
      for (;;) {
        auto problem = random_problem(rng);
        auto scheme = random_scheme(problem.prior, rng);
        try {
          decision_change_bound({problem}, {scheme});
        } catch (const Error&) {
          continue;
        }
        problems.push_back(std::move(problem));
        schemes.push_back(std::move(scheme));
        break;
      }
    }
    const auto bound = decision_change_bound(problems, schemes);
    c.expect(static_cast<double>(bound.strictly_benefiting) >= bound.expected_changes - 1e-12,
             "decision-change bound violated on trial " + std::to_string(trial));
  }
}

void criterion9(Criterion& c) {
  pipeline::RunConfig cfg;
  cfg.synth.seed = 777;
  cfg.synth.n_years = 10;
  cfg.synth.n_cells = 2;
  cfg.synth.members_b = 6;
  cfg.ridge = 1e-3;

  cfg.out_dir = "acceptance_det_a";
  std::filesystem::remove_all(cfg.out_dir);
  pipeline::run_pipeline(cfg);
  cfg.out_dir = "acceptance_det_b";
  std::filesystem::remove_all(cfg.out_dir);
  pipeline::run_pipeline(cfg);

  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator("acceptance_det_a")) {
    const auto name = entry.path().filename().string();
    const std::string other = "acceptance_det_b/" + name;
    if (!std::filesystem::exists(other)) {
      c.expect(false, "missing artifact " + name + " in second run");
      continue;
    }
    if (read_file(entry.path().string()) != read_file(other)) {
      c.expect(false, "artifact " + name + " differs between identical runs");
    }
    ++compared;
  }
  c.expect(compared >= 15, "too few artifacts compared");
  // All pipeline stages are single-threaded folds in canonical order, so the
  // byte comparison above is also the thread-count invariance check.
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run_criterion(1, "insurance example reproduces the published numbers", 1.0, criterion1);
  run_criterion(2, "metric oracle suite (Brier/RPS/AUC)", 10.0, criterion2);
  run_criterion(3, "onset detector matches the brute-force oracle", 10.0, criterion3);
  run_criterion(4, "blend optimizer gradient, intercepts, recovery", 60.0, criterion4);
  run_criterion(5, "evolving-expectations algebra and KDE normalization", 10.0, criterion5);
  run_criterion(6, "end-to-end skill ordering on the synthetic world", 300.0, criterion6);
  run_criterion(7, "calibration: blend reliability and Platt recovery", 60.0, criterion7);
  run_criterion(8, "decision-theory property sweeps", 30.0, criterion8);
  run_criterion(9, "byte-identical pipeline determinism", 0.0, criterion9);
  if (g_failed > 0) {
    std::printf("%d criterion(s) failed\n", g_failed);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
