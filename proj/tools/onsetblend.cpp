// Command-line front end for the onset forecasting pipeline.
//
// Exit codes: 0 success, 1 validation error, 2 data error, 3 non-convergence.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "onsetblend/baselines.hpp"
#include "onsetblend/blend.hpp"
#include "onsetblend/climatology.hpp"
#include "onsetblend/csv.hpp"
#include "onsetblend/decision.hpp"
#include "onsetblend/errors.hpp"
#include "onsetblend/eval.hpp"
#include "onsetblend/ingest.hpp"
#include "onsetblend/model_io.hpp"
#include "onsetblend/onset.hpp"
#include "onsetblend/pipeline.hpp"
#include "onsetblend/rng.hpp"
#include "onsetblend/types.hpp"

namespace ob = onsetblend;

namespace {

ob::pipeline::RunConfig config_from(const std::string& config_path,
                                    const std::vector<std::string>& sets) {
  ob::pipeline::RunConfig cfg;
  if (!config_path.empty()) cfg = ob::pipeline::load_config(config_path);
  for (const auto& setting : sets) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos)
      throw ob::Error(ob::Errc::invalid_config, "--set expects key=value, got '" + setting + "'");
    ob::pipeline::apply_setting(cfg, ob::pipeline::detail::trim(setting.substr(0, eq)),
                                ob::pipeline::detail::trim(setting.substr(eq + 1)));
  }
  return cfg;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    ob::write_file_atomic(path, content);
  }
}

// Joins predictions onto the outcomes file, whose row order is canonical so
// that several prediction files align instance for instance.
ob::eval::ScoredSet join_predictions(const std::vector<ob::model_io::PredictionRow>& preds,
                                     const std::vector<ob::model_io::OutcomeRow>& outcomes) {
  std::map<std::pair<std::string, std::int32_t>, const ob::model_io::PredictionRow*> by_key;
  for (const auto& pred : preds) {
    if (!by_key.emplace(std::make_pair(pred.grid_id, pred.init.serial()), &pred).second)
      throw ob::Error(ob::Errc::invalid_config, "duplicate prediction for " + pred.grid_id +
                                                    " init " + pred.init.to_string());
  }
  ob::eval::ScoredSet set;
  for (const auto& row : outcomes) {
    const auto it = by_key.find({row.grid_id, row.init.serial()});
    if (it == by_key.end())
      throw ob::Error(ob::Errc::invalid_config, "no prediction for " + row.grid_id + " init " +
                                                    row.init.to_string());
    set.push_back(ob::eval::scored(it->second->probs, row.outcome, row.grid_id, row.init,
                                   row.year));
  }
  if (set.size() != preds.size())
    throw ob::Error(ob::Errc::invalid_config,
                    "predictions contain instances missing from the outcomes file");
  return set;
}

// Problem/scheme bundles for `decision check`, in a flat CSV:
//   problem_id,item,i,j,value
// with item one of payoff (i=action, j=state), income (same), utility
// (value = exponent g of u(x) = x^g), prior (i=state), signal (i=signal),
// posterior (i=signal, j=state).
struct ProblemBundle {
  ob::decision::DecisionProblem problem;
  ob::decision::ForecastScheme scheme;
};

std::vector<ProblemBundle> parse_problems_csv(const std::string& path) {
  ob::CsvReader reader(path, "problem_id,item,i,j,value");
  struct Raw {
    std::map<std::pair<std::size_t, std::size_t>, double> payoff, income, posterior;
    std::map<std::size_t, double> prior, signal;
    std::optional<double> utility_exponent;
  };
  std::vector<std::string> order;
  std::map<std::string, Raw> raws;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 5) reader.fail(ob::Errc::malformed_row, "expected 5 fields");
    auto [it, inserted] = raws.try_emplace(fields[0]);
    if (inserted) order.push_back(fields[0]);
    Raw& raw = it->second;
    const auto i = static_cast<std::size_t>(reader.parse_long(fields[2]));
    const auto j = static_cast<std::size_t>(reader.parse_long(fields[3]));
    const double value = reader.parse_double(fields[4]);
    const std::string& item = fields[1];
    if (item == "payoff") raw.payoff[{i, j}] = value;
    else if (item == "income") raw.income[{i, j}] = value;
    else if (item == "utility") raw.utility_exponent = value;
    else if (item == "prior") raw.prior[i] = value;
    else if (item == "signal") raw.signal[i] = value;
    else if (item == "posterior") raw.posterior[{i, j}] = value;
    else reader.fail(ob::Errc::malformed_row, "unknown item '" + item + "'");
  }

  std::vector<ProblemBundle> out;
  for (const auto& id : order) {
    const Raw& raw = raws[id];
    ProblemBundle bundle;
    std::size_t actions = 0, states = 0, signals = 0;
    for (const auto& [key, value] : raw.payoff) {
      actions = std::max(actions, key.first + 1);
      states = std::max(states, key.second + 1);
    }
    for (const auto& [key, value] : raw.income) {
      actions = std::max(actions, key.first + 1);
      states = std::max(states, key.second + 1);
    }
    for (const auto& [i, value] : raw.prior) states = std::max(states, i + 1);
    for (const auto& [i, value] : raw.signal) signals = std::max(signals, i + 1);
    if (actions == 0 || states == 0 || signals == 0)
      throw ob::Error(ob::Errc::invalid_config, "problem " + id + " is incomplete");

    auto& problem = bundle.problem;
    problem.prior.assign(states, 0.0);
    for (const auto& [i, value] : raw.prior) problem.prior[i] = value;
    if (!raw.income.empty()) {
      const double exponent = raw.utility_exponent.value_or(1.0);
      problem.income = std::vector<std::vector<double>>(actions, std::vector<double>(states, 0.0));
      for (const auto& [key, value] : raw.income) (*problem.income)[key.first][key.second] = value;
      problem.utility = [exponent](double x) { return std::pow(x, exponent); };
      problem.payoff.assign(actions, std::vector<double>(states, 0.0));
      for (std::size_t a = 0; a < actions; ++a)
        for (std::size_t w = 0; w < states; ++w)
          problem.payoff[a][w] = problem.utility((*problem.income)[a][w]);
    } else {
      problem.payoff.assign(actions, std::vector<double>(states, 0.0));
      for (const auto& [key, value] : raw.payoff) problem.payoff[key.first][key.second] = value;
    }

    auto& scheme = bundle.scheme;
    scheme.signal_prob.assign(signals, 0.0);
    for (const auto& [i, value] : raw.signal) scheme.signal_prob[i] = value;
    scheme.posterior.assign(signals, std::vector<double>(states, 0.0));
    for (const auto& [key, value] : raw.posterior) scheme.posterior[key.first][key.second] = value;
    out.push_back(std::move(bundle));
  }
  return out;
}

int decision_demo() {
  using namespace ob::decision;
  const auto problem = insurance_problem();
  const auto scheme = insurance_scheme();

  const double eu_no_insurance = expected_payoff(problem, 0, problem.prior);
  const double eu_insurance = expected_payoff(problem, 1, problem.prior);
  const double gain = scheme_value(problem, scheme);
  const auto effect = expected_income_effect(problem, scheme);
  double income_no_insurance = 0.0, income_insurance = 0.0;
  for (std::size_t w = 0; w < 2; ++w) {
    income_no_insurance += problem.prior[w] * (*problem.income)[0][w];
    income_insurance += problem.prior[w] * (*problem.income)[1][w];
  }

  std::cout << "crop insurance example (sqrt utility, 10% drought prior)\n";
  std::cout << "  expected income, no insurance:   " << ob::fmt_fixed(income_no_insurance, 4)
            << "\n";
  std::cout << "  expected income, insurance:      " << ob::fmt_fixed(income_insurance, 4) << "\n";
  std::cout << "  expected utility, no insurance:  " << ob::fmt_fixed(eu_no_insurance, 4) << "\n";
  std::cout << "  expected utility, insurance:     " << ob::fmt_fixed(eu_insurance, 4) << "\n";
  std::cout << "  expected utility, with forecast: " << ob::fmt_fixed(eu_no_insurance + gain, 4)
            << "\n";
  std::cout << "  expected income, with forecast:  "
            << ob::fmt_fixed(income_no_insurance + effect.income_change, 4) << "\n";
  std::cout << "  utility gain " << ob::fmt_fixed(effect.utility_gain, 4) << ", income change "
            << ob::fmt_fixed(effect.income_change, 4) << "\n\n";

  ob::Rng rng(20250401);
  int prop1_violations = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_problem(rng);
    const auto s = random_scheme(p.prior, rng);
    std::vector<int> coarsening(s.num_signals());
    for (auto& m : coarsening) m = static_cast<int>(rng.below(2));
    const auto [value_prob, value_det] = compare_probabilistic_vs_deterministic(p, s, coarsening);
    worst_gap = std::min(worst_gap, value_prob - value_det);
    if (value_det > value_prob + 1e-12) ++prop1_violations;
  }
  std::cout << "probabilistic-vs-deterministic sweep: 100 random coarsenings, "
            << prop1_violations << " violations (min gap " << ob::fmt_sig(worst_gap, 3)
            << ")\n";

  int prop2_violations = 0;
  double min_value = 1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_problem(rng);
    const auto s = random_scheme(p.prior, rng);
    const double value = scheme_value(p, s);
    min_value = std::min(min_value, value);
    if (value < -1e-12) ++prop2_violations;
  }
  std::cout << "nonnegative-value sweep: 200 random schemes, " << prop2_violations
            << " violations (min value " << ob::fmt_sig(min_value, 3) << ")\n";

  int prop5_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DecisionProblem> problems;
    std::vector<ForecastScheme> schemes;
    const int farmers = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < farmers; ++i) {
      for (;;) {
        auto p = random_problem(rng);
        auto s = random_scheme(p.prior, rng);
        try {
          decision_change_bound({p}, {s});
        } catch (const ob::Error&) {
          continue;  // redraw near-ties
        }
        problems.push_back(std::move(p));
        schemes.push_back(std::move(s));
        break;
      }
    }
    const auto bound = decision_change_bound(problems, schemes);
    if (static_cast<double>(bound.strictly_benefiting) < bound.expected_changes - 1e-12)
      ++prop5_failures;
  }
  std::cout << "decision-change bound sweep: 200 random populations, " << prop5_failures
            << " violations\n";
  return (prop1_violations || prop2_violations || prop5_failures) ? 2 : 0;
}

int decision_check(const std::string& problems_path) {
  const auto bundles = parse_problems_csv(problems_path);
  if (bundles.empty()) throw ob::Error(ob::Errc::invalid_config, "no problems in file");
  int violations = 0;
  std::vector<ob::decision::DecisionProblem> problems;
  std::vector<ob::decision::ForecastScheme> schemes;
  for (std::size_t idx = 0; idx < bundles.size(); ++idx) {
    const auto& bundle = bundles[idx];
    const double value = ob::decision::scheme_value(bundle.problem, bundle.scheme);
    if (value < -1e-12) ++violations;
    const std::size_t signals = bundle.scheme.num_signals();
    for (std::size_t mask = 0; mask < (1u << signals); ++mask) {
      std::vector<int> coarsening(signals);
      for (std::size_t s = 0; s < signals; ++s) coarsening[s] = (mask >> s) & 1u;
      const auto [vp, vd] =
          ob::decision::compare_probabilistic_vs_deterministic(bundle.problem, bundle.scheme,
                                                               coarsening);
      if (vd > vp + 1e-12) ++violations;
    }
    std::cout << "problem " << (idx + 1) << ": scheme value " << ob::fmt_fixed(value, 6) << "\n";
    problems.push_back(bundle.problem);
    schemes.push_back(bundle.scheme);
  }
  try {
    const auto bound = ob::decision::decision_change_bound(problems, schemes);
    std::cout << "expected decision changes " << ob::fmt_fixed(bound.expected_changes, 6)
              << ", strictly benefiting " << bound.strictly_benefiting << "\n";
    if (static_cast<double>(bound.strictly_benefiting) < bound.expected_changes - 1e-12)
      ++violations;
  } catch (const ob::Error& e) {
    std::cout << "decision-change bound skipped: " << e.what() << "\n";
  }
  std::cout << (violations ? "violations found" : "all checks passed") << "\n";
  return violations ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blended statistical-AI monsoon onset forecasting toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  std::string config_path;
  std::vector<std::string> overrides;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  std::string synth_out = "out";
  synth->add_option("--config", config_path, "run config file");
  synth->add_option("--set", overrides, "override config entries (key=value)");
  synth->add_option("--out", synth_out, "output directory");
  synth->callback([&] {
    auto cfg = config_from(config_path, overrides);
    const auto truth = ob::ingest::generate_synthetic_truth(cfg.synth);
    const auto forecasts = ob::ingest::generate_synthetic_forecasts(truth, cfg.synth);
    std::filesystem::create_directories(synth_out);
    ob::write_file_atomic(synth_out + "/truth.csv", ob::ingest::rainfall_csv(truth));
    ob::write_file_atomic(synth_out + "/forecasts.csv", ob::ingest::forecast_csv(forecasts));
    std::cout << "wrote " << synth_out << "/truth.csv and forecasts.csv\n";
  });

  // onset detect
  auto* onset_cmd = app.add_subcommand("onset", "onset detection");
  auto* detect = onset_cmd->add_subcommand("detect", "detect per-year onset dates");
  std::string rain_path, onset_out, variant_flag, mok_path, threshold_flag = "auto";
  detect->add_option("--rain", rain_path, "rainfall CSV")->required();
  detect->add_option("--config", config_path, "run config file");
  detect->add_option("--variant", variant_flag,
                     "onset variant: true-mok | clim-mok=MM-DD | none");
  detect->add_option("--mok", mok_path, "observed MOK dates CSV (year,mok_date)");
  detect->add_option("--threshold", threshold_flag, "five-day threshold in mm, or 'auto'");
  detect->add_option("--out", onset_out, "output CSV (default stdout)");
  detect->callback([&] {
    auto cfg = config_from(config_path, overrides);
    if (!variant_flag.empty()) cfg.variant = variant_flag;
    std::map<int, ob::Date> mok_dates;
    if (!mok_path.empty()) {
      ob::CsvReader reader(mok_path, "year,mok_date");
      std::vector<std::string> fields;
      while (reader.next(fields)) {
        if (fields.size() != 2) reader.fail(ob::Errc::malformed_row, "expected 2 fields");
        const auto date = ob::Date::parse(fields[1]);
        if (!date) reader.fail(ob::Errc::malformed_row, "bad date");
        mok_dates[static_cast<int>(reader.parse_long(fields[0]))] = *date;
      }
    }
    if (cfg.mok_policy().kind == ob::MokKind::true_mok && mok_dates.empty())
      throw ob::Error(ob::Errc::invalid_config, "variant true-mok needs --mok dates");
    std::optional<double> threshold;
    if (threshold_flag != "auto") threshold = std::stod(threshold_flag);

    const auto series_list = ob::ingest::parse_rainfall_csv(rain_path);
    std::ostringstream out;
    out << "grid_id,year,onset_date\n";
    for (const auto& series : series_list) {
      ob::onset::OnsetConfig ocfg = cfg.onset_config(1.0);
      ocfg.spell_total_mm = ob::onset::compute_five_day_threshold(
          {series}, ocfg.season_start, ocfg.search_end, threshold);
      for (int year = series.start.year(); year <= series.end().year(); ++year) {
        std::optional<ob::Date> mok;
        if (const auto it = mok_dates.find(year); it != mok_dates.end()) mok = it->second;
        std::optional<ob::Date> onset_date;
        try {
          onset_date = ob::onset::detect_onset(series, ocfg, mok, year);
        } catch (const ob::Error& e) {
          if (e.code() != ob::Errc::series_too_short) throw;
          continue;
        }
        out << series.grid_id << ',' << year << ','
            << (onset_date ? onset_date->to_string() : "") << '\n';
      }
    }
    emit(onset_out, out.str());
  });

  // clim fit
  auto* clim_cmd = app.add_subcommand("clim", "onset-date climatology");
  auto* clim_fit = clim_cmd->add_subcommand("fit", "fit per-grid KDE climatology");
  std::string clim_onsets, clim_out;
  clim_fit->add_option("--onsets", clim_onsets, "onsets CSV (grid_id,year,onset_date)")
      ->required();
  clim_fit->add_option("--out", clim_out, "model CSV (default stdout)");
  clim_fit->callback([&] {
    const auto records = ob::model_io::parse_onsets_csv(clim_onsets);
    std::map<std::string, std::vector<double>> doys;
    std::vector<std::string> order;
    for (const auto& rec : records) {
      if (!rec.onset) continue;
      auto [it, inserted] = doys.try_emplace(rec.grid_id);
      if (inserted) order.push_back(rec.grid_id);
      it->second.push_back(static_cast<double>(rec.onset->day_of_year()));
    }
    std::map<std::string, ob::clim::ClimatologyKde> models;
    for (const auto& grid : order) {
      bool fallback = false;
      models.emplace(grid, ob::clim::fit_climatology(grid, doys[grid], {}, 1.0, &fallback));
      if (fallback)
        std::cerr << "note: " << grid << ": plug-in selection fell back to the Silverman rule\n";
    }
    emit(clim_out, ob::pipeline::detail::climatology_csv(models));
  });

  // blend train / predict
  auto* blend_cmd = app.add_subcommand("blend", "multinomial-logit blended model");
  auto* blend_train = blend_cmd->add_subcommand("train", "fit blend coefficients");
  std::string features_path, blend_out, blend_model_path;
  double ridge = 1e-6;
  blend_train->add_option("--features", features_path, "features CSV")->required();
  blend_train->add_option("--out", blend_out, "model CSV (default stdout)");
  blend_train->add_option("--ridge", ridge, "ridge penalty (default 1e-6)");
  blend_train->callback([&] {
    const auto rows = ob::model_io::parse_features_csv(features_path);
    ob::blend::FitOptions opts;
    opts.ridge = ridge;
    const auto model = ob::blend::fit_blend(rows, opts);
    emit(blend_out, ob::pipeline::detail::blend_model_csv(model));
  });
  auto* blend_predict = blend_cmd->add_subcommand("predict", "predict bin probabilities");
  std::string predict_out;
  blend_predict->add_option("--features", features_path, "features CSV")->required();
  blend_predict->add_option("--model", blend_model_path, "blend model CSV")->required();
  blend_predict->add_option("--out", predict_out, "predictions CSV (default stdout)");
  blend_predict->callback([&] {
    const auto rows = ob::model_io::parse_features_csv(features_path);
    const auto model = ob::model_io::parse_blend_model_csv(blend_model_path);
    ob::eval::ScoredSet set;
    for (const auto& row : rows) {
      set.push_back(ob::eval::scored(ob::blend::predict_blend(model, row), row.outcome,
                                     row.grid_id, row.init, row.year));
    }
    emit(predict_out, ob::pipeline::detail::predictions_csv(set));
  });

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit per-bin Platt scaling");
  std::string raw_path, truth_path, calibrate_out;
  calibrate->add_option("--raw", raw_path, "raw predictions CSV")->required();
  calibrate->add_option("--truth", truth_path, "outcomes CSV")->required();
  calibrate->add_option("--out", calibrate_out, "params CSV (default stdout)");
  calibrate->callback([&] {
    const auto preds = ob::model_io::parse_predictions_csv(raw_path);
    const auto outcomes = ob::model_io::parse_outcomes_csv(truth_path);
    const auto set = join_predictions(preds, outcomes);
    std::vector<ob::BinProbs> raw;
    std::vector<int> outcome_bins;
    for (const auto& f : set) {
      ob::BinProbs p;
      for (std::size_t j = 0; j < ob::kNumBins; ++j) p[j] = f.probs[j];
      raw.push_back(p);
      outcome_bins.push_back(f.outcome);
    }
    const auto params = ob::baselines::platt_fit(raw, outcome_bins);
    for (std::size_t j = 0; j < ob::kNumBins; ++j) {
      if (params.bins[j].degenerate)
        std::cerr << "note: bin " << (j + 1) << " never/always occurred; identity passthrough\n";
    }
    emit(calibrate_out, ob::pipeline::detail::platt_csv(params));
  });

  // mme fit
  auto* mme_cmd = app.add_subcommand("mme", "fixed-weight multimodel ensemble");
  auto* mme_fit = mme_cmd->add_subcommand("fit", "optimize post-hoc ensemble weights");
  std::string components_flag, clim_pred_path, mme_out;
  mme_fit->add_option("--components", components_flag, "comma-separated prediction CSVs")
      ->required();
  mme_fit->add_option("--truth", truth_path, "outcomes CSV")->required();
  mme_fit
      ->add_option("--clim", clim_pred_path,
                   "static-climatology predictions CSV (RPSS reference)")
      ->required();
  mme_fit->add_option("--out", mme_out, "weights CSV (default stdout)");
  mme_fit->callback([&] {
    std::vector<std::string> component_paths;
    std::istringstream in(components_flag);
    std::string tok;
    while (std::getline(in, tok, ',')) component_paths.push_back(tok);
    if (component_paths.size() < 2)
      throw ob::Error(ob::Errc::invalid_config, "need at least two component files");
    const auto outcomes = ob::model_io::parse_outcomes_csv(truth_path);
    const auto clim_set = join_predictions(ob::model_io::parse_predictions_csv(clim_pred_path),
                                           outcomes);
    std::vector<std::vector<ob::BinProbs>> components;
    std::vector<int> outcome_bins;
    for (std::size_t k = 0; k < component_paths.size(); ++k) {
      const auto set =
          join_predictions(ob::model_io::parse_predictions_csv(component_paths[k]), outcomes);
      if (k == 0)
        for (const auto& f : set) outcome_bins.push_back(f.outcome);
      std::vector<ob::BinProbs> probs;
      for (const auto& f : set) {
        ob::BinProbs p;
        for (std::size_t j = 0; j < ob::kNumBins; ++j) p[j] = f.probs[j];
        probs.push_back(p);
      }
      components.push_back(std::move(probs));
    }
    const auto weights = ob::baselines::optimize_mme_weights(components, outcome_bins,
                                                             ob::eval::rps(clim_set));
    std::cout << "achieved RPSS " << ob::fmt_fixed(weights.rpss, 6) << "\n";
    emit(mme_out, ob::pipeline::detail::weights_csv(component_paths, weights));
  });

  // eval run
  auto* eval_cmd = app.add_subcommand("eval", "probabilistic verification");
  auto* eval_run = eval_cmd->add_subcommand("run", "score predictions against outcomes");
  std::string pred_path, eval_clim_path, auc_flag = "half", by_flag, eval_prefix = "eval";
  eval_run->add_option("--pred", pred_path, "predictions CSV")->required();
  eval_run->add_option("--truth", truth_path, "outcomes CSV")->required();
  eval_run->add_option("--clim", eval_clim_path,
                       "static-climatology predictions CSV (enables skill scores)");
  eval_run->add_option("--auc", auc_flag, "tie policy: half (default) | strict");
  eval_run->add_option("--by", by_flag, "print decomposition: lead | year");
  eval_run->add_option("--out", eval_prefix, "output prefix (default 'eval')");
  eval_run->callback([&] {
    const auto policy = [&] {
      if (auc_flag == "half") return ob::eval::TiePolicy::half;
      if (auc_flag == "strict") return ob::eval::TiePolicy::strict;
      throw ob::Error(ob::Errc::invalid_config, "--auc must be half or strict");
    }();
    const auto outcomes = ob::model_io::parse_outcomes_csv(truth_path);
    const auto set = join_predictions(ob::model_io::parse_predictions_csv(pred_path), outcomes);
    std::ostringstream report;
    if (!eval_clim_path.empty()) {
      const auto clim_set =
          join_predictions(ob::model_io::parse_predictions_csv(eval_clim_path), outcomes);
      const auto full = ob::eval::evaluate(set, clim_set, policy);
      report << ob::pipeline::detail::report_csv(full);
      ob::write_file_atomic(eval_prefix + "_reliability.csv",
                            ob::pipeline::detail::reliability_csv(full.reliability));
      std::cout << "brier " << ob::fmt_fixed(full.brier, 6) << "  rps "
                << ob::fmt_fixed(full.rps, 6) << "  auc " << ob::fmt_fixed(full.auc, 6)
                << "  bss " << ob::fmt_fixed(full.bss, 6) << "  rpss "
                << ob::fmt_fixed(full.rpss, 6) << "\n";
      if (by_flag == "lead") {
        for (const auto& lead : full.per_lead) {
          std::cout << "lead " << lead.bin << ": brier " << ob::fmt_fixed(lead.brier, 6)
                    << " bss " << ob::fmt_fixed(lead.bss, 6);
          if (lead.auc) std::cout << " auc " << ob::fmt_fixed(*lead.auc, 6);
          std::cout << "\n";
        }
      } else if (by_flag == "year") {
        for (const auto& ys : full.per_year) {
          std::cout << "year " << ys.year << ": brier " << ob::fmt_fixed(ys.brier, 6) << " bss "
                    << ob::fmt_fixed(ys.bss, 6);
          if (ys.auc) std::cout << " auc " << ob::fmt_fixed(*ys.auc, 6);
          std::cout << "\n";
        }
      }
    } else {
      report << "metric,value\n";
      report << "brier," << ob::fmt_fixed(ob::eval::brier(set), 6) << '\n';
      report << "rps," << ob::fmt_fixed(ob::eval::rps(set), 6) << '\n';
      report << "auc," << ob::fmt_fixed(ob::eval::auc(set, policy), 6) << '\n';
      ob::write_file_atomic(eval_prefix + "_reliability.csv",
                            ob::pipeline::detail::reliability_csv(ob::eval::reliability(set)));
      std::cout << "brier " << ob::fmt_fixed(ob::eval::brier(set), 6) << "  rps "
                << ob::fmt_fixed(ob::eval::rps(set), 6) << "  auc "
                << ob::fmt_fixed(ob::eval::auc(set, policy), 6) << "\n";
    }
    ob::write_file_atomic(eval_prefix + "_report.csv", report.str());
  });

  // decision demo / check
  auto* decision_cmd = app.add_subcommand("decision", "decision-theory lab");
  auto* demo = decision_cmd->add_subcommand("demo", "insurance example and property sweeps");
  demo->callback([&] { exit_code = decision_demo(); });
  auto* check = decision_cmd->add_subcommand("check", "property sweeps on supplied problems");
  std::string problems_path;
  check->add_option("--problems", problems_path, "problems CSV")->required();
  check->callback([&] { exit_code = decision_check(problems_path); });

  // run
  auto* run = app.add_subcommand("run", "full pipeline: data -> models -> verification");
  run->add_option("--config", config_path, "run config file");
  run->add_option("--set", overrides, "override config entries (key=value)");
  run->callback([&] {
    const auto cfg = config_from(config_path, overrides);
    const auto outputs = ob::pipeline::run_pipeline(cfg);
    std::cout << "artifacts in " << cfg.out_dir << "\n";
    for (const auto& model : outputs.models) {
      const auto& report = outputs.reports.at(model.name);
      std::cout << model.name << ": brier " << ob::fmt_fixed(report.brier, 6) << "  rps "
                << ob::fmt_fixed(report.rps, 6) << "  auc " << ob::fmt_fixed(report.auc, 6)
                << "  bss " << ob::fmt_fixed(report.bss, 6) << "  rpss "
                << ob::fmt_fixed(report.rpss, 6) << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ob::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ob::errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
