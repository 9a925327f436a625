#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "onsetblend/baselines.hpp"
#include "onsetblend/blend.hpp"
#include "onsetblend/climatology.hpp"
#include "onsetblend/csv.hpp"
#include "onsetblend/errors.hpp"
#include "onsetblend/eval.hpp"
#include "onsetblend/ingest.hpp"
#include "onsetblend/onset.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace pipeline {

struct RunConfig {
  std::string out_dir = "out";
  std::string rain_csv;      // empty: synthesize truth
  std::string forecast_csv;  // empty: synthesize forecasts
  bool write_inputs = true;

  ingest::SyntheticConfig synth;

  std::string variant = "none";  // none | clim-mok=MM-DD | true-mok
  double wet_day_mm = 1.0;
  int spell_len_days = 5;
  int dry_len_days = 10;
  double dry_total_mm = 5.0;
  int followup_days = 30;
  std::optional<MonthDay> season_start;  // default per variant
  MonthDay search_end{10, 31};
  std::optional<double> threshold_mm;  // absent: climatological estimator

  double ridge = 1e-6;
  bool dry_subtract_threshold = false;  // subtract the spell threshold from beta/mu
  eval::TiePolicy auc_policy = eval::TiePolicy::half;
  std::string cv_mode = "loocv";  // loocv | split
  std::vector<int> train_years;
  std::vector<int> test_years;

  MokPolicy mok_policy() const {
    if (variant == "none") return MokPolicy::none();
    if (variant == "true-mok") return MokPolicy::true_mok();
    if (variant.rfind("clim-mok", 0) == 0) {
      MonthDay md{6, 2};
      const auto eq = variant.find('=');
      if (eq != std::string::npos) {
        const auto parsed = MonthDay::parse(variant.substr(eq + 1));
        if (!parsed) throw Error(Errc::invalid_config, "bad clim-mok date in '" + variant + "'");
        md = *parsed;
      }
      return MokPolicy::clim_mok(md);
    }
    throw Error(Errc::invalid_config, "unknown onset variant '" + variant + "'");
  }

  onset::OnsetConfig onset_config(double threshold) const {
    onset::OnsetConfig cfg = onset::OnsetConfig::for_variant(mok_policy(), threshold);
    cfg.wet_day_mm = wet_day_mm;
    cfg.spell_len_days = spell_len_days;
    cfg.dry_len_days = dry_len_days;
    cfg.dry_total_mm = dry_total_mm;
    cfg.followup_days = followup_days;
    if (season_start) cfg.season_start = *season_start;
    cfg.search_end = search_end;
    return cfg;
  }

  void validate() const {
    if (cv_mode != "loocv" && cv_mode != "split")
      throw Error(Errc::invalid_config, "cv mode must be loocv or split");
    if (cv_mode == "split") {
      if (train_years.empty() || test_years.empty())
        throw Error(Errc::invalid_config, "split mode needs train_years and test_years");
      for (int y : train_years) {
        if (std::find(test_years.begin(), test_years.end(), y) != test_years.end())
          throw Error(Errc::invalid_config,
                      "train and test years overlap (" + std::to_string(y) + ")");
      }
    }
    if (variant == "true-mok")
      throw Error(Errc::invalid_config,
                  "the pipeline needs observed MOK dates; use the onset subcommand for true-mok");
    if (!(ridge >= 0.0)) throw Error(Errc::invalid_config, "ridge must be >= 0");
    mok_policy();
  }
};

// --- config file -------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<int> parse_year_list(const std::string& text) {
  std::vector<int> years;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    const auto dash = token.find('-');
    if (dash != std::string::npos && dash > 0) {
      const int lo = std::stoi(token.substr(0, dash));
      const int hi = std::stoi(token.substr(dash + 1));
      for (int y = lo; y <= hi; ++y) years.push_back(y);
    } else {
      years.push_back(std::stoi(token));
    }
  }
  return years;
}

}  // namespace detail

// Apply one `key = value` setting; shared by the config file and CLI flags.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto bad = [&](const std::string& why) {
    throw Error(Errc::invalid_config, "config key '" + key + "': " + why);
  };
  try {
    if (key == "out_dir") cfg.out_dir = value;
    else if (key == "rain_csv") cfg.rain_csv = value;
    else if (key == "forecast_csv") cfg.forecast_csv = value;
    else if (key == "write_inputs") cfg.write_inputs = value == "1" || value == "true";
    else if (key == "seed") cfg.synth.seed = std::stoull(value);
    else if (key == "years") cfg.synth.n_years = std::stoi(value);
    else if (key == "start_year") cfg.synth.start_year = std::stoi(value);
    else if (key == "cells") cfg.synth.n_cells = std::stoi(value);
    else if (key == "season_peak_doy") cfg.synth.season_peak_doy = std::stoi(value);
    else if (key == "onset_spread_days") cfg.synth.onset_spread_days = std::stod(value);
    else if (key == "rho") {
      std::istringstream in(value);
      std::string tok;
      for (auto& r : cfg.synth.rho) {
        if (!std::getline(in, tok, ',')) bad("rho needs 4 comma-separated values");
        r = std::stod(detail::trim(tok));
      }
    } else if (key == "members_a") cfg.synth.members_a = std::stoi(value);
    else if (key == "members_b") cfg.synth.members_b = std::stoi(value);
    else if (key == "lead_days") cfg.synth.lead_days = std::stoi(value);
    else if (key == "init_weekdays") {
      std::istringstream in(value);
      std::string tok;
      for (auto& wd : cfg.synth.init_weekdays) {
        if (!std::getline(in, tok, ',')) bad("init_weekdays needs 2 values");
        wd = std::stoi(detail::trim(tok));
      }
    } else if (key == "false_onset_prob") cfg.synth.false_onset_prob = std::stod(value);
    else if (key == "threshold_mm") {
      if (value == "auto") cfg.threshold_mm.reset();
      else cfg.threshold_mm = std::stod(value);
      if (cfg.threshold_mm) cfg.synth.five_day_threshold_mm = *cfg.threshold_mm;
    } else if (key == "variant") cfg.variant = value;
    else if (key == "wet_day_mm") cfg.wet_day_mm = std::stod(value);
    else if (key == "spell_len_days") cfg.spell_len_days = std::stoi(value);
    else if (key == "dry_len_days") cfg.dry_len_days = std::stoi(value);
    else if (key == "dry_total_mm") cfg.dry_total_mm = std::stod(value);
    else if (key == "followup_days") cfg.followup_days = std::stoi(value);
    else if (key == "season_start") {
      const auto md = MonthDay::parse(value);
      if (!md) bad("expected MM-DD");
      cfg.season_start = *md;
    } else if (key == "search_end") {
      const auto md = MonthDay::parse(value);
      if (!md) bad("expected MM-DD");
      cfg.search_end = *md;
    } else if (key == "ridge") cfg.ridge = std::stod(value);
    else if (key == "dry_subtract_threshold")
      cfg.dry_subtract_threshold = value == "1" || value == "true";
    else if (key == "auc") {
      if (value == "half") cfg.auc_policy = eval::TiePolicy::half;
      else if (value == "strict") cfg.auc_policy = eval::TiePolicy::strict;
      else bad("auc must be half or strict");
    } else if (key == "cv") cfg.cv_mode = value;
    else if (key == "train_years") cfg.train_years = detail::parse_year_list(value);
    else if (key == "test_years") cfg.test_years = detail::parse_year_list(value);
    else bad("unknown key");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("bad value '") + value + "' (" + e.what() + ")");
  }
}

inline RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::invalid_config,
                  path + ":" + std::to_string(line_no) + ": expected key = value");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

// --- world assembly -----------------------------------------------------------

struct Instance {
  std::string grid_id;
  std::size_t cell = 0;
  int year = 0;
  Date init;
  int outcome = kNumBins;
  std::size_t ens_a = 0;  // indices into World::forecasts
  std::size_t ens_b = 0;
};

struct World {
  std::vector<GridCell> cells;
  std::vector<DailyRainSeries> truth;  // aligned with cells
  std::vector<ForecastEnsemble> forecasts;
  std::vector<OnsetRecord> onsets;  // cell-major, year ascending
  std::vector<Instance> instances;  // cell-major, init ascending
  std::vector<double> thresholds;   // per cell
  onset::OnsetConfig base_onset_cfg;  // spell_total_mm set per cell at use
  blend::FeatureConfig feature_cfg;
  bool synthesized = false;
};

inline World build_world(const RunConfig& cfg) {
  cfg.validate();
  World world;
  world.feature_cfg.subtract_threshold_from_dry = cfg.dry_subtract_threshold;

  if (cfg.rain_csv.empty()) {
    world.synthesized = true;
    world.truth = ingest::generate_synthetic_truth(cfg.synth);
    world.cells = ingest::synthetic_cells(cfg.synth);
    for (auto& cell : world.cells) cell.mok_policy = cfg.mok_policy();
    world.forecasts = cfg.forecast_csv.empty()
                          ? ingest::generate_synthetic_forecasts(world.truth, cfg.synth)
                          : ingest::parse_forecast_csv(cfg.forecast_csv);
  } else {
    world.truth = ingest::parse_rainfall_csv(cfg.rain_csv);
    if (cfg.forecast_csv.empty())
      throw Error(Errc::invalid_config, "forecast_csv required when rain_csv is given");
    world.forecasts = ingest::parse_forecast_csv(cfg.forecast_csv);
    for (const auto& series : world.truth) {
      GridCell cell;
      cell.id = series.grid_id;
      cell.five_day_threshold_mm = cfg.threshold_mm.value_or(1.0);
      cell.mok_policy = cfg.mok_policy();
      world.cells.push_back(cell);
    }
  }

  world.base_onset_cfg = cfg.onset_config(1.0);
  for (std::size_t c = 0; c < world.cells.size(); ++c) {
    const double threshold = onset::compute_five_day_threshold(
        {world.truth[c]}, world.base_onset_cfg.season_start, world.base_onset_cfg.search_end,
        cfg.threshold_mm);
    world.thresholds.push_back(threshold);
    world.cells[c].five_day_threshold_mm = threshold;
  }

  // Per-year onsets from the truth series.
  for (std::size_t c = 0; c < world.cells.size(); ++c) {
    const auto& series = world.truth[c];
    onset::OnsetConfig ocfg = world.base_onset_cfg;
    ocfg.spell_total_mm = world.thresholds[c];
    const int y0 = series.start.year();
    const int y1 = series.end().year();
    for (int y = y0; y <= y1; ++y) {
      OnsetRecord rec;
      rec.grid_id = series.grid_id;
      rec.year = y;
      try {
        rec.onset = onset::detect_onset(series, ocfg, std::nullopt, y);
      } catch (const Error& e) {
        if (e.code() != Errc::series_too_short) throw;
        continue;  // partial final season
      }
      world.onsets.push_back(rec);
    }
  }

  // Forecast instances: model_a/model_b ensemble pairs keyed by (grid, init),
  // excluding instances whose observed onset is on or before the init date.
  std::map<std::pair<std::string, int>, std::optional<Date>> onset_by_cell_year;
  for (const auto& rec : world.onsets) onset_by_cell_year[{rec.grid_id, rec.year}] = rec.onset;

  std::map<std::pair<std::string, std::int32_t>, std::pair<std::optional<std::size_t>,
                                                            std::optional<std::size_t>>>
      pairs;
  for (std::size_t i = 0; i < world.forecasts.size(); ++i) {
    const auto& ens = world.forecasts[i];
    auto& slot = pairs[{ens.grid_id, ens.init.serial()}];
    if (ens.model_id == "model_a") slot.first = i;
    else if (ens.model_id == "model_b") slot.second = i;
    else throw Error(Errc::invalid_config, "unknown model id '" + ens.model_id + "'");
  }
  for (std::size_t c = 0; c < world.cells.size(); ++c) {
    std::vector<Instance> cell_instances;
    for (const auto& [key, slot] : pairs) {
      if (key.first != world.cells[c].id) continue;
      if (!slot.first || !slot.second)
        throw Error(Errc::invalid_config,
                    "forecast archive missing one model for " + key.first + " init " +
                        Date(key.second).to_string());
      Instance inst;
      inst.grid_id = key.first;
      inst.cell = c;
      inst.init = Date(key.second);
      inst.year = inst.init.year();
      inst.ens_a = *slot.first;
      inst.ens_b = *slot.second;
      const auto it = onset_by_cell_year.find({inst.grid_id, inst.year});
      const std::optional<Date> onset_date =
          it == onset_by_cell_year.end() ? std::nullopt : it->second;
      if (onset_date && *onset_date <= inst.init) continue;  // onset already occurred
      inst.outcome = onset_date ? bin_of_onset(inst.init, *onset_date) : kNumBins;
      cell_instances.push_back(inst);
    }
    std::sort(cell_instances.begin(), cell_instances.end(),
              [](const Instance& a, const Instance& b) { return a.init < b.init; });
    world.instances.insert(world.instances.end(), cell_instances.begin(), cell_instances.end());
  }
  return world;
}

// --- model predictions ---------------------------------------------------------

struct ModelSet {
  std::string name;
  eval::ScoredSet set;
};

struct PipelineOutputs {
  World world;
  std::vector<ModelSet> models;  // static, evolving, raw/cal per model, blend, mme
  baselines::EnsembleWeights mme_weights;
  std::vector<std::string> mme_components;
  std::map<std::string, eval::EvalReport> reports;
  std::map<std::string, baselines::PlattParams> platt;  // final full-data params per raw model
  std::optional<blend::BlendModel> final_blend;         // trained on all years
  std::map<std::string, clim::ClimatologyKde> final_climatology;
};

namespace detail {

inline std::map<std::string, clim::ClimatologyKde> fit_fold_climatology(
    const World& world, const std::set<int>& train_years) {
  std::map<std::string, clim::ClimatologyKde> out;
  for (const auto& cell : world.cells) {
    std::vector<double> doys;
    for (const auto& rec : world.onsets) {
      if (rec.grid_id != cell.id || !rec.onset) continue;
      if (!train_years.empty() && !train_years.count(rec.year)) continue;
      doys.push_back(static_cast<double>(rec.onset->day_of_year()));
    }
    if (doys.size() < 2)
      throw Error(Errc::empty_history,
                  "fewer than two training onsets for " + cell.id);
    out.emplace(cell.id, clim::fit_climatology(cell.id, std::move(doys)));
  }
  return out;
}

}  // namespace detail

// Raw ensemble-fraction probabilities for one instance and model.
inline BinProbs raw_probs_for(const World& world, const Instance& inst, bool model_a) {
  const auto& ens = world.forecasts[model_a ? inst.ens_a : inst.ens_b];
  onset::OnsetConfig cfg = world.base_onset_cfg;
  cfg.spell_total_mm = world.thresholds[inst.cell];
  return baselines::raw_model_bin_probs(world.truth[inst.cell], ens, cfg);
}

inline blend::FeatureRow features_for(const World& world, const Instance& inst,
                                      const BinProbs& evolving) {
  auto row = blend::build_features(evolving, world.forecasts[inst.ens_a],
                                   world.forecasts[inst.ens_b], world.thresholds[inst.cell],
                                   world.feature_cfg);
  row.year = inst.year;
  row.outcome = inst.outcome;
  return row;
}

// Cross-validated predictions for every model. Each fold refits climatology,
// blend coefficients, and Platt parameters on the training years only.
inline PipelineOutputs run_models(const RunConfig& cfg, World world) {
  PipelineOutputs out;

  std::vector<int> all_years;
  for (const auto& inst : world.instances) all_years.push_back(inst.year);
  std::sort(all_years.begin(), all_years.end());
  all_years.erase(std::unique(all_years.begin(), all_years.end()), all_years.end());
  if (all_years.size() < 2)
    throw Error(Errc::invalid_config, "need at least two years with forecast instances");

  struct Fold {
    std::set<int> train;
    std::set<int> test;
  };
  std::vector<Fold> folds;
  if (cfg.cv_mode == "loocv") {
    for (int held_out : all_years) {
      Fold f;
      f.test.insert(held_out);
      for (int y : all_years)
        if (y != held_out) f.train.insert(y);
      folds.push_back(std::move(f));
    }
  } else {
    Fold f;
    f.train.insert(cfg.train_years.begin(), cfg.train_years.end());
    f.test.insert(cfg.test_years.begin(), cfg.test_years.end());
    folds.push_back(std::move(f));
  }

  // Raw-model probabilities are training-free; compute once per instance.
  const std::size_t n = world.instances.size();
  std::vector<BinProbs> raw_a(n), raw_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw_a[i] = raw_probs_for(world, world.instances[i], true);
    raw_b[i] = raw_probs_for(world, world.instances[i], false);
  }

  std::map<std::string, eval::ScoredSet> sets;
  const std::vector<std::string> model_names = {"static", "evolving", "raw_a",
                                                "raw_b",  "cal_a",    "cal_b", "blend"};
  for (const auto& name : model_names) sets[name] = {};
  std::vector<BinProbs> cv_evolving(n), cv_cal_a(n), cv_cal_b(n);
  std::vector<std::size_t> scored_order;

  for (const auto& fold : folds) {
    const auto kde = detail::fit_fold_climatology(world, fold.train);

    std::vector<blend::FeatureRow> train_rows;
    std::vector<std::size_t> test_idx;
    std::vector<blend::FeatureRow> test_rows;
    std::vector<BinProbs> train_raw_a, train_raw_b;
    std::vector<int> train_outcomes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& inst = world.instances[i];
      const bool in_train = fold.train.count(inst.year) > 0;
      const bool in_test = fold.test.count(inst.year) > 0;
      if (!in_train && !in_test) continue;
      const auto& cell_kde = kde.at(inst.grid_id);
      const BinProbs evolving = clim::evolving_bin_probs(cell_kde, inst.init);
      auto row = features_for(world, inst, evolving);
      if (in_train) {
        train_rows.push_back(row);
        train_raw_a.push_back(raw_a[i]);
        train_raw_b.push_back(raw_b[i]);
        train_outcomes.push_back(inst.outcome);
      }
      if (in_test) {
        test_idx.push_back(i);
        test_rows.push_back(row);
        cv_evolving[i] = evolving;
      }
    }

    blend::FitOptions fit_opts;
    fit_opts.ridge = cfg.ridge;
    const auto blend_model = blend::fit_blend(train_rows, fit_opts);
    const auto platt_a = baselines::platt_fit(train_raw_a, train_outcomes);
    const auto platt_b = baselines::platt_fit(train_raw_b, train_outcomes);

    for (std::size_t t = 0; t < test_idx.size(); ++t) {
      const std::size_t i = test_idx[t];
      const auto& inst = world.instances[i];
      const auto& cell_kde = kde.at(inst.grid_id);
      const BinProbs statics = clim::static_bin_probs(cell_kde, inst.init);
      cv_cal_a[i] = baselines::platt_apply(platt_a, raw_a[i]);
      cv_cal_b[i] = baselines::platt_apply(platt_b, raw_b[i]);
      auto add = [&](const std::string& name, const BinProbs& p) {
        sets[name].push_back(eval::scored(p, inst.outcome, inst.grid_id, inst.init, inst.year));
      };
      add("static", statics);
      add("evolving", cv_evolving[i]);
      add("raw_a", raw_a[i]);
      add("raw_b", raw_b[i]);
      add("cal_a", cv_cal_a[i]);
      add("cal_b", cv_cal_b[i]);
      add("blend", blend::predict_blend(blend_model, test_rows[t]));
      scored_order.push_back(i);
    }
  }

  // Post-hoc fixed-weight ensemble over calibrated models and the evolving
  // baseline, with weights chosen on the scored set itself.
  out.mme_components = {"cal_a", "cal_b", "evolving"};
  {
    std::vector<std::vector<BinProbs>> components(3);
    std::vector<int> outcomes;
    for (std::size_t idx : scored_order) {
      components[0].push_back(cv_cal_a[idx]);
      components[1].push_back(cv_cal_b[idx]);
      components[2].push_back(cv_evolving[idx]);
      outcomes.push_back(world.instances[idx].outcome);
    }
    const double clim_rps = eval::rps(sets.at("static"));
    out.mme_weights = baselines::optimize_mme_weights(components, outcomes, clim_rps);
    eval::ScoredSet mme_set;
    for (std::size_t k = 0; k < scored_order.size(); ++k) {
      const auto& inst = world.instances[scored_order[k]];
      const BinProbs p = baselines::mme_predict(
          out.mme_weights.w, {components[0][k], components[1][k], components[2][k]});
      mme_set.push_back(eval::scored(p, inst.outcome, inst.grid_id, inst.init, inst.year));
    }
    sets["mme"] = std::move(mme_set);
  }

  for (auto& [name, set] : sets) {
    out.reports.emplace(name, eval::evaluate(set, sets.at("static"), cfg.auc_policy));
    out.models.push_back({name, std::move(set)});
  }

  // Final full-data artifacts (the operational model).
  {
    const auto kde = detail::fit_fold_climatology(world, {});
    std::vector<blend::FeatureRow> rows;
    std::vector<BinProbs> all_raw_a, all_raw_b;
    std::vector<int> outcomes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& inst = world.instances[i];
      rows.push_back(features_for(world, inst, clim::evolving_bin_probs(kde.at(inst.grid_id),
                                                                        inst.init)));
      all_raw_a.push_back(raw_a[i]);
      all_raw_b.push_back(raw_b[i]);
      outcomes.push_back(inst.outcome);
    }
    blend::FitOptions fit_opts;
    fit_opts.ridge = cfg.ridge;
    out.final_blend = blend::fit_blend(rows, fit_opts);
    out.platt["model_a"] = baselines::platt_fit(all_raw_a, outcomes);
    out.platt["model_b"] = baselines::platt_fit(all_raw_b, outcomes);
    for (auto& [grid, fitted] : kde) out.final_climatology.emplace(grid, fitted);
  }

  out.world = std::move(world);
  return out;
}

// --- artifact files -------------------------------------------------------------

namespace detail {

inline std::string onsets_csv(const std::vector<OnsetRecord>& onsets) {
  std::ostringstream out;
  out << "grid_id,year,onset_date\n";
  for (const auto& rec : onsets) {
    out << rec.grid_id << ',' << rec.year << ',' << (rec.onset ? rec.onset->to_string() : "")
        << '\n';
  }
  return out.str();
}

inline std::string climatology_csv(const std::map<std::string, clim::ClimatologyKde>& models) {
  std::ostringstream out;
  out << "grid_id,bandwidth_days,support_lo,support_hi,onset_doys\n";
  for (const auto& [grid, kde] : models) {
    out << grid << ',' << fmt_sig(kde.bandwidth(), 12) << ',' << fmt_fixed(kde.support().lo, 1)
        << ',' << fmt_fixed(kde.support().hi, 1) << ',';
    const auto& doys = kde.onset_doys();
    for (std::size_t i = 0; i < doys.size(); ++i) {
      if (i) out << ';';
      out << fmt_fixed(doys[i], 1);
    }
    out << '\n';
  }
  return out.str();
}

inline std::string features_csv(const std::vector<blend::FeatureRow>& rows) {
  std::ostringstream out;
  out << "grid_id,init_date,outcome";
  const char* names[5] = {"pi", "alpha", "nu", "beta", "mu"};
  for (const auto* name : names)
    for (int j = 1; j <= 4; ++j) out << ',' << name << j;
  out << '\n';
  for (const auto& row : rows) {
    out << row.grid_id << ',' << row.init.to_string() << ',' << row.outcome;
    for (int f = 0; f < 5; ++f)
      for (int j = 0; j < 4; ++j) out << ',' << fmt_fixed(row.base(f, j), 6);
    out << '\n';
  }
  return out.str();
}

inline std::string blend_model_csv(const blend::BlendModel& model) {
  std::ostringstream out;
  out << "kind,term,lead_bin,outcome_bin,value\n";
  for (int l = 0; l < blend::kTermsPerBin; ++l) {
    for (int j = 0; j < blend::kLeadBins; ++j) {
      for (int k = 0; k < blend::kOutcomeCols; ++k) {
        out << "coef," << l << ',' << (j + 1) << ',' << (k + 1) << ','
            << fmt_sig(model.coefficients(l * blend::kLeadBins + j, k), 12) << '\n';
      }
    }
  }
  for (int b = 0; b < blend::kBaseFeatures; ++b) {
    out << "mean," << (b / blend::kLeadBins) << ',' << (b % blend::kLeadBins + 1) << ",0,"
        << fmt_sig(model.feat_mean(b), 12) << '\n';
    out << "scale," << (b / blend::kLeadBins) << ',' << (b % blend::kLeadBins + 1) << ",0,"
        << fmt_sig(model.feat_scale(b), 12) << '\n';
  }
  return out.str();
}

inline std::string predictions_csv(const eval::ScoredSet& set) {
  std::ostringstream out;
  out << "grid_id,init_date,p_week1,p_week2,p_week3,p_week4,p_later\n";
  for (const auto& f : set) {
    out << f.grid_id << ',' << f.init.to_string();
    for (double p : f.probs) out << ',' << fmt_fixed(p, 6);
    out << '\n';
  }
  return out.str();
}

inline std::string outcomes_csv(const eval::ScoredSet& set) {
  std::ostringstream out;
  out << "grid_id,init_date,year,outcome\n";
  for (const auto& f : set) {
    out << f.grid_id << ',' << f.init.to_string() << ',' << f.year << ',' << f.outcome << '\n';
  }
  return out.str();
}

inline std::string platt_csv(const baselines::PlattParams& params) {
  std::ostringstream out;
  out << "bin,a,b,degenerate\n";
  for (int j = 0; j < kNumBins; ++j) {
    const auto& bin = params.bins[static_cast<std::size_t>(j)];
    out << (j + 1) << ',' << fmt_sig(bin.a, 12) << ',' << fmt_sig(bin.b, 12) << ','
        << (bin.degenerate ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string weights_csv(const std::vector<std::string>& names,
                               const baselines::EnsembleWeights& weights) {
  std::ostringstream out;
  out << "component,weight,achieved_rpss\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    out << names[k] << ',' << fmt_fixed(weights.w[k], 6) << ',' << fmt_fixed(weights.rpss, 6)
        << '\n';
  }
  return out.str();
}

inline std::string report_csv(const eval::EvalReport& report) {
  std::ostringstream out;
  out << "metric,value\n";
  auto row = [&](const std::string& key, double v) {
    out << key << ',' << fmt_fixed(v, 6) << '\n';
  };
  row("brier", report.brier);
  row("rps", report.rps);
  row("auc", report.auc);
  row("bss", report.bss);
  row("rpss", report.rpss);
  for (const auto& lead : report.per_lead) {
    const std::string prefix = "lead" + std::to_string(lead.bin) + "_";
    row(prefix + "brier", lead.brier);
    row(prefix + "bss", lead.bss);
    if (lead.auc) row(prefix + "auc", *lead.auc);
  }
  for (const auto& ys : report.per_year) {
    const std::string prefix = "year" + std::to_string(ys.year) + "_";
    row(prefix + "brier", ys.brier);
    row(prefix + "bss", ys.bss);
    if (ys.auc) row(prefix + "auc", *ys.auc);
  }
  for (const auto& gs : report.per_grid) {
    const std::string prefix = "grid_" + gs.grid_id + "_";
    row(prefix + "brier", gs.brier);
    row(prefix + "bss", gs.bss);
    if (gs.auc) row(prefix + "auc", *gs.auc);
  }
  return out.str();
}

inline std::string reliability_csv(const eval::Reliability& rel) {
  std::ostringstream out;
  out << "kind,index,x,y,count\n";
  for (std::size_t d = 0; d < rel.deciles.size(); ++d) {
    const auto& dec = rel.deciles[d];
    out << "decile," << (d + 1) << ',' << fmt_fixed(dec.mean_predicted, 6) << ','
        << fmt_fixed(dec.observed_frequency, 6) << ',' << dec.count << '\n';
  }
  for (std::size_t b = 0; b < rel.histogram_counts.size(); ++b) {
    out << "hist," << (b + 1) << ',' << fmt_fixed(0.1 * static_cast<double>(b), 6) << ','
        << fmt_fixed(rel.histogram_heights[b], 6) << ',' << rel.histogram_counts[b] << '\n';
  }
  return out.str();
}

}  // namespace detail

// Run the full pipeline and write every artifact under cfg.out_dir.
// Deterministic: identical config and seed produce byte-identical files.
inline PipelineOutputs run_pipeline(const RunConfig& cfg) {
  auto world = build_world(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";

  if (world.synthesized && cfg.write_inputs) {
    write_file_atomic(dir + "truth.csv", ingest::rainfall_csv(world.truth));
    write_file_atomic(dir + "forecasts.csv", ingest::forecast_csv(world.forecasts));
  }
  write_file_atomic(dir + "onsets.csv", detail::onsets_csv(world.onsets));

  auto outputs = run_models(cfg, std::move(world));

  write_file_atomic(dir + "climatology.csv", detail::climatology_csv(outputs.final_climatology));
  {
    std::vector<blend::FeatureRow> rows;
    for (const auto& inst : outputs.world.instances) {
      rows.push_back(features_for(outputs.world, inst,
                                  clim::evolving_bin_probs(
                                      outputs.final_climatology.at(inst.grid_id), inst.init)));
    }
    write_file_atomic(dir + "features.csv", detail::features_csv(rows));
  }
  write_file_atomic(dir + "blend_model.csv", detail::blend_model_csv(*outputs.final_blend));
  write_file_atomic(dir + "platt_model_a.csv", detail::platt_csv(outputs.platt.at("model_a")));
  write_file_atomic(dir + "platt_model_b.csv", detail::platt_csv(outputs.platt.at("model_b")));
  write_file_atomic(dir + "weights_mme.csv",
                    detail::weights_csv(outputs.mme_components, outputs.mme_weights));

  bool outcomes_written = false;
  for (const auto& model : outputs.models) {
    write_file_atomic(dir + "predictions_" + model.name + ".csv",
                      detail::predictions_csv(model.set));
    if (!outcomes_written) {
      write_file_atomic(dir + "truth_outcomes.csv", detail::outcomes_csv(model.set));
      outcomes_written = true;
    }
    const auto& report = outputs.reports.at(model.name);
    write_file_atomic(dir + "eval_" + model.name + ".csv", detail::report_csv(report));
    write_file_atomic(dir + "reliability_" + model.name + ".csv",
                      detail::reliability_csv(report.reliability));
  }
  return outputs;
}

}  // namespace pipeline
}  // namespace onsetblend
