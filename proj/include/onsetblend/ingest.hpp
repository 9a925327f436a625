#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "onsetblend/calendar.hpp"
#include "onsetblend/csv.hpp"
#include "onsetblend/errors.hpp"
#include "onsetblend/rng.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace ingest {

inline constexpr const char* kRainfallHeader = "grid_id,date,rain_mm";
inline constexpr const char* kForecastHeader = "model,grid_id,init_date,member,lead_day,rain_mm";

// --- parsing ---------------------------------------------------------------

inline std::vector<DailyRainSeries> parse_rainfall_csv(const std::string& path) {
  CsvReader reader(path, kRainfallHeader);
  struct Row {
    Date date;
    double value;
    std::size_t line;
  };
  std::vector<std::string> grid_order;
  std::map<std::string, std::vector<Row>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail(Errc::malformed_row, "expected 3 fields");
    const auto date = Date::parse(fields[1]);
    if (!date) reader.fail(Errc::malformed_row, "bad date '" + fields[1] + "'");
    const double value = reader.parse_double(fields[2]);
    if (!std::isfinite(value)) reader.fail(Errc::malformed_row, "non-finite rainfall");
    if (value < 0.0)
      reader.fail(Errc::negative_rain, "negative rainfall " + fields[2]);
    auto [it, inserted] = rows.try_emplace(fields[0]);
    if (inserted) grid_order.push_back(fields[0]);
    it->second.push_back({*date, value, reader.line_number()});
  }

  std::vector<DailyRainSeries> out;
  for (const auto& grid : grid_order) {
    auto& grid_rows = rows[grid];
    std::stable_sort(grid_rows.begin(), grid_rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    DailyRainSeries series;
    series.grid_id = grid;
    series.start = grid_rows.front().date;
    series.values.reserve(grid_rows.size());
    Date expected = series.start;
    for (const auto& row : grid_rows) {
      if (row.date != expected) {
        if (row.date == expected - 1)
          throw Error(Errc::malformed_row, "duplicate date " + row.date.to_string() + " for " +
                                               grid + " (line " + std::to_string(row.line) + ")");
        throw Error(Errc::missing_day, "grid " + grid + " missing " + expected.to_string() +
                                           " before line " + std::to_string(row.line));
      }
      series.values.push_back(row.value);
      ++expected;
    }
    out.push_back(std::move(series));
  }
  return out;
}

inline std::vector<ForecastEnsemble> parse_forecast_csv(const std::string& path) {
  CsvReader reader(path, kForecastHeader);
  struct Row {
    long member;
    long lead;
    double value;
  };
  using Key = std::tuple<std::string, std::string, Date>;
  std::vector<Key> order;
  std::map<Key, std::vector<Row>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 6) reader.fail(Errc::malformed_row, "expected 6 fields");
    const auto init = Date::parse(fields[2]);
    if (!init) reader.fail(Errc::malformed_row, "bad init_date '" + fields[2] + "'");
    const long member = reader.parse_long(fields[3]);
    const long lead = reader.parse_long(fields[4]);
    if (member < 1) reader.fail(Errc::malformed_row, "member must be >= 1");
    if (lead < 1) reader.fail(Errc::malformed_row, "lead_day must be >= 1");
    const double value = reader.parse_double(fields[5]);
    if (!std::isfinite(value) || value < 0.0)
      reader.fail(Errc::malformed_row, "rainfall must be finite and >= 0");
    Key key{fields[0], fields[1], *init};
    auto [it, inserted] = rows.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back({member, lead, value});
  }

  std::vector<ForecastEnsemble> out;
  for (const auto& key : order) {
    const auto& group = rows[key];
    std::size_t members = 0, leads = 0;
    for (const auto& row : group) {
      members = std::max(members, static_cast<std::size_t>(row.member));
      leads = std::max(leads, static_cast<std::size_t>(row.lead));
    }
    ForecastEnsemble ens;
    ens.model_id = std::get<0>(key);
    ens.grid_id = std::get<1>(key);
    ens.init = std::get<2>(key);
    ens.members = members;
    ens.lead_days = leads;
    ens.data.assign(members * leads, -1.0);
    for (const auto& row : group) {
      double& cell = ens.at(static_cast<std::size_t>(row.member - 1),
                            static_cast<std::size_t>(row.lead));
      if (cell >= 0.0)
        throw Error(Errc::ragged_ensemble,
                    "duplicate member/lead cell in ensemble " + ens.model_id + "/" + ens.grid_id +
                        "/" + ens.init.to_string());
      cell = row.value;
    }
    for (double v : ens.data) {
      if (v < 0.0)
        throw Error(Errc::ragged_ensemble,
                    "missing member/lead cell in ensemble " + ens.model_id + "/" + ens.grid_id +
                        "/" + ens.init.to_string());
    }
    out.push_back(std::move(ens));
  }
  return out;
}

// --- writing ---------------------------------------------------------------

inline std::string rainfall_csv(const std::vector<DailyRainSeries>& series_list) {
  std::ostringstream out;
  out << kRainfallHeader << '\n';
  for (const auto& series : series_list) {
    Date d = series.start;
    for (double v : series.values) {
      out << series.grid_id << ',' << d.to_string() << ',' << fmt_fixed(v, 3) << '\n';
      ++d;
    }
  }
  return out.str();
}

inline std::string forecast_csv(const std::vector<ForecastEnsemble>& ensembles) {
  std::ostringstream out;
  out << kForecastHeader << '\n';
  for (const auto& ens : ensembles) {
    for (std::size_t m = 0; m < ens.members; ++m) {
      for (std::size_t l = 1; l <= ens.lead_days; ++l) {
        out << ens.model_id << ',' << ens.grid_id << ',' << ens.init.to_string() << ','
            << (m + 1) << ',' << l << ',' << fmt_fixed(ens.at(m, l), 3) << '\n';
      }
    }
  }
  return out.str();
}

// --- synthetic world --------------------------------------------------------

// Seeded generator of a desk-scale test world: a pre-monsoon drizzle regime
// (always below the wet-day threshold), an injected qualifying wet spell at a
// Gaussian-drawn onset day with a guaranteed wet follow-up, optional injected
// false onsets (a wet spell followed by a bone-dry fortnight), and ensemble
// forecasts whose correlation with truth decays by lead week.
struct SyntheticConfig {
  std::uint64_t seed = 7;
  int n_years = 30;
  int n_cells = 1;
  int start_year = 1995;
  int season_peak_doy = 168;  // mid June
  double onset_spread_days = 12.0;
  std::array<double, 4> rho{0.9, 0.6, 0.3, 0.1};  // per-lead-week skill

  double five_day_threshold_mm = 20.0;
  int members_a = 1;
  int members_b = 10;
  int lead_days = 31;
  std::array<int, 2> init_weekdays{0, 3};  // Monday and Thursday
  MonthDay init_start{5, 1};
  double false_onset_prob = 0.35;

  void validate() const {
    if (n_years < 1 || n_cells < 1) throw Error(Errc::invalid_config, "need years and cells");
    if (!(five_day_threshold_mm > 0.0))
      throw Error(Errc::invalid_config, "five_day_threshold_mm must be > 0");
    if (members_a < 1 || members_b < 1 || lead_days < 1)
      throw Error(Errc::invalid_config, "members and lead days must be >= 1");
    if (onset_spread_days < 0.0) throw Error(Errc::invalid_config, "spread must be >= 0");
    if (season_peak_doy < 130 || season_peak_doy > 240)
      throw Error(Errc::invalid_config, "season peak must lie inside the search season");
    for (int w = 1; w < 4; ++w) {
      if (rho[static_cast<std::size_t>(w)] > rho[static_cast<std::size_t>(w - 1)] ||
          rho[static_cast<std::size_t>(w)] < 0.0 || rho[static_cast<std::size_t>(w)] > 1.0)
        throw Error(Errc::invalid_config, "rho must be non-increasing within [0,1]");
    }
    if (rho[0] > 1.0 || rho[0] < 0.0) throw Error(Errc::invalid_config, "rho must lie in [0,1]");
    for (int wd : init_weekdays) {
      if (wd < 0 || wd > 6) throw Error(Errc::invalid_config, "init weekday outside 0..6");
    }
  }

  std::string cell_id(int index) const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cell%02d", index + 1);
    return buf;
  }
};

struct CellYearPlan {
  Date onset;
  std::optional<Date> false_onset;
};

namespace detail {

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

inline int clamp_onset_doy(double draw) {
  return static_cast<int>(std::clamp(std::round(draw), 150.0, 250.0));
}

// Per-(cell, year) injected onset days; a pure function of the config.
inline std::vector<std::vector<CellYearPlan>> plan_world(const SyntheticConfig& cfg) {
  Rng rng = Rng(cfg.seed).fork(0xA11CEULL);
  std::vector<std::vector<CellYearPlan>> plan(static_cast<std::size_t>(cfg.n_cells));
  for (int c = 0; c < cfg.n_cells; ++c) {
    for (int y = 0; y < cfg.n_years; ++y) {
      const int year = cfg.start_year + y;
      const int onset_doy =
          clamp_onset_doy(rng.normal(cfg.season_peak_doy, cfg.onset_spread_days));
      const double coin = rng.uniform();
      const double jitter = rng.uniform();
      CellYearPlan p;
      p.onset = Date::from_ymd(year, 1, 1) + (onset_doy - 1);
      const int false_doy = onset_doy - 45 + static_cast<int>(jitter * 6.0);
      if (coin < cfg.false_onset_prob && false_doy >= 95) {
        p.false_onset = Date::from_ymd(year, 1, 1) + (false_doy - 1);
      }
      plan[static_cast<std::size_t>(c)].push_back(p);
    }
  }
  return plan;
}

// Daily rainfall for one date given that year's plan. Pre-onset days stay
// below 1 mm except the injected spells, so the first qualifying candidate is
// the injected onset day by construction.
inline double day_rain(Date d, const CellYearPlan& plan, double spell_daily, bool with_false,
                       Rng& rng) {
  const Date o = plan.onset;
  if (d >= o) {
    if (d <= o + 4) return spell_daily;
    const Date oct31 = MonthDay{10, 31}.in_year(d.year());
    if (d <= o + 34) return round3(1.0 + (rng.uniform() < 0.75 ? rng.gamma(2.0, 5.0) : 0.0));
    if (d <= oct31) return round3(rng.uniform() < 0.7 ? rng.gamma(2.0, 5.0) : 0.0);
    return round3(rng.uniform(0.0, 0.9));
  }
  if (with_false && plan.false_onset) {
    const Date f = *plan.false_onset;
    if (d >= f && d <= f + 4) return 7.0;
    if (d > f + 4 && d <= f + 18) return 0.0;
  }
  return round3(rng.uniform(0.0, 0.9));
}

}  // namespace detail

// Injected onset dates, indexed [cell][year]; the generated truth satisfies
// detect_onset(truth) == injected date under the default criteria.
inline std::vector<std::vector<CellYearPlan>> synthetic_plan(const SyntheticConfig& cfg) {
  cfg.validate();
  return detail::plan_world(cfg);
}

inline std::vector<DailyRainSeries> generate_synthetic_truth(const SyntheticConfig& cfg) {
  cfg.validate();
  const auto plan = detail::plan_world(cfg);
  const double spell_daily = std::max(8.0, 0.3 * cfg.five_day_threshold_mm);
  Rng rng = Rng(cfg.seed).fork(0x7247ULL);

  std::vector<DailyRainSeries> out;
  for (int c = 0; c < cfg.n_cells; ++c) {
    DailyRainSeries series;
    series.grid_id = cfg.cell_id(c);
    series.start = Date::from_ymd(cfg.start_year, 1, 1);
    const Date last = Date::from_ymd(cfg.start_year + cfg.n_years - 1, 12, 31);
    series.values.reserve(static_cast<std::size_t>(last - series.start) + 1);
    for (Date d = series.start; d <= last; ++d) {
      const auto& year_plan =
          plan[static_cast<std::size_t>(c)][static_cast<std::size_t>(d.year() - cfg.start_year)];
      series.values.push_back(detail::day_rain(d, year_plan, spell_daily, true, rng));
    }
    out.push_back(std::move(series));
  }
  return out;
}

// Twice-weekly initialization dates from init_start up to (strictly before)
// the stop date.
inline std::vector<Date> forecast_init_schedule(const SyntheticConfig& cfg, int year, Date stop) {
  std::vector<Date> inits;
  for (Date d = cfg.init_start.in_year(year); d < stop; ++d) {
    if (d.weekday() == cfg.init_weekdays[0] || d.weekday() == cfg.init_weekdays[1])
      inits.push_back(d);
  }
  return inits;
}

// One synthetic ensemble: member rainfall is rho_w * truth + (1 - rho_w) *
// climatological noise for lead week w, where the noise follows the truth
// generator's seasonal regime around a freshly drawn onset day per member.
inline ForecastEnsemble synthesize_ensemble(const DailyRainSeries& truth, Date init,
                                            const std::string& model_id, int members,
                                            const SyntheticConfig& cfg, Rng& rng) {
  if (init + cfg.lead_days > truth.end())
    throw Error(Errc::lead_window_exceeds_truth,
                "truth series ends before lead day " + std::to_string(cfg.lead_days) + " of " +
                    init.to_string());
  const double spell_daily = std::max(8.0, 0.3 * cfg.five_day_threshold_mm);
  ForecastEnsemble ens;
  ens.model_id = model_id;
  ens.grid_id = truth.grid_id;
  ens.init = init;
  ens.members = static_cast<std::size_t>(members);
  ens.lead_days = static_cast<std::size_t>(cfg.lead_days);
  ens.data.resize(ens.members * ens.lead_days);
  for (int m = 0; m < members; ++m) {
    CellYearPlan noise_plan;
    const int noise_doy =
        detail::clamp_onset_doy(rng.normal(cfg.season_peak_doy, cfg.onset_spread_days));
    noise_plan.onset = Date::from_ymd(init.year(), 1, 1) + (noise_doy - 1);
    for (int l = 1; l <= cfg.lead_days; ++l) {
      const Date d = init + l;
      const int week = std::min((l - 1) / 7, 3);
      const double rho = cfg.rho[static_cast<std::size_t>(week)];
      const double noise = detail::day_rain(d, noise_plan, spell_daily, false, rng);
      ens.at(static_cast<std::size_t>(m), static_cast<std::size_t>(l)) =
          detail::round3(rho * truth.on(d) + (1.0 - rho) * noise);
    }
  }
  return ens;
}

// Full synthetic forecast archive for both models, for every cell and year,
// initialized twice weekly from init_start through the injected onset date.
inline std::vector<ForecastEnsemble> generate_synthetic_forecasts(
    const std::vector<DailyRainSeries>& truth, const SyntheticConfig& cfg) {
  cfg.validate();
  if (truth.size() != static_cast<std::size_t>(cfg.n_cells))
    throw Error(Errc::invalid_config, "truth series count does not match n_cells");
  const auto plan = detail::plan_world(cfg);
  Rng rng = Rng(cfg.seed).fork(0xF0CA57ULL);
  std::vector<ForecastEnsemble> out;
  for (int c = 0; c < cfg.n_cells; ++c) {
    for (int y = 0; y < cfg.n_years; ++y) {
      const int year = cfg.start_year + y;
      const auto& year_plan = plan[static_cast<std::size_t>(c)][static_cast<std::size_t>(y)];
      for (Date init : forecast_init_schedule(cfg, year, year_plan.onset)) {
        out.push_back(synthesize_ensemble(truth[static_cast<std::size_t>(c)], init, "model_a",
                                          cfg.members_a, cfg, rng));
        out.push_back(synthesize_ensemble(truth[static_cast<std::size_t>(c)], init, "model_b",
                                          cfg.members_b, cfg, rng));
      }
    }
  }
  return out;
}

inline std::vector<GridCell> synthetic_cells(const SyntheticConfig& cfg) {
  std::vector<GridCell> cells;
  for (int c = 0; c < cfg.n_cells; ++c) {
    GridCell cell;
    cell.id = cfg.cell_id(c);
    cell.lat = 18.0 + 2.0 * c;
    cell.lon = 78.0 + 2.0 * c;
    cell.five_day_threshold_mm = cfg.five_day_threshold_mm;
    cell.mok_policy = MokPolicy::none();
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace ingest
}  // namespace onsetblend
