#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "onsetblend/errors.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace onset {

// Modified Moron-Robertson onset criteria. Onset is the first wet day
// (>= wet_day_mm) of the first spell_len_days-day sequence whose cumulative
// rainfall reaches spell_total_mm, provided no dry_len_days-day window with
// total rainfall below dry_total_mm starts within the followup_days days
// after the spell.
struct OnsetConfig {
  double wet_day_mm = 1.0;
  int spell_len_days = 5;
  double spell_total_mm = 0.0;  // per grid cell
  int dry_len_days = 10;
  double dry_total_mm = 5.0;
  int followup_days = 30;
  MonthDay season_start{4, 1};
  MonthDay search_end{10, 31};
  MokPolicy mok_policy;

  void validate() const {
    if (spell_len_days < 1) throw Error(Errc::invalid_config, "spell_len_days must be >= 1");
    if (followup_days < dry_len_days)
      throw Error(Errc::invalid_config, "followup_days must be >= dry_len_days");
    if (!(wet_day_mm > 0.0 && spell_total_mm > 0.0 && dry_total_mm > 0.0))
      throw Error(Errc::invalid_config, "onset thresholds must be > 0");
  }

  // Variant presets: the no-filter variant searches from May 1 instead.
  static OnsetConfig for_variant(MokPolicy policy, double spell_total) {
    OnsetConfig cfg;
    cfg.mok_policy = policy;
    cfg.spell_total_mm = spell_total;
    if (policy.kind == MokKind::none) cfg.season_start = MonthDay{5, 1};
    return cfg;
  }

  // Days of data needed past a candidate to evaluate it fully: the last
  // follow-up dry window starts at d + spell_len + followup - dry_len and
  // ends at d + spell_len + followup - 1.
  int followup_span() const { return spell_len_days + followup_days - 1; }
};

namespace detail {

// Earliest admissible candidate day for the given season year.
inline Date effective_start(const OnsetConfig& cfg, int year, std::optional<Date> mok_date) {
  Date start = cfg.season_start.in_year(year);
  switch (cfg.mok_policy.kind) {
    case MokKind::true_mok:
      if (!mok_date)
        throw Error(Errc::invalid_config, "TrueMok policy requires an observed MOK date");
      start = std::max(start, *mok_date);
      break;
    case MokKind::clim_mok:
      start = std::max(start, cfg.mok_policy.clim_date.in_year(year));
      break;
    case MokKind::none:
      break;
  }
  return start;
}

// Rolling-window sums; sums[i] = values[i] + ... + values[i+w-1].
inline std::vector<double> window_sums(const std::vector<double>& values, int w) {
  std::vector<double> sums;
  if (static_cast<int>(values.size()) < w) return sums;
  sums.resize(values.size() - static_cast<std::size_t>(w) + 1);
  double acc = 0.0;
  for (int i = 0; i < w; ++i) acc += values[static_cast<std::size_t>(i)];
  sums[0] = acc;
  for (std::size_t i = 1; i < sums.size(); ++i) {
    acc += values[i + static_cast<std::size_t>(w) - 1] - values[i - 1];
    sums[i] = acc;
  }
  return sums;
}

}  // namespace detail

// Detects the onset date for one season, or nullopt when no day qualifies.
// `mok_date` is consulted only under the TrueMok policy. `season_year`
// defaults to the series' starting year; pass it explicitly when the series
// spans several years.
inline std::optional<Date> detect_onset(const DailyRainSeries& series, const OnsetConfig& cfg,
                                        std::optional<Date> mok_date = std::nullopt,
                                        std::optional<int> season_year = std::nullopt) {
  cfg.validate();
  const int year = season_year.value_or(series.start.year());
  const Date first = std::max(detail::effective_start(cfg, year, mok_date), series.start);
  const Date horizon = cfg.search_end.in_year(year);

  // Candidate d is fully evaluable when data reaches d + spell + followup - 1.
  const Date last_evaluable = series.end() - cfg.followup_span();
  if (first > last_evaluable)
    throw Error(Errc::series_too_short,
                "series for " + series.grid_id + " too short to evaluate any onset candidate");
  const Date last = std::min(horizon, last_evaluable);

  const auto spell_sums = detail::window_sums(series.values, cfg.spell_len_days);
  const auto dry_sums = detail::window_sums(series.values, cfg.dry_len_days);

  for (Date d = first; d <= last; ++d) {
    const std::size_t idx = static_cast<std::size_t>(d - series.start);
    if (series.values[idx] < cfg.wet_day_mm) continue;
    if (spell_sums[idx] < cfg.spell_total_mm) continue;
    bool dry_spell = false;
    const std::size_t win_lo = idx + static_cast<std::size_t>(cfg.spell_len_days);
    const std::size_t win_hi =
        win_lo + static_cast<std::size_t>(cfg.followup_days - cfg.dry_len_days);
    for (std::size_t s = win_lo; s <= win_hi; ++s) {
      if (dry_sums[s] < cfg.dry_total_mm) {
        dry_spell = true;
        break;
      }
    }
    if (!dry_spell) return d;
  }
  return std::nullopt;
}

// Climatological five-day wet-spell amount: 5 x mean daily rainfall over the
// season window, pooled across years. An explicit per-grid override wins.
inline double compute_five_day_threshold(const std::vector<DailyRainSeries>& histories,
                                         MonthDay window_start, MonthDay window_end,
                                         std::optional<double> override_mm = std::nullopt) {
  if (override_mm) return *override_mm;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& series : histories) {
    const int y0 = series.start.year();
    const int y1 = series.end().year();
    for (int y = y0; y <= y1; ++y) {
      const Date lo = std::max(window_start.in_year(y), series.start);
      const Date hi = std::min(window_end.in_year(y), series.end());
      for (Date d = lo; d <= hi; ++d) {
        total += series.on(d);
        ++count;
      }
    }
  }
  if (count == 0) throw Error(Errc::empty_history, "no rainfall history in season window");
  return 5.0 * total / static_cast<double>(count);
}

// Onset bin for one ensemble member, applying the truth criteria to the
// concatenation of observed pre-init rainfall and the member's lead days.
// Candidates are restricted to days strictly after `init`. Follow-up dry
// windows extending past the forecast horizon are treated as wet: a
// candidate without a complete follow-up counts as onset unless a dry spell
// is actually forecast before the horizon.
inline int detect_forecast_onset(const DailyRainSeries& pre_init_truth,
                                 const std::vector<double>& member_lead_rain, Date init,
                                 const OnsetConfig& cfg,
                                 std::optional<Date> mok_date = std::nullopt) {
  cfg.validate();
  if (!pre_init_truth.contains(init))
    throw Error(Errc::series_too_short, "pre-init truth does not reach the init date");
  const int lead_days = static_cast<int>(member_lead_rain.size());
  if (lead_days < cfg.spell_len_days)
    throw Error(Errc::series_too_short, "forecast horizon shorter than the wet spell");

  // Combined series: truth through init, then lead days 1..L.
  std::vector<double> combined;
  const std::size_t pre_len = static_cast<std::size_t>(init - pre_init_truth.start) + 1;
  combined.reserve(pre_len + member_lead_rain.size());
  combined.insert(combined.end(), pre_init_truth.values.begin(),
                  pre_init_truth.values.begin() + static_cast<std::ptrdiff_t>(pre_len));
  combined.insert(combined.end(), member_lead_rain.begin(), member_lead_rain.end());
  const Date series_start = pre_init_truth.start;
  const Date horizon = init + lead_days;

  const Date season_first = detail::effective_start(cfg, init.year(), mok_date);
  const Date first = std::max({season_first, init + 1, series_start});
  // Onsets past bin 4 map to bin 5 regardless, so the scan can stop there.
  const Date last_relevant = init + 4 * kDaysPerBin;
  // The wet spell itself must be fully forecast.
  const Date last_spell_fits = horizon - (cfg.spell_len_days - 1);
  const Date last = std::min(last_relevant, last_spell_fits);

  const auto spell_sums = detail::window_sums(combined, cfg.spell_len_days);
  const auto dry_sums = detail::window_sums(combined, cfg.dry_len_days);

  for (Date d = first; d <= last; ++d) {
    const std::size_t idx = static_cast<std::size_t>(d - series_start);
    if (combined[idx] < cfg.wet_day_mm) continue;
    if (spell_sums[idx] < cfg.spell_total_mm) continue;
    bool dry_spell = false;
    const std::size_t win_lo = idx + static_cast<std::size_t>(cfg.spell_len_days);
    const std::size_t win_hi =
        win_lo + static_cast<std::size_t>(cfg.followup_days - cfg.dry_len_days);
    for (std::size_t s = win_lo; s <= win_hi; ++s) {
      if (s + static_cast<std::size_t>(cfg.dry_len_days) > combined.size()) break;  // censored
      if (dry_sums[s] < cfg.dry_total_mm) {
        dry_spell = true;
        break;
      }
    }
    if (!dry_spell) return bin_of_onset(init, d);
  }
  return kNumBins;
}

}  // namespace onset
}  // namespace onsetblend
