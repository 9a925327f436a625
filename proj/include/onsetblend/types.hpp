#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "onsetblend/calendar.hpp"
#include "onsetblend/errors.hpp"

namespace onsetblend {

// Forecasts target one of five bins: onset in week 1..4 after initialization,
// or later than week 4 (which also covers "no onset").
inline constexpr int kNumBins = 5;
inline constexpr int kDaysPerBin = 7;

enum class MokKind { true_mok, clim_mok, none };

// When the onset search may begin relative to monsoon arrival over Kerala.
struct MokPolicy {
  MokKind kind = MokKind::none;
  MonthDay clim_date{6, 2};  // used only for clim_mok

  static MokPolicy true_mok() { return {MokKind::true_mok, {}}; }
  static MokPolicy clim_mok(MonthDay md) { return {MokKind::clim_mok, md}; }
  static MokPolicy none() { return {MokKind::none, {}}; }
};

struct GridCell {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  double five_day_threshold_mm = 0.0;
  MokPolicy mok_policy;

  void validate() const {
    if (id.empty()) throw Error(Errc::invalid_config, "grid cell id empty");
    if (!(five_day_threshold_mm > 0.0))
      throw Error(Errc::invalid_config, "five_day_threshold_mm must be > 0 for " + id);
    if (lat < -90.0 || lat > 90.0) throw Error(Errc::invalid_config, "lat out of range for " + id);
    if (lon < -180.0 || lon > 180.0) throw Error(Errc::invalid_config, "lon out of range for " + id);
  }
};

// One grid cell's contiguous daily rainfall record.
struct DailyRainSeries {
  std::string grid_id;
  Date start;
  std::vector<double> values;  // mm/day, one per day from `start`

  Date end() const { return start + static_cast<int>(values.size()) - 1; }
  bool contains(Date d) const { return d >= start && d <= end(); }

  double on(Date d) const {
    return values[static_cast<std::size_t>(d - start)];
  }

  void validate() const {
    if (grid_id.empty()) throw Error(Errc::invalid_config, "series grid_id empty");
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(Errc::invalid_config, "non-finite rainfall in " + grid_id);
      if (v < 0.0) throw Error(Errc::negative_rain, "negative rainfall in " + grid_id);
    }
  }
};

// Ensemble rainfall forecast: members x lead days, lead day l in 1..L.
struct ForecastEnsemble {
  std::string model_id;
  std::string grid_id;
  Date init;
  std::size_t members = 0;
  std::size_t lead_days = 0;
  std::vector<double> data;  // row-major [member][lead]

  double at(std::size_t member, std::size_t lead_day) const {
    return data[member * lead_days + (lead_day - 1)];
  }
  double& at(std::size_t member, std::size_t lead_day) {
    return data[member * lead_days + (lead_day - 1)];
  }

  // Member-mean rainfall for one lead day.
  double daily_mean(std::size_t lead_day) const {
    double sum = 0.0;
    for (std::size_t m = 0; m < members; ++m) sum += at(m, lead_day);
    return sum / static_cast<double>(members);
  }

  void validate() const {
    if (members < 1) throw Error(Errc::invalid_config, "ensemble needs at least one member");
    if (data.size() != members * lead_days)
      throw Error(Errc::ragged_ensemble, "ensemble matrix not dense");
    for (double v : data) {
      if (!std::isfinite(v) || v < 0.0)
        throw Error(Errc::invalid_config, "ensemble rainfall must be finite and >= 0");
    }
  }
};

// Probability vector over the five outcome bins.
struct BinProbs {
  std::array<double, kNumBins> p{};

  double operator[](std::size_t j) const { return p[j]; }
  double& operator[](std::size_t j) { return p[j]; }

  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  void validate(double tol = 1e-9) const {
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0 + tol))
        throw Error(Errc::invalid_config, "bin probability outside [0,1]");
    }
    if (std::abs(sum() - 1.0) > tol)
      throw Error(Errc::invalid_config, "bin probabilities do not sum to 1");
  }

  static BinProbs uniform() {
    BinProbs b;
    b.p.fill(1.0 / kNumBins);
    return b;
  }
};

struct OnsetRecord {
  std::string grid_id;
  int year = 0;
  std::optional<Date> onset;
};

// Lead-week bin of a date relative to an initialization date:
// days init+1..init+7 -> 1, ..., init+22..init+28 -> 4, later -> 5.
inline int bin_of_onset(Date init, Date onset) {
  const int delta = onset - init;
  if (delta <= 0) throw Error(Errc::invalid_config, "onset not after init date");
  if (delta > 4 * kDaysPerBin) return kNumBins;
  return (delta - 1) / kDaysPerBin + 1;
}

}  // namespace onsetblend
