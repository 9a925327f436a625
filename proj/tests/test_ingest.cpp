#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "onsetblend/csv.hpp"
#include "onsetblend/ingest.hpp"
#include "onsetblend/onset.hpp"

using namespace onsetblend;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "tmp_" + name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("rainfall parser echoes a simple file") {
  const auto path = write_temp("rain_simple.csv",
                               "grid_id,date,rain_mm\n"
                               "g1,2000-06-01,0\n"
                               "g1,2000-06-02,5\n"
                               "g1,2000-06-03,12\n");
  const auto series = ingest::parse_rainfall_csv(path);
  REQUIRE(series.size() == 1);
  CHECK(series[0].grid_id == "g1");
  CHECK(series[0].start == Date::from_ymd(2000, 6, 1));
  CHECK(series[0].values == std::vector<double>{0.0, 5.0, 12.0});
}

TEST_CASE("rainfall parser rejects gaps, negatives and malformed rows") {
  const auto gap = write_temp("rain_gap.csv",
                              "grid_id,date,rain_mm\n"
                              "g1,2000-06-01,1\n"
                              "g1,2000-06-03,2\n");
  CHECK_THROWS_MATCHES(ingest::parse_rainfall_csv(gap), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::missing_day; }));

  const auto negative = write_temp("rain_neg.csv",
                                   "grid_id,date,rain_mm\n"
                                   "g1,2000-06-01,-1\n");
  CHECK_THROWS_MATCHES(ingest::parse_rainfall_csv(negative), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::negative_rain; }));

  const auto malformed = write_temp("rain_bad.csv",
                                    "grid_id,date,rain_mm\n"
                                    "g1,2000-06-01,1\n"
                                    "g1,not-a-date,1\n");
  try {
    ingest::parse_rainfall_csv(malformed);
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_row);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);  // line number reported
  }

  const auto bad_header = write_temp("rain_hdr.csv", "grid,when,mm\n");
  CHECK_THROWS_AS(ingest::parse_rainfall_csv(bad_header), Error);
}

TEST_CASE("rainfall parser splits interleaved grids") {
  std::string content = "grid_id,date,rain_mm\n";
  Date d = Date::from_ymd(2000, 1, 1);
  for (int i = 0; i < 365; ++i) {
    content += "g1," + (d + i).to_string() + ",1.000\n";
    content += "g2," + (d + i).to_string() + ",2.000\n";
  }
  const auto series = ingest::parse_rainfall_csv(write_temp("rain_two.csv", content));
  REQUIRE(series.size() == 2);
  CHECK(series[0].grid_id == "g1");
  CHECK(series[0].values.size() == 365);
  CHECK(series[1].grid_id == "g2");
  CHECK(series[1].values.size() == 365);
}

TEST_CASE("forecast parser builds dense ensembles and rejects ragged ones") {
  const auto ok = write_temp("fc_ok.csv",
                             "model,grid_id,init_date,member,lead_day,rain_mm\n"
                             "m,g,2000-06-01,1,1,1\n"
                             "m,g,2000-06-01,1,2,2\n"
                             "m,g,2000-06-01,1,3,3\n"
                             "m,g,2000-06-01,2,1,4\n"
                             "m,g,2000-06-01,2,2,5\n"
                             "m,g,2000-06-01,2,3,6\n");
  const auto ensembles = ingest::parse_forecast_csv(ok);
  REQUIRE(ensembles.size() == 1);
  CHECK(ensembles[0].members == 2);
  CHECK(ensembles[0].lead_days == 3);
  CHECK(ensembles[0].at(1, 3) == 6.0);

  const auto ragged = write_temp("fc_ragged.csv",
                                 "model,grid_id,init_date,member,lead_day,rain_mm\n"
                                 "m,g,2000-06-01,1,1,1\n"
                                 "m,g,2000-06-01,1,2,2\n"
                                 "m,g,2000-06-01,1,3,3\n"
                                 "m,g,2000-06-01,2,1,4\n"
                                 "m,g,2000-06-01,2,2,5\n");
  CHECK_THROWS_MATCHES(ingest::parse_forecast_csv(ragged), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::ragged_ensemble; }));
}

TEST_CASE("synthetic generation is deterministic and round-trips through csv") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 3;
  cfg.n_years = 2;
  cfg.n_cells = 2;
  cfg.members_b = 30;

  const auto truth1 = ingest::generate_synthetic_truth(cfg);
  const auto truth2 = ingest::generate_synthetic_truth(cfg);
  CHECK(ingest::rainfall_csv(truth1) == ingest::rainfall_csv(truth2));

  const auto parsed =
      ingest::parse_rainfall_csv(write_temp("truth_rt.csv", ingest::rainfall_csv(truth1)));
  REQUIRE(parsed.size() == truth1.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].grid_id == truth1[i].grid_id);
    CHECK(parsed[i].start == truth1[i].start);
    CHECK(parsed[i].values == truth1[i].values);
  }

  const auto forecasts1 = ingest::generate_synthetic_forecasts(truth1, cfg);
  const auto forecasts2 = ingest::generate_synthetic_forecasts(truth2, cfg);
  CHECK(ingest::forecast_csv(forecasts1) == ingest::forecast_csv(forecasts2));

  const auto parsed_fc =
      ingest::parse_forecast_csv(write_temp("fc_rt.csv", ingest::forecast_csv(forecasts1)));
  REQUIRE(parsed_fc.size() == forecasts1.size());
  bool saw_30_member = false;
  for (std::size_t i = 0; i < parsed_fc.size(); ++i) {
    CHECK(parsed_fc[i].model_id == forecasts1[i].model_id);
    CHECK(parsed_fc[i].init == forecasts1[i].init);
    CHECK(parsed_fc[i].data == forecasts1[i].data);
    if (parsed_fc[i].members == 30 && parsed_fc[i].lead_days == 31) saw_30_member = true;
  }
  CHECK(saw_30_member);
}

TEST_CASE("every synthetic year admits a detectable onset") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 1;
  cfg.n_years = 30;
  const auto truth = ingest::generate_synthetic_truth(cfg);
  const auto plan = ingest::synthetic_plan(cfg);
  onset::OnsetConfig ocfg =
      onset::OnsetConfig::for_variant(MokPolicy::none(), cfg.five_day_threshold_mm);
  for (int y = 0; y < cfg.n_years; ++y) {
    const auto detected = onset::detect_onset(truth[0], ocfg, std::nullopt, cfg.start_year + y);
    REQUIRE(detected.has_value());
    CHECK(*detected == plan[0][static_cast<std::size_t>(y)].onset);
  }
}

TEST_CASE("zero onset spread pins every onset to the same day of year") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 5;
  cfg.n_years = 8;
  cfg.n_cells = 2;
  cfg.onset_spread_days = 0.0;
  const auto truth = ingest::generate_synthetic_truth(cfg);
  onset::OnsetConfig ocfg =
      onset::OnsetConfig::for_variant(MokPolicy::none(), cfg.five_day_threshold_mm);
  for (const auto& series : truth) {
    for (int y = 0; y < cfg.n_years; ++y) {
      const auto detected = onset::detect_onset(series, ocfg, std::nullopt, cfg.start_year + y);
      REQUIRE(detected.has_value());
      CHECK(detected->day_of_year() == cfg.season_peak_doy);
    }
  }
}

TEST_CASE("perfect skill reproduces truth over every lead day") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 9;
  cfg.n_years = 1;
  cfg.rho = {1.0, 1.0, 1.0, 1.0};
  const auto truth = ingest::generate_synthetic_truth(cfg);
  Rng rng(99);
  const Date init = Date::from_ymd(cfg.start_year, 5, 15);
  const auto ens = ingest::synthesize_ensemble(truth[0], init, "model_a", 1, cfg, rng);
  for (int l = 1; l <= cfg.lead_days; ++l) {
    CHECK(ens.at(0, static_cast<std::size_t>(l)) == truth[0].on(init + l));
  }
}

TEST_CASE("zero skill forecasts are uncorrelated with truth") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 21;
  cfg.n_years = 1000;
  cfg.rho = {0.0, 0.0, 0.0, 0.0};
  const auto truth = ingest::generate_synthetic_truth(cfg);
  Rng rng(123);
  std::vector<double> x, y;
  const int lead = 18;
  for (int yix = 0; yix < cfg.n_years; ++yix) {
    const Date init = Date::from_ymd(cfg.start_year + yix, 5, 15);
    const auto ens = ingest::synthesize_ensemble(truth[0], init, "model_a", 1, cfg, rng);
    x.push_back(truth[0].on(init + lead));
    y.push_back(ens.at(0, lead));
  }
  CHECK(std::abs(correlation(x, y)) < 0.1);
}

TEST_CASE("per-week correlation with truth decays with the configured skill") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 22;
  cfg.n_years = 1000;
  cfg.rho = {0.9, 0.6, 0.3, 0.1};
  const auto truth = ingest::generate_synthetic_truth(cfg);
  Rng rng(321);
  const std::array<int, 4> leads = {4, 11, 18, 25};  // one per lead week
  std::array<std::vector<double>, 4> x, y;
  for (int yix = 0; yix < cfg.n_years; ++yix) {
    const Date init = Date::from_ymd(cfg.start_year + yix, 5, 15);
    const auto ens = ingest::synthesize_ensemble(truth[0], init, "model_b", 1, cfg, rng);
    for (std::size_t w = 0; w < 4; ++w) {
      x[w].push_back(truth[0].on(init + leads[w]));
      y[w].push_back(ens.at(0, static_cast<std::size_t>(leads[w])));
    }
  }
  std::array<double, 4> r{};
  for (std::size_t w = 0; w < 4; ++w) r[w] = correlation(x[w], y[w]);
  CHECK(r[0] > r[1]);
  CHECK(r[1] > r[2]);
  CHECK(r[2] > r[3]);
  CHECK(r[0] > 0.6);
}

TEST_CASE("forecasts past the truth horizon are rejected") {
  ingest::SyntheticConfig cfg;
  cfg.seed = 2;
  cfg.n_years = 1;
  const auto truth = ingest::generate_synthetic_truth(cfg);
  Rng rng(5);
  const Date late = truth[0].end() - 10;
  CHECK_THROWS_MATCHES(ingest::synthesize_ensemble(truth[0], late, "model_a", 1, cfg, rng), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::lead_window_exceeds_truth;
                       }));
}
