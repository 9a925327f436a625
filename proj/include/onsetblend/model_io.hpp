#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "onsetblend/blend.hpp"
#include "onsetblend/climatology.hpp"
#include "onsetblend/csv.hpp"
#include "onsetblend/errors.hpp"
#include "onsetblend/types.hpp"

namespace onsetblend {
namespace model_io {

inline std::vector<OnsetRecord> parse_onsets_csv(const std::string& path) {
  CsvReader reader(path, "grid_id,year,onset_date");
  std::vector<OnsetRecord> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3) reader.fail(Errc::malformed_row, "expected 3 fields");
    OnsetRecord rec;
    rec.grid_id = fields[0];
    rec.year = static_cast<int>(reader.parse_long(fields[1]));
    if (!fields[2].empty()) {
      const auto date = Date::parse(fields[2]);
      if (!date) reader.fail(Errc::malformed_row, "bad onset_date '" + fields[2] + "'");
      rec.onset = *date;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::map<std::string, clim::ClimatologyKde> parse_climatology_csv(
    const std::string& path) {
  CsvReader reader(path, "grid_id,bandwidth_days,support_lo,support_hi,onset_doys");
  std::map<std::string, clim::ClimatologyKde> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 5) reader.fail(Errc::malformed_row, "expected 5 fields");
    clim::Support support;
    support.lo = reader.parse_double(fields[2]);
    support.hi = reader.parse_double(fields[3]);
    std::vector<double> doys;
    std::istringstream in(fields[4]);
    std::string tok;
    while (std::getline(in, tok, ';')) doys.push_back(reader.parse_double(tok));
    out.emplace(fields[0], clim::ClimatologyKde(fields[0], std::move(doys),
                                                reader.parse_double(fields[1]), support));
  }
  return out;
}

inline std::string features_header() {
  std::string header = "grid_id,init_date,outcome";
  const char* names[5] = {"pi", "alpha", "nu", "beta", "mu"};
  for (const auto* name : names)
    for (int j = 1; j <= 4; ++j) header += "," + std::string(name) + std::to_string(j);
  return header;
}

inline std::vector<blend::FeatureRow> parse_features_csv(const std::string& path) {
  CsvReader reader(path, features_header());
  std::vector<blend::FeatureRow> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 23) reader.fail(Errc::malformed_row, "expected 23 fields");
    blend::FeatureRow row;
    row.grid_id = fields[0];
    const auto init = Date::parse(fields[1]);
    if (!init) reader.fail(Errc::malformed_row, "bad init_date");
    row.init = *init;
    row.year = init->year();
    row.outcome = static_cast<int>(reader.parse_long(fields[2]));
    std::size_t f = 3;
    for (auto* block : {&row.pi, &row.alpha, &row.nu, &row.beta, &row.mu}) {
      for (int j = 0; j < 4; ++j) (*block)[static_cast<std::size_t>(j)] =
          reader.parse_double(fields[f++]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline blend::BlendModel parse_blend_model_csv(const std::string& path) {
  CsvReader reader(path, "kind,term,lead_bin,outcome_bin,value");
  blend::BlendModel model;
  model.coefficients = Eigen::MatrixXd::Zero(blend::kColumns, blend::kOutcomeCols);
  model.feat_mean = Eigen::VectorXd::Zero(blend::kBaseFeatures);
  model.feat_scale = Eigen::VectorXd::Ones(blend::kBaseFeatures);
  model.converged = true;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 5) reader.fail(Errc::malformed_row, "expected 5 fields");
    const double value = reader.parse_double(fields[4]);
    if (fields[0] == "coef") {
      const int l = static_cast<int>(reader.parse_long(fields[1]));
      const int j = static_cast<int>(reader.parse_long(fields[2])) - 1;
      const int k = static_cast<int>(reader.parse_long(fields[3])) - 1;
      if (l < 0 || l >= blend::kTermsPerBin || j < 0 || j >= blend::kLeadBins || k < 0 ||
          k >= blend::kOutcomeCols)
        reader.fail(Errc::malformed_row, "coefficient index out of range");
      model.coefficients(l * blend::kLeadBins + j, k) = value;
    } else if (fields[0] == "mean" || fields[0] == "scale") {
      const int f = static_cast<int>(reader.parse_long(fields[1]));
      const int j = static_cast<int>(reader.parse_long(fields[2])) - 1;
      if (f < 0 || f >= 5 || j < 0 || j >= blend::kLeadBins)
        reader.fail(Errc::malformed_row, "standardization index out of range");
      if (fields[0] == "mean") model.feat_mean(f * blend::kLeadBins + j) = value;
      else model.feat_scale(f * blend::kLeadBins + j) = value;
    } else {
      reader.fail(Errc::malformed_row, "unknown kind '" + fields[0] + "'");
    }
  }
  return model;
}

struct PredictionRow {
  std::string grid_id;
  Date init;
  BinProbs probs;
};

inline std::vector<PredictionRow> parse_predictions_csv(const std::string& path) {
  CsvReader reader(path, "grid_id,init_date,p_week1,p_week2,p_week3,p_week4,p_later");
  std::vector<PredictionRow> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 7) reader.fail(Errc::malformed_row, "expected 7 fields");
    PredictionRow row;
    row.grid_id = fields[0];
    const auto init = Date::parse(fields[1]);
    if (!init) reader.fail(Errc::malformed_row, "bad init_date");
    row.init = *init;
    for (std::size_t j = 0; j < kNumBins; ++j)
      row.probs[j] = reader.parse_double(fields[2 + j]);
    try {
      row.probs.validate(1e-4);  // printed at 6 decimals
    } catch (const Error& e) {
      reader.fail(Errc::malformed_row, e.what());
    }
    out.push_back(std::move(row));
  }
  return out;
}

struct OutcomeRow {
  std::string grid_id;
  Date init;
  int year = 0;
  int outcome = 0;
};

inline std::vector<OutcomeRow> parse_outcomes_csv(const std::string& path) {
  CsvReader reader(path, "grid_id,init_date,year,outcome");
  std::vector<OutcomeRow> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 4) reader.fail(Errc::malformed_row, "expected 4 fields");
    OutcomeRow row;
    row.grid_id = fields[0];
    const auto init = Date::parse(fields[1]);
    if (!init) reader.fail(Errc::malformed_row, "bad init_date");
    row.init = *init;
    row.year = static_cast<int>(reader.parse_long(fields[2]));
    row.outcome = static_cast<int>(reader.parse_long(fields[3]));
    if (row.outcome < 1 || row.outcome > kNumBins)
      reader.fail(Errc::malformed_row, "outcome outside 1..5");
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace model_io
}  // namespace onsetblend
