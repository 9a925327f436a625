#pragma once

#include <stdexcept>
#include <string>

namespace onsetblend {

enum class Errc {
  // ingest
  missing_day,
  negative_rain,
  malformed_row,
  ragged_ensemble,
  lead_window_exceeds_truth,
  // onset
  series_too_short,
  empty_history,
  // climatology
  degenerate_sample,
  zero_survival,
  // blend
  lead_window_exceeds_horizon,
  non_convergence,
  single_class,
  // eval
  empty_set,
  no_positives,
  no_negatives,
  zero_climatology_score,
  // decision
  inconsistent_scheme,
  missing_income,
  non_unique_optimum,
  // shared
  invalid_config,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_day: return "MissingDay";
    case Errc::negative_rain: return "NegativeRain";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::ragged_ensemble: return "RaggedEnsemble";
    case Errc::lead_window_exceeds_truth: return "LeadWindowExceedsTruth";
    case Errc::series_too_short: return "SeriesTooShort";
    case Errc::empty_history: return "EmptyHistory";
    case Errc::degenerate_sample: return "DegenerateSample";
    case Errc::zero_survival: return "ZeroSurvival";
    case Errc::lead_window_exceeds_horizon: return "LeadWindowExceedsHorizon";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::single_class: return "SingleClass";
    case Errc::empty_set: return "EmptySet";
    case Errc::no_positives: return "NoPositives";
    case Errc::no_negatives: return "NoNegatives";
    case Errc::zero_climatology_score: return "ZeroClimatologyScore";
    case Errc::inconsistent_scheme: return "InconsistentScheme";
    case Errc::missing_income: return "MissingIncome";
    case Errc::non_unique_optimum: return "NonUniqueOptimum";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

// Process exit code the CLI maps each error class to.
inline int errc_exit_code(Errc c) {
  switch (c) {
    case Errc::invalid_config:
      return 1;  // validation error
    case Errc::non_convergence:
      return 3;
    default:
      return 2;  // data error
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace onsetblend
