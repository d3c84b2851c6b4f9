#pragma once

// Experiment configs and the text formats exchanged by the command-line tool.
// Configs are JSON; time series and fields are CSV; observations and solver
// results are JSON with a fixed key order and 17 significant digits.

#include <optional>
#include <string>
#include <vector>

#include "fracdiff/forward.hpp"
#include "fracdiff/inverse.hpp"
#include "fracdiff/spectral.hpp"

namespace fracdiff {

enum class OutputFormat { csv, json };

struct FieldRequest {
  std::vector<std::vector<double>> points;
  double tol = 1e-8;
  std::optional<std::string> path;
};

struct ExperimentConfig {
  SpectralModel model;
  InitialData initial;
  FracParams frac;
  std::vector<double> times;
  OutputFormat format = OutputFormat::csv;
  std::optional<std::string> output_path;
  std::optional<FieldRequest> field;
  double tol = 1e-8;  // truncation tolerance for the tail bound
};

/// Parses and validates a config. Every failure, including unknown keys,
/// is reported as ErrorCode::config.
ExperimentConfig parse_experiment(const std::string& json_text);

/// Time series: t,observation,tail_bound (CSV) or the equivalent JSON.
std::string forward_table(const ExperimentConfig& cfg);
/// x,t,u rows (x,y,t,u on rectangles) for every field point and time.
std::string field_table(const ExperimentConfig& cfg);

struct ObserveOutcome {
  ObservationSet observation;
  bool zero_coefficient = false;
};

/// First-mode observations at t0 (and t1). With t1 and lambda_1 == 1 the
/// first mode with a non-unit eigenvalue is observed instead.
ObserveOutcome observe_experiment(const ExperimentConfig& cfg, double t0, std::optional<double> t1);

std::string observation_to_json(const ObservationSet& obs);
/// Accepts exactly the keys t0, d0, t1, d1, phi1_abs, lambda_obs.
ObservationSet observation_from_json(const std::string& json_text);

std::string report_to_json(const AdmissibilityReport& report);

struct InvertOutcome {
  std::optional<RecoveryResult> result;
  std::optional<MultistartResult> multistart;
  AdmissibilityReport report;
  std::string status = "ok";
  std::string message;
};

std::string invert_outcome_to_json(const InvertOutcome& outcome);

/// %.17g, with non-finite values as null.
std::string format_number(double v);

}  // namespace fracdiff
