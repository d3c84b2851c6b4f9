#include "fracdiff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <json.hpp>

#include "json_writer.hpp"

namespace fracdiff {

namespace {

using nlohmann::json;
using detail::JsonWriter;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::config, what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
    if (!known) config_error("unknown key '" + item.key() + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) config_error(where + " is missing '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) config_error(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(what + " must be finite");
  return d;
}

int integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) config_error(what + " must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) config_error(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, what + " entry"));
  return out;
}

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("malformed JSON in " + what + ": " + e.what());
  }
}

// Library validation failures inside a config become config errors.
template <class F>
auto as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
}

SpectralModel parse_model(const json& m) {
  if (!m.is_object()) config_error("model must be an object");
  const json& type = require(m, "type", "model");
  if (!type.is_string()) config_error("model.type must be a string");
  const std::string kind = type.get<std::string>();
  if (kind == "interval") {
    allow_keys(m, "model", {"type", "length", "modes"});
    const double length = m.contains("length") ? number(m["length"], "model.length") : 1.0;
    const int modes = integer(require(m, "modes", "model"), "model.modes");
    return as_config("model", [&] { return SpectralModel::interval(length, modes); });
  }
  if (kind == "rectangle") {
    allow_keys(m, "model", {"type", "lx", "ly", "modes"});
    const double lx = number(require(m, "lx", "model"), "model.lx");
    const double ly = number(require(m, "ly", "model"), "model.ly");
    const int modes = integer(require(m, "modes", "model"), "model.modes");
    return as_config("model", [&] { return SpectralModel::rectangle(lx, ly, modes); });
  }
  if (kind == "custom") {
    allow_keys(m, "model", {"type", "eigenvalues"});
    auto eig = numbers(require(m, "eigenvalues", "model"), "model.eigenvalues");
    return as_config("model", [&] { return SpectralModel::custom(std::move(eig)); });
  }
  config_error("model.type must be interval, rectangle or custom, got '" + kind + "'");
}

InitialData parse_initial(const json& v, const SpectralModel& model) {
  allow_keys(v, "initial", {"coefficients", "preset", "modes"});
  const bool has_coeff = v.contains("coefficients");
  const bool has_preset = v.contains("preset");
  if (has_coeff == has_preset) config_error("initial needs exactly one of 'coefficients' or 'preset'");
  if (has_coeff) {
    if (v.contains("modes")) config_error("initial.modes only applies to presets");
    auto c = numbers(v["coefficients"], "initial.coefficients");
    if (c.empty()) config_error("initial.coefficients is empty");
    if (static_cast<int>(c.size()) > model.size())
      config_error("initial.coefficients has more entries than the model has modes");
    return as_config("initial", [&] { return InitialData::from(std::move(c)); });
  }
  if (!v["preset"].is_string()) config_error("initial.preset must be a string");
  const std::string preset = v["preset"].get<std::string>();
  const int modes = v.contains("modes") ? integer(v["modes"], "initial.modes") : model.size();
  if (modes < 1 || modes > model.size()) config_error("initial.modes must be in 1..model.modes");
  if (preset == "mode1") return InitialData::unit(1, modes);
  if (preset == "decay_1_over_k") return InitialData::harmonic(modes);
  config_error("initial.preset must be mode1 or decay_1_over_k, got '" + preset + "'");
}

std::vector<double> point_of(const json& p) {
  if (p.is_number()) return {number(p, "field point")};
  return numbers(p, "field point");
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig parse_experiment(const std::string& json_text) {
  const json root = parse_text(json_text, "config");
  allow_keys(root, "config", {"model", "initial", "frac", "times", "output", "field", "tol"});
  SpectralModel model = parse_model(require(root, "model", "config"));
  InitialData initial = parse_initial(require(root, "initial", "config"), model);

  const json& f = require(root, "frac", "config");
  allow_keys(f, "frac", {"rho", "sigma"});
  const double rho = number(require(f, "rho", "frac"), "frac.rho");
  const double sigma = number(require(f, "sigma", "frac"), "frac.sigma");
  const FracParams frac = as_config("frac", [&] { return FracParams::make(rho, sigma); });

  std::vector<double> times = numbers(require(root, "times", "config"), "times");
  if (times.empty()) config_error("times is empty");
  for (double t : times)
    if (!(t > 0.0)) config_error("times must be positive");

  ExperimentConfig cfg{std::move(model), std::move(initial), frac, std::move(times), OutputFormat::csv, std::nullopt,
                       std::nullopt};
  if (root.contains("output")) {
    const json& o = root["output"];
    allow_keys(o, "output", {"format", "path"});
    if (o.contains("format")) {
      if (!o["format"].is_string()) config_error("output.format must be a string");
      const std::string fmt = o["format"].get<std::string>();
      if (fmt == "csv") cfg.format = OutputFormat::csv;
      else if (fmt == "json") cfg.format = OutputFormat::json;
      else config_error("output.format must be csv or json");
    }
    if (o.contains("path")) {
      if (!o["path"].is_string()) config_error("output.path must be a string");
      cfg.output_path = o["path"].get<std::string>();
    }
  }
  if (root.contains("tol")) {
    cfg.tol = number(root["tol"], "tol");
    if (!(cfg.tol > 0.0)) config_error("tol must be positive");
  }
  if (root.contains("field")) {
    const json& fv = root["field"];
    allow_keys(fv, "field", {"points", "tol", "path"});
    if (!cfg.model.has_eigenfunctions()) config_error("field output needs an interval or rectangle model");
    FieldRequest req;
    const json& pts = require(fv, "points", "field");
    if (!pts.is_array() || pts.empty()) config_error("field.points must be a non-empty array");
    for (const auto& p : pts) {
      auto pt = point_of(p);
      if (static_cast<int>(pt.size()) != cfg.model.dimension())
        config_error("field point has the wrong number of coordinates");
      req.points.push_back(std::move(pt));
    }
    if (fv.contains("tol")) {
      req.tol = number(fv["tol"], "field.tol");
      if (!(req.tol > 0.0)) config_error("field.tol must be positive");
    }
    if (fv.contains("path")) {
      if (!fv["path"].is_string()) config_error("field.path must be a string");
      req.path = fv["path"].get<std::string>();
    }
    cfg.field = std::move(req);
  }
  return cfg;
}

std::string forward_table(const ExperimentConfig& cfg) {
  const ForwardProblem fp(cfg.model, cfg.frac, cfg.initial);
  const double t_min = *std::min_element(cfg.times.begin(), cfg.times.end());
  const int modes = fp.truncation(t_min, cfg.tol).modes;
  if (cfg.format == OutputFormat::csv) {
    std::string out = "t,observation,tail_bound\n";
    for (double t : cfg.times) {
      out += format_number(t) + ',' + format_number(fp.observe(t).value) + ',' +
             format_number(fp.tail_bound(modes, t)) + '\n';
    }
    return out;
  }
  JsonWriter w;
  w.begin_object().field("modes", modes).key("rows").begin_array();
  for (double t : cfg.times) {
    w.begin_object()
        .field("t", t)
        .field("observation", fp.observe(t).value)
        .field("tail_bound", fp.tail_bound(modes, t))
        .end_object();
  }
  w.end_array().end_object();
  return w.str() + '\n';
}

std::string field_table(const ExperimentConfig& cfg) {
  if (!cfg.field) config_error("config has no field section");
  const ForwardProblem fp(cfg.model, cfg.frac, cfg.initial);
  const bool planar = cfg.model.dimension() == 2;
  std::string out = planar ? "x,y,t,u\n" : "x,t,u\n";
  for (const auto& p : cfg.field->points) {
    for (double t : cfg.times) {
      const auto v = fp.evaluate_field(p, t, cfg.field->tol);
      out += format_number(p[0]) + ',';
      if (planar) out += format_number(p[1]) + ',';
      out += format_number(t) + ',' + format_number(v.value) + '\n';
    }
  }
  return out;
}

ObserveOutcome observe_experiment(const ExperimentConfig& cfg, double t0, std::optional<double> t1) {
  const ForwardProblem fp(cfg.model, cfg.frac, cfg.initial);
  const bool substitute = t1.has_value();
  const Observation o0 = fp.observe(t0, substitute);
  ObserveOutcome out;
  out.zero_coefficient = o0.zero_coefficient;
  out.observation.t0 = t0;
  out.observation.d0 = o0.value;
  out.observation.phi1_abs = std::abs(cfg.initial.coefficient(o0.index));
  out.observation.lambda_obs = o0.lambda;
  if (t1) {
    out.observation.t1 = *t1;
    out.observation.d1 = fp.observe(*t1, substitute).value;
  }
  return out;
}

std::string observation_to_json(const ObservationSet& obs) {
  JsonWriter w;
  w.begin_object().field("t0", obs.t0).field("d0", obs.d0);
  if (obs.t1) w.field("t1", *obs.t1);
  if (obs.d1) w.field("d1", *obs.d1);
  w.field("phi1_abs", obs.phi1_abs).field("lambda_obs", obs.lambda_obs).end_object();
  return w.str() + '\n';
}

ObservationSet observation_from_json(const std::string& json_text) {
  const json root = parse_text(json_text, "observation");
  allow_keys(root, "observation", {"t0", "d0", "t1", "d1", "phi1_abs", "lambda_obs"});
  ObservationSet obs;
  obs.t0 = number(require(root, "t0", "observation"), "t0");
  obs.d0 = number(require(root, "d0", "observation"), "d0");
  obs.phi1_abs = number(require(root, "phi1_abs", "observation"), "phi1_abs");
  obs.lambda_obs = number(require(root, "lambda_obs", "observation"), "lambda_obs");
  if (root.contains("t1") && !root["t1"].is_null()) obs.t1 = number(root["t1"], "t1");
  if (root.contains("d1") && !root["d1"].is_null()) obs.d1 = number(root["d1"], "d1");
  as_config("observation", [&] {
    obs.validate();
    return 0;
  });
  return obs;
}

namespace {

void write_report(JsonWriter& w, const AdmissibilityReport& r) {
  w.begin_object().field("two_point", r.two_point).field("lower0", r.lower0).field("upper0", r.upper0).field("ok0", r.ok0);
  if (r.two_point) w.field("lower1", r.lower1).field("upper1", r.upper1).field("ok1", r.ok1);
  w.field("paper_condition_ok", r.paper_condition_ok).field("monotone_ok", r.monotone_ok);
  if (r.two_point) {
    w.field("spacing_ok", r.spacing_ok)
        .field("spacing_constant", r.spacing_constant)
        .field("spacing_ratio", r.spacing_ratio)
        .field("determinant_sign", r.determinant_sign);
  }
  w.field("admissible", r.admissible()).end_object();
}

}  // namespace

std::string report_to_json(const AdmissibilityReport& report) {
  JsonWriter w;
  write_report(w, report);
  return w.str() + '\n';
}

std::string invert_outcome_to_json(const InvertOutcome& outcome) {
  JsonWriter w;
  w.begin_object().field("status", outcome.status);
  if (!outcome.message.empty()) w.field("message", outcome.message);
  if (outcome.result) {
    const RecoveryResult& r = *outcome.result;
    w.field("method", to_string(r.method)).field("rho", r.rho);
    w.key("sigma");
    if (r.sigma) w.value(*r.sigma);
    else w.null();
    w.field("residual0", r.residual0);
    if (r.sigma) w.field("residual1", r.residual1);
    w.field("iterations", r.iterations).key("det_trace").values(r.det_trace);
  }
  if (outcome.multistart) {
    const MultistartResult& m = *outcome.multistart;
    w.key("multistart")
        .begin_object()
        .field("restarts", static_cast<int>(m.runs.size()))
        .field("consistent", m.consistent)
        .field("max_spread", m.max_spread)
        .key("solutions")
        .begin_array();
    for (const auto& run : m.runs) w.begin_array().value(run.rho).value(run.sigma.value_or(0.0)).end_array();
    w.end_array().end_object();
  }
  w.key("report");
  write_report(w, outcome.report);
  w.end_object();
  return w.str() + '\n';
}

}  // namespace fracdiff
