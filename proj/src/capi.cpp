#include "nlvc/nlvc.h"

#include <omp.h>

#include <charconv>
#include <cstring>
#include <sstream>
#include <string>

#include "nlvc/errors.hpp"
#include "nlvc/harness.hpp"

struct nlvc_experiment {
  nlvc::ExperimentConfig config;
};

struct nlvc_report {
  nlvc::ConvergenceReport report;
};

namespace {

thread_local std::string g_last_error;

nlvc_status status_of(nlvc::ErrorCode code) {
  switch (code) {
    case nlvc::ErrorCode::Config: return NLVC_ERR_CONFIG;
    case nlvc::ErrorCode::Domain: return NLVC_ERR_DOMAIN;
    case nlvc::ErrorCode::Quadrature: return NLVC_ERR_QUADRATURE;
    case nlvc::ErrorCode::Assembly: return NLVC_ERR_ASSEMBLY;
    case nlvc::ErrorCode::Numeric: return NLVC_ERR_NUMERIC;
    case nlvc::ErrorCode::Lookup: return NLVC_ERR_LOOKUP;
  }
  return NLVC_ERR_INTERNAL;
}

nlvc_status fail(nlvc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
nlvc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const nlvc::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NLVC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NLVC_ERR_INTERNAL, e.what());
  }
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw nlvc::ConfigError("value of '" + key + "' is not a number: '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw nlvc::ConfigError("value of '" + key + "' is not an integer: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw nlvc::ConfigError("value of '" + key + "' is not a boolean: '" + v + "'");
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 1) throw nlvc::ConfigError("'" + key + "' must be positive");
  return static_cast<std::size_t>(n);
}

void apply(nlvc::ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "strategy") c.strategy = nlvc::parse_strategy(v);
  else if (key == "case") c.case_name = v;
  else if (key == "delta0") c.delta0 = parse_double(key, v);
  else if (key == "ratio") c.ratio = parse_double(key, v);
  else if (key == "levels") c.levels = static_cast<int>(parse_count(key, v));
  else if (key == "loc_mode") c.loc_mode = v;
  else if (key == "nu") c.nu = parse_double(key, v);
  else if (key == "E") c.young_E = parse_double(key, v);
  else if (key == "local_provider") c.provider = nlvc::parse_provider(v);
  else if (key == "fd_refinement") c.fd_refinement = static_cast<int>(parse_count(key, v));
  else if (key == "norm_region") c.norm_region = nlvc::parse_norm_region(v);
  else if (key == "solver") c.solve.method = nlvc::parse_solver_method(v);
  else if (key == "tol") c.solve.tol = parse_double(key, v);
  else if (key == "max_iter") c.solve.max_iter = parse_count(key, v);
  else if (key == "equilibrate") c.solve.equilibrate = parse_bool(key, v);
  else if (key == "restart") c.solve.restart = parse_count(key, v);
  else if (key == "degree") c.rule.degree = static_cast<int>(parse_int(key, v));
  else if (key == "moment_refinement") c.rule.refinement = static_cast<int>(parse_count(key, v));
  else if (key == "bond_quartic") c.rule.bond_quartic = parse_bool(key, v);
  else if (key == "weight_cache") c.weight_cache_dir = v;
  else if (key == "matrix_export") c.matrix_export_dir = v;
  else throw nlvc::ConfigError("unknown experiment key '" + key + "'");
}

}  // namespace

extern "C" {

const char* nlvc_version(void) { return "1.0.0"; }

const char* nlvc_last_error(void) { return g_last_error.c_str(); }

const char* nlvc_status_string(nlvc_status status) {
  switch (status) {
    case NLVC_OK: return "ok";
    case NLVC_ERR_CONFIG: return "configuration error";
    case NLVC_ERR_DOMAIN: return "domain error";
    case NLVC_ERR_QUADRATURE: return "quadrature error";
    case NLVC_ERR_ASSEMBLY: return "assembly error";
    case NLVC_ERR_NUMERIC: return "numeric error";
    case NLVC_ERR_LOOKUP: return "lookup error";
    case NLVC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NLVC_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case NLVC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

nlvc_status nlvc_set_threads(int n) {
  if (n < 1) return fail(NLVC_ERR_INVALID_ARGUMENT, "thread count must be at least 1");
  omp_set_num_threads(n);
  return NLVC_OK;
}

nlvc_status nlvc_experiment_create(const char* model, nlvc_experiment** out) {
  if (!model || !out) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* exp = new nlvc_experiment{nlvc::ExperimentConfig::defaults_for(nlvc::parse_model(model))};
    *out = exp;
    return NLVC_OK;
  });
}

void nlvc_experiment_destroy(nlvc_experiment* exp) { delete exp; }

nlvc_status nlvc_experiment_set(nlvc_experiment* exp, const char* key, const char* value) {
  if (!exp || !key || !value) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlvc::ExperimentConfig next = exp->config;
    apply(next, key, value);
    exp->config = next;
    return NLVC_OK;
  });
}

nlvc_status nlvc_run_consistency(const nlvc_experiment* exp, nlvc_report** out) {
  if (!exp || !out) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new nlvc_report{nlvc::run_consistency(exp->config)};
    return NLVC_OK;
  });
}

nlvc_status nlvc_run_convergence(const nlvc_experiment* exp, nlvc_report** out) {
  if (!exp || !out) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new nlvc_report{nlvc::run_convergence(exp->config)};
    return NLVC_OK;
  });
}

void nlvc_report_destroy(nlvc_report* report) { delete report; }

int nlvc_report_passed(const nlvc_report* report) { return report && report->report.passed ? 1 : 0; }

size_t nlvc_report_level_count(const nlvc_report* report) { return report ? report->report.levels.size() : 0; }

nlvc_status nlvc_report_level(const nlvc_report* report, size_t level, nlvc_level_info* out) {
  if (!report || !out) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  if (level >= report->report.levels.size()) return fail(NLVC_ERR_INVALID_ARGUMENT, "level index out of range");
  const nlvc::LevelResult& l = report->report.levels[level];
  out->delta = l.delta;
  out->h = l.h;
  out->points = l.points;
  out->unknowns = l.unknowns;
  out->e0 = l.e0;
  out->has_rate = l.rate ? 1 : 0;
  out->rate = l.rate.value_or(0.0);
  out->iterations = l.stats.iterations;
  out->residual = l.stats.residual;
  out->seconds = l.seconds;
  return NLVC_OK;
}

nlvc_status nlvc_report_format(const nlvc_report* report, const char* format, char* buf, size_t capacity,
                               size_t* needed) {
  if (!report || !format) return fail(NLVC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ostringstream os;
    const std::string f = format;
    if (f == "csv")
      nlvc::write_csv(os, report->report);
    else if (f == "json")
      nlvc::write_json(os, report->report);
    else
      return fail(NLVC_ERR_CONFIG, "unknown format '" + f + "'");
    const std::string text = os.str();
    if (needed) *needed = text.size() + 1;
    if (!buf || capacity < text.size() + 1) return fail(NLVC_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return NLVC_OK;
  });
}

}  // extern "C"
