// Copyright 2026 The wpcr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Declarative experiment runner: a JSON spec is parsed and validated in
// full before any computation, then one CSV per result table and a JSON
// summary are written to the output directory.

#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpcr/bounds.hpp"
#include "wpcr/error.hpp"
#include "wpcr/measures.hpp"
#include "wpcr/metric.hpp"
#include "wpcr/posterior.hpp"
#include "wpcr/priors.hpp"
#include "wpcr/transport.hpp"

#ifndef WPCR_VERSION
#define WPCR_VERSION "unknown"
#endif

namespace wpcr {

using Json = nlohmann::json;

// Logging ---------------------------------------------------------------------

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Level from WPCR_LOG (error, warn, info, debug); warn when unset.
inline LogLevel log_level() {
  const char* v = std::getenv("WPCR_LOG");
  if (!v) return LogLevel::kWarn;
  const std::string s(v);
  if (s == "error") return LogLevel::kError;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

inline void log(LogLevel level, const std::string& msg) {
  static const char* kNames[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) {
    std::cerr << "wpcr [" << kNames[static_cast<int>(level)] << "] " << msg
              << '\n';
  }
}

// CSV -------------------------------------------------------------------------

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CsvTable {
  std::string name;  // file name
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  /// First line echoes the configuration, then the header row.
  std::string render(const std::string& config_echo) const {
    std::string s = "# config: " + config_echo + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
      s += (i ? "," : "") + header[i];
    }
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += '\n';
    }
    return s;
  }
};

// Spec --------------------------------------------------------------------------

inline const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> k = {
      "wasserstein", "gc-rate",   "contraction", "decompose",
      "mv-bounds",   "df-sweep",  "lipschitz",   "egp-check"};
  return k;
}

struct DeltaSchedule {
  enum class Kind { kFixed, kCorollary };
  Kind kind = Kind::kFixed;
  std::vector<double> values;
  RateExponents rates;
  double scale = 1.0;

  std::vector<double> deltas_for(std::size_t n, double diameter) const {
    if (kind == Kind::kFixed) return values;
    return {std::min(diameter, scale * rates.delta(static_cast<double>(n)))};
  }
};

struct ExperimentSpec {
  std::string kind;
  Json config;  // as given, after flag overrides
  MetricSpace space = MetricSpace::hypercube(1);
  std::optional<PriorSpec> prior;
  Law p0 = UniformLaw{};
  std::vector<std::size_t> n_grid;
  DeltaSchedule deltas;
  double p = 1.0;
  std::size_t replications = 200;
  std::size_t posterior_draws = 50;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool strict = false;
  std::string out_dir = ".";
  std::size_t truncation = 1000;
  std::size_t resolution = 64;
  std::vector<double> blowup = {2.0, 5.0, 10.0};
  std::size_t pairs = 100;
  std::vector<double> q_values = {1.0, 4.0};
  std::vector<std::size_t> cells = {2, 8};
  std::vector<std::pair<std::string, ChiLaw>> chis;
  std::vector<double> p_values;
  std::vector<double> h_values;
  std::optional<DiscreteMeasure> mu;
  std::optional<DiscreteMeasure> nu;

  /// Config echo without the fields that cannot change results.
  std::string echo() const {
    Json c = config;
    c.erase("threads");
    c.erase("out");
    c["experiment"] = kind;
    c["seed"] = seed;
    return c.dump();
  }

  MonteCarloOptions mc() const {
    MonteCarloOptions o;
    o.threads = threads;
    o.truncation = truncation;
    o.resolution = resolution;
    return o;
  }
};

namespace detail {

[[noreturn]] inline void bad_field(const std::string& path,
                                   const std::string& why) {
  throw InvalidParameter("config field '" + path + "': " + why);
}

inline const Json& field(const Json& j, const std::string& key,
                         const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad_field(path + key, "missing");
  return j.at(key);
}

inline double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  return j.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double dflt,
                        const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  return get_number(j.at(key), path + key);
}

inline std::size_t get_count(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    bad_field(path, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

template <class T, class F>
std::vector<T> get_list(const Json& j, const std::string& path, F&& one) {
  if (!j.is_array()) bad_field(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(one(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Point parse_point(const Json& j, const MetricSpace& space,
                         const std::string& path) {
  if (j.is_string()) {
    if (!space.is_finite()) bad_field(path, "labels need a finite space");
    const auto& labels = space.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == j.get<std::string>()) return Point::label(i);
    }
    bad_field(path, "unknown label '" + j.get<std::string>() + "'");
  }
  if (j.is_number()) return Point::scalar(j.get<double>());
  const auto xs = get_list<double>(j, path, get_number);
  return Point(std::span<const double>(xs));
}

inline DiscreteMeasure parse_discrete(const Json& j, const MetricSpace& space,
                                      const std::string& path) {
  const auto& atoms = field(j, "atoms", path);
  if (!atoms.is_array() || atoms.empty()) bad_field(path + "atoms", "empty");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    pts.push_back(parse_point(atoms[i], space,
                              path + "atoms[" + std::to_string(i) + "]"));
  }
  std::vector<double> w;
  if (j.contains("weights")) {
    w = get_list<double>(j.at("weights"), path + "weights", get_number);
  } else {
    w.assign(pts.size(), 1.0);
  }
  if (w.size() != pts.size()) {
    bad_field(path + "weights", "one weight per atom required");
  }
  try {
    return DiscreteMeasure::normalized(std::move(pts), std::move(w));
  } catch (const Error& e) {
    bad_field(path, e.message());
  }
}

inline Law parse_law(const Json& j, const MetricSpace& space,
                     const std::string& path) {
  if (j.is_array()) {
    // [[point, weight], ...]
    Json d = {{"atoms", Json::array()}, {"weights", Json::array()}};
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_array() || j[i].size() != 2) {
        bad_field(path + "[" + std::to_string(i) + "]",
                  "expected a [point, weight] pair");
      }
      d["atoms"].push_back(j[i][0]);
      d["weights"].push_back(j[i][1]);
    }
    return parse_discrete(d, space, path + ".");
  }
  if (!j.is_object()) bad_field(path, "expected an object");
  const std::string kind = j.value("kind", "");
  Law law;
  if (kind == "uniform") {
    law = UniformLaw{};
  } else if (kind == "truncated_gaussian") {
    law = TruncatedGaussianLaw{
        get_list<double>(field(j, "mean", path), path + ".mean", get_number),
        get_list<double>(field(j, "sd", path), path + ".sd", get_number)};
  } else if (kind == "discrete") {
    law = parse_discrete(j, space, path + ".");
  } else if (kind == "atoms_uniform") {
    law = AtomsUniformLaw{
        parse_discrete(field(j, "atoms_law", path + "."), space,
                       path + ".atoms_law."),
        get_number(field(j, "atom_mass", path + "."), path + ".atom_mass")};
  } else {
    bad_field(path + ".kind", "unknown law kind '" + kind + "'");
  }
  try {
    validate_law(law, space);
  } catch (const Error& e) {
    bad_field(path, e.message());
  }
  return law;
}

inline MetricSpace parse_space(const Json& j) {
  if (!j.is_object()) bad_field("space", "expected an object");
  const std::string kind = j.value("kind", "hypercube");
  try {
    if (kind == "hypercube") {
      return MetricSpace::hypercube(
          j.contains("dim") ? get_count(j.at("dim"), "space.dim") : 1);
    }
    if (kind == "finite") {
      auto labels = get_list<std::string>(
          field(j, "points", "space."), "space.points",
          [](const Json& x, const std::string& p) {
            if (!x.is_string()) bad_field(p, "expected a string");
            return x.get<std::string>();
          });
      auto dist = get_list<std::vector<double>>(
          field(j, "dist", "space."), "space.dist",
          [](const Json& row, const std::string& p) {
            return get_list<double>(row, p, get_number);
          });
      return MetricSpace::finite(std::move(labels), std::move(dist));
    }
  } catch (const Error& e) {
    if (std::string(e.what()).find("config field") != std::string::npos) throw;
    bad_field("space", e.message());
  }
  bad_field("space.kind", "unknown space kind '" + kind + "'");
}

inline BetaFunction parse_beta(const Json& j, const std::string& path) {
  if (!j.is_object()) bad_field(path, "expected an object");
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    return BetaFunction::constant(get_number(field(j, "c", path + "."),
                                             path + ".c"));
  }
  const double c0 = get_number(field(j, "c0", path + "."), path + ".c0");
  const double c1 = get_number(field(j, "c1", path + "."), path + ".c1");
  const double lo = get_number(field(j, "lo", path + "."), path + ".lo");
  const double hi = get_number(field(j, "hi", path + "."), path + ".hi");
  if (kind == "affine") return BetaFunction::affine(c0, c1, lo, hi);
  if (kind == "sinusoidal") {
    return BetaFunction::sinusoidal(c0, c1, number_or(j, "frequency", 1.0,
                                                      path + "."),
                                    lo, hi);
  }
  bad_field(path + ".kind", "unknown beta kind '" + kind + "'");
}

/// {"dp": {"q", "H"}} or {"egp": {"a", "alpha", "beta", "L", "beta0",
/// "beta1", "resolution"}}.
inline PriorSpec parse_prior(const Json& j, const MetricSpace& space) {
  if (!j.is_object() || j.size() != 1) {
    bad_field("prior", "expected exactly one of 'dp' or 'egp'");
  }
  const std::string kind = j.begin().key();
  const Json& b = j.begin().value();
  if (!b.is_object()) bad_field("prior." + kind, "expected an object");
  PriorSpec prior;
  if (kind == "dp") {
    DirichletProcessPrior dp;
    dp.q = number_or(b, "q", 1.0, "prior.dp.");
    if (b.contains("H")) dp.base = parse_law(b.at("H"), space, "prior.dp.H");
    prior = dp;
  } else if (kind == "egp") {
    const double a = number_or(b, "a", 1.0, "prior.egp.");
    const Law alpha = b.contains("alpha")
                          ? parse_law(b.at("alpha"), space, "prior.egp.alpha")
                          : Law(UniformLaw{});
    const BetaFunction beta =
        b.contains("beta") ? parse_beta(b.at("beta"), "prior.egp.beta")
                           : BetaFunction::constant(1.0);
    const bool constant = beta.kind == BetaFunction::Kind::kConstant;
    const double L = number_or(b, "L", 0.0, "prior.egp.");
    const double b0 =
        number_or(b, "beta0", constant ? beta.c0 : 1.0, "prior.egp.");
    const double b1 =
        number_or(b, "beta1", constant ? beta.c0 : 1.0, "prior.egp.");
    const std::size_t res =
        b.contains("resolution")
            ? get_count(b.at("resolution"), "prior.egp.resolution")
            : 256;
    try {
      prior = make_egp(a, alpha, beta, L, b0, b1, space, res);
    } catch (const Error& e) {
      bad_field("prior.egp", e.message());
    }
  } else {
    bad_field("prior", "unknown prior '" + kind + "'");
  }
  try {
    validate(prior, space);
  } catch (const Error& e) {
    bad_field("prior." + kind, e.message());
  }
  return prior;
}

inline ChiLaw parse_chi(const Json& j, const std::string& path,
                        std::string& name) {
  if (!j.is_object()) bad_field(path, "expected an object");
  const std::string kind = j.value("kind", "");
  ChiLaw chi;
  if (kind == "uniform") {
    chi = ChiUniform{};
    name = "uniform";
  } else if (kind == "beta") {
    const double a = get_number(field(j, "a", path + "."), path + ".a");
    const double b = get_number(field(j, "b", path + "."), path + ".b");
    chi = ChiBeta{a, b};
    name = "beta(" + fmt17(a) + ";" + fmt17(b) + ")";
  } else if (kind == "discrete") {
    chi = ChiDiscrete{
        get_list<double>(field(j, "atoms", path + "."), path + ".atoms",
                         get_number),
        get_list<double>(field(j, "weights", path + "."), path + ".weights",
                         get_number)};
    name = "discrete";
  } else {
    bad_field(path + ".kind", "unknown chi kind '" + kind + "'");
  }
  try {
    validate_chi(chi);
  } catch (const Error& e) {
    bad_field(path, e.message());
  }
  return chi;
}

inline std::vector<std::size_t> default_grid(const std::string& kind) {
  if (kind == "decompose") return {64, 256};
  if (kind == "contraction") return {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  if (kind == "gc-rate") return {64, 128, 256, 512, 1024, 2048, 4096, 8192};
  if (kind == "mv-bounds") return {50, 500};
  if (kind == "lipschitz") return {5, 20, 100};
  if (kind == "egp-check") return {5, 20};
  if (kind == "df-sweep") {
    std::vector<std::size_t> g;
    for (int i = 0; i < 10; ++i) {
      g.push_back(static_cast<std::size_t>(std::round(std::pow(1000.0, i / 9.0))));
    }
    return g;
  }
  return {16, 64, 256};
}

inline std::vector<double> linspace(double a, double b, std::size_t k) {
  std::vector<double> v;
  for (std::size_t i = 0; i < k; ++i) {
    v.push_back(k == 1 ? a : a + (b - a) * static_cast<double>(i) /
                                     static_cast<double>(k - 1));
  }
  return v;
}

}  // namespace detail

/// Parses and validates a spec. `kind` (from the subcommand) must agree with
/// an "experiment" field when both are present. Every error is an Error
/// whose message names the offending field.
inline ExperimentSpec parse_spec(const std::string& kind, const Json& config) {
  using namespace detail;
  if (!config.is_object()) bad_field("<root>", "expected a JSON object");
  static const std::set<std::string> known = {
      "experiment", "space",  "prior",    "p0",        "n_grid",
      "delta",      "delta_schedule",     "p",         "replications",
      "posterior_draws",      "seed",     "threads",   "strict",
      "out",        "truncation",         "resolution", "blowup",
      "pairs",      "q_values", "cells",  "chi",       "p_values",
      "h_values",   "mu",     "nu"};
  for (const auto& [k, v] : config.items()) {
    if (!known.count(k)) bad_field(k, "unknown field");
  }
  ExperimentSpec s;
  s.kind = kind;
  if (config.contains("experiment")) {
    const std::string declared = config.at("experiment").get<std::string>();
    if (!kind.empty() && declared != kind) {
      bad_field("experiment", "'" + declared + "' does not match subcommand '" +
                                  kind + "'");
    }
    s.kind = declared;
  }
  if (!experiment_kinds().count(s.kind)) {
    bad_field("experiment", "unknown experiment '" + s.kind + "'");
  }
  s.config = config;
  if (config.contains("space")) s.space = parse_space(config.at("space"));
  if (config.contains("p0")) s.p0 = parse_law(config.at("p0"), s.space, "p0");
  if (config.contains("prior") || s.kind == "contraction" ||
      s.kind == "decompose" || s.kind == "lipschitz" || s.kind == "egp-check") {
    s.prior = parse_prior(
        config.value("prior", Json::parse(R"({"dp": {"q": 1}})")), s.space);
  }
  s.n_grid = config.contains("n_grid")
                 ? get_list<std::size_t>(config.at("n_grid"), "n_grid", get_count)
                 : default_grid(s.kind);
  for (std::size_t i = 0; i < s.n_grid.size(); ++i) {
    if (s.n_grid[i] == 0) bad_field("n_grid", "sample sizes must be >= 1");
    if (i && s.n_grid[i] <= s.n_grid[i - 1]) {
      bad_field("n_grid", "must be strictly increasing");
    }
  }
  if (s.n_grid.empty()) bad_field("n_grid", "must not be empty");
  s.p = number_or(config, "p", 1.0, "");
  if (!(s.p >= 1.0)) bad_field("p", "order must be >= 1");
  if (config.contains("replications")) {
    s.replications = get_count(config.at("replications"), "replications");
  }
  if (config.contains("posterior_draws")) {
    s.posterior_draws = get_count(config.at("posterior_draws"), "posterior_draws");
  }
  if (s.replications < 2) bad_field("replications", "must be >= 2");
  if (s.posterior_draws < 1) bad_field("posterior_draws", "must be >= 1");
  if (s.kind == "mv-bounds" && s.replications < 100) {
    bad_field("replications", "mv-bounds needs at least 100");
  }
  if (config.contains("seed")) {
    const Json& seed = config.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() &&
                                      seed.get<long long>() < 0)) {
      bad_field("seed", "expected an unsigned integer");
    }
    s.seed = config.at("seed").get<std::uint64_t>();
  }
  if (config.contains("threads")) s.threads = get_count(config.at("threads"), "threads");
  if (config.contains("strict")) {
    if (!config.at("strict").is_boolean()) bad_field("strict", "expected a boolean");
    s.strict = config.at("strict").get<bool>();
  }
  if (config.contains("out")) s.out_dir = config.at("out").get<std::string>();
  if (config.contains("truncation")) {
    s.truncation = get_count(config.at("truncation"), "truncation");
    if (s.truncation < 2) bad_field("truncation", "must be >= 2");
  }
  if (config.contains("resolution")) {
    s.resolution = get_count(config.at("resolution"), "resolution");
    if (s.resolution < 1) bad_field("resolution", "must be >= 1");
  }
  if (config.contains("blowup")) {
    s.blowup = get_list<double>(config.at("blowup"), "blowup", get_number);
    for (double m : s.blowup) {
      if (!(m > 0.0)) bad_field("blowup", "factors must be positive");
    }
  }
  if (config.contains("pairs")) {
    s.pairs = get_count(config.at("pairs"), "pairs");
    if (s.pairs < 1) bad_field("pairs", "must be >= 1");
  }
  if (config.contains("q_values")) {
    s.q_values = get_list<double>(config.at("q_values"), "q_values", get_number);
    for (double q : s.q_values) {
      if (!(q >= 0.0)) bad_field("q_values", "must be >= 0");
    }
  }
  if (config.contains("cells")) {
    s.cells = get_list<std::size_t>(config.at("cells"), "cells", get_count);
    for (std::size_t c : s.cells) {
      if (c == 0) bad_field("cells", "must be >= 1");
    }
  }

  // Deltas.
  if (config.contains("delta") && config.contains("delta_schedule")) {
    bad_field("delta", "give either delta or delta_schedule");
  }
  if (config.contains("delta_schedule")) {
    const Json& d = config.at("delta_schedule");
    const std::string k = d.value("kind", "");
    if (k != "corollary") {
      bad_field("delta_schedule.kind", "expected 'corollary'");
    }
    s.deltas.kind = DeltaSchedule::Kind::kCorollary;
    try {
      s.deltas.rates = corollary_rate(
          number_or(d, "d", static_cast<double>(s.space.is_hypercube()
                                                    ? s.space.dim()
                                                    : 1),
                    "delta_schedule."),
          number_or(d, "s", 0.0, "delta_schedule."),
          number_or(d, "alpha", 0.5, "delta_schedule."),
          number_or(d, "p", s.p, "delta_schedule."));
    } catch (const HypothesisViolated& e) {
      throw HypothesisViolated(std::string("config field 'delta_schedule': ") +
                               e.message());
    } catch (const Error& e) {
      bad_field("delta_schedule", e.message());
    }
    s.deltas.scale = number_or(d, "scale", 1.0, "delta_schedule.");
    if (!(s.deltas.scale > 0.0)) bad_field("delta_schedule.scale", "must be > 0");
  } else {
    if (config.contains("delta")) {
      const Json& d = config.at("delta");
      s.deltas.values = d.is_array() ? get_list<double>(d, "delta", get_number)
                                     : std::vector<double>{get_number(d, "delta")};
    } else {
      s.deltas.values = {0.1, 0.05};
    }
    for (double d : s.deltas.values) {
      if (!(d > 0.0) || d > s.space.diameter()) {
        bad_field("delta", "must lie in (0, diameter]");
      }
    }
  }

  // df-sweep.
  if (s.kind == "df-sweep") {
    if (config.contains("chi")) {
      const Json& c = config.at("chi");
      if (!c.is_array()) bad_field("chi", "expected an array");
      for (std::size_t i = 0; i < c.size(); ++i) {
        std::string name;
        ChiLaw chi = parse_chi(c[i], "chi[" + std::to_string(i) + "]", name);
        s.chis.emplace_back(name, chi);
      }
    } else {
      s.chis = {{"uniform", ChiUniform{}},
                {"beta(2;2)", ChiBeta{2, 2}},
                {"beta(0.5;0.5)", ChiBeta{0.5, 0.5}}};
    }
    s.p_values = config.contains("p_values")
                     ? get_list<double>(config.at("p_values"), "p_values", get_number)
                     : linspace(0.05, 0.95, 10);
    s.h_values = config.contains("h_values")
                     ? get_list<double>(config.at("h_values"), "h_values", get_number)
                     : linspace(0.01, 0.24, 10);
    for (double p : s.p_values) {
      if (!(p >= 0.0 && p <= 1.0)) bad_field("p_values", "must lie in [0, 1]");
    }
    for (double h : s.h_values) {
      if (!(h > 0.0 && h < 0.25)) bad_field("h_values", "must lie in (0, 1/4)");
    }
  }

  if (s.kind == "wasserstein") {
    for (const char* key : {"mu", "nu"}) {
      const Law law = parse_law(field(config, key, ""), s.space, key);
      const auto* m = std::get_if<DiscreteMeasure>(&law);
      if (!m) bad_field(key, "expected a discrete measure");
      (std::string(key) == "mu" ? s.mu : s.nu) = *m;
    }
  }
  if (s.kind == "contraction" || s.kind == "decompose") {
    if (!std::holds_alternative<DirichletProcessPrior>(*s.prior)) {
      bad_field("prior", s.kind + " needs a Dirichlet process prior");
    }
  }
  if (s.kind == "egp-check" &&
      !std::holds_alternative<ExtendedGammaPrior>(*s.prior)) {
    bad_field("prior", "egp-check needs an extended Gamma prior");
  }
  return s;
}

// Running ---------------------------------------------------------------------

struct RunResult {
  bool pass = true;
  std::vector<CsvTable> tables;
  Json summary;
};

namespace detail {

inline std::string flag(bool b) { return b ? "true" : "false"; }

inline RunResult run_wasserstein(const ExperimentSpec& s) {
  RunResult r;
  const TransportPlan plan = wasserstein(*s.mu, *s.nu, s.p, s.space);
  CsvTable t{"wasserstein_plan.csv", {"row", "col", "mass"}, {}};
  for (const auto& e : plan.entries) {
    t.add({std::to_string(e.row), std::to_string(e.col), fmt17(e.mass)});
  }
  r.tables.push_back(std::move(t));
  r.summary["value"] = plan.cost;
  if (s.space.is_hypercube() && s.space.dim() == 1) {
    r.summary["value_1d"] = wasserstein_1d(*s.mu, *s.nu, s.p);
  }
  return r;
}

inline RunResult run_gc(const ExperimentSpec& s) {
  RunResult r;
  const GcReport g = gc_rate(s.p0, s.p, s.n_grid, s.replications, s.space,
                             SeededRng(s.seed), s.mc());
  CsvTable t{"gc_rate.csv", {"n", "estimate", "se"}, {}};
  for (const auto& row : g.rows) {
    t.add({std::to_string(row.n), fmt17(row.estimate.mean),
           fmt17(row.estimate.se)});
  }
  r.tables.push_back(std::move(t));
  r.summary["slope"] = g.slope;
  return r;
}

inline RunResult run_contraction(const ExperimentSpec& s) {
  RunResult r;
  const auto& dp = std::get<DirichletProcessPrior>(*s.prior);
  const ContractionReport c =
      estimate_contraction(dp, s.p0, s.n_grid, s.replications,
                           s.posterior_draws, s.p, s.space, SeededRng(s.seed),
                           s.mc());
  CsvTable t{"contraction.csv", {"n", "eps", "se"}, {}};
  for (const auto& row : c.rows) {
    t.add({std::to_string(row.n), fmt17(row.estimate.mean),
           fmt17(row.estimate.se)});
  }
  CsvTable m{"markov.csv", {"n", "blowup", "mass", "se", "ceiling", "pass"}, {}};
  for (const auto& row : markov_pcr_check(c, s.blowup)) {
    m.add({std::to_string(row.n), fmt17(row.blowup), fmt17(row.mass.mean),
           fmt17(row.mass.se), fmt17(row.ceiling), flag(row.pass)});
    r.pass = r.pass && row.pass;
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(m));
  r.summary["slope"] = c.slope;
  r.summary["tail_bound"] = c.tail_bound;
  return r;
}

inline RunResult run_decompose(const ExperimentSpec& s) {
  RunResult r;
  const auto& dp = std::get<DirichletProcessPrior>(*s.prior);
  CsvTable t{"decomposition.csv",
             {"n", "delta", "cells", "term", "estimate", "se", "ceiling",
              "ceiling_se", "pass"},
             {}};
  Json runs = Json::array();
  const SeededRng root(s.seed);
  std::size_t id = 0;
  for (std::size_t n : s.n_grid) {
    for (double delta : s.deltas.deltas_for(n, s.space.diameter())) {
      const DecompositionReport d = decompose_five_terms(
          dp, s.p0, n, delta, s.p, s.replications, s.posterior_draws, s.space,
          root.substream(id++), s.mc());
      const std::string ns = std::to_string(n);
      const std::string ds = fmt17(delta);
      const std::string cs = std::to_string(d.cells);
      for (const auto& term : d.terms) {
        t.add({ns, ds, cs, term.name, fmt17(term.value.mean),
               fmt17(term.value.se), fmt17(term.ceiling), fmt17(term.ceiling_se),
               flag(term.pass)});
      }
      t.add({ns, ds, cs, "T4_max", fmt17(d.t4_max), "0", fmt17(2.0 * delta),
             "0", flag(d.t4_deterministic)});
      t.add({ns, ds, cs, "eps", fmt17(d.eps.mean), fmt17(d.eps.se),
             fmt17(d.term_sum.mean), fmt17(d.term_sum.se), flag(d.eps_pass)});
      r.pass = r.pass && d.pass();
      runs.push_back({{"n", n},
                      {"delta", delta},
                      {"cells", d.cells},
                      {"L_n", d.l_n},
                      {"M_n", d.mean_abs_dev_sum.mean},
                      {"V_n", d.sqrt_var_sum.mean},
                      {"theorem_bound", d.theorem_bound},
                      {"pass", d.pass()}});
    }
  }
  r.tables.push_back(std::move(t));
  r.summary["estimator"] = "upper-bound estimator";
  r.summary["runs"] = runs;
  return r;
}

inline RunResult run_mv(const ExperimentSpec& s) {
  RunResult r;
  Law base = UniformLaw{};
  if (s.prior) {
    if (const auto* dp = std::get_if<DirichletProcessPrior>(&*s.prior)) {
      base = dp->base;
    }
  }
  CsvTable t{"mv_bounds.csv",
             {"q", "N", "n", "M", "M_se", "V", "V_se", "ceiling_M",
              "ceiling_V", "ceiling_MV", "pass_M", "pass_V", "pass_MV"},
             {}};
  const SeededRng root(s.seed);
  std::size_t id = 0;
  for (double q : s.q_values) {
    for (std::size_t cells : s.cells) {
      for (std::size_t n : s.n_grid) {
        const MvReport m = mv_bounds_dp(q, cells, n, s.replications,
                                        root.substream(id++), base, s.p0,
                                        s.threads);
        t.add({fmt17(q), std::to_string(m.cells), std::to_string(n),
               fmt17(m.mean_abs_dev_sum.mean), fmt17(m.mean_abs_dev_sum.se),
               fmt17(m.sqrt_var_sum.mean), fmt17(m.sqrt_var_sum.se),
               fmt17(m.ceiling_m), fmt17(m.ceiling_v), fmt17(m.ceiling_mv),
               flag(m.pass_m), flag(m.pass_v), flag(m.pass_mv)});
        r.pass = r.pass && m.pass();
      }
    }
  }
  r.tables.push_back(std::move(t));
  return r;
}

inline RunResult run_df(const ExperimentSpec& s) {
  RunResult r;
  CsvTable t{"df_sweep.csv", {"chi", "n", "p", "h", "R", "ceiling", "pass"}, {}};
  CsvTable mb{"df_moment_bound.csv", {"chi", "n", "h_opt", "bound"}, {}};
  for (const auto& [name, chi] : s.chis) {
    const DFProfile prof(chi);
    for (double h : s.h_values) {
      const double psi = prof.psi(h);
      for (std::size_t n : s.n_grid) {
        const double nn = static_cast<double>(n);
        for (double p : s.p_values) {
          const double R = df_ratio(chi, nn, p, h);
          const double ceiling = psi * std::exp(2.0 * nn * h * h);
          const bool ok = R >= ceiling * (1.0 - 1e-9);
          r.pass = r.pass && ok;
          t.add({name, std::to_string(n), fmt17(p), fmt17(h), fmt17(R),
                 fmt17(ceiling), flag(ok)});
        }
      }
    }
    for (std::size_t n : s.n_grid) {
      const DfMomentBound b = df_moment_bound(prof, static_cast<double>(n), 0.5);
      mb.add({name, std::to_string(n), fmt17(b.h_opt), fmt17(b.bound)});
    }
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(mb));
  return r;
}

inline RunResult run_lipschitz(const ExperimentSpec& s) {
  RunResult r;
  CsvTable t{"lipschitz.csv",
             {"n", "pairs_used", "max_ratio", "constant", "pass"},
             {}};
  const SeededRng root(s.seed);
  for (std::size_t n : s.n_grid) {
    const LipschitzReport l = estimate_predictive_lipschitz(
        *s.prior, n, s.pairs, s.p0, s.space, root.substream(n), s.mc());
    t.add({std::to_string(n), std::to_string(l.pairs_used), fmt17(l.max_ratio),
           fmt17(l.constant), flag(l.pass)});
    r.pass = r.pass && l.pass;
  }
  r.tables.push_back(std::move(t));
  return r;
}

inline RunResult run_egp(const ExperimentSpec& s) {
  RunResult r;
  const auto& egp = std::get<ExtendedGammaPrior>(*s.prior);
  const bool constant = egp.beta.kind == BetaFunction::Kind::kConstant;
  CsvTable t{"egp_check.csv", {"check", "n", "value", "bound", "pass"}, {}};
  auto row = [&](const std::string& check, std::size_t n, double value,
                 double bound, bool ok) {
    t.add({check, std::to_string(n), fmt17(value), fmt17(bound), flag(ok)});
    r.pass = r.pass && ok;
  };
  const SeededRng root(s.seed);
  for (std::size_t n : s.n_grid) {
    SeededRng rng = root.substream(n);
    const EmpiricalMeasure x = sample_iid(s.p0, s.space, n, rng);
    const EgpPredictive pred = egp_predictive(egp, x);
    row("predictive_mass", n, pred.raw_mass, 1.0,
        std::abs(pred.raw_mass - 1.0) <= 1e-6);
    if (constant) {
      const double c = egp.beta.c0;
      const LatentDensityProfile f = egp_latent_density(egp, x);
      const double z = std::exp(std::lgamma(egp.a) +
                                std::lgamma(static_cast<double>(n)) -
                                std::lgamma(egp.a + static_cast<double>(n)) -
                                egp.a * std::log(c));
      row("normalization", n, f.z(), z, std::abs(f.z() / z - 1.0) <= 1e-6);
      const DirichletProcessPrior dp{egp.a, Law(egp.alpha_shape)};
      const double w = wasserstein_value(
          pred.measure, dp_predictive(dp, x).as_discrete(), 1.0, s.space);
      row("dp_match", n, w, 1e-6, w <= 1e-6);
    }
    double worst = -std::numeric_limits<double>::infinity();
    L1Comparison worst_pair;
    for (std::size_t k = 0; k < s.pairs; ++k) {
      SeededRng pr = rng.substream(k);
      const EmpiricalMeasure a = sample_iid(s.p0, s.space, n, pr);
      const EmpiricalMeasure b = sample_iid(s.p0, s.space, n, pr);
      const L1Comparison l1 = egp_l1_distance(egp, a, b, s.space);
      if (l1.l1 - l1.bound > worst) {
        worst = l1.l1 - l1.bound;
        worst_pair = l1;
      }
    }
    row("l1_bound", n, worst_pair.l1, worst_pair.bound,
        worst_pair.l1 <= worst_pair.bound + 1e-6);
    const LipschitzReport l = estimate_predictive_lipschitz(
        *s.prior, n, s.pairs, s.p0, s.space, rng.substream(s.pairs + 1), s.mc());
    row("lipschitz", n, l.max_ratio, l.constant, l.pass);
  }
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace detail

/// Runs a validated spec; does not touch the file system.
inline RunResult run(const ExperimentSpec& s) {
  log(LogLevel::kInfo, "running " + s.kind + " with seed " +
                           std::to_string(s.seed));
  RunResult r;
  if (s.kind == "wasserstein") r = detail::run_wasserstein(s);
  else if (s.kind == "gc-rate") r = detail::run_gc(s);
  else if (s.kind == "contraction") r = detail::run_contraction(s);
  else if (s.kind == "decompose") r = detail::run_decompose(s);
  else if (s.kind == "mv-bounds") r = detail::run_mv(s);
  else if (s.kind == "df-sweep") r = detail::run_df(s);
  else if (s.kind == "lipschitz") r = detail::run_lipschitz(s);
  else r = detail::run_egp(s);
  Json config = Json::parse(s.echo());
  r.summary["experiment"] = s.kind;
  r.summary["version"] = WPCR_VERSION;
  r.summary["seed"] = s.seed;
  r.summary["config"] = config;
  r.summary["pass"] = r.pass;
  Json files = Json::array();
  for (const auto& t : r.tables) files.push_back(t.name);
  r.summary["tables"] = files;
  return r;
}

/// Writes every table and summary.json into s.out_dir.
inline void write_outputs(const ExperimentSpec& s, const RunResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(s.out_dir);
  const std::string echo = s.echo();
  for (const auto& t : r.tables) {
    std::ofstream f(fs::path(s.out_dir) / t.name, std::ios::binary);
    f << t.render(echo);
    if (!f) throw InvalidInput("cannot write " + t.name);
    log(LogLevel::kInfo, "wrote " + t.name);
  }
  std::ofstream f(fs::path(s.out_dir) / "summary.json", std::ios::binary);
  f << r.summary.dump(2) << '\n';
  if (!f) throw InvalidInput("cannot write summary.json");
}

/// 1-based line of the field named in a "config field '<path>'" message,
/// found by locating each path component in order; 0 when not found.
inline std::size_t locate_field(const std::string& text,
                                const std::string& message) {
  const std::string tag = "config field '";
  const auto a = message.find(tag);
  if (a == std::string::npos) return 0;
  const auto b = message.find('\'', a + tag.size());
  if (b == std::string::npos) return 0;
  std::string path = message.substr(a + tag.size(), b - a - tag.size());
  std::size_t pos = 0;
  bool found = false;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('.', start);
    if (end == std::string::npos) end = path.size();
    std::string key = path.substr(start, end - start);
    key = key.substr(0, key.find('['));
    if (!key.empty()) {
      const auto hit = text.find("\"" + key + "\"", pos);
      if (hit == std::string::npos) break;
      pos = hit;
      found = true;
    }
    start = end + 1;
  }
  if (!found) return 0;
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + pos, '\n'));
}

/// Exit status for an error kind: 3 for numeric trouble, 2 otherwise.
inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kNumericFailure:
    case ErrorKind::kDegenerateWeights:
      return 3;
    default:
      return 2;
  }
}

}  // namespace wpcr
