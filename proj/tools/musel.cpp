// Command-line front end for the matrix-uncertainty selector library.
//
// Subcommands:
//   simulate   Monte Carlo table for a configured estimator lineup
//   elbow      sparsity-vs-delta curve for a single estimator (CSV)
//   verify     generate certified instances and check the error bounds
//   portfolio  index replication on a daily price panel
//   estimate   one-shot estimation on user-supplied Z.csv / y.csv
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 infeasible or
// unbounded estimator, 5 bound violation in verify mode.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "musel/analysis.hpp"
#include "musel/csv.hpp"
#include "musel/json_io.hpp"
#include "musel/portfolio.hpp"
#include "musel/rng.hpp"
#include "musel/selectors.hpp"
#include "musel/sim.hpp"

namespace {

using namespace musel;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitViolation = 5;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// key = value config files
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct ConfigFile {
  // Insertion-ordered (key, value) pairs; keys may repeat (e.g. `row`).
  std::vector<std::pair<std::string, std::string>> entries;
  std::string dir;  // directory of the file, for resolving relative paths

  bool has(const std::string& key) const {
    for (const auto& kv : entries) {
      if (kv.first == key) return true;
    }
    return false;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    std::string v = fallback;
    for (const auto& kv : entries) {
      if (kv.first == key) v = kv.second;  // last one wins
    }
    return v;
  }

  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& kv : entries) {
      if (kv.first == key) out.push_back(kv.second);
    }
    return out;
  }
};

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ConfigFile cfg;
  const std::size_t slash = path.find_last_of('/');
  cfg.dir = slash == std::string::npos ? "." : path.substr(0, slash);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.entries.emplace_back(key, value);
  }
  return cfg;
}

void reject_unknown_keys(const ConfigFile& cfg, const std::vector<std::string>& allowed) {
  for (const auto& kv : cfg.entries) {
    bool ok = false;
    for (const std::string& k : allowed) {
      if (kv.first == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown config key: " + kv.first);
  }
}

// ---------------------------------------------------------------------------
// small value parsers shared by flags and config values
// ---------------------------------------------------------------------------

double parse_number(const std::string& raw, const std::string& what) {
  // Accepts plain literals and one ratio `a/b` so noise levels can be written
  // the way they are usually quoted (e.g. 0.05/1.96).
  const std::string s = trim(raw);
  try {
    const std::size_t slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    const std::string num = trim(s.substr(0, slash));
    const std::string den = trim(s.substr(slash + 1));
    const double a = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(s);
    const double b = std::stod(den, &used);
    if (used != den.size() || b == 0.0) throw std::invalid_argument(s);
    return a / b;
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse number `" + s + "`");
  }
}

std::uint64_t parse_u64(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse integer `" + s + "`");
  }
}

std::size_t parse_size(const std::string& raw, const std::string& what) {
  return static_cast<std::size_t>(parse_u64(raw, what));
}

bool parse_bool(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(what + ": expected true/false, got `" + s + "`");
}

struct EpsilonSpec {
  bool auto_rule = false;
  double value = 0.0;
};

EpsilonSpec parse_epsilon(const std::string& raw, const std::string& what) {
  EpsilonSpec e;
  if (trim(raw) == "auto") {
    e.auto_rule = true;
    return e;
  }
  e.value = parse_number(raw, what);
  return e;
}

Variant parse_variant(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  if (s == "mu1") return Variant::MU1;
  if (s == "mu2") return Variant::MU2;
  if (s == "dantzig") return Variant::Dantzig;
  if (s == "lasso") return Variant::Lasso;
  throw ConfigError(what + ": expected mu1|mu2|dantzig|lasso, got `" + s + "`");
}

FeasibleSet parse_theta_set(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  if (s == "all") return FeasibleSet::all();
  if (s == "nonneg") return FeasibleSet::nonneg();
  if (s == "simplex") return FeasibleSet::simplex(false);
  if (s == "simplex:nonneg") return FeasibleSet::simplex(true);
  if (s.rfind("l1ball:", 0) == 0) {
    const double a = parse_number(s.substr(7), what);
    if (!(a > 0.0)) throw ConfigError(what + ": l1 ball radius must be > 0");
    return FeasibleSet::l1ball(a);
  }
  throw ConfigError(what + ": expected all|nonneg|l1ball:a|simplex[:nonneg], got `" + s + "`");
}

ThresholdRule parse_threshold(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  ThresholdRule rule;
  if (s == "none") return rule;
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t colon = s.find(':', pos);
    if (colon == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, colon - pos));
    pos = colon + 1;
  }
  if (parts[0] == "fixed" && parts.size() == 2) {
    rule.kind = ThresholdKind::fixed;
    rule.value = parse_number(parts[1], what);
    return rule;
  }
  if (parts[0] == "b1" && parts.size() == 3) {
    rule.kind = ThresholdKind::b1;
    rule.a = parse_number(parts[1], what);
    rule.alpha = parse_number(parts[2], what);
    return rule;
  }
  if (parts[0] == "b2" && parts.size() == 2) {
    rule.kind = ThresholdKind::b2;
    rule.alpha = parse_number(parts[1], what);
    return rule;
  }
  if (parts[0] == "star" && parts.size() == 2) {
    rule.kind = ThresholdKind::star;
    rule.alpha = parse_number(parts[1], what);
    return rule;
  }
  throw ConfigError(what + ": expected none|fixed:t|b1:a:alpha|b2:alpha|star:alpha, got `" +
                    s + "`");
}

// One estimator row: `<variant> [delta=F] [epsilon=F|auto] [theta-set=..]
// [threshold=..] [label=..]`, whitespace separated.
EstimatorSpec parse_row(const std::string& raw) {
  const std::vector<std::string> tokens = split_ws(raw);
  if (tokens.empty()) throw ConfigError("row: empty estimator row");
  EstimatorSpec es;
  es.config.variant = parse_variant(tokens[0], "row");
  if (es.config.variant == Variant::Dantzig) {
    es.config.delta = 0.0;
    es.config.lambda_is_explicit = true;
    es.config.lambda_explicit = 0.0;
  }
  bool have_label = false;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("row: expected key=value token, got `" + tok + "`");
    }
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "delta") {
      es.config.delta = parse_number(value, "row delta");
    } else if (key == "epsilon") {
      const EpsilonSpec e = parse_epsilon(value, "row epsilon");
      es.epsilon_auto = e.auto_rule;
      es.config.epsilon = e.value;
    } else if (key == "theta-set" || key == "theta_set") {
      es.config.theta_set = parse_theta_set(value, "row theta-set");
    } else if (key == "threshold") {
      es.threshold = parse_threshold(value, "row threshold");
    } else if (key == "label") {
      es.label = value;
      have_label = true;
    } else {
      throw ConfigError("row: unknown row key: " + key);
    }
  }
  if (!have_label) {
    char buf[64];
    switch (es.config.variant) {
      case Variant::Lasso:
        std::snprintf(buf, sizeof(buf), "Lasso");
        break;
      case Variant::Dantzig:
        std::snprintf(buf, sizeof(buf), "Dantzig");
        break;
      case Variant::MU1:
        std::snprintf(buf, sizeof(buf), "MU1(%g)", es.config.delta);
        break;
      case Variant::MU2:
        std::snprintf(buf, sizeof(buf), "MU(%g)", es.config.delta);
        break;
    }
    es.label = es.threshold.kind == ThresholdKind::none ? buf : std::string("T-") + buf;
  }
  return es;
}

// ---------------------------------------------------------------------------
// shared experiment-config reader (simulate / elbow)
// ---------------------------------------------------------------------------

const std::vector<std::string> kExperimentKeys = {
    "model",      "n",    "p",    "s",      "theta_value",      "sigma", "censor_t",
    "missing_pi", "missing_rescaled", "reps", "seed", "format", "row",   "grid"};

ExperimentSpec read_experiment(const ConfigFile& cfg) {
  ExperimentSpec spec;
  const std::string model = cfg.get("model", "censored");
  if (model == "censored") {
    spec.model.kind = ModelKind::censored;
  } else if (model == "missing") {
    spec.model.kind = ModelKind::missing;
  } else {
    throw ConfigError("model: expected censored|missing, got `" + model + "`");
  }
  spec.n = parse_size(cfg.get("n", "100"), "n");
  spec.p = parse_size(cfg.get("p", "500"), "p");
  spec.s = parse_size(cfg.get("s", "1"), "s");
  spec.theta_value = parse_number(cfg.get("theta_value", "0.5"), "theta_value");
  spec.sigma = parse_number(cfg.get("sigma", "0.05/1.96"), "sigma");
  spec.model.t = parse_number(cfg.get("censor_t", "0.9"), "censor_t");
  spec.model.pi = parse_number(cfg.get("missing_pi", "0.1"), "missing_pi");
  spec.model.rescaled = parse_bool(cfg.get("missing_rescaled", "false"), "missing_rescaled");
  spec.reps = parse_size(cfg.get("reps", "100"), "reps");
  spec.base_seed = parse_u64(cfg.get("seed", "1"), "seed");
  for (const std::string& row : cfg.all("row")) spec.estimators.push_back(parse_row(row));
  return spec;
}

void validate_experiment(const ExperimentSpec& spec) {
  if (spec.estimators.empty()) throw ConfigError("config defines no estimator rows");
  if (spec.s > spec.p) throw ConfigError("s exceeds p");
  if (spec.reps == 0) throw ConfigError("reps must be >= 1");
  for (const EstimatorSpec& es : spec.estimators) {
    if (es.config.variant == Variant::Lasso && !(spec.sigma > 0.0)) {
      throw ConfigError("row `" + es.label +
                        "`: lasso needs sigma > 0 for the Cp rule");
    }
  }
}

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write output file: " + out_path);
  out << text;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Resolve a path from a config file relative to the config's directory.
std::string resolve_path(const ConfigFile& cfg, const std::string& path) {
  if (path.empty() || path[0] == '/') return path;
  return cfg.dir + "/" + path;
}

// ---------------------------------------------------------------------------
// flag state shared across subcommands
// ---------------------------------------------------------------------------

struct Flags {
  std::string config_path;
  std::string out_path;
  std::string format;  // empty = subcommand default
  std::vector<double> deltas;
  std::string epsilon;
  std::string variant;
  std::string theta_set;
  std::string threshold;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t reps = 0;
  bool reps_set = false;
  // estimate-only inputs
  std::string z_path;
  std::string y_path;
  double sigma = 0.0;
  bool sigma_set = false;
};

std::string pick_format(const Flags& flags, const ConfigFile& cfg,
                        const std::string& fallback) {
  std::string fmt = cfg.get("format", fallback);
  if (!flags.format.empty()) fmt = flags.format;
  if (fmt != "json" && fmt != "markdown") {
    throw ConfigError("format: expected json|markdown, got `" + fmt + "`");
  }
  return fmt;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const Flags& flags) {
  ConfigFile cfg = parse_config_file(flags.config_path);
  reject_unknown_keys(cfg, kExperimentKeys);
  ExperimentSpec spec = read_experiment(cfg);
  if (flags.seed_set) spec.base_seed = flags.seed;
  if (flags.reps_set) spec.reps = flags.reps;
  validate_experiment(spec);

  const std::string fmt = pick_format(flags, cfg, "markdown");
  TableReport report = run_monte_carlo(spec);
  if (fmt == "markdown") {
    write_output(table_markdown(report), flags.out_path);
  } else {
    write_output(json_text(nlohmann::json(report)), flags.out_path);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// elbow
// ---------------------------------------------------------------------------

int cmd_elbow(const Flags& flags) {
  ConfigFile cfg = parse_config_file(flags.config_path);
  reject_unknown_keys(cfg, kExperimentKeys);
  ExperimentSpec spec = read_experiment(cfg);
  if (flags.seed_set) spec.base_seed = flags.seed;
  if (flags.reps_set) spec.reps = flags.reps;
  if (spec.estimators.size() != 1) {
    throw ConfigError("elbow needs exactly one `row`");
  }
  if (spec.estimators[0].config.variant == Variant::Lasso) {
    throw ConfigError("elbow scans delta; lasso has no delta");
  }

  std::vector<double> grid = flags.deltas;
  if (grid.empty()) {
    for (const std::string& chunk : cfg.all("grid")) {
      for (const std::string& tok : split_ws(chunk)) {
        grid.push_back(parse_number(tok, "grid"));
      }
    }
  }
  if (grid.empty()) throw ConfigError("no delta grid: set `grid` or pass --delta");
  for (double d : grid) {
    if (d < 0.0) throw ConfigError("--delta: grid values must be >= 0");
  }

  const auto curve = elbow_scan(spec, grid);
  write_output(elbow_csv(curve), flags.out_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

const std::vector<std::string> kVerifyKeys = {"suite",   "count", "n",     "p",
                                              "s",       "delta", "epsilon", "noise",
                                              "seed",    "format"};

// Gram-Schmidt design whose columns are orthogonal with |col|^2 = n, so the
// coherence is numerically zero and every theorem precondition is certified.
DenseMatrix orthogonal_design(std::size_t n, std::size_t p, Rng& rng) {
  DenseMatrix X(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    Vector col(n);
    for (;;) {
      for (double& v : col) v = rng.normal();
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += col[i] * X(i, k);
        proj /= static_cast<double>(n);  // earlier columns have |col|^2 = n
        for (std::size_t i = 0; i < n; ++i) col[i] -= proj * X(i, k);
      }
      const double nrm = norm_l2(col);
      if (nrm > 1e-8) {
        const double scale = std::sqrt(static_cast<double>(n)) / nrm;
        for (std::size_t i = 0; i < n; ++i) X(i, j) = col[i] * scale;
        break;
      }
    }
  }
  return X;
}

struct VerifyTotals {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t not_applicable = 0;
};

void tally(const BoundReport& rep, VerifyTotals& totals,
           std::map<std::string, std::size_t>& violated_ids) {
  totals.checked += rep.bounds.size();
  totals.not_applicable += rep.not_applicable.size();
  for (const BoundCheck& b : rep.bounds) {
    if (!b.holds) {
      ++totals.violations;
      ++violated_ids[b.id];
    }
  }
}

int cmd_verify(const Flags& flags) {
  ConfigFile cfg = parse_config_file(flags.config_path);
  reject_unknown_keys(cfg, kVerifyKeys);
  const std::string suite = cfg.get("suite", "orthogonal");
  if (suite != "orthogonal") {
    throw ConfigError("suite: expected orthogonal, got `" + suite + "`");
  }
  const std::size_t count = parse_size(cfg.get("count", "50"), "count");
  if (count == 0) throw ConfigError("count: empty suite");
  const std::size_t n_max = parse_size(cfg.get("n", "64"), "n");
  const std::size_t p_max = parse_size(cfg.get("p", "64"), "p");
  const std::size_t s_max = parse_size(cfg.get("s", "3"), "s");
  if (n_max < 8 || p_max < 2 || s_max == 0) {
    throw ConfigError("verify needs n >= 8, p >= 2, s >= 1");
  }
  double delta = parse_number(cfg.get("delta", "0.05"), "delta");
  if (!flags.deltas.empty()) delta = flags.deltas.back();
  if (delta < 0.0) throw ConfigError("delta must be >= 0");
  const EpsilonSpec eps_spec =
      parse_epsilon(flags.epsilon.empty() ? cfg.get("epsilon", "0.01") : flags.epsilon,
                    "epsilon");
  const std::string noise = cfg.get("noise", "mixed");
  if (noise != "none" && noise != "scaled" && noise != "mixed") {
    throw ConfigError("noise: expected none|scaled|mixed, got `" + noise + "`");
  }
  std::uint64_t seed = parse_u64(cfg.get("seed", "1"), "seed");
  if (flags.seed_set) seed = flags.seed;
  const std::string fmt = pick_format(flags, cfg, "json");

  const std::vector<double> q_list{1.5, 2.0};
  nlohmann::json instances = nlohmann::json::array();
  VerifyTotals totals;
  std::map<std::string, std::size_t> violated_ids;

  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, k, 7);
    const std::size_t n = 8 + rng.index(n_max - 8 + 1);
    const std::size_t p = 2 + rng.index(std::min(n, p_max) - 2 + 1);
    const std::size_t s = 1 + rng.index(std::min(s_max, p));
    const bool noisy = noise == "scaled" || (noise == "mixed" && k % 2 == 1);

    DenseMatrix X = orthogonal_design(n, p, rng);
    Vector theta(p, 0.0);
    {
      std::vector<std::size_t> idx(p);
      for (std::size_t j = 0; j < p; ++j) idx[j] = j;
      for (std::size_t j = 0; j < s; ++j) {
        const std::size_t pick = j + rng.index(p - j);
        std::swap(idx[j], idx[pick]);
        theta[idx[j]] = rng.bernoulli(0.5) ? 0.5 : -0.5;
      }
    }
    DenseMatrix Xi(n, p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) Xi(i, j) = rng.bernoulli(0.5) ? delta : -delta;
    }

    Instance inst;
    inst.X = X;
    inst.Xi = Xi;
    inst.theta_star = theta;
    inst.xi = Vector(n, 0.0);
    inst.Z = DenseMatrix(n, p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) inst.Z(i, j) = X(i, j) + Xi(i, j);
    }

    const double epsilon =
        eps_spec.auto_rule ? epsilon_rule(delta, 0.05 / 1.96, n, p) : eps_spec.value;
    if (noisy) {
      Vector raw(n);
      for (double& v : raw) v = rng.normal();
      const double corr = norm_linf(tmatvec(inst.Z, raw)) / static_cast<double>(n);
      const double scale = corr > 0.0 ? 0.9 * epsilon / corr : 0.0;
      for (std::size_t i = 0; i < n; ++i) inst.xi[i] = raw[i] * scale;
    }
    inst.y = matvec(X, theta);
    for (std::size_t i = 0; i < n; ++i) inst.y[i] += inst.xi[i];
    inst.has_truth = true;
    inst.s = s;

    AssumptionReport as = assess_design(X, s, CoherenceMode::three);
    const double kappa = as.coherence_condition_met ? as.kappa : 0.0;
    double kappa2s = 0.0;
    if (2 * s <= p) {
      AssumptionReport as2 = assess_design(X, 2 * s, CoherenceMode::three);
      if (as2.coherence_condition_met) kappa2s = as2.kappa;
    }
    const double alpha = as.coherence_condition_met ? as.alpha : 0.0;

    Estimate est1 = mu_selector_1(inst.Z, inst.y, delta);
    SelectorConfig mu2cfg;
    mu2cfg.variant = Variant::MU2;
    mu2cfg.delta = delta;
    mu2cfg.epsilon = epsilon;
    Estimate est2 = mu_selector_2(inst.Z, inst.y, mu2cfg);
    if (est2.status != EstimateStatus::ok ||
        (!noisy && est1.status != EstimateStatus::ok)) {
      throw DataError("verify: selector infeasible on generated instance");
    }

    // Theorems about the exact-system selector get the MU1 estimate; the
    // noisy-system theorems get the MU2 estimate. Gates inside the checkers
    // turn inapplicable combinations into not-applicable records.
    const Estimate& exact_est = est1.status == EstimateStatus::ok ? est1 : est2;
    BoundReport t1 = check_theorem1(inst, exact_est, kappa, kappa2s, s, alpha);
    BoundReport t3 = check_theorem3(inst, est2, kappa, kappa2s, s, alpha, q_list);
    BoundReport t5 = check_theorem5(inst, exact_est, kappa, s, alpha);
    tally(t1, totals, violated_ids);
    tally(t3, totals, violated_ids);
    tally(t5, totals, violated_ids);

    instances.push_back(nlohmann::json{{"index", k},
                                       {"n", n},
                                       {"p", p},
                                       {"s", s},
                                       {"noisy", noisy},
                                       {"delta", delta},
                                       {"epsilon", epsilon},
                                       {"exact_system", t1},
                                       {"noisy_system", t3},
                                       {"approx_sparse", t5}});
  }

  nlohmann::json out{{"suite", suite},
                     {"count", count},
                     {"checked", totals.checked},
                     {"violations", totals.violations},
                     {"not_applicable", totals.not_applicable},
                     {"instances", instances}};
  if (fmt == "json") {
    write_output(json_text(out), flags.out_path);
  } else {
    std::string text = "| Metric | Value |\n|---|---|\n";
    text += "| instances | " + std::to_string(count) + " |\n";
    text += "| bounds checked | " + std::to_string(totals.checked) + " |\n";
    text += "| violations | " + std::to_string(totals.violations) + " |\n";
    text += "| not applicable | " + std::to_string(totals.not_applicable) + " |\n";
    write_output(text, flags.out_path);
  }
  if (totals.violations > 0) {
    std::string ids;
    for (const auto& kv : violated_ids) ids += " " + kv.first;
    std::cerr << "verify: bound violations in:" << ids << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// portfolio
// ---------------------------------------------------------------------------

const std::vector<std::string> kPortfolioKeys = {
    "panel", "assets", "suppress", "sigma", "delta",
    "epsilon", "theta_set", "seed", "format"};

int cmd_portfolio(const Flags& flags) {
  ConfigFile cfg = parse_config_file(flags.config_path);
  reject_unknown_keys(cfg, kPortfolioKeys);
  if (!cfg.has("panel")) throw ConfigError("portfolio config needs `panel`");
  if (!cfg.has("assets")) throw ConfigError("portfolio config needs `assets`");
  const std::string panel_path = resolve_path(cfg, cfg.get("panel", ""));
  const std::vector<std::string> assets = split_ws(cfg.get("assets", ""));
  if (assets.empty()) throw ConfigError("assets: empty list");
  const std::string suppress = trim(cfg.get("suppress", ""));
  const double sigma = parse_number(cfg.get("sigma", "0.05/1.96"), "sigma");
  double delta = parse_number(cfg.get("delta", "0.5"), "delta");
  if (!flags.deltas.empty()) delta = flags.deltas.back();
  if (delta < 0.0) throw ConfigError("delta must be >= 0");
  const EpsilonSpec eps_spec =
      parse_epsilon(flags.epsilon.empty() ? cfg.get("epsilon", "auto") : flags.epsilon,
                    "epsilon");
  FeasibleSet theta_set = parse_theta_set(
      flags.theta_set.empty() ? cfg.get("theta_set", "all") : flags.theta_set, "theta_set");
  std::uint64_t seed = parse_u64(cfg.get("seed", "1"), "seed");
  if (flags.seed_set) seed = flags.seed;
  const std::string fmt = pick_format(flags, cfg, "json");

  PricePanel panel;
  DesignMatrix X;
  try {
    panel = load_prices(panel_path);
    X = returns_design(panel);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }

  Rng noise_rng(seed, 0, seed_role::noise);
  PortfolioTruth truth;
  std::size_t out_col = panel.tickers.size();
  try {
    truth = build_portfolio(panel, assets, sigma, noise_rng);
    if (!suppress.empty()) out_col = ticker_index(panel, suppress);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  const DenseMatrix Z =
      suppress.empty() ? X.matrix : suppress_asset(X, out_col);

  const double epsilon =
      eps_spec.auto_rule
          ? epsilon_rule(delta, sigma, panel.dates.size(), panel.tickers.size())
          : eps_spec.value;
  ReplicationResult res = replicate(Z, truth.y, delta, epsilon, theta_set, panel.tickers);
  if (res.estimate.status != EstimateStatus::ok) {
    std::cerr << "portfolio: replication LP infeasible\n";
    return kExitInfeasible;
  }

  if (fmt == "json") {
    nlohmann::json out{{"panel", panel_path},
                       {"assets", assets},
                       {"suppressed", suppress.empty() ? nlohmann::json() : nlohmann::json(suppress)},
                       {"dropped_tickers", panel.dropped},
                       {"days", panel.dates.size()},
                       {"universe", panel.tickers.size()},
                       {"result", res}};
    write_output(json_text(out), flags.out_path);
  } else {
    std::string text = "| Ticker | Weight |\n|---|---|\n";
    char buf[64];
    for (std::size_t i = 0; i < res.retrieved.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "| %s | %.4f |\n", res.retrieved[i].c_str(),
                    res.weights[i]);
      text += buf;
    }
    write_output(text, flags.out_path);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

int cmd_estimate(const Flags& flags) {
  DenseMatrix Z;
  Vector y;
  try {
    Z = read_csv_matrix(flags.z_path);
    y = read_csv_vector(flags.y_path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  if (y.size() != Z.rows()) {
    throw DataError("dimension mismatch: Z has " + std::to_string(Z.rows()) +
                    " rows but y has " + std::to_string(y.size()) + " entries");
  }

  const Variant variant = parse_variant(flags.variant, "--variant");
  const double delta = flags.deltas.empty() ? 0.0 : flags.deltas.back();
  if (delta < 0.0) throw ConfigError("--delta must be >= 0");
  const EpsilonSpec eps_spec =
      parse_epsilon(flags.epsilon.empty() ? "0" : flags.epsilon, "--epsilon");
  FeasibleSet theta_set =
      parse_theta_set(flags.theta_set.empty() ? "all" : flags.theta_set, "--theta-set");
  ThresholdRule rule =
      parse_threshold(flags.threshold.empty() ? "none" : flags.threshold, "--threshold");

  const double epsilon = eps_spec.auto_rule
                             ? epsilon_rule(delta, flags.sigma_set ? flags.sigma : 0.05 / 1.96,
                                            Z.rows(), Z.cols())
                             : eps_spec.value;

  Estimate est;
  switch (variant) {
    case Variant::MU1:
      est = mu_selector_1(Z, y, delta, theta_set);
      break;
    case Variant::MU2: {
      SelectorConfig cfg;
      cfg.variant = Variant::MU2;
      cfg.delta = delta;
      cfg.epsilon = epsilon;
      cfg.theta_set = theta_set;
      est = mu_selector_2(Z, y, cfg);
      break;
    }
    case Variant::Dantzig:
      est = dantzig(Z, y, epsilon, theta_set);
      break;
    case Variant::Lasso: {
      if (!flags.sigma_set || !(flags.sigma > 0.0)) {
        throw ConfigError("--variant lasso needs --sigma > 0 for the Cp rule");
      }
      est = lasso_cp(lasso_path(Z, y), flags.sigma, Z.rows());
      break;
    }
  }
  if (est.status != EstimateStatus::ok) {
    std::cerr << "estimate: problem infeasible\n";
    return kExitInfeasible;
  }
  est = detail::apply_threshold(est, rule);

  nlohmann::json out{{"status", "ok"},
                     {"n", Z.rows()},
                     {"p", Z.cols()},
                     {"estimate", est}};
  write_output(json_text(out), flags.out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery under matrix uncertainty: simulation tables, bound "
               "verification, and portfolio replication"};
  app.require_subcommand(1);

  Flags flags;

  auto add_common = [&flags](CLI::App* sub, bool needs_config) {
    CLI::Option* cfg = sub->add_option("--config", flags.config_path,
                                       "key = value config file");
    if (needs_config) cfg->required();
    sub->add_option("--out", flags.out_path, "output path (default: stdout)");
    sub->add_option("--format", flags.format, "json|markdown");
    sub->add_option("--seed", flags.seed, "override base seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    sub->add_option("--reps", flags.reps, "override replicate count")
        ->each([&flags](const std::string&) { flags.reps_set = true; });
    sub->add_option("--delta", flags.deltas, "uncertainty level (repeatable)");
    sub->add_option("--epsilon", flags.epsilon, "noise level or `auto`");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimator table");
  add_common(simulate, true);

  CLI::App* elbow = app.add_subcommand("elbow", "support size vs delta curve (CSV)");
  add_common(elbow, true);

  CLI::App* verify = app.add_subcommand("verify", "check theorem bounds on generated data");
  add_common(verify, true);

  CLI::App* portfolio = app.add_subcommand("portfolio", "index replication on a price panel");
  add_common(portfolio, true);
  portfolio->add_option("--theta-set", flags.theta_set, "all|nonneg|l1ball:a|simplex[:nonneg]");

  CLI::App* estimate = app.add_subcommand("estimate", "one-shot estimate on Z.csv / y.csv");
  add_common(estimate, false);
  estimate->add_option("--Z", flags.z_path, "design matrix CSV")->required();
  estimate->add_option("--y", flags.y_path, "response vector CSV")->required();
  estimate->add_option("--variant", flags.variant, "mu1|mu2|dantzig|lasso")->required();
  estimate->add_option("--theta-set", flags.theta_set, "all|nonneg|l1ball:a|simplex[:nonneg]");
  estimate->add_option("--threshold", flags.threshold,
                       "none|fixed:t|b1:a:alpha|b2:alpha|star:alpha");
  estimate->add_option("--sigma", flags.sigma, "noise level for the lasso Cp rule")
      ->each([&flags](const std::string&) { flags.sigma_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags);
    if (elbow->parsed()) return cmd_elbow(flags);
    if (verify->parsed()) return cmd_verify(flags);
    if (portfolio->parsed()) return cmd_portfolio(flags);
    if (estimate->parsed()) return cmd_estimate(flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
