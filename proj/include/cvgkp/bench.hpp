#pragma once
// Reproducibility harness: fault-tolerance threshold and channel-capacity
// anchors of the GKP error model, the analog-vs-binary repetition-code
// Monte Carlo, flat key=value experiment configs with per-experiment
// schemas, and deterministic CSV reports.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cvgkp/cluster.hpp"
#include "cvgkp/fock.hpp"
#include "cvgkp/gaussian.hpp"
#include "cvgkp/gkp.hpp"
#include "cvgkp/grid.hpp"
#include "cvgkp/noise.hpp"
#include "cvgkp/rng.hpp"

namespace cvgkp {

inline const char kToolVersion[] = "1.0.0";

// Failure probability of an error-corrected CZ gate: the two q corrections
// see seven units of the input peak variance, the two p corrections five,
// and the gate fails when any of the four misidentifies its bin.
inline double p_err_cz(double sigma2_in) {
  if (!(sigma2_in >= 0.0))
    throw std::invalid_argument("p_err_cz: variance must be nonnegative");
  if (sigma2_in == 0.0) return 0.0;
  // 1 - (1-p7)^2 (1-p5)^2 in log space, so the far tail does not cancel.
  const double log_ok =
      2.0 * (std::log1p(-p_fail(7.0 * sigma2_in)) + std::log1p(-p_fail(5.0 * sigma2_in)));
  return -std::expm1(log_ok);
}

struct ThresholdResult {
  double sigma2_star;   // largest input peak variance meeting the budget
  double squeezing_db;  // -10 log10(2 sigma2_star)
  double p_ft_used;
};

// Invert the monotone p_err_cz at the failure budget by bisection, to
// relative 1e-12 on the variance.
inline ThresholdResult solve_threshold(double p_ft) {
  if (!(p_ft > 0.0 && p_ft < 1.0))
    throw std::invalid_argument("solve_threshold: budget must lie in (0, 1)");
  double lo = 0.0, hi = 1.0;
  while (p_err_cz(hi) < p_ft) hi *= 2.0;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (p_err_cz(mid) < p_ft ? lo : hi) = mid;
  }
  const double s2 = 0.5 * (lo + hi);
  return {s2, -10.0 * std::log10(2.0 * s2), p_ft};
}

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binary_entropy: probability outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Hashing-bound rate of the displacement channel seen by a GKP qubit:
// positive exactly when the misidentification probability stays below the
// entropy root.
inline double hashing_rate(double sigma) {
  return 1.0 - 2.0 * binary_entropy(p_fail(sigma * sigma));
}

struct CapacityPoint {
  double p_critical;      // error rate where the hashing rate crosses zero
  double sigma_critical;  // noise level reaching that error rate
};

inline CapacityPoint capacity_point() {
  double lo = 1e-12, hi = 0.5;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (binary_entropy(mid) < 0.5 ? lo : hi) = mid;
  }
  const double p_crit = 0.5 * (lo + hi);
  double slo = 1e-3, shi = 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (slo + shi);
    (p_fail(mid * mid) < p_crit ? slo : shi) = mid;
  }
  return {p_crit, 0.5 * (slo + shi)};
}

// Majority vote on the binned bits of the three-qubit repetition code.
inline int binary_decode(const std::array<int, 3>& bits) {
  return bits[0] + bits[1] + bits[2] >= 2 ? 1 : 0;
}

// Pick the codeword (000 or 111) whose flip pattern relative to the binned
// bits maximizes the product of per-mode likelihoods; ties resolve to 0.
inline int analog_decode(const std::array<int, 3>& bits, const std::array<double, 3>& devs,
                         double sigma2) {
  double like0 = 1.0, like1 = 1.0;
  for (int i = 0; i < 3; ++i) {
    const auto [keep, flip] = analog_likelihoods(devs[i], sigma2);
    like0 *= bits[i] == 0 ? keep : flip;
    like1 *= bits[i] == 1 ? keep : flip;
  }
  return like1 > like0 ? 1 : 0;
}

// Reference decoder: scores all eight flip patterns, keeps the
// codeword-consistent ones, and replaces the two-peak likelihood with the
// full lattice sum. Slow; used to audit analog_decode.
inline int ml_oracle_decode(const std::array<int, 3>& bits, const std::array<double, 3>& devs,
                            double sigma2) {
  const auto lattice_likelihood = [sigma2](double dev, int flip) {
    double sum = 0.0;
    for (int k = -40; k <= 40; ++k) {
      const double u = dev - (2 * k + flip) * kGkpSpacing;
      sum += std::exp(-u * u / (2.0 * sigma2));
    }
    return sum;
  };
  double best[2] = {0.0, 0.0};
  for (int pattern = 0; pattern < 8; ++pattern) {
    const std::array<int, 3> flips = {pattern & 1, (pattern >> 1) & 1, (pattern >> 2) & 1};
    const int word = bits[0] ^ flips[0];
    if ((bits[1] ^ flips[1]) != word || (bits[2] ^ flips[2]) != word) continue;
    double prod = 1.0;
    for (int i = 0; i < 3; ++i) prod *= lattice_likelihood(devs[i], flips[i]);
    best[word] = std::max(best[word], prod);
  }
  return best[1] > best[0] ? 1 : 0;
}

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval, 95% unless another z is given.
inline WilsonInterval wilson_interval(std::int64_t hits, std::int64_t trials, double z = 1.96) {
  if (trials < 1 || hits < 0 || hits > trials)
    throw std::invalid_argument("wilson_interval: bad counts");
  const double n = double(trials), ph = double(hits) / n, z2 = z * z;
  const double center = (ph + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half =
      z / (1.0 + z2 / n) * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace detail {

// Deterministic trial-parallel driver: trials are tallied in fixed-size
// chunks, workers pull chunk indices from a shared counter, and the chunk
// tallies combine in index order, so the result depends on neither the
// thread count nor the schedule.
template <class Tally, class PerTrial>
Tally run_trials(std::int64_t trials, const PerTrial& per_trial) {
  constexpr std::int64_t kChunk = std::int64_t(1) << 16;
  const std::int64_t n_chunks = (trials + kChunk - 1) / kChunk;
  const std::size_t n_parts = std::size_t(n_chunks);
  std::vector<Tally> parts(n_parts);
  const int hw = std::clamp(int(std::thread::hardware_concurrency()), 1, 8);
  const int n_threads = int(std::min<std::int64_t>(hw, n_chunks));
  std::atomic<std::int64_t> next{0};
  const auto worker = [&] {
    for (std::int64_t c; (c = next.fetch_add(1)) < n_chunks;) {
      const std::int64_t lo = c * kChunk, hi = std::min(trials, lo + kChunk);
      for (std::int64_t t = lo; t < hi; ++t) per_trial(t, parts[std::size_t(c)]);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Tally total{};
  for (const Tally& p : parts) total.combine(p);
  return total;
}

}  // namespace detail

struct DecodingComparison {
  std::int64_t trials = 0;
  std::int64_t binary_errors = 0;
  std::int64_t analog_errors = 0;
  std::int64_t binary_only = 0;  // trials only the binary decoder got wrong
  std::int64_t analog_only = 0;  // trials only the analog decoder got wrong
  double p_binary = 0.0;
  double p_analog = 0.0;
  WilsonInterval binary_ci, analog_ci;

  // Paired-difference standard error and improvement z-score, both from the
  // discordant counts alone.
  double diff_se() const {
    return trials > 0 ? std::sqrt(double(binary_only + analog_only)) / double(trials) : 0.0;
  }
  double improvement_z() const {
    const double d = double(binary_only + analog_only);
    return d > 0.0 ? double(binary_only - analog_only) / std::sqrt(d) : 0.0;
  }
};

// Repetition-code Monte Carlo: each trial draws three lattice deviations
// from its own counter stream, bins them, and decodes both ways.
inline DecodingComparison analog_vs_binary_mc(double sigma, std::int64_t trials,
                                              std::uint64_t seed) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("analog_vs_binary_mc: sigma must be positive");
  if (trials < 1) throw std::invalid_argument("analog_vs_binary_mc: need at least one trial");
  const double sigma2 = sigma * sigma;
  struct Tally {
    std::int64_t binary = 0, analog = 0, bin_only = 0, an_only = 0;
    void combine(const Tally& o) {
      binary += o.binary;
      analog += o.analog;
      bin_only += o.bin_only;
      an_only += o.an_only;
    }
  };
  const Tally t = detail::run_trials<Tally>(trials, [&](std::int64_t trial, Tally& tally) {
    CounterRng rng(seed, std::uint64_t(trial));
    std::array<int, 3> bits;
    std::array<double, 3> devs;
    for (int i = 0; i < 3; ++i) {
      const BinnedOutcome o = bin_outcome(sigma * rng.gauss());
      bits[i] = o.bit;
      devs[i] = o.deviation;
    }
    const int b = binary_decode(bits);
    const int a = analog_decode(bits, devs, sigma2);
    tally.binary += b;
    tally.analog += a;
    tally.bin_only += int(b == 1 && a == 0);
    tally.an_only += int(a == 1 && b == 0);
  });
  DecodingComparison r;
  r.trials = trials;
  r.binary_errors = t.binary;
  r.analog_errors = t.analog;
  r.binary_only = t.bin_only;
  r.analog_only = t.an_only;
  r.p_binary = double(t.binary) / double(trials);
  r.p_analog = double(t.analog) / double(trials);
  r.binary_ci = wilson_interval(t.binary, trials);
  r.analog_ci = wilson_interval(t.analog, trials);
  return r;
}

// Replays the sampling of analog_vs_binary_mc and counts disagreements
// between the production decoder and the lattice-sum oracle.
inline std::int64_t audit_against_oracle(double sigma, std::int64_t trials, std::uint64_t seed) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("audit_against_oracle: sigma must be positive");
  if (trials < 1) throw std::invalid_argument("audit_against_oracle: need at least one trial");
  const double sigma2 = sigma * sigma;
  std::int64_t mismatches = 0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    CounterRng rng(seed, std::uint64_t(trial));
    std::array<int, 3> bits;
    std::array<double, 3> devs;
    for (int i = 0; i < 3; ++i) {
      const BinnedOutcome o = bin_outcome(sigma * rng.gauss());
      bits[i] = o.bit;
      devs[i] = o.deviation;
    }
    mismatches += int(analog_decode(bits, devs, sigma2) != ml_oracle_decode(bits, devs, sigma2));
  }
  return mismatches;
}

struct SqecMcResult {
  std::int64_t trials = 0;
  double flip_rate = 0.0;
  double var_q = 0.0;  // second moment of the output q deviation
  double var_p = 0.0;
};

// Trajectory Monte Carlo of one q-quadrature correction step on freshly
// drawn data and ancilla deviations; one counter stream per trial.
inline SqecMcResult sqec_mc(double sigma2_data, double sigma2_anc, std::int64_t trials,
                            std::uint64_t seed) {
  if (!(sigma2_data > 0.0) || !(sigma2_anc > 0.0))
    throw std::invalid_argument("sqec_mc: variances must be positive");
  if (trials < 1) throw std::invalid_argument("sqec_mc: need at least one trial");
  const GkpPeakModel anc = gkp_model(sigma2_anc);
  const double sd = std::sqrt(sigma2_data);
  struct Tally {
    std::int64_t flips = 0;
    double sum_q2 = 0.0, sum_p2 = 0.0;
    void combine(const Tally& o) {
      flips += o.flips;
      sum_q2 += o.sum_q2;
      sum_p2 += o.sum_p2;
    }
  };
  const Tally t = detail::run_trials<Tally>(trials, [&](std::int64_t trial, Tally& tally) {
    CounterRng rng(seed, std::uint64_t(trial));
    const double dq = sd * rng.gauss(), dp = sd * rng.gauss();
    const SqecTrajectoryResult r = sqec_trajectory_step(dq, dp, anc, Quadrature::q, rng);
    tally.flips += int(r.flip);
    tally.sum_q2 += r.dev_q * r.dev_q;
    tally.sum_p2 += r.dev_p * r.dev_p;
  });
  return {trials, double(t.flips) / double(trials), t.sum_q2 / double(trials),
          t.sum_p2 / double(trials)};
}

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  threshold,
  pfail_curve,
  capacity,
  analog_vs_binary,
  sqec_chain,
  hrm_sweep,
  cluster_verify,
  decomp_check,
  breed,
  cubic,
};

inline const std::vector<std::pair<std::string, Experiment>>& experiment_table() {
  static const std::vector<std::pair<std::string, Experiment>> table = {
      {"threshold", Experiment::threshold},
      {"pfail_curve", Experiment::pfail_curve},
      {"capacity", Experiment::capacity},
      {"analog_vs_binary", Experiment::analog_vs_binary},
      {"sqec_chain", Experiment::sqec_chain},
      {"hrm_sweep", Experiment::hrm_sweep},
      {"cluster_verify", Experiment::cluster_verify},
      {"decomp_check", Experiment::decomp_check},
      {"breed", Experiment::breed},
      {"cubic", Experiment::cubic},
  };
  return table;
}

inline std::string experiment_name(Experiment e) {
  for (const auto& [name, value] : experiment_table())
    if (value == e) return name;
  throw std::logic_error("experiment_name: unknown enum value");
}

inline Experiment experiment_from_name(const std::string& name) {
  std::string known;
  for (const auto& [candidate, value] : experiment_table()) {
    if (candidate == name) return value;
    known += (known.empty() ? "" : ", ") + candidate;
  }
  throw SchemaError("unknown experiment '" + name + "' (expected one of: " + known + ")");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::threshold;
  std::map<std::string, double> parameters;
  std::uint64_t seed = 0;
  std::int64_t trials = 1;
  std::string output_path;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  const char* first = value.c_str();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(first, value.c_str() + value.size(), v);
  if (ec != std::errc() || end != value.c_str() + value.size() || !std::isfinite(v))
    throw SchemaError("key '" + key + "' is not a finite number: " + value);
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(value.c_str(), value.c_str() + value.size(), v);
  if (ec != std::errc() || end != value.c_str() + value.size())
    throw SchemaError("key '" + key + "' is not an unsigned integer: " + value);
  return v;
}

inline std::int64_t parse_i64(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const auto [end, ec] = std::from_chars(value.c_str(), value.c_str() + value.size(), v);
  if (ec != std::errc() || end != value.c_str() + value.size())
    throw SchemaError("key '" + key + "' is not an integer: " + value);
  return v;
}

}  // namespace detail

// Flat key = value text: one pair per line; blank lines and lines whose
// first character is '#' are ignored.
inline std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw SchemaError("config line " + std::to_string(line_no) + " is not key=value: " + t);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw SchemaError("config line " + std::to_string(line_no) + " has an empty key or value");
    if (!kv.emplace(key, value).second) throw SchemaError("duplicate config key '" + key + "'");
  }
  return kv;
}

// Schema pass: required keys must be present, defaults fill the optional
// ones, every value is range-checked, unknown keys are rejected. The
// validated parameter map replaces cfg.parameters.
inline void validate_config(ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw SchemaError("key 'trials' must be at least 1");
  std::map<std::string, double> in = cfg.parameters;
  std::map<std::string, double> out;
  const auto take = [&](const char* key) -> std::optional<double> {
    const auto it = in.find(key);
    if (it == in.end()) return std::nullopt;
    const double v = it->second;
    in.erase(it);
    return v;
  };
  const auto require = [&](const char* key) {
    const auto v = take(key);
    if (!v) throw SchemaError(std::string("missing required key '") + key + "'");
    out[key] = *v;
    return *v;
  };
  const auto fallback = [&](const char* key, double def) {
    out[key] = take(key).value_or(def);
    return out[key];
  };
  const auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw SchemaError(std::string("key '") + key + "' " + what);
  };
  const auto integral = [&](const char* key) {
    check(out[key] == std::floor(out[key]), key, "must be an integer");
  };
  const auto odd_grid = [&] {
    fallback("n", 481.0);
    integral("n");
    check(out["n"] >= 33 && out["n"] <= 4097 && std::int64_t(out["n"]) % 2 == 1, "n",
          "must be odd and within [33, 4097]");
    check(fallback("dx", 0.05) > 0.0, "dx", "must be positive");
  };

  switch (cfg.experiment) {
    case Experiment::threshold:
      check(require("p_ft") > 0.0 && out["p_ft"] < 1.0, "p_ft", "must lie in (0, 1)");
      break;
    case Experiment::pfail_curve:
      check(fallback("sigma_min", 0.1) > 0.0, "sigma_min", "must be positive");
      check(fallback("sigma_max", 0.6) >= out["sigma_min"], "sigma_max",
            "must be >= sigma_min");
      check(fallback("sigma_step", 0.05) > 0.0, "sigma_step", "must be positive");
      break;
    case Experiment::capacity:
      break;
    case Experiment::analog_vs_binary:
      check(require("sigma") > 0.0, "sigma", "must be positive");
      break;
    case Experiment::sqec_chain:
      check(require("sigma2_data") > 0.0, "sigma2_data", "must be positive");
      check(require("sigma2_anc") > 0.0, "sigma2_anc", "must be positive");
      break;
    case Experiment::hrm_sweep:
      check(require("sigma2") > 0.0, "sigma2", "must be positive");
      check(fallback("zeta_min", 0.0) >= 0.0, "zeta_min", "must be nonnegative");
      check(fallback("zeta_max", 0.8) >= out["zeta_min"], "zeta_max", "must be >= zeta_min");
      check(out["zeta_max"] < kGkpSpacing / 2.0, "zeta_max",
            "must stay below half the lattice spacing");
      check(fallback("zeta_step", 0.1) > 0.0, "zeta_step", "must be positive");
      break;
    case Experiment::cluster_verify:
      require("nodes");
      integral("nodes");
      check(out["nodes"] >= 1 && out["nodes"] <= 12, "nodes", "must lie in [1, 12]");
      check(require("r") > 0.0, "r", "must be positive");
      check(fallback("edge_prob", 0.5) >= 0.0 && out["edge_prob"] <= 1.0, "edge_prob",
            "must lie in [0, 1]");
      break;
    case Experiment::decomp_check:
      check(fallback("t", 0.1) > 0.0, "t", "must be positive");
      fallback("dim", 40.0);
      integral("dim");
      check(out["dim"] >= 16 && out["dim"] <= 128, "dim", "must lie in [16, 128]");
      break;
    case Experiment::breed:
      check(require("alpha") > 0.0, "alpha", "must be positive");
      check(require("r") > 0.0, "r", "must be positive");
      require("rounds");
      integral("rounds");
      check(out["rounds"] >= 0 && out["rounds"] <= 6, "rounds", "must lie in [0, 6]");
      check(fallback("window", 0.05) > 0.0, "window", "must be positive");
      odd_grid();
      break;
    case Experiment::cubic:
      require("gamma");
      require("resource_db");
      odd_grid();
      break;
  }
  if (!in.empty())
    throw SchemaError("key '" + in.begin()->first + "' is not part of the " +
                      experiment_name(cfg.experiment) + " schema");
  cfg.parameters = std::move(out);
}

// Assemble and validate a config from an experiment name and the pairs of a
// config file. Reserved keys: experiment (must match if present), seed,
// trials, out; everything else must be numeric and pass the schema.
inline ExperimentConfig make_config(const std::string& experiment,
                                    std::map<std::string, std::string> kv) {
  ExperimentConfig cfg;
  cfg.experiment = experiment_from_name(experiment);
  if (const auto it = kv.find("experiment"); it != kv.end()) {
    if (it->second != experiment)
      throw SchemaError("config names experiment '" + it->second + "' but '" + experiment +
                        "' was requested");
    kv.erase(it);
  }
  if (const auto it = kv.find("seed"); it != kv.end()) {
    cfg.seed = detail::parse_u64("seed", it->second);
    kv.erase(it);
  }
  if (const auto it = kv.find("trials"); it != kv.end()) {
    cfg.trials = detail::parse_i64("trials", it->second);
    kv.erase(it);
  }
  if (const auto it = kv.find("out"); it != kv.end()) {
    cfg.output_path = it->second;
    kv.erase(it);
  }
  for (const auto& [key, value] : kv) cfg.parameters[key] = detail::parse_double(key, value);
  validate_config(cfg);
  return cfg;
}

namespace detail {

// Shortest round-trip decimal form; locale-independent.
inline std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::vector<std::string> num_row(std::initializer_list<double> values) {
  std::vector<std::string> row;
  for (const double v : values) row.push_back(format_double(v));
  return row;
}

inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

}  // namespace detail

// Hash of the canonical config serialization (sorted keys, shortest
// round-trip numbers). The output path is excluded: it does not affect the
// report's content.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::string s = "experiment=" + experiment_name(cfg.experiment) + "\n";
  s += "seed=" + std::to_string(cfg.seed) + "\n";
  s += "trials=" + std::to_string(cfg.trials) + "\n";
  for (const auto& [key, value] : cfg.parameters)
    s += key + "=" + detail::format_double(value) + "\n";
  const std::uint64_t h = detail::fnv1a64(s);
  std::string hex(16, '0');
  for (int i = 0; i < 16; ++i) hex[15 - i] = "0123456789abcdef"[(h >> (4 * i)) & 0xf];
  return hex;
}

struct CsvReport {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Compute one experiment's rows. Resolution limits and other numerical
// failures surface as exceptions from the underlying modules.
inline CsvReport build_report(const ExperimentConfig& cfg) {
  const auto get = [&](const char* key) { return cfg.parameters.at(key); };
  CsvReport rep;
  switch (cfg.experiment) {
    case Experiment::threshold: {
      const ThresholdResult r = solve_threshold(get("p_ft"));
      rep.columns = {"p_ft", "sigma2_star", "squeezing_db"};
      rep.rows.push_back(detail::num_row({r.p_ft_used, r.sigma2_star, r.squeezing_db}));
      break;
    }
    case Experiment::pfail_curve: {
      rep.columns = {"sigma", "p_fail"};
      const double mn = get("sigma_min"), mx = get("sigma_max"), st = get("sigma_step");
      const int n_rows = 1 + int(std::floor((mx - mn) / st + 1e-9));
      for (int i = 0; i < n_rows; ++i) {
        const double sigma = mn + i * st;
        rep.rows.push_back(detail::num_row({sigma, p_fail(sigma * sigma)}));
      }
      break;
    }
    case Experiment::capacity: {
      const CapacityPoint c = capacity_point();
      rep.columns = {"p_critical", "sigma_critical"};
      rep.rows.push_back(detail::num_row({c.p_critical, c.sigma_critical}));
      break;
    }
    case Experiment::analog_vs_binary: {
      const double sigma = get("sigma");
      const DecodingComparison r = analog_vs_binary_mc(sigma, cfg.trials, cfg.seed);
      rep.columns = {"sigma",
                     "trials",
                     "binary_errors",
                     "analog_errors",
                     "p_binary",
                     "p_analog",
                     "binary_wilson_lo",
                     "binary_wilson_hi",
                     "analog_wilson_lo",
                     "analog_wilson_hi",
                     "improvement_z"};
      std::vector<std::string> row = {detail::format_double(sigma), std::to_string(r.trials),
                                      std::to_string(r.binary_errors),
                                      std::to_string(r.analog_errors)};
      for (const double v : {r.p_binary, r.p_analog, r.binary_ci.lo, r.binary_ci.hi,
                             r.analog_ci.lo, r.analog_ci.hi, r.improvement_z()})
        row.push_back(detail::format_double(v));
      rep.rows.push_back(std::move(row));
      break;
    }
    case Experiment::sqec_chain: {
      const double s2d = get("sigma2_data"), s2a = get("sigma2_anc");
      const SqecMcResult mc = sqec_mc(s2d, s2a, cfg.trials, cfg.seed);
      const auto [model, flip] = sqec_step(gkp_model(s2d), gkp_model(s2a), Quadrature::q);
      const double flip_se = std::sqrt(flip * (1.0 - flip) / double(cfg.trials));
      rep.columns = {"sigma2_data", "sigma2_anc", "trials",          "flip_analytic",
                     "flip_mc",     "flip_se",    "var_q_analytic",  "var_q_mc",
                     "var_p_analytic", "var_p_mc"};
      std::vector<std::string> row = {detail::format_double(s2d), detail::format_double(s2a),
                                      std::to_string(mc.trials)};
      for (const double v :
           {flip, mc.flip_rate, flip_se, model.var_q, mc.var_q, model.var_p, mc.var_p})
        row.push_back(detail::format_double(v));
      rep.rows.push_back(std::move(row));
      break;
    }
    case Experiment::hrm_sweep: {
      rep.columns = {"zeta", "p_accept", "p_err_given_accept"};
      const double s2 = get("sigma2"), mn = get("zeta_min"), mx = get("zeta_max"),
                   st = get("zeta_step");
      const int n_rows = 1 + int(std::floor((mx - mn) / st + 1e-9));
      for (int i = 0; i < n_rows; ++i) {
        const double zeta = mn + i * st;
        const HrmStats h = hrm_stats(s2, zeta);
        rep.rows.push_back(detail::num_row({zeta, h.p_accept, h.p_err_given_accept}));
      }
      break;
    }
    case Experiment::cluster_verify: {
      const int n = int(get("nodes"));
      const double r = get("r"), edge_prob = get("edge_prob");
      ClusterGraph g;
      g.n = n;
      CounterRng rng(cfg.seed, 0);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (rng.uniform01() <= edge_prob) g.add_edge(i, j);
      const GaussianState state = build_canonical_cluster(g, r);
      const Eigen::MatrixXd m = observable_second_moments(state, nullifier_matrix(g));
      rep.columns = {"node", "variance", "target"};
      const double target = 0.5 * std::exp(-2.0 * r);
      for (int i = 0; i < n; ++i)
        rep.rows.push_back(
            {std::to_string(i), detail::format_double(m(i, i)), detail::format_double(target)});
      break;
    }
    case Experiment::decomp_check: {
      const int dim = int(get("dim"));
      const double t = get("t");
      const auto [q, p] = quadrature_matrices(dim);
      const Eigen::MatrixXcd q2 = q.matrix * q.matrix;
      const Eigen::MatrixXcd p2 = p.matrix * p.matrix;
      rep.columns = {"steps", "symmetric_error", "commutator_error"};
      for (const int n : {4, 8, 16, 32, 64}) {
        const TrotterErrors e = trotter_product_error(q2, p2, t, n);
        rep.rows.push_back({std::to_string(n), detail::format_double(e.symmetric),
                            detail::format_double(e.commutator)});
      }
      break;
    }
    case Experiment::breed: {
      const BreedingResult r = breed_gkp(get("alpha"), get("r"), int(get("rounds")),
                                         get("window"), int(get("n")), get("dx"));
      rep.columns = {"round", "acceptance", "fidelity", "kappa2", "delta2"};
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const BreedingRound& round = r.trace[i];
        rep.rows.push_back({std::to_string(i + 1), detail::format_double(round.acceptance),
                            detail::format_double(round.fidelity),
                            detail::format_double(round.fitted_kappa2),
                            detail::format_double(round.fitted_delta2)});
      }
      break;
    }
    case Experiment::cubic: {
      const GridWavefunction input =
          gaussian_packet(int(get("n")), get("dx"), 0.0, 0.0, 0.5);
      CounterRng rng(cfg.seed, 0);
      const CubicTeleportResult r =
          cubic_phase_teleport(input, get("gamma"), get("resource_db"), rng);
      rep.columns = {"gamma", "resource_db", "outcome", "fidelity"};
      rep.rows.push_back(
          detail::num_row({get("gamma"), get("resource_db"), r.outcome, r.fidelity}));
      break;
    }
  }
  return rep;
}

// Full report text: one provenance comment, the header row, then data rows.
// Identical config and seed give identical bytes.
inline std::string render_csv(const ExperimentConfig& cfg) {
  const CsvReport rep = build_report(cfg);
  std::string out = "# cvgkp " + std::string(kToolVersion) +
                    " experiment=" + experiment_name(cfg.experiment) +
                    " seed=" + std::to_string(cfg.seed) +
                    " trials=" + std::to_string(cfg.trials) + " config=" + config_hash(cfg) +
                    "\n";
  out += detail::join_csv(rep.columns) + "\n";
  for (const auto& row : rep.rows) out += detail::join_csv(row) + "\n";
  return out;
}

inline void run_experiment(const ExperimentConfig& cfg, std::ostream& os) {
  os << render_csv(cfg);
}

// Write the report to cfg.output_path.
inline void run_experiment(const ExperimentConfig& cfg) {
  if (cfg.output_path.empty())
    throw std::invalid_argument("run_experiment: config has no output path");
  const std::string csv = render_csv(cfg);
  std::ofstream f(cfg.output_path, std::ios::binary);
  if (!f) throw std::runtime_error("run_experiment: cannot open '" + cfg.output_path + "'");
  f << csv;
  f.flush();
  if (!f) throw std::runtime_error("run_experiment: write to '" + cfg.output_path + "' failed");
}

}  // namespace cvgkp
