#include "sparsebandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include <json.hpp>

#include "sparsebandit/instances.hpp"
#include "sparsebandit/policies.hpp"
#include "sparsebandit/rng.hpp"

namespace sparsebandit {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --- config parsing --------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(std::string("config: unknown field \"") + it.key() + "\" in " +
                                  where);
    }
  }
}

double jnum(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) {
    throw std::invalid_argument(std::string("config: field \"") + key + "\" must be a number");
  }
  return it->get<double>();
}

std::size_t juint(const json& obj, const char* key, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned()) {
    throw std::invalid_argument(std::string("config: field \"") + key +
                                "\" must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

std::uint64_t ju64(const json& obj, const char* key, std::uint64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned()) {
    throw std::invalid_argument(std::string("config: field \"") + key +
                                "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

bool jbool(const json& obj, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) {
    throw std::invalid_argument(std::string("config: field \"") + key + "\" must be a boolean");
  }
  return it->get<bool>();
}

std::string jstr(const json& obj, const char* key, const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) {
    throw std::invalid_argument(std::string("config: field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

InstanceKind parse_kind(const std::string& kind) {
  if (kind == "hard") return InstanceKind::kHard;
  if (kind == "hard_subsampled") return InstanceKind::kHardSubsampled;
  if (kind == "random") return InstanceKind::kRandom;
  throw std::invalid_argument("config: unknown instance kind \"" + kind +
                              "\" (expected hard, hard_subsampled or random)");
}

HardInstanceSpec to_spec(const InstanceConfig& ic, std::size_t horizon) {
  HardInstanceSpec spec;
  spec.d = ic.dim;
  spec.s = ic.sparsity;
  spec.kappa = ic.kappa;
  spec.epsilon = ic.epsilon > 0 ? ic.epsilon : default_epsilon(ic.kappa, ic.sparsity, horizon);
  spec.n_low_regret = ic.n_low_regret;
  spec.n_informative = ic.n_informative;
  return spec;
}

// --- per-horizon shared state ----------------------------------------------

struct HorizonData {
  ActionSet actions;
  SparseInstance instance;
  std::vector<std::size_t> informative;
  DesignDistribution design;
  DesignCertificate cert;
  double epsilon = 0.0;
  double r_max = 0.0;
  bool has_design = false;
};

HorizonData make_random_instance(const InstanceConfig& ic, RngStream& rng) {
  std::vector<double> theta(ic.dim, 0.0);
  std::vector<std::size_t> idx(ic.dim);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t j = 0; j < ic.sparsity; ++j) {
    std::size_t k = j + static_cast<std::size_t>(rng.uniform_int(ic.dim - j));
    std::swap(idx[j], idx[k]);
  }
  for (std::size_t j = 0; j < ic.sparsity; ++j) theta[idx[j]] = ic.signal * rng.sign();

  std::vector<Action> arms;
  arms.reserve(ic.num_actions);
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < ic.num_actions; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 1000) {
        throw std::runtime_error("random instance: could not draw distinct actions");
      }
      std::vector<double> features(ic.dim);
      for (double& f : features) f = rng.uniform(-1.0, 1.0);
      if (seen.insert(features).second) {
        arms.push_back(Action{std::move(features)});
        break;
      }
    }
  }

  SparseInstance instance;
  instance.theta = std::move(theta);
  instance.sparsity_bound = ic.sparsity;
  instance.noise_std = ic.noise_std;
  instance.validate();
  return HorizonData{ActionSet(std::move(arms), ic.dim), std::move(instance), {}, {}, {}, 0.0,
                     0.0,  false};
}

// The action set never depends on the horizon (for hard kinds the tuned
// epsilon only enters theta), so every horizon replays the same instance
// stream and draws the same actions; run_experiment exploits this by solving
// the design once and sharing it.
HorizonData build_horizon(const ExperimentConfig& cfg, std::size_t h_idx, bool need_design) {
  const InstanceConfig& ic = cfg.instance;
  const std::size_t horizon = cfg.horizons[h_idx];
  RngStream rng(ic.instance_seed, stream_label("instance"));

  HorizonData data = [&]() -> HorizonData {
    switch (ic.kind) {
      case InstanceKind::kHard: {
        HardInstanceSpec spec = to_spec(ic, horizon);
        HardInstance hi = hard_instance(spec);
        return HorizonData{std::move(hi.actions), std::move(hi.instance),
                           std::move(hi.informative), {}, {}, spec.epsilon, 0.0, false};
      }
      case InstanceKind::kHardSubsampled: {
        HardInstanceSpec spec = to_spec(ic, horizon);
        HardInstance hi = subsample_hard_instance(spec, rng);
        return HorizonData{std::move(hi.actions), std::move(hi.instance),
                           std::move(hi.informative), {}, {}, spec.epsilon, 0.0, false};
      }
      case InstanceKind::kRandom:
        return make_random_instance(ic, rng);
    }
    throw std::logic_error("build_horizon: unreachable");
  }();

  data.instance.noise_std = ic.noise_std;
  data.r_max = std::max(optimal_action(data.instance, data.actions).second, 1e-12);
  if (need_design) {
    auto [design, cert] = solve_e_optimal(data.actions, cfg.design_tol);
    data.design = std::move(design);
    data.cert = cert;
    data.has_design = true;
  } else {
    data.design.dim = data.actions.dim();
  }
  return data;
}

// --- one seeded run --------------------------------------------------------

RunRecord execute_run(const ExperimentConfig& cfg, const HorizonData& hd, std::size_t p_idx,
                      std::size_t h_idx, std::size_t rep) {
  const PolicyConfig& pc = cfg.policies[p_idx];
  const std::size_t horizon = cfg.horizons[h_idx];

  RunRecord rec;
  rec.policy = pc.label;
  rec.horizon = horizon;
  rec.seed = cfg.base_seed + rep;
  RngStream rng(rec.seed, stream_label("run", p_idx, h_idx));

  RegretTrajectory traj;
  if (pc.name == "estc") {
    EstcConfig ec;
    ec.horizon = horizon;
    ec.sparsity = pc.sparsity;
    ec.r_max = pc.r_max > 0 ? pc.r_max : hd.r_max;
    ec.c_min = hd.cert.objective;
    ec.explicit_n1 = pc.explicit_n1;
    EstcResult res = run_estc(hd.actions, hd.instance, ec, hd.design, rng);
    rec.exploration_rounds = res.n1;
    rec.kkt_residual = res.fit.kkt_residual;
    rec.lasso_converged = res.fit.converged;
    rec.support = res.fit.support;
    traj = std::move(res.traj);
  } else if (pc.name == "rpe") {
    RpeConfig rc;
    rc.horizon = horizon;
    rc.sparsity = pc.sparsity > 0 ? pc.sparsity : hd.instance.sparsity_bound;
    rc.min_signal = pc.min_signal;
    rc.c1_constant = pc.c1_constant;
    rc.elimination_delta = pc.elimination_delta;
    rc.c_min = hd.cert.objective;
    rc.explicit_n2 = pc.explicit_n2;
    RpeResult res = run_restricted_pe(hd.actions, hd.instance, rc, hd.design, rng);
    rec.exploration_rounds = res.n2;
    rec.kkt_residual = res.fit.kkt_residual;
    rec.lasso_converged = res.fit.converged;
    rec.support = res.selected_support;
    rec.support_fallback = res.support_fallback;
    traj = std::move(res.traj);
  } else if (pc.name == "phased") {
    PhasedEliminationResult res =
        run_phased_elimination(hd.actions, hd.instance, horizon, pc.elimination_delta, rng);
    traj = std::move(res.traj);
  } else if (pc.name == "linucb") {
    LinUcbResult res = run_linucb(hd.actions, hd.instance, horizon, pc.regularization,
                                  pc.confidence_scale, rng);
    traj = std::move(res.traj);
  } else {
    throw std::logic_error("execute_run: unknown policy " + pc.name);
  }

  traj.recount_informative(hd.informative);
  rec.informative_pulls = traj.informative_pulls;
  rec.cumulative = std::move(traj.cumulative);
  rec.final_regret = rec.cumulative.empty() ? 0.0 : rec.cumulative.back();
  return rec;
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("SPARSE_BANDIT_THREADS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void write_file(const std::string& path, const std::string& contents, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot open " + path);
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error(std::string(what) + ": write failed for " + path);
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// --- small CSV reader ------------------------------------------------------

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_double(const std::string& text, const char* what) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": malformed number \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw std::invalid_argument(std::string(what) + ": malformed number \"" + text + "\"");
  }
  return value;
}

std::size_t parse_size(const std::string& text, const char* what) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": malformed integer \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw std::invalid_argument(std::string(what) + ": malformed integer \"" + text + "\"");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

// --- config ----------------------------------------------------------------

void InstanceConfig::validate() const {
  if (noise_std < 0) throw std::invalid_argument("config: instance noise_std must be >= 0");
  switch (kind) {
    case InstanceKind::kHard:
    case InstanceKind::kHardSubsampled:
      if (sparsity < 2) throw std::invalid_argument("config: hard instances need sparsity >= 2");
      if (dim < sparsity + 1) {
        throw std::invalid_argument("config: hard instances need dim >= sparsity + 1");
      }
      if (!(kappa > 0 && kappa <= 1)) {
        throw std::invalid_argument("config: kappa must lie in (0, 1]");
      }
      if (epsilon < 0) throw std::invalid_argument("config: epsilon must be >= 0");
      if (kind == InstanceKind::kHardSubsampled && (n_low_regret == 0 || n_informative == 0)) {
        throw std::invalid_argument(
            "config: hard_subsampled needs n_low_regret >= 1 and n_informative >= 1");
      }
      break;
    case InstanceKind::kRandom:
      if (dim == 0) throw std::invalid_argument("config: dim must be >= 1");
      if (sparsity == 0 || sparsity > dim) {
        throw std::invalid_argument("config: random instances need 1 <= sparsity <= dim");
      }
      if (num_actions < 2) {
        throw std::invalid_argument("config: random instances need num_actions >= 2");
      }
      if (!(signal > 0 && signal <= 1)) {
        throw std::invalid_argument("config: signal must lie in (0, 1]");
      }
      break;
  }
}

void PolicyConfig::validate() const {
  if (name != "estc" && name != "linucb" && name != "phased" && name != "rpe") {
    throw std::invalid_argument("config: unknown policy \"" + name +
                                "\" (expected estc, linucb, phased or rpe)");
  }
  if (label.empty()) throw std::invalid_argument("config: policy label must be non-empty");
  if (label.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("config: policy label \"" + label +
                                "\" must not contain commas, quotes or newlines");
  }
  if (r_max < 0) throw std::invalid_argument("config: r_max must be >= 0");
  if (name == "rpe" && !(min_signal > 0)) {
    throw std::invalid_argument("config: rpe requires min_signal > 0");
  }
  if (!(c1_constant > 0)) throw std::invalid_argument("config: c1_constant must be > 0");
  if (!(elimination_delta > 0 && elimination_delta < 1)) {
    throw std::invalid_argument("config: elimination_delta must lie in (0, 1)");
  }
  if (!(regularization > 0)) throw std::invalid_argument("config: regularization must be > 0");
  if (!(confidence_scale > 0)) throw std::invalid_argument("config: confidence_scale must be > 0");
}

void ExperimentConfig::validate() const {
  instance.validate();
  if (policies.empty()) throw std::invalid_argument("config: policy list must be non-empty");
  std::set<std::string> labels;
  for (const PolicyConfig& pc : policies) {
    pc.validate();
    if (!labels.insert(pc.label).second) {
      throw std::invalid_argument("config: duplicate policy label \"" + pc.label + "\"");
    }
  }
  if (horizons.empty()) throw std::invalid_argument("config: horizons must be non-empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] == 0) throw std::invalid_argument("config: horizons must be >= 1");
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw std::invalid_argument("config: horizons must be strictly increasing");
    }
  }
  if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (!(design_tol > 0)) throw std::invalid_argument("config: design_tol must be > 0");
  if (max_trajectory_points < 1) {
    throw std::invalid_argument("config: max_trajectory_points must be >= 1");
  }
  if (csv_path.empty() || summary_path.empty() || svg_path.empty()) {
    throw std::invalid_argument("config: output paths must be non-empty");
  }
  // Resolve the per-horizon hard-instance parameters up front so tuning
  // errors (e.g. an epsilon too large for kappa) surface before any run.
  if (instance.kind != InstanceKind::kRandom) {
    for (std::size_t horizon : horizons) to_spec(instance, horizon).validate();
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw std::invalid_argument("config: malformed JSON document");
  if (!doc.is_object()) throw std::invalid_argument("config: top-level value must be an object");
  check_keys(doc,
             {"instance", "policies", "horizons", "replications", "base_seed", "design_tol",
              "max_trajectory_points", "plot_bounds", "csv_path", "summary_path", "svg_path"},
             "config");

  ExperimentConfig cfg;

  auto inst_it = doc.find("instance");
  if (inst_it == doc.end() || !inst_it->is_object()) {
    throw std::invalid_argument("config: missing required object field \"instance\"");
  }
  const json& inst = *inst_it;
  check_keys(inst,
             {"kind", "dim", "sparsity", "kappa", "epsilon", "n_low_regret", "n_informative",
              "num_actions", "signal", "noise_std", "instance_seed"},
             "instance");
  auto kind_it = inst.find("kind");
  if (kind_it == inst.end() || !kind_it->is_string()) {
    throw std::invalid_argument("config: missing required string field \"instance.kind\"");
  }
  cfg.instance.kind = parse_kind(kind_it->get<std::string>());
  cfg.instance.dim = juint(inst, "dim", cfg.instance.dim);
  cfg.instance.sparsity = juint(inst, "sparsity", cfg.instance.sparsity);
  cfg.instance.kappa = jnum(inst, "kappa", cfg.instance.kappa);
  cfg.instance.epsilon = jnum(inst, "epsilon", cfg.instance.epsilon);
  cfg.instance.n_low_regret = juint(inst, "n_low_regret", cfg.instance.n_low_regret);
  cfg.instance.n_informative = juint(inst, "n_informative", cfg.instance.n_informative);
  cfg.instance.num_actions = juint(inst, "num_actions", cfg.instance.num_actions);
  cfg.instance.signal = jnum(inst, "signal", cfg.instance.signal);
  cfg.instance.noise_std = jnum(inst, "noise_std", cfg.instance.noise_std);
  cfg.instance.instance_seed = ju64(inst, "instance_seed", cfg.instance.instance_seed);

  auto pol_it = doc.find("policies");
  if (pol_it == doc.end() || !pol_it->is_array() || pol_it->empty()) {
    throw std::invalid_argument("config: missing required non-empty array field \"policies\"");
  }
  for (const json& entry : *pol_it) {
    if (!entry.is_object()) {
      throw std::invalid_argument("config: each policy must be an object");
    }
    check_keys(entry,
               {"name", "label", "sparsity", "r_max", "explicit_n1", "min_signal", "c1_constant",
                "explicit_n2", "elimination_delta", "regularization", "confidence_scale"},
               "policy");
    PolicyConfig pc;
    auto name_it = entry.find("name");
    if (name_it == entry.end() || !name_it->is_string()) {
      throw std::invalid_argument("config: each policy needs a string field \"name\"");
    }
    pc.name = name_it->get<std::string>();
    pc.label = jstr(entry, "label", pc.name);
    pc.sparsity = juint(entry, "sparsity", pc.sparsity);
    pc.r_max = jnum(entry, "r_max", pc.r_max);
    pc.explicit_n1 = juint(entry, "explicit_n1", pc.explicit_n1);
    pc.min_signal = jnum(entry, "min_signal", pc.min_signal);
    pc.c1_constant = jnum(entry, "c1_constant", pc.c1_constant);
    pc.explicit_n2 = juint(entry, "explicit_n2", pc.explicit_n2);
    pc.elimination_delta = jnum(entry, "elimination_delta", pc.elimination_delta);
    pc.regularization = jnum(entry, "regularization", pc.regularization);
    pc.confidence_scale = jnum(entry, "confidence_scale", pc.confidence_scale);
    cfg.policies.push_back(std::move(pc));
  }

  if (auto it = doc.find("horizons"); it != doc.end()) {
    if (!it->is_array() || it->empty()) {
      throw std::invalid_argument("config: field \"horizons\" must be a non-empty array");
    }
    cfg.horizons.clear();
    for (const json& h : *it) {
      if (!h.is_number_unsigned()) {
        throw std::invalid_argument("config: horizons must be positive integers");
      }
      cfg.horizons.push_back(h.get<std::size_t>());
    }
  }
  cfg.replications = juint(doc, "replications", cfg.replications);
  cfg.base_seed = ju64(doc, "base_seed", cfg.base_seed);
  cfg.design_tol = jnum(doc, "design_tol", cfg.design_tol);
  cfg.max_trajectory_points = juint(doc, "max_trajectory_points", cfg.max_trajectory_points);
  cfg.plot_bounds = jbool(doc, "plot_bounds", cfg.plot_bounds);
  cfg.csv_path = jstr(doc, "csv_path", cfg.csv_path);
  cfg.summary_path = jstr(doc, "summary_path", cfg.summary_path);
  cfg.svg_path = jstr(doc, "svg_path", cfg.svg_path);

  cfg.validate();
  return cfg;
}

// --- experiment driver -------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  bool need_design = config.plot_bounds;
  for (const PolicyConfig& pc : config.policies) {
    if (pc.name == "estc" || pc.name == "rpe") need_design = true;
  }

  ExperimentResult result;
  result.config = config;

  std::vector<HorizonData> data;
  data.reserve(config.horizons.size());
  for (std::size_t h = 0; h < config.horizons.size(); ++h) {
    if (h == 0) {
      data.push_back(build_horizon(config, h, need_design));
    } else {
      // Same action set as horizon 0 (see build_horizon); only theta can
      // change, so reuse the solved design instead of re-solving it.
      HorizonData rebuilt = build_horizon(config, h, false);
      rebuilt.design = data[0].design;
      rebuilt.cert = data[0].cert;
      rebuilt.has_design = data[0].has_design;
      data.push_back(std::move(rebuilt));
    }
    const HorizonData& hd = data.back();
    HorizonSetup setup;
    setup.horizon = config.horizons[h];
    setup.epsilon = hd.epsilon;
    setup.num_actions = hd.actions.size();
    setup.r_max = hd.r_max;
    setup.c_min = hd.has_design ? hd.cert.objective : 0.0;
    setup.fw_gap = hd.cert.fw_gap;
    setup.design_iterations = hd.cert.iterations;
    result.setups.push_back(setup);
  }

  const std::size_t num_h = config.horizons.size();
  const std::size_t num_r = config.replications;
  std::vector<RunRecord> runs(config.policies.size() * num_h * num_r);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t task = next.fetch_add(1, std::memory_order_relaxed);
      if (task >= runs.size()) return;
      const std::size_t p = task / (num_h * num_r);
      const std::size_t h = (task / num_r) % num_h;
      const std::size_t r = task % num_r;
      try {
        runs[task] = execute_run(config, data[h], p, h, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const std::size_t threads = std::min(thread_cap(), runs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  result.runs = std::move(runs);
  return result;
}

// --- statistics --------------------------------------------------------------

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<std::size_t> sample_rounds(std::size_t horizon, std::size_t max_points) {
  std::vector<std::size_t> rounds;
  if (horizon == 0) return rounds;
  if (max_points == 0) max_points = 1;
  const std::size_t stride = (horizon + max_points - 1) / max_points;
  for (std::size_t r = stride; r <= horizon; r += stride) rounds.push_back(r);
  if (rounds.empty() || rounds.back() != horizon) rounds.push_back(horizon);
  return rounds;
}

double loglog_slope(const std::vector<std::size_t>& horizons,
                    const std::vector<double>& median_regrets) {
  if (horizons.size() != median_regrets.size()) {
    throw std::invalid_argument("loglog_slope: horizons and regrets must have equal length");
  }
  if (horizons.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 horizons");
  std::vector<double> xs, ys;
  xs.reserve(horizons.size());
  ys.reserve(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] == 0 || (i > 0 && horizons[i] <= horizons[i - 1])) {
      throw std::invalid_argument("loglog_slope: horizons must be strictly increasing");
    }
    if (!(median_regrets[i] > 0)) {
      throw std::invalid_argument("loglog_slope: regrets must be positive");
    }
    xs.push_back(std::log(static_cast<double>(horizons[i])));
    ys.push_back(std::log(median_regrets[i]));
  }
  const double n = static_cast<double>(xs.size());
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return num / den;
}

namespace {

// Groups runs by (policy, horizon) preserving first-seen (i.e. config) order.
struct RunGroups {
  std::vector<std::pair<std::string, std::size_t>> keys;
  std::vector<std::vector<const RunRecord*>> members;
};

RunGroups group_runs(const ExperimentResult& result) {
  RunGroups groups;
  for (const RunRecord& run : result.runs) {
    std::pair<std::string, std::size_t> key{run.policy, run.horizon};
    std::size_t g = 0;
    for (; g < groups.keys.size(); ++g) {
      if (groups.keys[g] == key) break;
    }
    if (g == groups.keys.size()) {
      groups.keys.push_back(key);
      groups.members.emplace_back();
    }
    groups.members[g].push_back(&run);
  }
  return groups;
}

}  // namespace

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  RunGroups groups = group_runs(result);
  std::vector<SummaryRow> rows;
  rows.reserve(groups.keys.size());
  for (std::size_t g = 0; g < groups.keys.size(); ++g) {
    std::vector<double> finals;
    finals.reserve(groups.members[g].size());
    for (const RunRecord* run : groups.members[g]) finals.push_back(run->final_regret);
    SummaryRow row;
    row.policy = groups.keys[g].first;
    row.horizon = groups.keys[g].second;
    row.median = quantile(finals, 0.5);
    row.iqr = quantile(finals, 0.75) - quantile(finals, 0.25);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RegretCurve> summarize_curves(const ExperimentResult& result, std::size_t max_points) {
  RunGroups groups = group_runs(result);
  std::vector<RegretCurve> curves;
  curves.reserve(groups.keys.size());
  for (std::size_t g = 0; g < groups.keys.size(); ++g) {
    RegretCurve curve;
    curve.policy = groups.keys[g].first;
    curve.horizon = groups.keys[g].second;
    curve.rounds = sample_rounds(curve.horizon, max_points);
    for (std::size_t round : curve.rounds) {
      std::vector<double> values;
      values.reserve(groups.members[g].size());
      for (const RunRecord* run : groups.members[g]) {
        if (round <= run->cumulative.size()) values.push_back(run->cumulative[round - 1]);
      }
      curve.median.push_back(quantile(values, 0.5));
      curve.lower.push_back(quantile(values, 0.25));
      curve.upper.push_back(quantile(values, 0.75));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

// --- file emission -----------------------------------------------------------

void emit_csv(const ExperimentResult& result, const std::string& path) {
  std::string buf = "policy,horizon,seed,round,cum_regret\n";
  for (const RunRecord& run : result.runs) {
    const std::vector<std::size_t> rounds =
        sample_rounds(run.cumulative.size(), result.config.max_trajectory_points);
    for (std::size_t round : rounds) {
      buf += run.policy;
      buf += ',';
      buf += std::to_string(run.horizon);
      buf += ',';
      buf += std::to_string(run.seed);
      buf += ',';
      buf += std::to_string(round);
      buf += ',';
      buf += fmt(run.cumulative[round - 1]);
      buf += '\n';
    }
  }
  write_file(path, buf, "emit_csv");
}

void emit_summary(const ExperimentResult& result, const std::string& path) {
  std::string buf = "policy,horizon,median,iqr\n";
  for (const SummaryRow& row : summarize(result)) {
    buf += row.policy;
    buf += ',';
    buf += std::to_string(row.horizon);
    buf += ',';
    buf += fmt(row.median);
    buf += ',';
    buf += fmt(row.iqr);
    buf += '\n';
  }
  write_file(path, buf, "emit_summary");
}

namespace {

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void emit_svg(const std::vector<RegretCurve>& curves, const std::string& path,
              const std::vector<BoundOverlay>& overlays) {
  const double width = 960, height = 600;
  const double ml = 80, mr = 250, mt = 40, mb = 70;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmax = 1.0, ymax = 0.0;
  for (const RegretCurve& c : curves) {
    if (!c.rounds.empty()) xmax = std::max(xmax, static_cast<double>(c.rounds.back()));
    for (double v : c.upper) ymax = std::max(ymax, v);
  }
  for (const BoundOverlay& o : overlays) {
    if (!o.rounds.empty()) xmax = std::max(xmax, static_cast<double>(o.rounds.back()));
    for (double v : o.values) ymax = std::max(ymax, v);
  }
  if (ymax <= 0) ymax = 1.0;
  ymax *= 1.05;

  auto sx = [&](double t) { return ml + pw * (t / xmax); };
  auto sy = [&](double v) { return mt + ph * (1.0 - v / ymax); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_coord(width) + "\" height=\"" +
         svg_coord(height) + "\" viewBox=\"0 0 " + svg_coord(width) + " " + svg_coord(height) +
         "\">\n";
  svg += "<rect width=\"" + svg_coord(width) + "\" height=\"" + svg_coord(height) +
         "\" fill=\"white\"/>\n";

  // Axes.
  svg += "<line x1=\"" + svg_coord(ml) + "\" y1=\"" + svg_coord(mt + ph) + "\" x2=\"" +
         svg_coord(ml + pw) + "\" y2=\"" + svg_coord(mt + ph) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + svg_coord(ml) + "\" y1=\"" + svg_coord(mt) + "\" x2=\"" + svg_coord(ml) +
         "\" y2=\"" + svg_coord(mt + ph) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = xmax * i / 4.0;
    const double ty = ymax * i / 4.0;
    svg += "<line x1=\"" + svg_coord(sx(tx)) + "\" y1=\"" + svg_coord(mt + ph) + "\" x2=\"" +
           svg_coord(sx(tx)) + "\" y2=\"" + svg_coord(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + svg_coord(sx(tx)) + "\" y=\"" + svg_coord(mt + ph + 20) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           fmt(std::round(tx)) + "</text>\n";
    svg += "<line x1=\"" + svg_coord(ml - 5) + "\" y1=\"" + svg_coord(sy(ty)) + "\" x2=\"" +
           svg_coord(ml) + "\" y2=\"" + svg_coord(sy(ty)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + svg_coord(ml - 8) + "\" y=\"" + svg_coord(sy(ty) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" + fmt(ty) +
           "</text>\n";
  }
  svg += "<text x=\"" + svg_coord(ml + pw / 2) + "\" y=\"" + svg_coord(height - 20) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">round</text>\n";
  svg += "<text x=\"20\" y=\"" + svg_coord(mt + ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "20 " +
         svg_coord(mt + ph / 2) + ")\">cumulative regret</text>\n";

  // Stable color per policy name (first appearance order).
  std::vector<std::string> policy_order;
  auto color_of = [&](const std::string& policy) {
    std::size_t i = 0;
    for (; i < policy_order.size(); ++i) {
      if (policy_order[i] == policy) break;
    }
    if (i == policy_order.size()) policy_order.push_back(policy);
    return kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
  };

  double legend_y = mt + 10;
  const double legend_x = width - mr + 15;
  auto legend_entry = [&](const std::string& color, const std::string& label, bool dashed) {
    svg += "<line x1=\"" + svg_coord(legend_x) + "\" y1=\"" + svg_coord(legend_y) + "\" x2=\"" +
           svg_coord(legend_x + 28) + "\" y2=\"" + svg_coord(legend_y) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"" + (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + svg_coord(legend_x + 34) + "\" y=\"" + svg_coord(legend_y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(label) + "</text>\n";
    legend_y += 20;
  };

  for (const RegretCurve& curve : curves) {
    if (curve.rounds.empty()) continue;
    const std::string color = color_of(curve.policy);
    // Interquartile band: upper edge forward, lower edge back.
    std::string band = "<path d=\"M";
    for (std::size_t i = 0; i < curve.rounds.size(); ++i) {
      band += (i == 0 ? " " : " L ");
      band += svg_coord(sx(static_cast<double>(curve.rounds[i]))) + " " +
              svg_coord(sy(curve.upper[i]));
    }
    for (std::size_t i = curve.rounds.size(); i-- > 0;) {
      band += " L " + svg_coord(sx(static_cast<double>(curve.rounds[i]))) + " " +
              svg_coord(sy(curve.lower[i]));
    }
    band += " Z\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    svg += band;

    std::string line = "<polyline fill=\"none\" stroke=\"" + color +
                       "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < curve.rounds.size(); ++i) {
      if (i) line += ' ';
      line += svg_coord(sx(static_cast<double>(curve.rounds[i]))) + "," +
              svg_coord(sy(curve.median[i]));
    }
    line += "\"/>\n";
    svg += line;
    legend_entry(color, curve.policy + " (n=" + std::to_string(curve.horizon) + ")", false);
  }

  for (const BoundOverlay& overlay : overlays) {
    if (overlay.rounds.empty()) continue;
    std::string line =
        "<polyline fill=\"none\" stroke=\"#555555\" stroke-width=\"1.5\" "
        "stroke-dasharray=\"6 4\" points=\"";
    for (std::size_t i = 0; i < overlay.rounds.size(); ++i) {
      if (i) line += ' ';
      line += svg_coord(sx(static_cast<double>(overlay.rounds[i]))) + "," +
              svg_coord(sy(std::min(overlay.values[i], ymax)));
    }
    line += "\"/>\n";
    svg += line;
    legend_entry("#555555", overlay.label, true);
  }

  svg += "</svg>\n";
  write_file(path, svg, "emit_svg");
}

void emit_svg(const ExperimentResult& result, const std::string& path) {
  std::vector<RegretCurve> curves =
      summarize_curves(result, result.config.max_trajectory_points);
  std::vector<BoundOverlay> overlays;
  if (result.config.plot_bounds && !result.setups.empty()) {
    const HorizonSetup& top = result.setups.back();
    if (top.c_min > 0) {
      const InstanceConfig& ic = result.config.instance;
      BoundOverlay lower;
      lower.label = "minimax lower bound";
      BoundOverlay upper;
      upper.label = "explore-then-commit bound";
      for (std::size_t round :
           sample_rounds(top.horizon, result.config.max_trajectory_points)) {
        lower.rounds.push_back(round);
        lower.values.push_back(lower_bound(round, ic.dim, ic.sparsity, top.c_min));
        const std::size_t n1 = static_cast<std::size_t>(
            std::max(1.0, std::ceil(std::pow(static_cast<double>(round), 2.0 / 3.0))));
        upper.rounds.push_back(round);
        upper.values.push_back(
            estc_upper_bound(round, ic.dim, ic.sparsity, top.r_max, top.c_min, n1, 1.0));
      }
      overlays.push_back(std::move(lower));
      overlays.push_back(std::move(upper));
    }
  }
  emit_svg(curves, path, overlays);
}

// --- CSV re-ingestion --------------------------------------------------------

std::vector<SummaryRow> summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("summary CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "policy,horizon,median,iqr") {
    throw std::invalid_argument("summary CSV: unexpected header \"" + line + "\"");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 4) {
      throw std::invalid_argument("summary CSV: expected 4 fields, got line \"" + line + "\"");
    }
    SummaryRow row;
    row.policy = fields[0];
    row.horizon = parse_size(fields[1], "summary CSV");
    row.median = parse_double(fields[2], "summary CSV");
    row.iqr = parse_double(fields[3], "summary CSV");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RegretCurve> curves_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("results CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "policy,horizon,seed,round,cum_regret") {
    throw std::invalid_argument("results CSV: unexpected header \"" + line + "\"");
  }
  std::vector<std::pair<std::string, std::size_t>> keys;
  std::vector<std::map<std::size_t, std::vector<double>>> samples;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 5) {
      throw std::invalid_argument("results CSV: expected 5 fields, got line \"" + line + "\"");
    }
    std::pair<std::string, std::size_t> key{fields[0], parse_size(fields[1], "results CSV")};
    std::size_t g = 0;
    for (; g < keys.size(); ++g) {
      if (keys[g] == key) break;
    }
    if (g == keys.size()) {
      keys.push_back(key);
      samples.emplace_back();
    }
    const std::size_t round = parse_size(fields[3], "results CSV");
    samples[g][round].push_back(parse_double(fields[4], "results CSV"));
  }
  std::vector<RegretCurve> curves;
  curves.reserve(keys.size());
  for (std::size_t g = 0; g < keys.size(); ++g) {
    RegretCurve curve;
    curve.policy = keys[g].first;
    curve.horizon = keys[g].second;
    for (const auto& [round, values] : samples[g]) {
      curve.rounds.push_back(round);
      curve.median.push_back(quantile(values, 0.5));
      curve.lower.push_back(quantile(values, 0.25));
      curve.upper.push_back(quantile(values, 0.75));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace sparsebandit
