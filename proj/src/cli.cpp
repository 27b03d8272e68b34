#include "activegp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "activegp/design.hpp"
#include "activegp/error.hpp"
#include "activegp/seed.hpp"

#ifndef ACTIVEGP_VERSION
#define ACTIVEGP_VERSION "0.0.0"
#endif

namespace activegp {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void read_num(const Json& j, const char* key, double& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = number_from_json(j.at(key));
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::Simplex ? "simplex" : "lbfgs"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "lbfgs") return OptimizerKind::QuasiNewton;
  if (s == "simplex") return OptimizerKind::Simplex;
  throw Error(ErrorCode::ConfigError, "unknown optimizer '" + s + "'");
}

std::vector<StrategyKind> parse_strategy_list(const std::string& csv) {
  std::vector<StrategyKind> out;
  std::istringstream in(csv);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (!name.empty()) out.push_back(parse_strategy(name));
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunConfig config_from_json(const Json& j) {
  try {
    check_keys(j,
               {"seed", "q", "p", "lo", "hi", "model", "oracle", "n_initial", "n_pool", "n_eval", "n_iter",
                "threshold", "patience", "weights", "strategies", "fit", "cv", "lhd_sweeps", "record_wall_time", "out"},
               "config");
    RunConfig c;
    read_opt(j, "seed", c.seed);
    read_opt(j, "q", c.q);
    read_opt(j, "p", c.p);
    read_num(j, "lo", c.lo);
    read_num(j, "hi", c.hi);
    if (j.contains("model")) {
      const Json& m = j.at("model");
      check_keys(m, {"variant", "isotropic", "input_sd"}, "model");
      if (m.contains("variant")) c.variant = parse_model_variant(m.at("variant").get<std::string>());
      read_opt(m, "isotropic", c.isotropic);
      if (m.contains("input_sd") && !m.at("input_sd").is_null()) c.model_input_sd = number_from_json(m.at("input_sd"));
    }
    if (j.contains("oracle")) {
      const Json& o = j.at("oracle");
      check_keys(o,
                 {"seed", "path", "tau2", "theta", "anchors", "sensitivity_scale", "noise_fraction", "input_sd",
                  "gp_enabled"},
                 "oracle");
      if (o.contains("seed") && !o.at("seed").is_null()) c.oracle_seed = o.at("seed").get<std::uint64_t>();
      if (o.contains("path") && !o.at("path").is_null()) c.oracle_path = o.at("path").get<std::string>();
      read_num(o, "tau2", c.oracle.tau2);
      read_num(o, "theta", c.oracle.theta);
      read_opt(o, "anchors", c.oracle.anchors);
      read_num(o, "sensitivity_scale", c.oracle.sensitivity_scale);
      read_num(o, "noise_fraction", c.oracle.noise_fraction);
      read_num(o, "input_sd", c.oracle.input_sd);
      read_opt(o, "gp_enabled", c.oracle.gp_enabled);
    }
    read_opt(j, "n_initial", c.n_initial);
    read_opt(j, "n_pool", c.n_pool);
    read_opt(j, "n_eval", c.n_eval);
    read_opt(j, "n_iter", c.n_iter);
    read_num(j, "threshold", c.threshold);
    read_opt(j, "patience", c.patience);
    if (j.contains("weights") && !j.at("weights").is_null()) c.weights = vector_from_json(j.at("weights"));
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    if (j.contains("fit")) {
      const Json& f = j.at("fit");
      check_keys(f, {"restarts", "optimizer"}, "fit");
      read_opt(f, "restarts", c.restarts);
      if (f.contains("optimizer")) c.optimizer = parse_optimizer(f.at("optimizer").get<std::string>());
    }
    if (j.contains("cv")) {
      const Json& v = j.at("cv");
      check_keys(v, {"enabled", "refit", "restarts", "full_restarts"}, "cv");
      read_opt(v, "enabled", c.cv_enabled);
      read_opt(v, "refit", c.cv_refit);
      read_opt(v, "restarts", c.cv_restarts);
      read_opt(v, "full_restarts", c.cv_full_restarts);
    }
    read_opt(j, "lhd_sweeps", c.lhd_sweeps);
    read_opt(j, "record_wall_time", c.record_wall_time);
    read_opt(j, "out", c.out);
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
}

Json config_to_json(const RunConfig& c) {
  Json strategies = Json::array();
  for (StrategyKind s : c.strategies) strategies.push_back(to_string(s));
  Json oracle = {{"tau2", number_to_json(c.oracle.tau2)},
                 {"theta", number_to_json(c.oracle.theta)},
                 {"anchors", c.oracle.anchors},
                 {"sensitivity_scale", number_to_json(c.oracle.sensitivity_scale)},
                 {"noise_fraction", number_to_json(c.oracle.noise_fraction)},
                 {"input_sd", number_to_json(c.oracle.input_sd)},
                 {"gp_enabled", c.oracle.gp_enabled}};
  if (c.oracle_seed) oracle["seed"] = *c.oracle_seed;
  if (c.oracle_path) oracle["path"] = *c.oracle_path;
  Json model = {{"variant", to_string(c.variant)}, {"isotropic", c.isotropic}};
  if (c.model_input_sd) model["input_sd"] = number_to_json(*c.model_input_sd);
  Json j = {{"seed", c.seed},
            {"q", c.q},
            {"p", c.p},
            {"lo", number_to_json(c.lo)},
            {"hi", number_to_json(c.hi)},
            {"model", model},
            {"oracle", oracle},
            {"n_initial", c.n_initial},
            {"n_pool", c.n_pool},
            {"n_eval", c.n_eval},
            {"n_iter", c.n_iter},
            {"threshold", number_to_json(c.threshold)},
            {"patience", c.patience},
            {"strategies", strategies},
            {"fit", {{"restarts", c.restarts}, {"optimizer", optimizer_name(c.optimizer)}}},
            {"cv",
             {{"enabled", c.cv_enabled},
              {"refit", c.cv_refit},
              {"restarts", c.cv_restarts},
              {"full_restarts", c.cv_full_restarts}}},
            {"lhd_sweeps", c.lhd_sweeps},
            {"record_wall_time", c.record_wall_time},
            {"out", c.out}};
  if (c.weights.size() > 0) j["weights"] = vector_to_json(c.weights);
  return j;
}

void validate_config(RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::ConfigError, msg);
  };
  need(c.q >= 1 && c.p >= 1, "q and p must be >= 1");
  need(c.lo < c.hi, "lo must be below hi");
  need(c.n_initial >= 1 && c.n_pool >= 1 && c.n_eval >= 2, "n_initial, n_pool >= 1 and n_eval >= 2 required");
  need(c.n_iter >= 0, "n_iter must be >= 0");
  need(c.patience >= 1, "patience must be >= 1");
  need(c.restarts >= 1 && c.cv_restarts >= 1, "restart counts must be >= 1");
  need(c.lhd_sweeps >= 0, "lhd_sweeps must be >= 0");
  need(!std::isnan(c.threshold), "threshold must not be NaN");
  need(!c.strategies.empty(), "at least one strategy is required");
  need(std::set<StrategyKind>(c.strategies.begin(), c.strategies.end()).size() == c.strategies.size(),
       "strategies must be distinct");
  if (c.weights.size() > 0) {
    need(c.weights.size() == c.p, "weights must have p entries");
    need(c.weights.allFinite() && (c.weights.array() >= 0.0).all() && c.weights.sum() > 0.0,
         "weights must be nonnegative with a positive sum");
    if (std::abs(c.weights.sum() - 1.0) > 1e-12) {
      std::cerr << "warning: weights normalized to sum to one\n";
      c.weights /= c.weights.sum();
    }
  }
}

ComparisonSeeds comparison_seeds(const RunConfig& c) {
  ComparisonSeeds s;
  s.oracle = c.oracle_seed ? *c.oracle_seed : derive_seed(c.seed, "oracle");
  s.initial = derive_seed(c.seed, "initial");
  s.pool = derive_seed(c.seed, "pool");
  s.eval = derive_seed(c.seed, "eval");
  s.observe = derive_seed(c.seed, "observe");
  s.fit = derive_seed(c.seed, "fit");
  return s;
}

Comparison run_comparison(RunConfig c, bool write_files) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  Comparison out;
  out.config = c;
  out.seeds = comparison_seeds(c);

  const Bounds bounds = Bounds::uniform(c.q, c.lo, c.hi);
  if (c.oracle_path) {
    out.oracle = oracle_from_json(read_json(*c.oracle_path));
    if (out.oracle.q != c.q || out.oracle.p != c.p) {
      throw Error(ErrorCode::ConfigError, "saved oracle dimensions disagree with the config");
    }
  } else {
    OracleConfig oc = c.oracle;
    oc.q = c.q;
    oc.p = c.p;
    oc.bounds = bounds;
    oc.seed = out.seeds.oracle;
    out.oracle = make_oracle(oc);
  }

  out.spec = ModelSpec::make(c.variant, c.q, c.p);
  out.spec.isotropic = c.isotropic;
  if (c.weights.size() > 0) out.spec.weights = c.weights;
  if (c.variant == ModelVariant::SurrogateWithUncertainties) {
    const double sd = c.model_input_sd ? *c.model_input_sd : c.oracle.input_sd;
    out.spec.sigma_F = Eigen::MatrixXd::Identity(c.q, c.q) * sd * sd;
  }
  validate_model_spec(out.spec);

  auto lhd = [&](int n, std::uint64_t seed) {
    LhdConfig lc;
    lc.n = n;
    lc.q = c.q;
    lc.bounds = bounds;
    lc.seed = seed;
    lc.sweeps = c.lhd_sweeps;
    return maximin_lhd(lc);
  };
  out.pools.initial = lhd(c.n_initial, out.seeds.initial);
  out.pools.candidates = lhd(c.n_pool, out.seeds.pool);
  out.pools.eval = make_eval_pool(out.oracle, lhd(c.n_eval, out.seeds.eval));

  LoopConfig lc;
  lc.spec = out.spec;
  lc.fit.restarts = c.restarts;
  lc.fit.optimizer = c.optimizer;
  lc.cv.refit = c.cv_refit;
  lc.cv.restarts = c.cv_restarts;
  lc.cv.full_restarts = c.cv_full_restarts;
  lc.compute_cv = c.cv_enabled;
  lc.n_iter = c.n_iter;
  lc.threshold = c.threshold;
  lc.patience = c.patience;
  lc.lhd_sweeps = c.lhd_sweeps;
  lc.record_wall_time = c.record_wall_time;
  lc.seeds.observe = out.seeds.observe;
  lc.seeds.fit = out.seeds.fit;

  namespace fs = std::filesystem;
  const fs::path dir(c.out);
  if (write_files) {
    fs::create_directories(dir);
    write_json((dir / "oracle.json").string(), oracle_to_json(out.oracle));
    write_matrix_csv((dir / "design_initial.csv").string(), out.pools.initial);
    write_matrix_csv((dir / "pool_candidates.csv").string(), out.pools.candidates);
    write_matrix_csv((dir / "pool_eval.csv").string(), out.pools.eval.points);
  }

  Json runs = Json::array();
  Json errors = Json::array();
  for (StrategyKind s : c.strategies) {
    const std::string name = to_string(s);
    lc.seeds.strategy = derive_seed(c.seed, "strategy:" + name);
    Json entry = {{"strategy", name}, {"seed", lc.seeds.strategy}};
    try {
      LoopResult r = run_loop(lc, s, out.oracle, out.pools);
      entry["rows"] = r.curve.rows.size();
      entry["total_ms"] = r.total_ms;
      if (!r.curve.rows.empty()) {
        entry["final_n_samples"] = r.curve.rows.back().n_samples;
        entry["stop_reason"] = to_string(r.curve.rows.back().stop_reason);
      }
      entry["status"] = r.curve.error ? "error" : "ok";
      if (r.curve.error) {
        entry["error"] = *r.curve.error;
        errors.push_back({{"strategy", name}, {"message", *r.curve.error}});
      }
      if (write_files) {
        entry["curve"] = "curve_" + name + ".csv";
        write_curve_csv((dir / ("curve_" + name + ".csv")).string(), r.curve);
        if (r.final_model) {
          entry["model"] = "model_" + name + ".json";
          write_json((dir / ("model_" + name + ".json")).string(), model_to_json(*r.final_model));
        }
      }
      out.runs.push_back(std::move(r));
    } catch (const Error& e) {
      entry["status"] = "error";
      entry["error"] = e.what();
      errors.push_back({{"strategy", name}, {"message", e.what()}});
      LoopResult empty;
      empty.curve.strategy = s;
      empty.curve.error = e.what();
      out.runs.push_back(std::move(empty));
    }
    runs.push_back(entry);
  }

  const Json cfg_json = config_to_json(c);
  out.manifest = {{"tool", "activegp"},
                  {"version", ACTIVEGP_VERSION},
                  {"config", cfg_json},
                  {"config_hash", hex64(fnv1a64(cfg_json.dump()))},
                  {"seeds",
                   {{"master", c.seed},
                    {"oracle", out.seeds.oracle},
                    {"initial", out.seeds.initial},
                    {"pool", out.seeds.pool},
                    {"eval", out.seeds.eval},
                    {"observe", out.seeds.observe},
                    {"fit", out.seeds.fit}}},
                  {"runs", runs},
                  {"errors", errors},
                  {"timings", {{"total_ms", elapsed_ms(t0)}}}};
  if (write_files) write_json((dir / "manifest.json").string(), out.manifest);
  return out;
}

std::vector<MetricTable> compare_curves(const std::vector<LearningCurve>& curves,
                                        const std::vector<std::string>& names, bool outer) {
  if (curves.size() < 2) throw Error(ErrorCode::ConfigError, "compare needs at least two curves");
  if (names.size() != curves.size()) throw Error(ErrorCode::InvalidArgument, "one name per curve required");
  std::vector<std::map<int, const CurveRow*>> by_n(curves.size());
  std::set<int> grid;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (const auto& r : curves[i].rows) {
      if (!by_n[i].emplace(r.n_samples, &r).second) {
        throw Error(ErrorCode::ConfigError, names[i] + ": repeated n_samples " + std::to_string(r.n_samples));
      }
      grid.insert(r.n_samples);
    }
  }
  if (!outer) {
    std::string bad;
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (by_n[i].size() != grid.size()) bad += (bad.empty() ? "" : ", ") + names[i];
    }
    if (!bad.empty()) throw Error(ErrorCode::ConfigError, "sample grids differ: " + bad);
  }
  std::vector<MetricTable> tables;
  for (const char* metric : {"mean_mad", "max_mad", "cv_mse"}) {
    std::string csv = "n_samples";
    for (const auto& n : names) csv += ',' + n;
    csv += '\n';
    for (int n : grid) {
      csv += std::to_string(n);
      for (std::size_t i = 0; i < curves.size(); ++i) {
        csv += ',';
        const auto it = by_n[i].find(n);
        if (it == by_n[i].end()) continue;
        const CurveRow& r = *it->second;
        const std::string m = metric;
        csv += format_double(m == "mean_mad" ? r.mean_mad : m == "max_mad" ? r.max_mad : r.cv_mse);
      }
      csv += '\n';
    }
    tables.push_back({metric, csv});
  }
  return tables;
}

namespace {

int cmd_design(int n, int q, std::uint64_t seed, double lo, double hi, int sweeps, const std::string& out) {
  LhdConfig lc;
  lc.n = n;
  lc.q = q;
  lc.bounds = Bounds::uniform(q, lo, hi);
  lc.seed = seed;
  lc.sweeps = sweeps;
  const DesignMatrix d = maximin_lhd(lc);
  write_matrix_csv(out, d);
  std::cout << "wrote " << out << " (" << n << " x " << q << "), min pairwise distance "
            << format_double(min_pairwise_distance(d, lc.bounds)) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& out_dir, bool outer) {
  std::vector<LearningCurve> curves;
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& f : files) {
    curves.push_back(read_curve_csv(f));
    std::string name = curves.back().rows.empty() ? "" : to_string(curves.back().strategy);
    if (name.empty() || seen.count(name)) name = std::filesystem::path(f).stem().string();
    seen.insert(name);
    names.push_back(name);
  }
  std::filesystem::create_directories(out_dir);
  for (const auto& t : compare_curves(curves, names, outer)) {
    const auto path = (std::filesystem::path(out_dir) / ("compare_" + t.metric + ".csv")).string();
    write_text(path, t.csv);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Gaussian-process active learning under input and output uncertainty"};
  app.require_subcommand(1);

  auto* design = app.add_subcommand("design", "Write a maximin Latin hypercube design as CSV");
  int d_n = 11;
  int d_q = 10;
  std::uint64_t d_seed = 0;
  double d_lo = -450.0;
  double d_hi = 450.0;
  int d_sweeps = 2000;
  std::string d_out = "design.csv";
  design->add_option("--n", d_n, "Number of points")->capture_default_str();
  design->add_option("--q", d_q, "Number of inputs")->capture_default_str();
  design->add_option("--seed", d_seed, "Seed")->capture_default_str();
  design->add_option("--lo", d_lo, "Lower bound, every input")->capture_default_str();
  design->add_option("--hi", d_hi, "Upper bound, every input")->capture_default_str();
  design->add_option("--sweeps", d_sweeps, "Swap-search iterations")->capture_default_str();
  design->add_option("--out", d_out, "Output CSV")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run strategies on the synthetic oracle and write a replayable bundle");
  std::string r_config;
  std::string r_manifest;
  std::optional<std::string> r_out;
  std::optional<std::uint64_t> r_seed;
  std::optional<int> r_iter;
  std::optional<std::string> r_threshold;
  std::optional<int> r_patience;
  std::optional<std::string> r_strategies;
  std::optional<std::string> r_variant;
  run->add_option("--config", r_config, "JSON config file");
  run->add_option("--manifest", r_manifest, "Replay the config recorded in a manifest");
  run->add_option("--out", r_out, "Output directory");
  run->add_option("--seed", r_seed, "Master seed");
  run->add_option("--n-iter", r_iter, "Iteration budget");
  run->add_option("--threshold", r_threshold, "Mean-MAD stopping threshold ('inf' disables)");
  run->add_option("--patience", r_patience, "Consecutive below-threshold iterations before stopping");
  run->add_option("--strategies", r_strategies, "Comma list: vwal,dowal,random,maximin,ei,static");
  run->add_option("--variant", r_variant, "kriging or surrogate");

  auto* compare = app.add_subcommand("compare", "Join learning curves into one table per metric");
  std::vector<std::string> c_files;
  std::string c_out = ".";
  bool c_outer = false;
  compare->add_option("curves", c_files, "Curve CSV files")->required()->expected(2, -1);
  compare->add_option("--out", c_out, "Output directory")->capture_default_str();
  compare->add_flag("--outer", c_outer, "Allow differing sample grids, leaving blanks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*design) return cmd_design(d_n, d_q, d_seed, d_lo, d_hi, d_sweeps, d_out);
    if (*compare) return cmd_compare(c_files, c_out, c_outer);

    if (!r_config.empty() && !r_manifest.empty()) {
      throw Error(ErrorCode::ConfigError, "pass either --config or --manifest, not both");
    }
    RunConfig cfg;
    if (!r_config.empty()) cfg = config_from_json(read_json(r_config));
    if (!r_manifest.empty()) cfg = config_from_json(read_json(r_manifest).at("config"));
    if (r_out) cfg.out = *r_out;
    if (r_seed) cfg.seed = *r_seed;
    if (r_iter) cfg.n_iter = *r_iter;
    if (r_threshold) cfg.threshold = parse_double(*r_threshold);
    if (r_patience) cfg.patience = *r_patience;
    if (r_strategies) cfg.strategies = parse_strategy_list(*r_strategies);
    if (r_variant) cfg.variant = parse_model_variant(*r_variant);

    const Comparison cmp = run_comparison(cfg, true);
    for (const auto& r : cmp.runs) {
      std::cout << to_string(r.curve.strategy) << ": " << r.curve.rows.size() << " rows";
      if (!r.curve.rows.empty()) {
        const auto& last = r.curve.rows.back();
        std::cout << ", final mean MAD " << format_double(last.mean_mad) << ", stop "
                  << to_string(last.stop_reason);
      }
      if (r.curve.error) std::cout << ", error: " << *r.curve.error;
      std::cout << "\n";
    }
    std::cout << "wrote " << cmp.config.out << "/manifest.json\n";
    return cmp.manifest.at("errors").empty() ? 0 : 3;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 3;
  } catch (const Json::exception& e) {
    std::cerr << "config: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}

}  // namespace activegp
