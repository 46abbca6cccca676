#include "dbfgs/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace dbfgs {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <class T>
void read_key(const Json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type in config file");
  }
}

void read_opt(const Json& j, const char* key, std::optional<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    dst.reset();
    return;
  }
  double v = 0.0;
  read_key(j, key, v);
  dst = v;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& s : names) out.push_back(parse_method(s));
  return out;
}

}  // namespace

Json ExperimentConfig::to_json() const {
  std::vector<std::string> names;
  for (Method m : methods) names.emplace_back(method_name(m));
  return Json{{"methods", names},
              {"n", n},
              {"p", p},
              {"graph", graph},
              {"cond", regime_name(regime())},
              {"gamma", gamma},
              {"Gamma", big_gamma},
              {"init_scale", init_scale},
              {"eps_dbfgs", opt_json(eps_dbfgs)},
              {"eps_dd", opt_json(eps_dd)},
              {"iters", iters ? Json(*iters) : Json(nullptr)},
              {"threshold", opt_json(threshold)},
              {"async", async},
              {"variant", variant_name(variant)},
              {"drift_mean", drift_mean},
              {"drift_std", drift_std},
              {"B_bound", staleness_bound},
              {"ticks", ticks},
              {"seeds", seeds},
              {"unit", unit_name(unit)},
              {"bin_width", bin_width},
              {"workers", workers},
              {"out", out}};
}

ExperimentConfig ExperimentConfig::from_json(const Json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  const Json& j = root.contains("config") && root["config"].is_object() ? root["config"] : root;
  ExperimentConfig c;
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_key(j, "methods", names);
    c.methods = parse_methods(names);
  }
  if (j.contains("method")) {
    std::string name;
    read_key(j, "method", name);
    c.methods = {parse_method(name)};
  }
  read_key(j, "n", c.n);
  read_key(j, "p", c.p);
  read_key(j, "graph", c.graph);
  if (j.contains("cond")) {
    std::string s;
    read_key(j, "cond", s);
    c.cond = parse_regime(s);
  }
  read_key(j, "gamma", c.gamma);
  read_key(j, "Gamma", c.big_gamma);
  read_key(j, "init_scale", c.init_scale);
  if (j.contains("eps")) {
    std::optional<double> e;
    read_opt(j, "eps", e);
    c.eps_dbfgs = c.eps_dd = e;
  }
  read_opt(j, "eps_dbfgs", c.eps_dbfgs);
  read_opt(j, "eps_dd", c.eps_dd);
  if (j.contains("iters") && !j["iters"].is_null()) {
    long v = 0;
    read_key(j, "iters", v);
    c.iters = v;
  }
  read_opt(j, "threshold", c.threshold);
  read_key(j, "async", c.async);
  if (j.contains("variant")) {
    std::string s;
    read_key(j, "variant", s);
    c.variant = parse_variant(s);
  }
  read_key(j, "drift_mean", c.drift_mean);
  read_key(j, "drift_std", c.drift_std);
  read_key(j, "B_bound", c.staleness_bound);
  read_key(j, "ticks", c.ticks);
  read_key(j, "seeds", c.seeds);
  if (j.contains("unit")) {
    std::string s;
    read_key(j, "unit", s);
    c.unit = parse_unit(s);
  }
  read_key(j, "bin_width", c.bin_width);
  read_key(j, "workers", c.workers);
  read_key(j, "out", c.out);
  return c;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("method: at least one method is required");
  if (n < 2) throw ConfigError("n: must be >= 2");
  if (p < 2 || p % 2 != 0) throw ConfigError("p: must be even and >= 2");
  make_graph();
  if (!(gamma > 0.0)) throw ConfigError("gamma: must be positive");
  if (!(big_gamma > 0.0)) throw ConfigError("Gamma: must be positive");
  if (!(init_scale >= gamma)) throw ConfigError("init_scale: must be >= gamma");
  for (const auto& e : {eps_dbfgs, eps_dd})
    if (e && !(*e > 0.0)) throw ConfigError("eps: must be positive");
  if (iters && *iters < 1) throw ConfigError("iters: must be >= 1");
  if (threshold && !(*threshold > 0.0)) throw ConfigError("threshold: must be positive");
  if (!(drift_mean >= 1.0)) throw ConfigError("drift_mean: must be >= 1");
  if (!(drift_std >= 0.0)) throw ConfigError("drift_std: must be >= 0");
  if (staleness_bound != 0 && staleness_bound < 3)
    throw ConfigError("B_bound: must be 0 (disabled) or >= 3");
  if (ticks < 1) throw ConfigError("ticks: must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (!(bin_width > 0.0)) throw ConfigError("bin_width: must be positive");
  if (workers < 1) throw ConfigError("workers: must be >= 1");
}

double ExperimentConfig::stepsize(Method m, bool required) const {
  const auto& e = m == Method::dbfgs ? eps_dbfgs : eps_dd;
  if (e) return *e;
  if (required)
    throw ConfigError(std::string("eps: stepsize for method ") + method_name(m) +
                      " is required (--eps)");
  if (m == Method::dbfgs) return async ? 0.007 : 0.01;
  return async ? 0.001 : 0.002;
}

ConditionRegime ExperimentConfig::regime() const {
  if (cond) return *cond;
  return async ? ConditionRegime::narrow_1e0 : ConditionRegime::split_1e2;
}

long ExperimentConfig::iterations(bool trials) const { return iters.value_or(trials ? 10000 : 500); }

double ExperimentConfig::delta() const {
  if (threshold) return *threshold;
  return async ? 5e-2 : 1e-2;
}

Graph ExperimentConfig::make_graph() const {
  if (graph.rfind("cycle", 0) != 0) throw ConfigError("graph: expected cycleK, got '" + graph + "'");
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(graph.substr(5), &used);
    if (used != graph.size() - 5) throw std::invalid_argument(graph);
  } catch (const std::logic_error&) {
    throw ConfigError("graph: expected cycleK, got '" + graph + "'");
  }
  try {
    return regular_cycle(n, k);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

SyncRunConfig ExperimentConfig::sync_config(Method m, bool required_eps, bool trials) const {
  SyncRunConfig c;
  c.method = m;
  c.stepsize = stepsize(m, required_eps);
  c.max_iters = iterations(trials);
  c.gamma = gamma;
  c.big_gamma = big_gamma;
  c.initial_scale = init_scale;
  c.threshold = threshold;
  return c;
}

AsyncRunConfig ExperimentConfig::async_config(Method m, bool required_eps) const {
  AsyncRunConfig c;
  c.method = m;
  c.stepsize = stepsize(m, required_eps);
  c.gamma = gamma;
  c.big_gamma = big_gamma;
  c.initial_scale = init_scale;
  c.threshold = threshold;
  c.max_ticks = ticks;
  c.variant = variant;
  return c;
}

ScheduleParams ExperimentConfig::schedule_params(std::uint64_t seed) const {
  ScheduleParams s;
  s.mean_gap = drift_mean;
  s.stddev_gap = drift_std;
  s.staleness_bound = staleness_bound;
  s.horizon = ticks;
  s.seed = seed;
  return s;
}

TrialConfig ExperimentConfig::trial_config(Method m) const {
  TrialConfig t;
  t.n = n;
  t.p = p;
  t.degree = std::stoi(graph.substr(5));
  t.regime = regime();
  t.delta = delta();
  t.async = async;
  t.sync = sync_config(m, false, true);
  t.async_run = async_config(m, false);
  t.schedule = schedule_params(0);
  t.unit = unit;
  return t;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      const auto dash = item.find('-');
      std::size_t used = 0;
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
        continue;
      }
      const std::string lo_s = item.substr(0, dash), hi_s = item.substr(dash + 1);
      const auto lo = std::stoull(lo_s, &used);
      if (used != lo_s.size()) throw std::invalid_argument(item);
      const auto hi = std::stoull(hi_s, &used);
      if (used != hi_s.size() || hi < lo) throw std::invalid_argument(item);
      for (auto v = lo; v <= hi; ++v) out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("seeds: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("seeds: empty list");
  return out;
}

std::string resolve_output_dir(const std::string& out) {
  fs::path p(out);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv("DBFGS_OUTPUT_ROOT"); root && *root)
    return (fs::path(root) / p).string();
  return p.string();
}

namespace {

Json manifest(const std::string& command, const ExperimentConfig& cfg, Json extra = Json::object()) {
  Json m{{"command", command},
         {"version", kVersion},
         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                       "." + std::to_string(EIGEN_MINOR_VERSION)},
         {"config", cfg.to_json()},
         {"seeds", cfg.seeds}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir = resolve_output_dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path.string(), j.dump(2) + "\n"); }

struct Outcome {
  Trace trace;
  std::optional<ScheduleParams> schedule;
};

Outcome simulate(const ExperimentConfig& cfg, Method m, std::uint64_t seed, bool required_eps,
                 bool use_threshold) {
  const ProblemInstance prob = generate_quadratic(cfg.n, cfg.p, seed, cfg.regime());
  const Graph graph = cfg.make_graph();
  Outcome o;
  if (cfg.async) {
    AsyncRunConfig rc = cfg.async_config(m, required_eps);
    if (!use_threshold) rc.threshold.reset();
    o.schedule = cfg.schedule_params(seed);
    o.trace = run_async(rc, prob, graph, Schedule::generate(cfg.n, *o.schedule));
  } else {
    SyncRunConfig rc = cfg.sync_config(m, required_eps);
    if (!use_threshold) rc.threshold.reset();
    o.trace = run(rc, prob, graph);
  }
  return o;
}

double exchanges_at(const IterationRecord& r, const ExperimentConfig& cfg) {
  if (cfg.unit == ExchangeUnit::rounds) return r.comm_rounds;
  return static_cast<double>(cfg.async ? r.delivered_msgs : r.comm_msgs);
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.methods.size() != 1) throw ConfigError("method: run takes exactly one method");
  const Method m = cfg.methods.front();
  const std::uint64_t seed = cfg.seeds.front();
  const fs::path dir = prepare_dir(cfg);
  const Outcome o = simulate(cfg, m, seed, true, true);
  std::ostringstream csv;
  write_trace_csv(csv, o.trace, cfg.async);
  write_text_file((dir / "trace.csv").string(), csv.str());
  if (o.schedule) write_json(dir / "schedule.json", schedule_to_json(*o.schedule));

  const ProblemInstance prob = generate_quadratic(cfg.n, cfg.p, seed, cfg.regime());
  const double bound = max_stable_stepsize(prob.mu(), cfg.n, cfg.gamma, cfg.big_gamma);
  const double eps = cfg.stepsize(m, true);
  write_json(dir / "manifest.json",
             manifest("run", cfg, {{"seed", seed}, {"eps", eps}, {"max_stable_stepsize", bound}}));
  const IterationRecord& last = o.trace.back();
  out << method_name(m) << (cfg.async ? " async" : "") << ": t=" << last.t << " err=" << last.err
      << " grad_norm=" << last.grad_norm << " exchanges=" << exchanges_at(last, cfg)
      << " skips=" << last.skips << '\n';
  out << "eps=" << eps << " (guaranteed-stable bound " << bound << ")\n";
  out << "wrote " << (dir / "trace.csv").string() << '\n';
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.methods.size() < 2) throw ConfigError("method: compare needs at least two methods");
  const std::uint64_t seed = cfg.seeds.front();
  const fs::path dir = prepare_dir(cfg);
  std::ostringstream table;
  table << "method,final_err,exchanges_to_delta,skips\n";
  out << std::left << std::setw(8) << "method" << std::setw(16) << "final_err" << std::setw(20)
      << "exchanges_to_delta" << "skips\n";
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const Method m = cfg.methods[k];
    const Outcome o = simulate(cfg, m, seed, false, false);
    std::ostringstream csv;
    write_trace_csv(csv, o.trace, cfg.async);
    write_text_file((dir / ("trace_" + std::to_string(k) + "_" + method_name(m) + ".csv")).string(),
                    csv.str());
    const auto t = convergence_time(o.trace, cfg.delta());
    const IterationRecord& last = o.trace.back();
    const std::string ex = t ? format_double(exchanges_at(o.trace[*t], cfg)) : "";
    table << method_name(m) << ',' << format_double(last.err) << ',' << ex << ',' << last.skips << '\n';
    std::ostringstream shown;
    if (t) shown << exchanges_at(o.trace[*t], cfg);
    out << std::setw(8) << method_name(m) << std::setw(16) << last.err << std::setw(20)
        << (t ? shown.str() : "-") << last.skips << '\n';
  }
  write_text_file((dir / "compare.csv").string(), table.str());
  write_json(dir / "manifest.json", manifest("compare", cfg, {{"delta", cfg.delta()}}));
  return kExitOk;
}

int cmd_trials(const ExperimentConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_dir(cfg);
  std::vector<TrialSummary> all;
  for (Method m : cfg.methods) {
    const TrialSet set = run_trials(cfg.trial_config(m), cfg.seeds, cfg.bin_width, cfg.workers);
    write_json(dir / (std::string("histogram_") + method_name(m) + ".json"),
               histogram_to_json(set.histogram));
    long converged = 0;
    for (const auto& t : set.trials) converged += t.converged;
    out << method_name(m) << ": converged " << converged << "/" << set.trials.size()
        << ", median exchanges " << median_exchanges(set.trials) << " (" << unit_name(cfg.unit)
        << ")\n";
    all.insert(all.end(), set.trials.begin(), set.trials.end());
  }
  std::ostringstream csv;
  write_summary_csv(csv, all);
  write_text_file((dir / "summary.csv").string(), csv.str());
  write_json(dir / "manifest.json", manifest("trials", cfg, {{"delta", cfg.delta()}}));
  return kExitOk;
}

/// Registers a flag whose value, when given, overrides the config file.
struct FlagSet {
  std::vector<std::function<void(ExperimentConfig&)>> apply;

  template <class T, class F>
  CLI::Option* add(CLI::App* app, const std::string& name, F setter, const std::string& desc) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt;
    if constexpr (std::is_same_v<T, bool>)
      opt = app->add_flag(name, *holder, desc);
    else
      opt = app->add_option(name, *holder, desc);
    apply.push_back([opt, holder, setter](ExperimentConfig& c) {
      if (opt->count() > 0) setter(c, *holder);
    });
    return opt;
  }
};

void add_flags(CLI::App* app, FlagSet& f, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config (a manifest works too); flags override it");
  f.add<std::vector<std::string>>(app, "--method", [](ExperimentConfig& c, const auto& v) {
    c.methods = parse_methods(v);
  }, "dbfgs or dd; repeat or comma-separate for several")->delimiter(',');
  f.add<int>(app, "--n", [](ExperimentConfig& c, int v) { c.n = v; }, "number of nodes");
  f.add<int>(app, "--p", [](ExperimentConfig& c, int v) { c.p = v; }, "variable dimension");
  f.add<std::string>(app, "--graph", [](ExperimentConfig& c, const std::string& v) { c.graph = v; },
                     "cycleK (K-regular ring lattice)");
  f.add<std::string>(app, "--cond", [](ExperimentConfig& c, const std::string& v) {
    c.cond = parse_regime(v);
  }, "condition regime: 1e2 or 1e0");
  f.add<double>(app, "--gamma", [](ExperimentConfig& c, double v) { c.gamma = v; }, "BFGS regularization");
  f.add<double>(app, "--Gamma", [](ExperimentConfig& c, double v) { c.big_gamma = v; },
                "inverse regularization");
  f.add<double>(app, "--init-scale", [](ExperimentConfig& c, double v) { c.init_scale = v; },
                "B(0) = init_scale I");
  f.add<double>(app, "--eps", [](ExperimentConfig& c, double v) { c.eps_dbfgs = c.eps_dd = v; },
                "stepsize for every selected method");
  f.add<double>(app, "--eps-dbfgs", [](ExperimentConfig& c, double v) { c.eps_dbfgs = v; },
                "D-BFGS stepsize");
  f.add<double>(app, "--eps-dd", [](ExperimentConfig& c, double v) { c.eps_dd = v; },
                "dual descent stepsize");
  f.add<long>(app, "--iters", [](ExperimentConfig& c, long v) { c.iters = v; }, "synchronous iterations");
  f.add<double>(app, "--threshold", [](ExperimentConfig& c, double v) { c.threshold = v; },
                "convergence level on e(t)");
  f.add<bool>(app, "--async", [](ExperimentConfig& c, bool v) { c.async = v; },
              "use the asynchronous engine");
  f.add<std::string>(app, "--variant", [](ExperimentConfig& c, const std::string& v) {
    c.variant = parse_variant(v);
  }, "async variant: single or phased");
  f.add<double>(app, "--drift-mean", [](ExperimentConfig& c, double v) { c.drift_mean = v; },
                "mean availability gap");
  f.add<double>(app, "--drift-std", [](ExperimentConfig& c, double v) { c.drift_std = v; },
                "availability gap spread");
  f.add<int>(app, "--B-bound", [](ExperimentConfig& c, int v) { c.staleness_bound = v; },
             "partial-asynchrony bound, 0 disables");
  f.add<long>(app, "--ticks", [](ExperimentConfig& c, long v) { c.ticks = v; }, "asynchronous ticks");
  f.add<std::string>(app, "--seeds", [](ExperimentConfig& c, const std::string& v) {
    c.seeds = parse_seed_list(v);
  }, "seed list, e.g. 1-100 or 3,7");
  f.add<std::string>(app, "--unit", [](ExperimentConfig& c, const std::string& v) {
    c.unit = parse_unit(v);
  }, "exchange unit: rounds or messages");
  f.add<double>(app, "--bin-width", [](ExperimentConfig& c, double v) { c.bin_width = v; },
                "histogram bin width");
  f.add<int>(app, "--workers", [](ExperimentConfig& c, int v) { c.workers = v; }, "trial threads");
  f.add<std::string>(app, "--out", [](ExperimentConfig& c, const std::string& v) { c.out = v; },
                     "output directory (relative paths go below $DBFGS_OUTPUT_ROOT)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"D-BFGS consensus optimization simulator", "dbfgs"};
  app.require_subcommand(1);
  struct Sub {
    CLI::App* app;
    FlagSet flags;
    std::string config_path;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& [name, desc] :
       {std::pair{"run", "run one method on one instance and write its trace"},
        std::pair{"compare", "run several methods on one instance side by side"},
        std::pair{"trials", "run independent trials and write summaries and histograms"}}) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, desc);
    add_flags(s->app, s->flags, s->config_path);
    subs.push_back(std::move(s));
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    for (const auto& s : subs) {
      if (!s->app->parsed()) continue;
      ExperimentConfig cfg;
      if (!s->config_path.empty()) {
        Json j;
        try {
          j = Json::parse(read_text_file(s->config_path));
        } catch (const Json::exception& e) {
          throw ConfigError(std::string("config: ") + e.what());
        }
        cfg = ExperimentConfig::from_json(j);
      }
      for (const auto& f : s->flags.apply) f(cfg);
      cfg.validate();
      const std::string name = s->app->get_name();
      if (name == "run") return cmd_run(cfg, out);
      if (name == "compare") return cmd_compare(cfg, out);
      return cmd_trials(cfg, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace dbfgs
