#pragma once

#include "dbfgs/io.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dbfgs {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitDivergence = 2,
  kExitIo = 3,
};

/// Resolved experiment parameters. The JSON form uses the field names below
/// and is accepted back by --config.
struct ExperimentConfig {
  std::vector<Method> methods{Method::dbfgs};
  int n = 50;
  int p = 4;
  /// "cycleK": K-regular ring lattice.
  std::string graph = "cycle4";
  /// Default 1e2 synchronous, 1e0 asynchronous.
  std::optional<ConditionRegime> cond;
  double gamma = 1e-2;
  double big_gamma = 1e-3;
  double init_scale = 1.0;
  /// Stepsizes per method; run requires an explicit value.
  std::optional<double> eps_dbfgs;
  std::optional<double> eps_dd;
  /// Iteration cap; default 500, or 10000 for trials (which stop at the
  /// convergence level).
  std::optional<long> iters;
  /// run: stop once err <= threshold. compare, trials: convergence level
  /// (default 1e-2 synchronous, 5e-2 asynchronous).
  std::optional<double> threshold;
  bool async = false;
  AsyncVariant variant = AsyncVariant::single_exchange;
  double drift_mean = 3.0;
  double drift_std = 1.0;
  int staleness_bound = 12;
  /// Asynchronous ticks to simulate (also the schedule horizon).
  long ticks = 10000;
  std::vector<std::uint64_t> seeds{1};
  ExchangeUnit unit = ExchangeUnit::rounds;
  double bin_width = 10.0;
  int workers = 1;
  std::string out = "dbfgs_out";

  Json to_json() const;
  /// Missing keys keep their defaults; a manifest's "config" object is accepted too.
  static ExperimentConfig from_json(const Json& j);

  /// Field-level checks; throws ConfigError whose message starts with the field.
  void validate() const;
  /// Stepsize of method m, falling back to the default of the mode unless
  /// required is set.
  double stepsize(Method m, bool required) const;
  double delta() const;
  ConditionRegime regime() const;
  long iterations(bool trials) const;
  Graph make_graph() const;
  SyncRunConfig sync_config(Method m, bool required_eps, bool trials = false) const;
  AsyncRunConfig async_config(Method m, bool required_eps) const;
  ScheduleParams schedule_params(std::uint64_t seed) const;
  TrialConfig trial_config(Method m) const;
};

/// "1,2,5-8" -> {1,2,5,6,7,8}.
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Output directory: `out` as given when absolute, otherwise below
/// $DBFGS_OUTPUT_ROOT when that is set.
std::string resolve_output_dir(const std::string& out);

/// Entry point of the command-line tool (argv[0] included in args).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dbfgs
