#pragma once

#include "dbfgs/experiments.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace dbfgs {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double v);

/// Edge list: a header line "n m" (m undirected edges), then one "i j" line
/// per undirected edge. Lines starting with '#' are skipped.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);

/// {n, p, seed, regime, a, b}; a and b are per-node arrays. Doubles
/// round-trip bit-exactly.
Json problem_to_json(const ProblemInstance& prob);
ProblemInstance problem_from_json(const Json& j);

/// {seed, mean, std, B_bound, horizon}.
Json schedule_to_json(const ScheduleParams& params);
ScheduleParams schedule_from_json(const Json& j);

/// Header t,h,grad_norm,err,comm_rounds,comm_msgs,skips, plus
/// delivered_msgs,max_staleness when async.
void write_trace_csv(std::ostream& os, const Trace& trace, bool async);
Trace read_trace_csv(std::istream& is);

/// Header seed,method,converged,iters,exchanges,final_err,skips; missing
/// values are written as empty fields.
void write_summary_csv(std::ostream& os, std::span<const TrialSummary> trials);

/// {bin_width, bins: [{lo, hi, count}]}.
Json histogram_to_json(const Histogram& h);

/// Whole-file helpers; failures throw IoError naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dbfgs
