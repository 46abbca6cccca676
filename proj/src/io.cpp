#include "dbfgs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dbfgs {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_graph(std::ostream& os, const Graph& g) {
  const auto edges = g.undirected_edges();
  os << g.num_nodes() << ' ' << edges.size() << '\n';
  for (const auto& [i, j] : edges) os << i << ' ' << j << '\n';
}

namespace {

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] != '#') return true;
  }
  return false;
}

}  // namespace

Graph read_graph(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw IoError("graph: missing header");
  int n = 0;
  long m = 0;
  std::istringstream head(line);
  if (!(head >> n >> m) || m < 0) throw IoError("graph: bad header '" + line + "'");
  std::vector<std::pair<int, int>> edges;
  while (next_line(is, line)) {
    std::istringstream row(line);
    int i = 0, j = 0;
    if (!(row >> i >> j)) throw IoError("graph: bad edge line '" + line + "'");
    edges.emplace_back(i, j);
  }
  if (static_cast<long>(edges.size()) != m)
    throw IoError("graph: header announces " + std::to_string(m) + " edges, found " +
                  std::to_string(edges.size()));
  try {
    return Graph(n, edges);
  } catch (const ConfigError& e) {
    throw IoError(std::string("graph: ") + e.what());
  }
}

Json problem_to_json(const ProblemInstance& prob) {
  Json a = Json::array(), b = Json::array();
  for (int i = 0; i < prob.num_nodes(); ++i) {
    const auto* q = prob.quadratic(i);
    if (!q) throw IoError("problem: node " + std::to_string(i) + " is not quadratic");
    a.push_back(std::vector<double>(q->diag().begin(), q->diag().end()));
    b.push_back(std::vector<double>(q->linear().begin(), q->linear().end()));
  }
  Json j{{"n", prob.num_nodes()}, {"p", prob.dim()}, {"a", a}, {"b", b}};
  j["seed"] = prob.seed ? Json(*prob.seed) : Json(nullptr);
  j["regime"] = prob.regime ? Json(regime_name(*prob.regime)) : Json(nullptr);
  return j;
}

ProblemInstance problem_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>(), p = j.at("p").get<int>();
    const auto& a = j.at("a");
    const auto& b = j.at("b");
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
      throw IoError("problem: a and b must hold n rows");
    std::vector<Vec> diags, bs;
    for (int i = 0; i < n; ++i) {
      auto ai = a[i].get<std::vector<double>>();
      auto bi = b[i].get<std::vector<double>>();
      if (static_cast<int>(ai.size()) != p || static_cast<int>(bi.size()) != p)
        throw IoError("problem: row " + std::to_string(i) + " must hold p entries");
      diags.push_back(Eigen::Map<Vec>(ai.data(), p));
      bs.push_back(Eigen::Map<Vec>(bi.data(), p));
    }
    ProblemInstance prob = make_quadratic_instance(diags, bs);
    if (j.contains("seed") && !j["seed"].is_null()) prob.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("regime") && !j["regime"].is_null())
      prob.regime = parse_regime(j["regime"].get<std::string>());
    return prob;
  } catch (const Json::exception& e) {
    throw IoError(std::string("problem: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("problem: ") + e.what());
  }
}

Json schedule_to_json(const ScheduleParams& params) {
  return Json{{"seed", params.seed},
              {"mean", params.mean_gap},
              {"std", params.stddev_gap},
              {"B_bound", params.staleness_bound},
              {"horizon", params.horizon}};
}

ScheduleParams schedule_from_json(const Json& j) {
  try {
    ScheduleParams p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.mean_gap = j.at("mean").get<double>();
    p.stddev_gap = j.at("std").get<double>();
    p.staleness_bound = j.at("B_bound").get<int>();
    p.horizon = j.at("horizon").get<long>();
    return p;
  } catch (const Json::exception& e) {
    throw IoError(std::string("schedule: ") + e.what());
  }
}

void write_trace_csv(std::ostream& os, const Trace& trace, bool async) {
  os << "t,h,grad_norm,err,comm_rounds,comm_msgs,skips";
  if (async) os << ",delivered_msgs,max_staleness";
  os << '\n';
  for (const auto& r : trace) {
    os << r.t << ',' << format_double(r.h) << ',' << format_double(r.grad_norm) << ','
       << format_double(r.err) << ',' << format_double(r.comm_rounds) << ',' << r.comm_msgs << ','
       << r.skips;
    if (async) os << ',' << r.delivered_msgs << ',' << r.max_staleness;
    os << '\n';
  }
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("trace: missing header");
  const bool async = line.find("delivered_msgs") != std::string::npos;
  Trace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    if (f.size() != (async ? 9u : 7u)) throw IoError("trace: bad row '" + line + "'");
    try {
      IterationRecord r;
      r.t = std::stol(f[0]);
      r.h = std::stod(f[1]);
      r.grad_norm = std::stod(f[2]);
      r.err = std::stod(f[3]);
      r.comm_rounds = std::stod(f[4]);
      r.comm_msgs = std::stol(f[5]);
      r.skips = std::stol(f[6]);
      if (async) {
        r.delivered_msgs = std::stol(f[7]);
        r.max_staleness = std::stol(f[8]);
      }
      trace.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError("trace: bad row '" + line + "'");
    }
  }
  return trace;
}

void write_summary_csv(std::ostream& os, std::span<const TrialSummary> trials) {
  os << "seed,method,converged,iters,exchanges,final_err,skips\n";
  for (const auto& s : trials) {
    os << s.seed << ',' << method_name(s.method) << ',' << (s.converged ? 1 : 0) << ',';
    if (s.iters) os << *s.iters;
    os << ',';
    if (s.exchanges) os << format_double(*s.exchanges);
    os << ',' << format_double(s.final_err) << ',' << s.skips << '\n';
  }
}

Json histogram_to_json(const Histogram& h) {
  Json bins = Json::array();
  for (const auto& b : h.bins) bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  return Json{{"bin_width", h.bin_width}, {"bins", bins}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

}  // namespace dbfgs
