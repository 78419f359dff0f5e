#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "noisymax/bench.hpp"
#include "noisymax/error.hpp"

namespace noisymax {

std::size_t decade_bucket(std::uint64_t multiplications) {
  std::size_t k = 0;
  while (multiplications >= 10) {
    multiplications /= 10;
    ++k;
  }
  return k;
}

std::string decade_label(std::size_t bucket) {
  std::string lo = bucket == 0 ? "0" : "1" + std::string(bucket, '0');
  return lo + "-" + std::string(bucket + 1, '9');
}

namespace {

std::string query_label(const FactorNetwork& net, const Query& q) {
  std::string label;
  for (VarId t : q.targets) label += (label.empty() ? "" : ",") + net.variables[index(t)].name;
  bool first = true;
  for (const auto& [v, s] : q.evidence) {
    const auto& var = net.variables[index(v)];
    label += (first ? "|" : ",") + var.name + "=" + var.states[s];
    first = false;
  }
  return label;
}

double max_abs_difference(const Factor& a, const Factor& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

std::string cell_name(StrategyKind s, HeuristicKind h) {
  return std::string(to_string(s)) + "/" + std::string(to_string(h));
}

}  // namespace

BenchReport run_benchmark(const Network& net, const BenchOptions& options) {
  std::vector<Query> queries = options.queries;
  if (queries.empty()) {
    for (const auto& v : net.variables()) queries.push_back(Query{{v.id}, {}});
  }

  struct Prepared {
    StrategyKind strategy;
    std::optional<FactorNetwork> network;
    std::string abort_reason;
  };
  std::vector<Prepared> prepared;
  for (StrategyKind s : options.strategies) {
    Prepared p{s, std::nullopt, {}};
    try {
      Expansion e = expand(net, s, ExpansionOptions{options.limits.max_table_entries});
      if (options.tamper) options.tamper(s, e.network);
      p.network = std::move(e.network);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::GuardExceeded) throw;
      p.abort_reason = err.what();
    }
    prepared.push_back(std::move(p));
  }

  BenchReport report;
  report.query_count = queries.size();
  QueryOptions qopts;
  qopts.limits = options.limits;

  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const Query& q = queries[qi];
    std::string label;
    std::optional<Factor> reference;
    std::string reference_cell;
    for (const Prepared& p : prepared) {
      for (HeuristicKind h : options.heuristics) {
        BenchRow row;
        row.query = qi;
        row.strategy = p.strategy;
        row.heuristic = h;
        if (!p.network) {
          row.status = CellStatus::Aborted;
          row.abort_reason = p.abort_reason;
        } else {
          if (label.empty()) label = query_label(*p.network, q);
          const auto start = std::chrono::steady_clock::now();
          try {
            Posterior post = query_posterior(*p.network, q, h, qopts);
            row.multiplications = post.stats.multiplications;
            row.peak_table_entries = post.stats.peak_table_entries;
            row.relevant_vars = post.stats.relevant_vars;
            if (!reference) {
              reference = post.distribution;
              reference_cell = cell_name(p.strategy, h);
            } else {
              const double dev = max_abs_difference(*reference, post.distribution);
              if (!(dev <= options.agreement_tolerance)) {
                std::ostringstream msg;
                msg << "query " << label << ": " << cell_name(p.strategy, h) << " deviates from "
                    << reference_cell << " by " << dev;
                throw AgreementError(label, dev, msg.str());
              }
            }
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::GuardExceeded) throw;
            row.status = CellStatus::Aborted;
            row.abort_reason = err.what();
          }
          row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        report.rows.push_back(std::move(row));
      }
    }
    for (auto& row : report.rows) {
      if (row.query == qi) row.label = label;
    }
  }

  for (StrategyKind s : options.strategies) {
    for (HeuristicKind h : options.heuristics) {
      CostHistogram hist{s, h, {}, 0, 0};
      for (const auto& row : report.rows) {
        if (row.strategy != s || row.heuristic != h) continue;
        if (row.status == CellStatus::Aborted) {
          ++hist.aborted;
          continue;
        }
        const std::size_t b = decade_bucket(row.multiplications);
        if (hist.buckets.size() <= b) hist.buckets.resize(b + 1, 0);
        ++hist.buckets[b];
        hist.total_multiplications += row.multiplications;
      }
      if (hist.buckets.empty()) hist.buckets.push_back(0);
      report.histograms.push_back(std::move(hist));
    }
  }
  return report;
}

std::string report_json(const BenchReport& report, bool include_timings) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["query_count"] = report.query_count;
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json row{{"query", r.query},
                     {"label", r.label},
                     {"strategy", std::string(to_string(r.strategy))},
                     {"heuristic", std::string(to_string(r.heuristic))},
                     {"status", r.status == CellStatus::Completed ? "completed" : "aborted"},
                     {"multiplications", r.multiplications},
                     {"peak_table_entries", r.peak_table_entries},
                     {"relevant_vars", r.relevant_vars}};
    if (r.status == CellStatus::Aborted) row["abort_reason"] = r.abort_reason;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);

  ordered_json hists = ordered_json::array();
  for (const auto& h : report.histograms) {
    ordered_json buckets = ordered_json::array();
    for (std::size_t k = 0; k < h.buckets.size(); ++k) {
      buckets.push_back({{"mults", decade_label(k)}, {"queries", h.buckets[k]}});
    }
    hists.push_back({{"strategy", std::string(to_string(h.strategy))},
                     {"heuristic", std::string(to_string(h.heuristic))},
                     {"buckets", std::move(buckets)},
                     {"aborted", h.aborted},
                     {"total_multiplications", h.total_multiplications}});
  }
  doc["histograms"] = std::move(hists);

  if (include_timings) {
    ordered_json timings = ordered_json::array();
    for (const auto& r : report.rows) {
      timings.push_back({{"query", r.query},
                         {"strategy", std::string(to_string(r.strategy))},
                         {"heuristic", std::string(to_string(r.heuristic))},
                         {"wall_time_ms", r.wall_time_ms}});
    }
    doc["timings"] = std::move(timings);
  }
  return doc.dump(2) + "\n";
}

std::string report_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "query,strategy,heuristic,mults,peak,time_ms,status\n";
  for (const auto& r : report.rows) {
    out << '"' << r.label << "\"," << to_string(r.strategy) << ',' << to_string(r.heuristic) << ','
        << r.multiplications << ',' << r.peak_table_entries << ',' << r.wall_time_ms << ','
        << (r.status == CellStatus::Completed ? "completed" : "aborted") << '\n';
  }
  return out.str();
}

std::string stats_json(const std::string& query, StrategyKind strategy, HeuristicKind heuristic,
                       const EliminationStats& stats, double wall_time_ms) {
  nlohmann::ordered_json j{{"query", query},
                           {"strategy", std::string(to_string(strategy))},
                           {"heuristic", std::string(to_string(heuristic))},
                           {"multiplications", stats.multiplications},
                           {"peak_table_entries", stats.peak_table_entries},
                           {"relevant_vars", stats.relevant_vars},
                           {"wall_time_ms", wall_time_ms}};
  return j.dump();
}

}  // namespace noisymax
