// noisymax command-line entry point: validate, expand, infer, gen, bench.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisymax/bench.hpp"
#include "noisymax/error.hpp"
#include "noisymax/factorize.hpp"
#include "noisymax/infer.hpp"
#include "noisymax/model.hpp"

using namespace noisymax;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(ErrorKind::InvalidArgument, "evidence must look like VAR=STATE, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<StrategyKind> parse_strategies(const std::string& text) {
  if (text == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<StrategyKind> out;
  for (const auto& name : split(text, ',')) {
    auto s = parse_strategy(name);
    if (!s) throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + name + "'");
    out.push_back(*s);
  }
  return out;
}

std::vector<HeuristicKind> parse_heuristics(const std::string& text) {
  if (text == "all") return {std::begin(kAllHeuristics), std::end(kAllHeuristics)};
  std::vector<HeuristicKind> out;
  for (const auto& name : split(text, ',')) {
    auto h = parse_heuristic(name);
    if (!h) throw Error(ErrorKind::InvalidArgument, "unknown heuristic '" + name + "'");
    out.push_back(*h);
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

std::uint64_t multiplication_guard(std::uint64_t flag) {
  if (flag != 0) return flag;
  if (const char* env = std::getenv("NOISYMAX_GUARD_MULTS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      throw Error(ErrorKind::InvalidArgument, "NOISYMAX_GUARD_MULTS must be a positive integer");
    }
    return v;
  }
  return kDefaultMultiplicationGuard;
}

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << ordered_json{{"error", kind}, {"message", message}}.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference over networks with noisy-max distributions"};
  app.require_subcommand(1);

  std::string file;

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a network file");
  validate_cmd->add_option("file", file, "Network JSON")->required();

  auto* expand_cmd = app.add_subcommand("expand", "Expand noisy-max nodes and report sizes");
  std::string expand_strategy = "all";
  std::string report_kind = "sizes";
  expand_cmd->add_option("file", file, "Network JSON")->required();
  expand_cmd->add_option("--strategy", expand_strategy, "Strategy name, comma list, or 'all'");
  expand_cmd->add_option("--report", report_kind, "sizes | factors")->check(CLI::IsMember({"sizes", "factors"}));

  auto* infer_cmd = app.add_subcommand("infer", "Posterior over target variables");
  std::vector<std::string> targets;
  std::vector<std::string> evidence;
  std::string infer_strategy = "multiplicative";
  std::string infer_heuristic = "min-size";
  bool want_stats = false;
  infer_cmd->add_option("file", file, "Network JSON")->required();
  infer_cmd->add_option("--target", targets, "Target variable (repeatable)")->required();
  infer_cmd->add_option("--evidence", evidence, "Observation VAR=STATE (repeatable)");
  infer_cmd->add_option("--strategy", infer_strategy, "Expansion strategy");
  infer_cmd->add_option("--heuristic", infer_heuristic, "Elimination heuristic");
  infer_cmd->add_flag("--stats", want_stats, "Also print elimination statistics");

  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic network");
  GeneratorSpec spec;
  std::string kind = "bn2o";
  std::string out_path;
  gen_cmd->add_option("--kind", kind, "bn2o | multilevel")->check(CLI::IsMember({"bn2o", "multilevel"}));
  gen_cmd->add_option("--seed", spec.seed, "RNG seed");
  gen_cmd->add_option("--diseases", spec.diseases, "Root (disease) count");
  gen_cmd->add_option("--findings", spec.findings, "Noisy-max node count");
  gen_cmd->add_option("--max-parents", spec.max_parents, "Largest fan-in");
  gen_cmd->add_option("--effect-domain-size", spec.effect_domain_size, "States per noisy-max effect");
  gen_cmd->add_option("--link-density", spec.link_density, "Edge probability (multilevel)");
  gen_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  auto* bench_cmd = app.add_subcommand("bench", "Run every query under each strategy and heuristic");
  std::string bench_strategies = "all";
  std::string bench_heuristics = "min-size";
  std::vector<std::string> bench_queries;
  std::string report_path;
  std::string csv_path;
  std::uint64_t guard_mults = 0;
  std::uint64_t guard_entries = kDefaultTableEntryGuard;
  bool no_timings = false;
  bench_cmd->add_option("file", file, "Network JSON")->required();
  bench_cmd->add_option("--strategies", bench_strategies, "Comma list or 'all'");
  bench_cmd->add_option("--heuristics", bench_heuristics, "Comma list or 'all'");
  bench_cmd->add_option("--query", bench_queries, "TARGETS[|VAR=STATE,...] (repeatable; default all marginals)");
  bench_cmd->add_option("--out", report_path, "Report JSON (default stdout)");
  bench_cmd->add_option("--csv", csv_path, "Also write a CSV report");
  bench_cmd->add_option("--guard-mults", guard_mults, "Multiplication guard per cell");
  bench_cmd->add_option("--guard-entries", guard_entries, "Largest table per cell");
  bench_cmd->add_flag("--no-timings", no_timings, "Omit wall-clock timings from the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ordered_json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*validate_cmd) {
      Network net = load_network(file);
      std::cout << ordered_json{{"status", "ok"}, {"variables", net.size()}, {"noisy_max_nodes", net.noisy_max_count()}}.dump()
                << "\n";
    } else if (*expand_cmd) {
      Network net = load_network(file);
      if (report_kind == "sizes") {
        std::vector<SizeReport> reports;
        for (StrategyKind s : parse_strategies(expand_strategy)) reports.push_back(expand(net, s).report);
        std::cout << size_report_json(reports);
      } else {
        const auto strategies = parse_strategies(expand_strategy);
        ordered_json all = ordered_json::array();
        for (StrategyKind s : strategies) {
          Expansion e = expand(net, s);
          ordered_json factors = ordered_json::array();
          for (const Factor& f : e.network.factors) {
            ordered_json scope = ordered_json::array();
            for (VarId v : f.scope()) scope.push_back(e.network.variables[index(v)].name);
            factors.push_back({{"scope", std::move(scope)}, {"values", f.values()}});
          }
          all.push_back({{"strategy", std::string(to_string(s))}, {"factors", std::move(factors)}});
        }
        std::cout << all.dump(2) << "\n";
      }
    } else if (*infer_cmd) {
      Network net = load_network(file);
      auto strategy = parse_strategy(infer_strategy);
      if (!strategy) throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + infer_strategy + "'");
      auto heuristic = parse_heuristic(infer_heuristic);
      if (!heuristic) throw Error(ErrorKind::InvalidArgument, "unknown heuristic '" + infer_heuristic + "'");
      std::vector<std::pair<std::string, std::string>> obs;
      for (const auto& e : evidence) obs.push_back(parse_assignment(e));
      const Query q = make_query(net, targets, obs);

      const auto start = std::chrono::steady_clock::now();
      Expansion e = expand(net, *strategy);
      QueryOptions options;
      options.limits.max_multiplications = multiplication_guard(0);
      Posterior post = query_posterior(e.network, q, *heuristic, options);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

      ordered_json dist = ordered_json::object();
      std::vector<std::size_t> cell(q.targets.size(), 0);
      std::size_t i = 0;
      do {
        std::string key;
        for (std::size_t k = 0; k < cell.size(); ++k) key += (k ? "," : "") + net.variable(q.targets[k]).states[cell[k]];
        dist[key] = post.distribution.values()[i++];
      } while (next_assignment(cell, post.distribution.cards()));
      ordered_json out{{"targets", targets}, {"distribution", std::move(dist)}};
      if (want_stats) {
        std::string label;
        for (const auto& t : targets) label += (label.empty() ? "" : ",") + t;
        out["stats"] = ordered_json::parse(stats_json(label, *strategy, *heuristic, post.stats, ms));
      }
      std::cout << out.dump() << "\n";
    } else if (*gen_cmd) {
      spec.kind = *parse_generator_kind(kind);
      const std::string text = serialize_network(generate(spec));
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_file(out_path, text);
      }
    } else if (*bench_cmd) {
      Network net = load_network(file);
      BenchOptions options;
      options.strategies = parse_strategies(bench_strategies);
      options.heuristics = parse_heuristics(bench_heuristics);
      options.limits.max_multiplications = multiplication_guard(guard_mults);
      options.limits.max_table_entries = guard_entries;
      for (const auto& text : bench_queries) {
        const auto bar = text.find('|');
        const auto names = split(text.substr(0, bar), ',');
        std::vector<std::pair<std::string, std::string>> obs;
        if (bar != std::string::npos) {
          for (const auto& a : split(text.substr(bar + 1), ',')) obs.push_back(parse_assignment(a));
        }
        options.queries.push_back(make_query(net, names, obs));
      }
      BenchReport report = run_benchmark(net, options);
      const std::string json = report_json(report, !no_timings);
      if (report_path.empty()) {
        std::cout << json;
      } else {
        write_file(report_path, json);
      }
      if (!csv_path.empty()) write_file(csv_path, report_csv(report));
    }
  } catch (const AgreementError& e) {
    std::cerr << ordered_json{{"error", to_string(e.kind())}, {"message", e.what()}, {"query", e.query()}, {"deviation", e.deviation()}}.dump()
              << "\n";
    return 1;
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
