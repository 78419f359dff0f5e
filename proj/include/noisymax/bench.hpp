#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noisymax/error.hpp"
#include "noisymax/factorize.hpp"
#include "noisymax/infer.hpp"
#include "noisymax/model.hpp"

namespace noisymax {

/// splitmix64 stream. Fixed by algorithm so generated networks are identical
/// across platforms and implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] by modulo reduction.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept { return lo + next() % (hi - lo + 1); }

 private:
  std::uint64_t state_;
};

enum class GeneratorKind { Bn2o, Multilevel };

std::string_view to_string(GeneratorKind k);
std::optional<GeneratorKind> parse_generator_kind(std::string_view name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Bn2o;
  std::uint64_t seed = 1;
  std::size_t diseases = 10;
  std::size_t findings = 10;
  std::size_t max_parents = 3;
  std::size_t effect_domain_size = 2;
  double link_density = 0.5;
};

/// Synthetic network; a pure function of `spec`. Throws InvalidArgument on an
/// infeasible spec (max_parents > diseases, zero counts, ...).
Network generate(const GeneratorSpec& spec);

enum class CellStatus { Completed, Aborted };

struct BenchRow {
  std::size_t query = 0;
  std::string label;
  StrategyKind strategy{};
  HeuristicKind heuristic{};
  CellStatus status = CellStatus::Completed;
  std::uint64_t multiplications = 0;
  std::uint64_t peak_table_entries = 0;
  std::size_t relevant_vars = 0;
  double wall_time_ms = 0.0;
  std::string abort_reason;
};

/// Decade-binned multiplication counts for one (strategy, heuristic) pair:
/// buckets[k] counts completed queries with cost in [10^k, 10^(k+1)), bucket 0
/// also holding zero. Aborted cells are counted separately, so buckets plus
/// aborted equals the query count.
struct CostHistogram {
  StrategyKind strategy{};
  HeuristicKind heuristic{};
  std::vector<std::uint64_t> buckets;
  std::uint64_t aborted = 0;
  std::uint64_t total_multiplications = 0;
};

std::size_t decade_bucket(std::uint64_t multiplications);
std::string decade_label(std::size_t bucket);

struct BenchReport {
  std::size_t query_count = 0;
  std::vector<BenchRow> rows;
  std::vector<CostHistogram> histograms;
};

struct BenchOptions {
  std::vector<StrategyKind> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<HeuristicKind> heuristics{HeuristicKind::MinSize};
  /// Empty means one prior-marginal query per source variable.
  std::vector<Query> queries;
  Limits limits{};
  double agreement_tolerance = 1e-9;
  /// Test hook applied to each expanded network before queries run.
  std::function<void(StrategyKind, FactorNetwork&)> tamper;
};

/// Thrown when completed cells of one query disagree beyond tolerance.
class AgreementError : public Error {
 public:
  AgreementError(std::string query, double deviation, const std::string& message)
      : Error(ErrorKind::AgreementFailure, message), query_(std::move(query)), deviation_(deviation) {}

  const std::string& query() const noexcept { return query_; }
  double deviation() const noexcept { return deviation_; }

 private:
  std::string query_;
  double deviation_;
};

/// Runs every (query, strategy, heuristic) cell. Guard violations abort the
/// cell (or, during expansion, every cell of that strategy) without failing
/// the run; disagreement among completed cells throws AgreementError.
BenchReport run_benchmark(const Network& net, const BenchOptions& options);

/// JSON report. Timings live under "timings" and are omitted when
/// `include_timings` is false, leaving the rest byte-reproducible.
std::string report_json(const BenchReport& report, bool include_timings = true);

/// CSV with columns query,strategy,heuristic,mults,peak,time_ms,status.
std::string report_csv(const BenchReport& report);

/// JSON stats line for a single query.
std::string stats_json(const std::string& query, StrategyKind strategy, HeuristicKind heuristic,
                       const EliminationStats& stats, double wall_time_ms);

}  // namespace noisymax
