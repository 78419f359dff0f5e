#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "noisymax/factor.hpp"
#include "noisymax/factorize.hpp"
#include "noisymax/model.hpp"

namespace noisymax {

enum class HeuristicKind { MinSize, MinWeight };

inline constexpr HeuristicKind kAllHeuristics[] = {HeuristicKind::MinSize, HeuristicKind::MinWeight};

std::string_view to_string(HeuristicKind h);
/// Accepts "min-size" and "min-weight".
std::optional<HeuristicKind> parse_heuristic(std::string_view name);

struct Query {
  std::vector<VarId> targets;
  std::map<VarId, std::size_t> evidence;
};

inline constexpr std::uint64_t kDefaultMultiplicationGuard = 100'000'000;
inline constexpr std::uint64_t kDefaultTableEntryGuard = 10'000'000;

struct Limits {
  std::uint64_t max_multiplications = kDefaultMultiplicationGuard;
  std::uint64_t max_table_entries = kDefaultTableEntryGuard;
};

/// Counts scalar multiplications and tracks the largest table built. Throws
/// GuardExceeded before an operation would cross either limit.
class CostMeter {
 public:
  CostMeter() = default;
  explicit CostMeter(Limits limits) : limits_(limits) {}

  void charge_product(std::uint64_t entries);
  void note_table(std::uint64_t entries);

  std::uint64_t multiplications() const noexcept { return multiplications_; }
  std::uint64_t peak_table_entries() const noexcept { return peak_; }

 private:
  Limits limits_{};
  std::uint64_t multiplications_ = 0;
  std::uint64_t peak_ = 0;
};

/// Pointwise product. The result's scope is a's scope followed by b's
/// variables not in a. One multiplication is charged per output entry.
/// Throws InvalidArgument when a shared variable has different sizes.
Factor multiply(const Factor& a, const Factor& b, CostMeter* meter = nullptr);

/// Sums `v` out of `f`. Throws InvalidArgument if v is not in scope.
Factor marginalize(const Factor& f, VarId v, CostMeter* meter = nullptr);

/// Slice of `f` at v = state, with v dropped from the scope.
Factor restrict(const Factor& f, VarId v, std::size_t state);

/// Same table with the scope reordered to `order` (a permutation of f's scope).
Factor reorder(const Factor& f, std::span<const VarId> order);

/// Greedy elimination choice. MinSize scores a variable by the entries of the
/// table left after summing it out of the product of its factors; MinWeight by
/// the entries of that product before summing. Ties go to the smaller id.
VarId choose_next(std::span<const Factor> factors, std::span<const VarId> eliminable, HeuristicKind h);

struct EliminationStats {
  std::uint64_t multiplications = 0;
  std::uint64_t peak_table_entries = 0;
  std::vector<VarId> ordering;
  std::size_t relevant_vars = 0;
};

struct Posterior {
  /// Normalized joint over the query targets, scope in target order.
  Factor distribution;
  EliminationStats stats;
};

struct QueryOptions {
  Limits limits{};
  /// Drop families of variables that are not ancestors of a target or evidence variable.
  bool prune_barren = true;
};

/// Negative entries above this fraction of the table's max magnitude are
/// treated as rounding and clamped to zero.
inline constexpr double kNegativeClampTolerance = 1e-9;

/// Variable elimination with a greedy ordering. Errors: InvalidArgument on a
/// malformed query, ZeroNormalization when the evidence has probability zero,
/// NumericalUnderflow when the normalizer is positive but below the smallest
/// normal double, NegativePosterior when cancellation leaves a clearly
/// negative entry, GuardExceeded from the cost meter.
Posterior query_posterior(const FactorNetwork& net, const Query& q, HeuristicKind h,
                          const QueryOptions& options = {});

/// Same, eliminating in the given order. `order` may list any variables;
/// targets, evidence and pruned variables are skipped, and remaining
/// variables not listed are eliminated afterwards in id order.
Posterior query_posterior(const FactorNetwork& net, const Query& q, std::span<const VarId> order,
                          const QueryOptions& options = {});

/// Sums every variable in `eliminate` out of the product of `factors` using
/// greedy ordering, returning the product of what remains.
Factor sum_out(std::vector<Factor> factors, std::span<const VarId> eliminate, HeuristicKind h,
               CostMeter* meter = nullptr);

inline constexpr std::uint64_t kBruteForceStateGuard = std::uint64_t{1} << 22;

/// Independent reference answer: enumerates the full joint of the source
/// network, with noisy-max families tabulated by oracle_cpd.
Factor brute_force_joint(const Network& net, const Query& q);

/// Convenience: `q` expressed by variable name.
Query make_query(const Network& net, std::span<const std::string> targets,
                 const std::vector<std::pair<std::string, std::string>>& evidence);

}  // namespace noisymax
