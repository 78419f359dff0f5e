#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noisymax/factor.hpp"
#include "noisymax/model.hpp"

namespace noisymax {

enum class StrategyKind { Trivial, ParentDivorcing, Temporal, Multiplicative };

inline constexpr StrategyKind kAllStrategies[] = {StrategyKind::Trivial, StrategyKind::ParentDivorcing,
                                                  StrategyKind::Temporal, StrategyKind::Multiplicative};

std::string_view to_string(StrategyKind s);
/// Accepts "trivial", "parent-divorcing", "temporal", "multiplicative".
std::optional<StrategyKind> parse_strategy(std::string_view name);

/// Two states of a multiplicative-factorization intermediate variable. V
/// carries the cumulative contribution mass, I carries the constant one.
enum class CumulativeState : std::size_t { V = 0, I = 1 };

inline const std::vector<std::string> kCumulativeStateNames{"V", "I"};

/// Upper bound on enumeration in oracle_cpd (contribution tuples per cause assignment).
inline constexpr std::uint64_t kOracleEnumerationGuard = 10'000'000;
/// Default bound on any single table produced by an expansion.
inline constexpr std::uint64_t kDefaultExpansionTableGuard = 10'000'000;

/// Reads variable domains by id. Expansions allocate new ids starting at
/// `next_id` and record their domains in the result.
struct VariableTable {
  std::vector<Variable> variables;

  std::size_t size_of(VarId v) const { return variables.at(index(v)).size(); }
  const Variable& operator[](VarId v) const { return variables.at(index(v)); }
};

struct ExpansionResult {
  std::vector<Factor> factors;
  std::vector<Variable> auxiliary_variables;
  /// Entries of the tables that encode the combination (link tables excluded).
  std::uint64_t encoding_entry_count = 0;
  /// Entries of every produced factor.
  std::uint64_t total_entry_count = 0;
};

/// Exact P(E | C_1..C_n) by summing the product of link probabilities over
/// every contribution tuple whose max equals each effect value. The leak, if
/// present, joins the tuple as a cause fixed in its single state. Scope is
/// [C_1..C_n, E]. Throws GuardExceeded when m^(n+leak) > kOracleEnumerationGuard.
Factor oracle_cpd(const NoisyMaxCpd& cpd, const VariableTable& domains);

/// Cumulative link mass used by the multiplicative factorization: 1 for
/// state I, and sum_{a < prefix_len} rows[cause_state][a] for state V.
/// Throws OutOfRange unless 1 <= prefix_len <= m-1 and cause_state is valid.
double cumulative_density(const LinkTable& link, std::size_t prefix_len, CumulativeState state,
                          std::size_t cause_state);

/// Options shared by the expanders.
struct ExpansionOptions {
  std::uint64_t max_table_entries = kDefaultExpansionTableGuard;
  /// When false, the expansion is planned (auxiliaries and factor scopes are
  /// decided and counted) but no table is allocated and `factors` stays empty.
  bool materialize = true;
};

ExpansionResult expand_trivial(const NoisyMaxCpd& cpd, const VariableTable& domains,
                               const ExpansionOptions& options = {});
ExpansionResult expand_parent_divorcing(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                        const ExpansionOptions& options = {});
ExpansionResult expand_temporal(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                const ExpansionOptions& options = {});
ExpansionResult expand_multiplicative(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                      const ExpansionOptions& options = {});

ExpansionResult expand_cpd(const NoisyMaxCpd& cpd, const VariableTable& domains, StrategyKind strategy,
                           const ExpansionOptions& options = {});

/// Network of plain factors. Variables [0, original_count) are the source
/// network's; auxiliaries follow. Every factor and every variable remembers
/// which source node produced it, so queries can drop barren families.
struct FactorNetwork {
  std::vector<Variable> variables;
  std::size_t original_count = 0;
  std::vector<Factor> factors;
  std::vector<VarId> factor_owner;
  std::vector<VarId> variable_owner;
  std::vector<std::vector<VarId>> source_parents;

  bool is_auxiliary(VarId v) const noexcept { return index(v) >= original_count; }
  std::optional<VarId> find(std::string_view name) const;
};

struct NodeSizeReport {
  std::string child;
  StrategyKind strategy{};
  std::uint64_t encoding_entries = 0;
  std::uint64_t total_entries = 0;
  std::size_t auxiliary_count = 0;
};

struct SizeReport {
  std::vector<NodeSizeReport> nodes;
  std::uint64_t encoding_entries = 0;
  std::uint64_t total_entries = 0;
  std::size_t auxiliary_count = 0;
};

struct Expansion {
  FactorNetwork network;
  SizeReport report;
};

/// Replaces every noisy-max node by its expansion under `strategy`. Table
/// distributions pass through unchanged.
Expansion expand(const Network& net, StrategyKind strategy, const ExpansionOptions& options = {});

/// JSON array of per-node records {child, strategy, encoding_entries, total_entries, auxiliary_count}.
std::string size_report_json(const std::vector<SizeReport>& reports);

}  // namespace noisymax
