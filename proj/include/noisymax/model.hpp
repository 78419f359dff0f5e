#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "noisymax/factor.hpp"

namespace noisymax {

/// Discrete variable. For the effect of a noisy-max node the state order is
/// the order the max operates on (first state is the smallest value).
struct Variable {
  VarId id{};
  std::string name;
  std::vector<std::string> states;

  std::size_t size() const noexcept { return states.size(); }
  friend bool operator==(const Variable&, const Variable&) = default;
};

/// Per-cause contribution table: rows[c][a] = P(contribution = a | cause = c).
struct LinkTable {
  VarId cause{};
  std::vector<std::vector<double>> rows;

  friend bool operator==(const LinkTable&, const LinkTable&) = default;
};

/// Unexpanded noisy-max family. The optional leak behaves as one more cause
/// that is always in its single state.
struct NoisyMaxCpd {
  VarId effect{};
  std::vector<VarId> causes;
  std::vector<LinkTable> links;
  std::optional<std::vector<double>> leak;

  /// Number of contributions combined by the max, counting the leak.
  std::size_t contribution_count() const noexcept { return causes.size() + (leak ? 1 : 0); }

  friend bool operator==(const NoisyMaxCpd&, const NoisyMaxCpd&) = default;
};

/// Ordinary conditional table; scope is parents followed by the child.
struct TableCpd {
  Factor table;

  friend bool operator==(const TableCpd&, const TableCpd&) = default;
};

using Cpd = std::variant<TableCpd, NoisyMaxCpd>;

inline constexpr double kLinkRowTolerance = 1e-12;
inline constexpr double kTableSliceTolerance = 1e-9;

/// Validated Bayesian network. Immutable once constructed, so it can be shared
/// across threads without synchronization.
class Network {
 public:
  Network() = default;

  /// Validates every structural invariant; throws Error on the first failure.
  /// `cpds[i]` is the distribution of `variables[i]`, and variables[i].id must be i.
  Network(std::vector<Variable> variables, std::vector<Cpd> cpds);

  std::size_t size() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const Variable& variable(VarId v) const { return variables_.at(index(v)); }
  const Cpd& cpd(VarId v) const { return cpds_.at(index(v)); }
  const std::vector<VarId>& parents(VarId v) const { return parents_.at(index(v)); }
  std::size_t domain_size(VarId v) const { return variable(v).size(); }
  std::vector<std::size_t> domain_sizes() const;

  std::optional<VarId> find(std::string_view name) const;
  std::size_t noisy_max_count() const noexcept;

  /// Parents before children; ties resolved by id.
  std::vector<VarId> topological_order() const;

  friend bool operator==(const Network& a, const Network& b) {
    return a.variables_ == b.variables_ && a.cpds_ == b.cpds_;
  }

 private:
  std::vector<Variable> variables_;
  std::vector<Cpd> cpds_;
  std::vector<std::vector<VarId>> parents_;
};

/// Parses the JSON network format. Errors: Syntax (with byte offset or JSON
/// path), Cycle, DanglingReference, MalformedDistribution.
Network parse_network(std::string_view text);

/// Canonical JSON rendering; parse_network(serialize_network(n)) == n and the
/// output is byte-stable for equal networks.
std::string serialize_network(const Network& net);

Network load_network(const std::string& path);

}  // namespace noisymax
