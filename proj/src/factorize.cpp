#include "noisymax/factorize.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "noisymax/error.hpp"

namespace noisymax {

std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::Trivial: return "trivial";
    case StrategyKind::ParentDivorcing: return "parent-divorcing";
    case StrategyKind::Temporal: return "temporal";
    case StrategyKind::Multiplicative: return "multiplicative";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (StrategyKind s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

std::uint64_t checked_power(std::uint64_t base, std::size_t exponent, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (r > limit / base) return limit + 1;
    r *= base;
  }
  return r;
}

/// Allocates auxiliary variables and accumulates factors for one expansion.
class Builder {
 public:
  Builder(const NoisyMaxCpd& cpd, const VariableTable& domains, const ExpansionOptions& options)
      : cpd_(cpd), domains_(domains), options_(options), effect_(domains[cpd.effect]), m_(effect_.size()) {}

  std::size_t m() const { return m_; }
  VarId effect() const { return cpd_.effect; }

  VarId add_variable(const std::string& suffix, std::vector<std::string> states) {
    Variable v{var_id(domains_.variables.size() + result_.auxiliary_variables.size()),
               effect_.name + "." + suffix, std::move(states)};
    result_.auxiliary_variables.push_back(v);
    return v.id;
  }

  VarId add_contribution(const std::string& suffix) { return add_variable(suffix, effect_.states); }

  /// Counts the factor over `scope`; when materializing, allocates it and
  /// lets `fill` write the entries.
  template <typename Fill>
  void emit(std::vector<VarId> scope, std::vector<std::size_t> cards, bool encoding, Fill fill) {
    const std::uint64_t entries = table_size(cards);
    result_.total_entry_count += entries;
    if (encoding) result_.encoding_entry_count += entries;
    if (!options_.materialize) return;
    if (entries > options_.max_table_entries) {
      std::ostringstream msg;
      msg << "expansion of '" << effect_.name << "' needs a table of " << entries << " entries (guard "
          << options_.max_table_entries << ")";
      throw Error(ErrorKind::GuardExceeded, msg.str());
    }
    Factor f(std::move(scope), std::move(cards), 0.0);
    fill(f);
    result_.factors.push_back(std::move(f));
  }

  /// Link factor [C_k, out].
  void add_link(const LinkTable& link, VarId out) {
    emit({link.cause, out}, {link.rows.size(), m_}, false, [&](Factor& f) {
      auto it = f.values().begin();
      for (const auto& row : link.rows) it = std::copy(row.begin(), row.end(), it);
    });
  }

  /// One contribution variable per cause (plus the leak), each fed by its link factor.
  std::vector<VarId> add_contributions() {
    std::vector<VarId> out;
    for (std::size_t k = 0; k < cpd_.causes.size(); ++k) {
      VarId c = add_contribution("c" + std::to_string(k + 1));
      add_link(cpd_.links[k], c);
      out.push_back(c);
    }
    if (cpd_.leak) {
      VarId c = add_contribution("leak");
      emit({c}, {m_}, false, [&](Factor& f) { f.values() = *cpd_.leak; });
      out.push_back(c);
    }
    return out;
  }

  void add_binary_max(VarId a, VarId b, VarId out) {
    emit({a, b, out}, {m_, m_, m_}, true, [&](Factor& f) {
      for (std::size_t x = 0; x < m_; ++x) {
        for (std::size_t y = 0; y < m_; ++y) {
          const std::size_t idx[] = {x, y, std::max(x, y)};
          f.at(idx) = 1.0;
        }
      }
    });
  }

  /// Handles the single-contribution case shared by every strategy: the
  /// distribution is the link table itself.
  bool single_link() {
    if (cpd_.contribution_count() != 1) return false;
    add_link(cpd_.links.front(), effect());
    return true;
  }

  ExpansionResult take() { return std::move(result_); }

 private:
  const NoisyMaxCpd& cpd_;
  const VariableTable& domains_;
  const ExpansionOptions& options_;
  const Variable& effect_;
  std::size_t m_;
  ExpansionResult result_;
};

}  // namespace

Factor oracle_cpd(const NoisyMaxCpd& cpd, const VariableTable& domains) {
  const std::size_t m = domains.size_of(cpd.effect);
  const std::size_t n = cpd.contribution_count();
  if (checked_power(m, n, kOracleEnumerationGuard) > kOracleEnumerationGuard) {
    throw Error(ErrorKind::GuardExceeded, "oracle enumeration exceeds m^n guard");
  }

  std::vector<VarId> scope = cpd.causes;
  scope.push_back(cpd.effect);
  std::vector<std::size_t> cards;
  for (VarId c : cpd.causes) cards.push_back(domains.size_of(c));
  cards.push_back(m);
  Factor out(scope, cards, 0.0);

  std::vector<std::size_t> cause_sizes(cards.begin(), cards.end() - 1);
  std::vector<std::size_t> causes(cpd.causes.size(), 0);
  std::vector<const std::vector<double>*> rows(n);
  do {
    for (std::size_t k = 0; k < cpd.causes.size(); ++k) rows[k] = &cpd.links[k].rows[causes[k]];
    if (cpd.leak) rows.back() = &*cpd.leak;

    // Sum over all contribution tuples of prod_i P(E_i | C_i), binned by max.
    std::vector<double> dist(m, 0.0);
    std::function<void(std::size_t, double, std::size_t)> visit = [&](std::size_t i, double prob, std::size_t top) {
      if (i == n) {
        dist[top] += prob;
        return;
      }
      for (std::size_t a = 0; a < m; ++a) {
        const double p = (*rows[i])[a];
        if (p != 0.0) visit(i + 1, prob * p, std::max(top, a));
      }
    };
    visit(0, 1.0, 0);

    std::vector<std::size_t> idx(causes);
    idx.push_back(0);
    const std::size_t base = factor_index(cards, idx);
    std::copy(dist.begin(), dist.end(), out.values().begin() + static_cast<std::ptrdiff_t>(base));
  } while (next_assignment(causes, cause_sizes));
  return out;
}

double cumulative_density(const LinkTable& link, std::size_t prefix_len, CumulativeState state,
                          std::size_t cause_state) {
  if (cause_state >= link.rows.size()) throw Error(ErrorKind::OutOfRange, "cause state out of range");
  const auto& row = link.rows[cause_state];
  if (prefix_len < 1 || prefix_len + 1 > row.size()) {
    throw Error(ErrorKind::OutOfRange, "prefix length must lie in [1, m-1]");
  }
  if (state == CumulativeState::I) return 1.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < prefix_len; ++a) sum += row[a];
  return sum;
}

ExpansionResult expand_trivial(const NoisyMaxCpd& cpd, const VariableTable& domains,
                               const ExpansionOptions& options) {
  Builder b(cpd, domains, options);
  if (b.single_link()) return b.take();
  const std::size_t n = cpd.contribution_count();

  std::vector<VarId> scope = b.add_contributions();
  scope.push_back(b.effect());
  std::vector<std::size_t> cards(n + 1, b.m());
  b.emit(scope, cards, true, [&](Factor& max_table) {
    std::vector<std::size_t> inputs(n, 0);
    std::vector<std::size_t> idx(n + 1);
    do {
      std::copy(inputs.begin(), inputs.end(), idx.begin());
      idx.back() = *std::max_element(inputs.begin(), inputs.end());
      max_table.at(idx) = 1.0;
    } while (next_assignment(inputs, std::span(cards).first(n)));
  });
  return b.take();
}

ExpansionResult expand_parent_divorcing(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                        const ExpansionOptions& options) {
  Builder b(cpd, domains, options);
  if (b.single_link()) return b.take();

  const std::vector<VarId> leaves = b.add_contributions();
  std::size_t next_y = 1;
  // Balanced tree over leaves[lo, hi); the left half takes the extra leaf.
  std::function<VarId(std::size_t, std::size_t, bool)> build = [&](std::size_t lo, std::size_t hi, bool root) {
    if (hi - lo == 1) return leaves[lo];
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    VarId left = build(lo, mid, false);
    VarId right = build(mid, hi, false);
    VarId out = root ? b.effect() : b.add_contribution("y" + std::to_string(next_y++));
    b.add_binary_max(left, right, out);
    return out;
  };
  build(0, leaves.size(), true);
  return b.take();
}

ExpansionResult expand_temporal(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                const ExpansionOptions& options) {
  Builder b(cpd, domains, options);
  if (b.single_link()) return b.take();

  const std::vector<VarId> contributions = b.add_contributions();
  const std::size_t n = contributions.size();
  // Y_1 would copy the first contribution, so the chain starts at Y_2.
  VarId running = contributions[0];
  for (std::size_t i = 1; i < n; ++i) {
    VarId out = (i + 1 == n) ? b.effect() : b.add_contribution("y" + std::to_string(i + 1));
    b.add_binary_max(running, contributions[i], out);
    running = out;
  }
  return b.take();
}

ExpansionResult expand_multiplicative(const NoisyMaxCpd& cpd, const VariableTable& domains,
                                      const ExpansionOptions& options) {
  Builder b(cpd, domains, options);
  if (b.single_link()) return b.take();
  const std::size_t m = b.m();

  std::vector<VarId> cumulative;
  for (std::size_t i = 1; i < m; ++i) cumulative.push_back(b.add_variable("cum" + std::to_string(i), kCumulativeStateNames));

  std::optional<LinkTable> leak;
  if (cpd.leak) leak = LinkTable{cpd.effect, {*cpd.leak}};

  // Pairwise generalized factors [cum_i, C_j]; the joint over all causes is
  // never formed here.
  for (std::size_t i = 1; i < m; ++i) {
    const VarId var = cumulative[i - 1];
    for (const LinkTable& link : cpd.links) {
      const std::size_t k = link.rows.size();
      b.emit({var, link.cause}, {2, k}, false, [&](Factor& f) {
        for (std::size_t s = 0; s < 2; ++s) {
          for (std::size_t c = 0; c < k; ++c) {
            const std::size_t idx[] = {s, c};
            f.at(idx) = cumulative_density(link, i, static_cast<CumulativeState>(s), c);
          }
        }
      });
    }
    if (leak) {
      b.emit({var}, {2}, false, [&](Factor& f) {
        f.values() = {cumulative_density(*leak, i, CumulativeState::V, 0),
                      cumulative_density(*leak, i, CumulativeState::I, 0)};
      });
    }
  }

  // Effect selector: with exactly one intermediate j in V, +1 at E = a_j and
  // -1 at E = a_{j+1}; with all in I, +1 at E = a_m.
  std::vector<VarId> scope = cumulative;
  scope.push_back(b.effect());
  std::vector<std::size_t> cards(m - 1, 2);
  cards.push_back(m);
  b.emit(scope, cards, true, [&](Factor& selector) {
    constexpr auto V = static_cast<std::size_t>(CumulativeState::V);
    std::vector<std::size_t> parents(m - 1, 0);
    std::vector<std::size_t> idx(m);
    do {
      std::copy(parents.begin(), parents.end(), idx.begin());
      const auto v_count = std::count(parents.begin(), parents.end(), V);
      if (v_count == 0) {
        idx.back() = m - 1;
        selector.at(idx) = 1.0;
      } else if (v_count == 1) {
        const auto j = static_cast<std::size_t>(std::find(parents.begin(), parents.end(), V) - parents.begin());
        idx.back() = j;
        selector.at(idx) = 1.0;
        idx.back() = j + 1;
        selector.at(idx) = -1.0;
      }
    } while (next_assignment(parents, std::span(cards).first(m - 1)));
  });
  return b.take();
}

ExpansionResult expand_cpd(const NoisyMaxCpd& cpd, const VariableTable& domains, StrategyKind strategy,
                           const ExpansionOptions& options) {
  switch (strategy) {
    case StrategyKind::Trivial: return expand_trivial(cpd, domains, options);
    case StrategyKind::ParentDivorcing: return expand_parent_divorcing(cpd, domains, options);
    case StrategyKind::Temporal: return expand_temporal(cpd, domains, options);
    case StrategyKind::Multiplicative: return expand_multiplicative(cpd, domains, options);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown strategy");
}

std::optional<VarId> FactorNetwork::find(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return v.id;
  }
  return std::nullopt;
}

Expansion expand(const Network& net, StrategyKind strategy, const ExpansionOptions& options) {
  Expansion out;
  FactorNetwork& fn = out.network;
  VariableTable table{net.variables()};
  fn.original_count = net.size();
  for (const auto& v : net.variables()) {
    fn.variable_owner.push_back(v.id);
    fn.source_parents.push_back(net.parents(v.id));
  }

  for (const auto& v : net.variables()) {
    if (const auto* t = std::get_if<TableCpd>(&net.cpd(v.id))) {
      fn.factors.push_back(t->table);
      fn.factor_owner.push_back(v.id);
      continue;
    }
    ExpansionResult r = expand_cpd(std::get<NoisyMaxCpd>(net.cpd(v.id)), table, strategy, options);
    for (auto& aux : r.auxiliary_variables) {
      for (const auto& existing : table.variables) {
        if (existing.name == aux.name) {
          throw Error(ErrorKind::InvalidArgument, "auxiliary variable name '" + aux.name + "' collides with an existing variable");
        }
      }
      table.variables.push_back(aux);
      fn.variable_owner.push_back(v.id);
    }
    for (auto& f : r.factors) {
      fn.factors.push_back(std::move(f));
      fn.factor_owner.push_back(v.id);
    }
    out.report.nodes.push_back({v.name, strategy, r.encoding_entry_count, r.total_entry_count,
                                r.auxiliary_variables.size()});
    out.report.encoding_entries += r.encoding_entry_count;
    out.report.total_entries += r.total_entry_count;
    out.report.auxiliary_count += r.auxiliary_variables.size();
  }
  fn.variables = std::move(table.variables);
  return out;
}

std::string size_report_json(const std::vector<SizeReport>& reports) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& report : reports) {
    for (const auto& node : report.nodes) {
      rows.push_back({{"child", node.child},
                      {"strategy", std::string(to_string(node.strategy))},
                      {"encoding_entries", node.encoding_entries},
                      {"total_entries", node.total_entries},
                      {"auxiliary_count", node.auxiliary_count}});
    }
  }
  return rows.dump(2) + "\n";
}

}  // namespace noisymax
