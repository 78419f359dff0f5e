#pragma once

// Test-only generators and helpers. Randomness here comes from std::mt19937_64
// so the fixtures stay independent of the library's own generator.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "noisymax/factorize.hpp"
#include "noisymax/infer.hpp"
#include "noisymax/model.hpp"

namespace noisymax::testing {

inline std::vector<std::string> states(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t m, bool allow_zero = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> row(m);
  double sum = 0.0;
  for (double& x : row) {
    x = u(rng);
    if (allow_zero && u(rng) < 0.15) x = 0.0;
    sum += x;
  }
  if (sum == 0.0) {
    row[0] = 1.0;
    return row;
  }
  for (double& x : row) x /= sum;
  return row;
}

/// Random noisy-max family: causes are variables 0..n-1, the effect is n.
struct RandomCpd {
  VariableTable domains;
  NoisyMaxCpd cpd;
};

inline RandomCpd random_cpd(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t max_cause_card,
                            bool leak) {
  RandomCpd r;
  std::uniform_int_distribution<std::size_t> card(2, max_cause_card);
  for (std::size_t i = 0; i < n; ++i) {
    r.domains.variables.push_back({var_id(i), "C" + std::to_string(i + 1), states(card(rng))});
  }
  r.domains.variables.push_back({var_id(n), "E", states(m)});
  r.cpd.effect = var_id(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.cpd.causes.push_back(var_id(i));
    LinkTable link{var_id(i), {}};
    for (std::size_t c = 0; c < r.domains.variables[i].size(); ++c) link.rows.push_back(random_distribution(rng, m));
    r.cpd.links.push_back(std::move(link));
  }
  if (leak) r.cpd.leak = random_distribution(rng, m);
  return r;
}

/// Multiplies an expansion's factors, sums out its auxiliaries, and returns
/// the recovered conditional with scope [C_1..C_n, E].
inline Factor recover_cpd(const ExpansionResult& r, const NoisyMaxCpd& cpd) {
  std::vector<VarId> aux;
  for (const auto& v : r.auxiliary_variables) aux.push_back(v.id);
  Factor f = sum_out(r.factors, aux, HeuristicKind::MinSize);
  std::vector<VarId> order = cpd.causes;
  order.push_back(cpd.effect);
  return reorder(f, order);
}

inline double max_abs_diff(const Factor& a, const Factor& b) {
  if (a.scope() != b.scope() || a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

/// Random network mixing table and noisy-max families, with at most
/// `max_vars` variables and a joint state space of at most `max_joint`.
inline Network random_network(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_m,
                              std::size_t max_joint = 1 << 16) {
  std::uniform_int_distribution<std::size_t> nvars(2, max_vars);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = nvars(rng);
  std::vector<Variable> vars;
  std::vector<Cpd> cpds;
  std::size_t joint = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = std::uniform_int_distribution<std::size_t>(2, max_m)(rng);
    while (m > 2 && joint * m > max_joint) --m;
    if (joint * m > max_joint) break;
    joint *= m;
    vars.push_back({var_id(i), "X" + std::to_string(i), states(m)});

    std::vector<VarId> parents;
    for (std::size_t p = 0; p < i; ++p) {
      if (parents.size() < 4 && u(rng) < 0.45) parents.push_back(var_id(p));
    }
    if (!parents.empty() && u(rng) < 0.7) {
      NoisyMaxCpd nm;
      nm.effect = var_id(i);
      nm.causes = parents;
      for (VarId p : parents) {
        LinkTable link{p, {}};
        for (std::size_t c = 0; c < vars[index(p)].size(); ++c) link.rows.push_back(random_distribution(rng, m, false));
        nm.links.push_back(std::move(link));
      }
      if (u(rng) < 0.4) nm.leak = random_distribution(rng, m, false);
      cpds.push_back(std::move(nm));
    } else {
      std::vector<VarId> scope = parents;
      scope.push_back(var_id(i));
      std::vector<std::size_t> cards;
      for (VarId v : scope) cards.push_back(vars[index(v)].size());
      std::vector<double> values;
      const std::size_t slices = table_size(cards) / m;
      for (std::size_t s = 0; s < slices; ++s) {
        auto row = random_distribution(rng, m, false);
        values.insert(values.end(), row.begin(), row.end());
      }
      cpds.push_back(TableCpd{Factor(scope, cards, values)});
    }
  }
  return Network(std::move(vars), std::move(cpds));
}

/// Random query on a source network: a target plus up to `max_evidence` observations.
inline Query random_query(std::mt19937_64& rng, const Network& net, std::size_t max_evidence) {
  std::vector<VarId> ids;
  for (const auto& v : net.variables()) ids.push_back(v.id);
  std::shuffle(ids.begin(), ids.end(), rng);
  Query q;
  q.targets.push_back(ids[0]);
  const std::size_t k = std::min(max_evidence, ids.size() - 1);
  const std::size_t count = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(k, 1))(rng);
  for (std::size_t i = 1; i <= count && i < ids.size(); ++i) {
    q.evidence[ids[i]] = std::uniform_int_distribution<std::size_t>(0, net.domain_size(ids[i]) - 1)(rng);
  }
  return q;
}

}  // namespace noisymax::testing
