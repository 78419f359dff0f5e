#include "noisymax/infer.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "noisymax/error.hpp"

namespace noisymax {

std::string_view to_string(HeuristicKind h) {
  switch (h) {
    case HeuristicKind::MinSize: return "min-size";
    case HeuristicKind::MinWeight: return "min-weight";
  }
  return "unknown";
}

std::optional<HeuristicKind> parse_heuristic(std::string_view name) {
  for (HeuristicKind h : kAllHeuristics) {
    if (to_string(h) == name) return h;
  }
  return std::nullopt;
}

void CostMeter::charge_product(std::uint64_t entries) {
  if (multiplications_ + entries > limits_.max_multiplications ||
      multiplications_ + entries < multiplications_) {
    std::ostringstream msg;
    msg << "multiplication guard exceeded (" << limits_.max_multiplications << ")";
    throw Error(ErrorKind::GuardExceeded, msg.str());
  }
  note_table(entries);
  multiplications_ += entries;
}

void CostMeter::note_table(std::uint64_t entries) {
  if (entries > limits_.max_table_entries) {
    std::ostringstream msg;
    msg << "table entry guard exceeded: " << entries << " > " << limits_.max_table_entries;
    throw Error(ErrorKind::GuardExceeded, msg.str());
  }
  peak_ = std::max(peak_, entries);
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t scope_entries(std::span<const std::size_t> cards) {
  std::uint64_t n = 1;
  for (std::size_t c : cards) n = saturating_mul(n, c);
  return n;
}

/// stride[k] of a row-major table with the given cards.
std::vector<std::size_t> strides_of(std::span<const std::size_t> cards) {
  std::vector<std::size_t> s(cards.size(), 1);
  for (std::size_t k = cards.size(); k-- > 1;) s[k - 1] = s[k] * cards[k];
  return s;
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b, CostMeter* meter) {
  std::vector<VarId> scope = a.scope();
  std::vector<std::size_t> cards = a.cards();
  for (std::size_t k = 0; k < b.arity(); ++k) {
    const std::size_t p = a.position(b.scope()[k]);
    if (p == a.arity()) {
      scope.push_back(b.scope()[k]);
      cards.push_back(b.cards()[k]);
    } else if (a.cards()[p] != b.cards()[k]) {
      throw Error(ErrorKind::InvalidArgument,
                  "domain size mismatch for variable " + std::to_string(index(b.scope()[k])));
    }
  }
  const std::uint64_t entries = scope_entries(cards);
  if (meter) meter->charge_product(entries);

  Factor out(scope, cards, 0.0);
  const std::size_t arity = scope.size();
  // Per output variable, how far each operand's offset moves per step.
  std::vector<std::size_t> step_a(arity, 0), step_b(arity, 0);
  const auto sa = strides_of(a.cards());
  const auto sb = strides_of(b.cards());
  for (std::size_t k = 0; k < a.arity(); ++k) step_a[k] = sa[k];
  for (std::size_t k = 0; k < b.arity(); ++k) step_b[out.position(b.scope()[k])] = sb[k];

  const auto& va = a.values();
  const auto& vb = b.values();
  auto& vo = out.values();
  std::vector<std::size_t> digit(arity, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < vo.size(); ++i) {
    vo[i] = va[ia] * vb[ib];
    for (std::size_t k = arity; k-- > 0;) {
      ia += step_a[k];
      ib += step_b[k];
      if (++digit[k] < cards[k]) break;
      ia -= step_a[k] * cards[k];
      ib -= step_b[k] * cards[k];
      digit[k] = 0;
    }
  }
  return out;
}

namespace {

/// Splits f's table around variable v as [outer][state][inner].
struct Split {
  std::size_t pos, card, inner, outer;
};

Split split_at(const Factor& f, VarId v) {
  const std::size_t p = f.position(v);
  if (p == f.arity()) {
    throw Error(ErrorKind::InvalidArgument, "variable " + std::to_string(index(v)) + " is not in the factor scope");
  }
  std::size_t inner = 1;
  for (std::size_t k = p + 1; k < f.arity(); ++k) inner *= f.cards()[k];
  return {p, f.cards()[p], inner, f.size() / (inner * f.cards()[p])};
}

Factor without(const Factor& f, std::size_t pos) {
  std::vector<VarId> scope = f.scope();
  std::vector<std::size_t> cards = f.cards();
  scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(pos));
  cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(pos));
  return Factor(std::move(scope), std::move(cards), 0.0);
}

}  // namespace

Factor marginalize(const Factor& f, VarId v, CostMeter* meter) {
  const Split s = split_at(f, v);
  Factor out = without(f, s.pos);
  if (meter) meter->note_table(out.size());
  const auto& in = f.values();
  auto& o = out.values();
  for (std::size_t a = 0; a < s.outer; ++a) {
    for (std::size_t j = 0; j < s.card; ++j) {
      const std::size_t base = (a * s.card + j) * s.inner;
      for (std::size_t b = 0; b < s.inner; ++b) o[a * s.inner + b] += in[base + b];
    }
  }
  return out;
}

Factor restrict(const Factor& f, VarId v, std::size_t state) {
  const Split s = split_at(f, v);
  if (state >= s.card) throw Error(ErrorKind::OutOfRange, "evidence state out of range");
  Factor out = without(f, s.pos);
  const auto& in = f.values();
  auto& o = out.values();
  for (std::size_t a = 0; a < s.outer; ++a) {
    const std::size_t base = (a * s.card + state) * s.inner;
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(base), s.inner,
                o.begin() + static_cast<std::ptrdiff_t>(a * s.inner));
  }
  return out;
}

Factor reorder(const Factor& f, std::span<const VarId> order) {
  if (order.size() != f.arity()) throw Error(ErrorKind::InvalidArgument, "reorder needs a permutation of the scope");
  std::vector<std::size_t> cards;
  std::vector<std::size_t> step;
  const auto src = strides_of(f.cards());
  for (VarId v : order) {
    const std::size_t p = f.position(v);
    if (p == f.arity()) throw Error(ErrorKind::InvalidArgument, "reorder needs a permutation of the scope");
    cards.push_back(f.cards()[p]);
    step.push_back(src[p]);
  }
  Factor out(std::vector<VarId>(order.begin(), order.end()), cards, 0.0);
  std::vector<std::size_t> digit(cards.size(), 0);
  std::size_t in = 0;
  for (double& x : out.values()) {
    x = f.values()[in];
    for (std::size_t k = cards.size(); k-- > 0;) {
      in += step[k];
      if (++digit[k] < cards[k]) break;
      in -= step[k] * cards[k];
      digit[k] = 0;
    }
  }
  return out;
}

VarId choose_next(std::span<const Factor> factors, std::span<const VarId> eliminable, HeuristicKind h) {
  if (eliminable.empty()) throw Error(ErrorKind::InvalidArgument, "no variable left to eliminate");
  std::optional<VarId> best;
  std::uint64_t best_score = 0;
  for (VarId v : eliminable) {
    std::vector<VarId> scope;
    std::vector<std::size_t> cards;
    std::size_t own_card = 1;
    bool present = false;
    for (const Factor& f : factors) {
      if (!f.contains(v)) continue;
      present = true;
      for (std::size_t k = 0; k < f.arity(); ++k) {
        if (std::find(scope.begin(), scope.end(), f.scope()[k]) == scope.end()) {
          scope.push_back(f.scope()[k]);
          cards.push_back(f.cards()[k]);
        }
      }
      own_card = f.card_of(v);
    }
    std::uint64_t score = 0;
    if (present) {
      score = scope_entries(cards);
      if (h == HeuristicKind::MinSize) score /= own_card;
    }
    if (!best || score < best_score || (score == best_score && v < *best)) {
      best = v;
      best_score = score;
    }
  }
  return *best;
}

namespace {

/// Multiplies together every factor mentioning v and sums v out.
void eliminate(std::vector<Factor>& live, VarId v, CostMeter& meter) {
  std::vector<Factor> bucket;
  std::vector<Factor> rest;
  for (auto& f : live) (f.contains(v) ? bucket : rest).push_back(std::move(f));
  live = std::move(rest);
  if (bucket.empty()) return;
  Factor product = std::move(bucket.front());
  for (std::size_t i = 1; i < bucket.size(); ++i) product = multiply(product, bucket[i], &meter);
  live.push_back(marginalize(product, v, &meter));
}

Factor multiply_all(std::vector<Factor> factors, CostMeter& meter) {
  if (factors.empty()) return Factor::scalar(1.0);
  Factor product = std::move(factors.front());
  for (std::size_t i = 1; i < factors.size(); ++i) product = multiply(product, factors[i], &meter);
  return product;
}

void validate_query(const FactorNetwork& net, const Query& q) {
  if (q.targets.empty()) throw Error(ErrorKind::InvalidArgument, "query needs at least one target");
  std::set<VarId> seen;
  for (VarId t : q.targets) {
    if (index(t) >= net.variables.size()) throw Error(ErrorKind::InvalidArgument, "unknown target variable");
    if (!seen.insert(t).second) throw Error(ErrorKind::InvalidArgument, "duplicate target variable");
    if (q.evidence.contains(t)) throw Error(ErrorKind::InvalidArgument, "target '" + net.variables[index(t)].name + "' is also evidence");
  }
  for (const auto& [v, state] : q.evidence) {
    if (index(v) >= net.original_count) throw Error(ErrorKind::InvalidArgument, "evidence must be on source-network variables");
    if (state >= net.variables[index(v)].size()) throw Error(ErrorKind::OutOfRange, "evidence state out of range");
  }
}

/// Barren-node removal: the kept families are the ancestors of the nodes
/// owning a target or an evidence variable.
std::vector<bool> relevant_nodes(const FactorNetwork& net, const Query& q) {
  std::vector<bool> keep(net.original_count, false);
  std::vector<VarId> stack;
  for (VarId t : q.targets) stack.push_back(net.variable_owner[index(t)]);
  for (const auto& [v, s] : q.evidence) stack.push_back(v);
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    if (keep[index(v)]) continue;
    keep[index(v)] = true;
    for (VarId p : net.source_parents[index(v)]) stack.push_back(p);
  }
  return keep;
}

/// Clamps rounding-level negatives, then normalizes in place.
void finalize(Factor& table) {
  auto& values = table.values();
  double max_abs = 0.0;
  for (double x : values) max_abs = std::max(max_abs, std::abs(x));
  for (double& x : values) {
    if (x >= 0.0) continue;
    if (x < -kNegativeClampTolerance * max_abs) {
      std::ostringstream msg;
      msg << "posterior entry " << x << " is negative beyond rounding (max magnitude " << max_abs << ")";
      throw Error(ErrorKind::NegativePosterior, msg.str());
    }
    x = 0.0;
  }
  double sum = 0.0;
  for (double x : values) sum += x;
  if (sum == 0.0) throw Error(ErrorKind::ZeroNormalization, "evidence has probability zero");
  if (!std::isfinite(sum) || sum < DBL_MIN) {
    std::ostringstream msg;
    msg << "normalizing constant " << sum << " is not representable";
    throw Error(ErrorKind::NumericalUnderflow, msg.str());
  }
  for (double& x : values) x /= sum;
}

template <typename Chooser>
Posterior run_query(const FactorNetwork& net, const Query& q, const QueryOptions& options, Chooser choose) {
  validate_query(net, q);
  std::vector<bool> keep(net.original_count, true);
  if (options.prune_barren) keep = relevant_nodes(net, q);

  CostMeter meter(options.limits);
  std::vector<Factor> live;
  std::set<VarId> mentioned;
  for (std::size_t i = 0; i < net.factors.size(); ++i) {
    if (!keep[index(net.factor_owner[i])]) continue;
    Factor f = net.factors[i];
    for (VarId v : f.scope()) mentioned.insert(v);
    for (const auto& [v, state] : q.evidence) {
      if (f.contains(v)) f = restrict(f, v, state);
    }
    live.push_back(std::move(f));
  }
  for (VarId t : q.targets) mentioned.insert(t);

  Posterior result;
  result.stats.relevant_vars = mentioned.size();
  std::vector<VarId> eliminable;
  for (VarId v : mentioned) {
    if (!q.evidence.contains(v) && std::find(q.targets.begin(), q.targets.end(), v) == q.targets.end()) {
      eliminable.push_back(v);
    }
  }

  while (!eliminable.empty()) {
    const VarId v = choose(live, eliminable);
    eliminable.erase(std::find(eliminable.begin(), eliminable.end(), v));
    eliminate(live, v, meter);
    result.stats.ordering.push_back(v);
  }

  Factor joint = multiply_all(std::move(live), meter);
  for (VarId t : q.targets) {
    if (!joint.contains(t)) joint = multiply(joint, Factor({t}, {net.variables[index(t)].size()}, 1.0), &meter);
  }
  result.distribution = reorder(joint, q.targets);
  finalize(result.distribution);
  result.stats.multiplications = meter.multiplications();
  result.stats.peak_table_entries = meter.peak_table_entries();
  return result;
}

}  // namespace

Posterior query_posterior(const FactorNetwork& net, const Query& q, HeuristicKind h, const QueryOptions& options) {
  return run_query(net, q, options, [h](const std::vector<Factor>& live, const std::vector<VarId>& eliminable) {
    return choose_next(live, eliminable, h);
  });
}

Posterior query_posterior(const FactorNetwork& net, const Query& q, std::span<const VarId> order,
                          const QueryOptions& options) {
  return run_query(net, q, options, [order](const std::vector<Factor>&, const std::vector<VarId>& eliminable) {
    for (VarId v : order) {
      if (std::find(eliminable.begin(), eliminable.end(), v) != eliminable.end()) return v;
    }
    return *std::min_element(eliminable.begin(), eliminable.end());
  });
}

Factor sum_out(std::vector<Factor> factors, std::span<const VarId> eliminate_vars, HeuristicKind h,
               CostMeter* meter) {
  CostMeter local;
  CostMeter& m = meter ? *meter : local;
  std::vector<VarId> pending(eliminate_vars.begin(), eliminate_vars.end());
  while (!pending.empty()) {
    const VarId v = choose_next(factors, pending, h);
    pending.erase(std::find(pending.begin(), pending.end(), v));
    eliminate(factors, v, m);
  }
  return multiply_all(std::move(factors), m);
}

Factor brute_force_joint(const Network& net, const Query& q) {
  const std::size_t n = net.size();
  FactorNetwork shape;
  shape.variables = net.variables();
  shape.original_count = n;
  validate_query(shape, q);
  const std::vector<std::size_t> sizes = net.domain_sizes();
  if (scope_entries(sizes) > kBruteForceStateGuard) {
    throw Error(ErrorKind::GuardExceeded, "joint state space exceeds brute-force guard");
  }

  VariableTable domains{net.variables()};
  std::vector<Factor> cpds;
  for (const auto& v : net.variables()) {
    if (const auto* t = std::get_if<TableCpd>(&net.cpd(v.id))) {
      cpds.push_back(t->table);
    } else {
      cpds.push_back(oracle_cpd(std::get<NoisyMaxCpd>(net.cpd(v.id)), domains));
    }
  }
  // Offset of each family's entry as a linear function of the global assignment.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> terms;
  for (const Factor& f : cpds) {
    const auto s = strides_of(f.cards());
    auto& t = terms.emplace_back();
    for (std::size_t k = 0; k < f.arity(); ++k) t.emplace_back(index(f.scope()[k]), s[k]);
  }

  std::vector<std::size_t> target_cards;
  for (VarId t : q.targets) target_cards.push_back(sizes[index(t)]);
  Factor out(q.targets, target_cards, 0.0);
  const auto target_strides = strides_of(target_cards);

  std::vector<std::size_t> free_sizes = sizes;
  std::vector<std::size_t> assignment(n, 0);
  for (const auto& [v, state] : q.evidence) free_sizes[index(v)] = 1;
  do {
    std::vector<std::size_t> full = assignment;
    for (const auto& [v, state] : q.evidence) full[index(v)] = state;
    double p = 1.0;
    for (std::size_t i = 0; i < cpds.size() && p != 0.0; ++i) {
      std::size_t off = 0;
      for (const auto& [var, stride] : terms[i]) off += full[var] * stride;
      p *= cpds[i].values()[off];
    }
    std::size_t cell = 0;
    for (std::size_t k = 0; k < q.targets.size(); ++k) cell += full[index(q.targets[k])] * target_strides[k];
    out.values()[cell] += p;
  } while (next_assignment(assignment, free_sizes));

  double sum = 0.0;
  for (double x : out.values()) sum += x;
  if (sum == 0.0) throw Error(ErrorKind::ZeroNormalization, "evidence has probability zero");
  for (double& x : out.values()) x /= sum;
  return out;
}

Query make_query(const Network& net, std::span<const std::string> targets,
                 const std::vector<std::pair<std::string, std::string>>& evidence) {
  Query q;
  for (const auto& name : targets) {
    auto id = net.find(name);
    if (!id) throw Error(ErrorKind::DanglingReference, "unknown target variable '" + name + "'");
    q.targets.push_back(*id);
  }
  for (const auto& [name, state] : evidence) {
    auto id = net.find(name);
    if (!id) throw Error(ErrorKind::DanglingReference, "unknown evidence variable '" + name + "'");
    const auto& states = net.variable(*id).states;
    auto it = std::find(states.begin(), states.end(), state);
    if (it == states.end()) throw Error(ErrorKind::OutOfRange, "variable '" + name + "' has no state '" + state + "'");
    q.evidence[*id] = static_cast<std::size_t>(it - states.begin());
  }
  return q;
}

}  // namespace noisymax
