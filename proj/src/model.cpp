#include "noisymax/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "noisymax/error.hpp"

namespace noisymax {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

void check_distribution(std::span<const double> row, double tolerance, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) fail(ErrorKind::MalformedDistribution, what + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    std::ostringstream msg;
    msg << what << " sums to " << sum << ", expected 1";
    fail(ErrorKind::MalformedDistribution, msg.str());
  }
}

}  // namespace

Network::Network(std::vector<Variable> variables, std::vector<Cpd> cpds)
    : variables_(std::move(variables)), cpds_(std::move(cpds)) {
  const std::size_t n = variables_.size();
  if (cpds_.size() != n) fail(ErrorKind::InvalidArgument, "every variable needs exactly one distribution");

  std::set<std::string_view> names;
  for (std::size_t i = 0; i < n; ++i) {
    const Variable& var = variables_[i];
    if (index(var.id) != i) fail(ErrorKind::InvalidArgument, "variable ids must be dense and ordered");
    if (var.name.empty()) fail(ErrorKind::InvalidArgument, "variable with empty name");
    if (!names.insert(var.name).second) fail(ErrorKind::InvalidArgument, "duplicate variable name '" + var.name + "'");
    if (var.states.size() < 2) fail(ErrorKind::InvalidArgument, "variable '" + var.name + "' needs at least two states");
    std::set<std::string_view> states(var.states.begin(), var.states.end());
    if (states.size() != var.states.size()) fail(ErrorKind::InvalidArgument, "variable '" + var.name + "' has duplicate state names");
  }

  auto check_ref = [&](VarId v, const std::string& context) {
    if (index(v) >= n) fail(ErrorKind::DanglingReference, context + " references unknown variable id " + std::to_string(index(v)));
  };

  parents_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Variable& child = variables_[i];
    const std::string ctx = "distribution of '" + child.name + "'";
    if (const auto* table = std::get_if<TableCpd>(&cpds_[i])) {
      const Factor& f = table->table;
      if (f.arity() == 0 || f.scope().back() != child.id) {
        fail(ErrorKind::InvalidArgument, ctx + " must have the child as last scope variable");
      }
      for (std::size_t k = 0; k < f.arity(); ++k) {
        check_ref(f.scope()[k], ctx);
        if (f.cards()[k] != variables_[index(f.scope()[k])].size()) {
          fail(ErrorKind::MalformedDistribution, ctx + " has a cardinality mismatch");
        }
      }
      parents_[i].assign(f.scope().begin(), f.scope().end() - 1);
      const std::size_t m = child.size();
      for (std::size_t off = 0; off < f.size(); off += m) {
        check_distribution(std::span(f.values()).subspan(off, m), kTableSliceTolerance,
                           ctx + " slice " + std::to_string(off / m));
      }
    } else {
      const auto& nm = std::get<NoisyMaxCpd>(cpds_[i]);
      if (nm.effect != child.id) fail(ErrorKind::InvalidArgument, ctx + " names a different effect");
      if (nm.causes.empty()) fail(ErrorKind::InvalidArgument, ctx + " has no causes");
      if (nm.links.size() != nm.causes.size()) fail(ErrorKind::MalformedDistribution, ctx + " needs one link table per cause");
      const std::size_t m = child.size();
      for (std::size_t k = 0; k < nm.causes.size(); ++k) {
        const VarId c = nm.causes[k];
        check_ref(c, ctx);
        if (c == child.id) fail(ErrorKind::InvalidArgument, ctx + " lists the effect among its causes");
        if (std::count(nm.causes.begin(), nm.causes.end(), c) != 1) {
          fail(ErrorKind::InvalidArgument, ctx + " lists a cause twice");
        }
        const LinkTable& link = nm.links[k];
        if (link.cause != c) fail(ErrorKind::InvalidArgument, ctx + " link order does not match cause order");
        if (link.rows.size() != variables_[index(c)].size()) {
          fail(ErrorKind::MalformedDistribution, ctx + " link for '" + variables_[index(c)].name + "' has wrong row count");
        }
        for (std::size_t r = 0; r < link.rows.size(); ++r) {
          if (link.rows[r].size() != m) fail(ErrorKind::MalformedDistribution, ctx + " link row has wrong length");
          check_distribution(link.rows[r], kLinkRowTolerance,
                             ctx + " link row " + variables_[index(c)].name + "=" + variables_[index(c)].states[r]);
        }
      }
      if (nm.leak) {
        if (nm.leak->size() != m) fail(ErrorKind::MalformedDistribution, ctx + " leak has wrong length");
        check_distribution(*nm.leak, kLinkRowTolerance, ctx + " leak");
      }
      parents_[i] = nm.causes;
    }
  }

  // Iterative DFS; colour 1 = on stack, 2 = done.
  std::vector<int> colour(n, 0);
  std::vector<std::size_t> parent_of(n, n);
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < parents_[v].size()) {
        std::size_t p = index(parents_[v][next++]);
        if (colour[p] == 1) {
          // p is on the stack; each stack entry is a parent of the one below it.
          std::vector<std::string> loop{variables_[p].name};
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            loop.push_back(variables_[it->first].name);
            if (it->first == p) break;
          }
          std::ostringstream msg;
          msg << "cycle detected: ";
          for (std::size_t k = 0; k < loop.size(); ++k) msg << (k ? " -> " : "") << loop[k];
          fail(ErrorKind::Cycle, msg.str());
        }
        if (colour[p] == 0) {
          colour[p] = 1;
          stack.emplace_back(p, 0);
        }
      } else {
        colour[v] = 2;
        stack.pop_back();
      }
    }
  }
}

std::vector<std::size_t> Network::domain_sizes() const {
  std::vector<std::size_t> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.size());
  return out;
}

std::optional<VarId> Network::find(std::string_view name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v.id;
  }
  return std::nullopt;
}

std::size_t Network::noisy_max_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(cpds_.begin(), cpds_.end(), [](const Cpd& c) {
    return std::holds_alternative<NoisyMaxCpd>(c);
  }));
}

std::vector<VarId> Network::topological_order() const {
  const std::size_t n = variables_.size();
  std::vector<std::size_t> pending(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    pending[v] = parents_[v].size();
    for (VarId p : parents_[v]) children[index(p)].push_back(v);
  }
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (pending[v] == 0) ready.insert(v);
  }
  std::vector<VarId> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(var_id(v));
    for (std::size_t c : children[v]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  return order;
}

}  // namespace noisymax
