#include <algorithm>
#include <numeric>

#include "noisymax/bench.hpp"
#include "noisymax/error.hpp"

namespace noisymax {

std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Bn2o: return "bn2o";
    case GeneratorKind::Multilevel: return "multilevel";
  }
  return "unknown";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view name) {
  if (name == "bn2o") return GeneratorKind::Bn2o;
  if (name == "multilevel") return GeneratorKind::Multilevel;
  return std::nullopt;
}

namespace {

std::vector<std::string> state_names(std::size_t m) {
  if (m == 2) return {"absent", "present"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("v" + std::to_string(i));
  return out;
}

/// Random positive distribution over m values.
std::vector<double> random_row(SplitMix64& rng, std::size_t m) {
  std::vector<double> row(m);
  for (double& x : row) x = rng.uniform(0.05, 1.0);
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& x : row) x /= sum;
  return row;
}

/// Cause state 0 contributes nothing (all mass on the lowest effect value);
/// every other cause state gets a random row.
LinkTable random_link(SplitMix64& rng, VarId cause, std::size_t cause_states, std::size_t m) {
  LinkTable link{cause, {}};
  std::vector<double> inactive(m, 0.0);
  inactive[0] = 1.0;
  link.rows.push_back(inactive);
  for (std::size_t c = 1; c < cause_states; ++c) link.rows.push_back(random_row(rng, m));
  return link;
}

/// Small background mass spread over the non-lowest effect values.
std::vector<double> random_leak(SplitMix64& rng, std::size_t m) {
  const double mass = rng.uniform(0.0, 0.01);
  std::vector<double> upper = random_row(rng, m - 1);
  std::vector<double> leak{1.0 - mass};
  for (double x : upper) leak.push_back(mass * x);
  return leak;
}

/// k distinct indices from [0, n) by partial Fisher-Yates, returned sorted.
std::vector<std::size_t> sample_without_replacement(SplitMix64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[rng.uniform_int(i, n - 1)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void validate(const GeneratorSpec& spec) {
  if (spec.diseases < 1 || spec.findings < 1 || spec.max_parents < 1) {
    throw Error(ErrorKind::InvalidArgument, "generator counts must all be at least 1");
  }
  if (spec.effect_domain_size < 2) throw Error(ErrorKind::InvalidArgument, "effect domain size must be at least 2");
  if (!(spec.link_density > 0.0 && spec.link_density <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "link density must lie in (0, 1]");
  }
  if (spec.max_parents > spec.diseases) {
    throw Error(ErrorKind::InvalidArgument, "max_parents exceeds the number of diseases");
  }
}

NoisyMaxCpd noisy_max_node(SplitMix64& rng, VarId effect, const std::vector<std::size_t>& parents,
                           const std::vector<Variable>& vars) {
  NoisyMaxCpd nm;
  nm.effect = effect;
  const std::size_t m = vars[index(effect)].size();
  for (std::size_t p : parents) {
    nm.causes.push_back(var_id(p));
    nm.links.push_back(random_link(rng, var_id(p), vars[p].size(), m));
  }
  nm.leak = random_leak(rng, m);
  return nm;
}

Network generate_bn2o(const GeneratorSpec& spec, SplitMix64& rng) {
  std::vector<Variable> vars;
  std::vector<Cpd> cpds;
  for (std::size_t i = 0; i < spec.diseases; ++i) {
    const VarId id = var_id(vars.size());
    vars.push_back({id, "D" + std::to_string(i + 1), state_names(2)});
    const double p = rng.uniform(0.001, 0.1);
    cpds.push_back(TableCpd{Factor({id}, {2}, {1.0 - p, p})});
  }
  for (std::size_t j = 0; j < spec.findings; ++j) {
    const VarId id = var_id(vars.size());
    vars.push_back({id, "F" + std::to_string(j + 1), state_names(spec.effect_domain_size)});
    const std::size_t k = rng.uniform_int(1, spec.max_parents);
    cpds.push_back(noisy_max_node(rng, id, sample_without_replacement(rng, spec.diseases, k), vars));
  }
  return Network(std::move(vars), std::move(cpds));
}

Network generate_multilevel(const GeneratorSpec& spec, SplitMix64& rng) {
  const std::size_t m = spec.effect_domain_size;
  std::vector<Variable> vars;
  std::vector<Cpd> cpds;
  for (std::size_t i = 0; i < spec.diseases; ++i) {
    const VarId id = var_id(vars.size());
    vars.push_back({id, "R" + std::to_string(i + 1), state_names(m)});
    cpds.push_back(TableCpd{Factor({id}, {m}, random_row(rng, m))});
  }
  // Two layers below the roots; each node draws parents from all earlier layers.
  const std::size_t first_layer = (spec.findings + 1) / 2;
  std::size_t layer_start = spec.diseases;
  for (std::size_t j = 0; j < spec.findings; ++j) {
    if (j == first_layer) layer_start = vars.size();
    const VarId id = var_id(vars.size());
    vars.push_back({id, "N" + std::to_string(j + 1), state_names(m)});

    std::vector<std::size_t> candidates(layer_start);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng.uniform_int(0, i - 1)]);
    std::vector<std::size_t> parents;
    for (std::size_t c : candidates) {
      if (parents.size() == spec.max_parents) break;
      if (rng.uniform() < spec.link_density) parents.push_back(c);
    }
    if (parents.empty()) parents.push_back(candidates.front());
    std::sort(parents.begin(), parents.end());
    cpds.push_back(noisy_max_node(rng, id, parents, vars));
  }
  return Network(std::move(vars), std::move(cpds));
}

}  // namespace

Network generate(const GeneratorSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  return spec.kind == GeneratorKind::Bn2o ? generate_bn2o(spec, rng) : generate_multilevel(spec, rng);
}

}  // namespace noisymax
