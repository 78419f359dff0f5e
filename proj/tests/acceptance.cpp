// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "noisymax/bench.hpp"
#include "noisymax/error.hpp"
#include "noisymax/factorize.hpp"
#include "noisymax/infer.hpp"
#include "noisymax/model.hpp"
#include "support.hpp"

using namespace noisymax;
using testing::max_abs_diff;
using testing::recover_cpd;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool run_criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (budget_s > 0 && secs > budget_s) {
    out.ok = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  std::printf("%s %d %s (%.3f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, name, secs, out.detail.empty() ? "" : ": ",
              out.detail.c_str());
  std::fflush(stdout);
  return out.ok;
}

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

Outcome size_formulas() {
  std::mt19937_64 rng(11);
  const ExpansionOptions plan{.materialize = false};
  for (std::size_t n = 2; n <= 10; ++n) {
    for (std::size_t m = 2; m <= 6; ++m) {
      auto r = testing::random_cpd(rng, n, m, 4, false);
      const std::uint64_t expected[] = {ipow(m, n + 1), (n - 1) * ipow(m, 3), (n - 1) * ipow(m, 3),
                                        m * ipow(2, m - 1)};
      for (std::size_t s = 0; s < 4; ++s) {
        const auto got = expand_cpd(r.cpd, r.domains, kAllStrategies[s], plan).encoding_entry_count;
        if (got != expected[s]) {
          return {false, std::string(to_string(kAllStrategies[s])) + " n=" + std::to_string(n) +
                             " m=" + std::to_string(m) + " gave " + std::to_string(got)};
        }
      }
    }
  }
  return {};
}

Outcome noisy_or_identity() {
  std::mt19937_64 rng(22);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    auto r = testing::random_cpd(rng, n, 2, 2, t % 4 == 0);
    if (t % 2 == 0) {
      for (auto& link : r.cpd.links) link.rows[0] = {1.0, 0.0};
    }
    auto e = expand_multiplicative(r.cpd, r.domains);
    worst = std::max(worst, max_abs_diff(recover_cpd(e, r.cpd), oracle_cpd(r.cpd, r.domains)));
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(33);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
    auto r = testing::random_cpd(rng, n, m, 3, t % 3 == 0);
    const Factor expected = oracle_cpd(r.cpd, r.domains);
    for (StrategyKind s : kAllStrategies) {
      worst = std::max(worst, max_abs_diff(recover_cpd(expand_cpd(r.cpd, r.domains, s), r.cpd), expected));
    }
  }
  return {worst <= 1e-9, "max deviation " + fmt(worst)};
}

Outcome strategy_agreement() {
  std::mt19937_64 rng(44);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int t = 0; t < 200; ++t) {
    const Network net = testing::random_network(rng, 12, 4);
    std::vector<Query> queries;
    for (const auto& v : net.variables()) queries.push_back(Query{{v.id}, {}});
    for (int k = 0; k < 3; ++k) queries.push_back(testing::random_query(rng, net, 3));
    std::vector<Factor> expected;
    for (const auto& q : queries) expected.push_back(brute_force_joint(net, q));
    for (StrategyKind s : kAllStrategies) {
      const Expansion e = expand(net, s);
      for (HeuristicKind h : kAllHeuristics) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
          if (expected[i].size() == 0) continue;
          worst = std::max(worst, max_abs_diff(query_posterior(e.network, queries[i], h).distribution, expected[i]));
          ++checked;
        }
      }
    }
  }
  return {worst <= 1e-9, std::to_string(checked) + " answers, max deviation " + fmt(worst)};
}

Outcome binary_reduction() {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    auto r = testing::random_cpd(rng, n, 2, 2, t % 2 == 1);
    for (auto& link : r.cpd.links) link.rows[0] = {1.0, 0.0};
    const auto e = expand_multiplicative(r.cpd, r.domains);

    const VarId cum = var_id(n + 1);
    std::vector<Factor> hand;
    for (const auto& link : r.cpd.links) {
      hand.emplace_back(std::vector<VarId>{cum, link.cause}, std::vector<std::size_t>{2, 2},
                        std::vector<double>{link.rows[0][0], link.rows[1][0], 1.0, 1.0});
    }
    if (r.cpd.leak) hand.emplace_back(std::vector<VarId>{cum}, std::vector<std::size_t>{2},
                                      std::vector<double>{(*r.cpd.leak)[0], 1.0});
    hand.emplace_back(std::vector<VarId>{cum, r.cpd.effect}, std::vector<std::size_t>{2, 2},
                      std::vector<double>{1.0, -1.0, 0.0, 1.0});

    if (e.auxiliary_variables.size() != 1 || e.auxiliary_variables[0].id != cum ||
        e.auxiliary_variables[0].states != kCumulativeStateNames) {
      return {false, "unexpected intermediate variable in trial " + std::to_string(t)};
    }
    if (e.factors != hand) return {false, "factor mismatch in trial " + std::to_string(t)};
    if (e.encoding_entry_count != 4) return {false, "selector is not 4 entries"};
  }
  return {true, "50 noisy-or nodes"};
}

Outcome subspace_identity() {
  testing::RandomCpd r;
  r.domains.variables = {{var_id(0), "C1", {"F", "T"}}, {var_id(1), "C2", {"F", "T"}}, {var_id(2), "E", {"L", "M", "H"}}};
  r.cpd.effect = var_id(2);
  r.cpd.causes = {var_id(0), var_id(1)};
  r.cpd.links = {{var_id(0), {{1.0, 0.0, 0.0}, {0.5, 0.3, 0.2}}}, {var_id(1), {{1.0, 0.0, 0.0}, {0.4, 0.4, 0.2}}}};
  const Factor cpd = recover_cpd(expand_multiplicative(r.cpd, r.domains), r.cpd);
  const auto& f1 = r.cpd.links[0].rows;
  const auto& f2 = r.cpd.links[1].rows;
  double worst = 0.0;
  for (std::size_t c1 = 0; c1 < 2; ++c1) {
    for (std::size_t c2 = 0; c2 < 2; ++c2) {
      const double upto_m = (f1[c1][0] + f1[c1][1]) * (f2[c2][0] + f2[c2][1]);
      const double upto_l = f1[c1][0] * f2[c2][0];
      const std::size_t idx[] = {c1, c2, 1};
      worst = std::max(worst, std::abs(cpd.at(idx) - (upto_m - upto_l)));
    }
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst)};
}

/// n binary causes feeding one binary effect through noisy-or links.
Network single_effect_bn2o(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Variable> vars;
  std::vector<Cpd> cpds;
  NoisyMaxCpd nm;
  nm.effect = var_id(n);
  for (std::size_t i = 0; i < n; ++i) {
    vars.push_back({var_id(i), "D" + std::to_string(i + 1), {"absent", "present"}});
    const double p = rng.uniform(0.001, 0.1);
    cpds.push_back(TableCpd{Factor({var_id(i)}, {2}, {1.0 - p, p})});
    const double q = rng.uniform(0.05, 0.95);
    nm.causes.push_back(var_id(i));
    nm.links.push_back({var_id(i), {{1.0, 0.0}, {1.0 - q, q}}});
  }
  vars.push_back({var_id(n), "F", {"absent", "present"}});
  cpds.push_back(std::move(nm));
  return Network(std::move(vars), std::move(cpds));
}

/// Least-squares polynomial of the given degree; returns coefficients, lowest first.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, std::size_t degree) {
  const std::size_t k = degree + 1;
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) a[r][c] += std::pow(x[i], double(r + c));
      a[r][k] += std::pow(x[i], double(r)) * y[i];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> coef(k);
  for (std::size_t c = 0; c < k; ++c) coef[c] = a[c][k] / a[c][c];
  return coef;
}

Outcome scaling() {
  std::vector<double> ns, mults;
  std::ostringstream log;
  bool ok = true;
  for (std::size_t n = 2; n <= 20; ++n) {
    const Network net = single_effect_bn2o(n, 1000 + n);
    const Expansion e = expand(net, StrategyKind::Multiplicative);
    const Query q{{var_id(n)}, {}};
    const Posterior p = query_posterior(e.network, q, HeuristicKind::MinSize);
    double absent = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& prior = std::get<TableCpd>(net.cpd(var_id(i))).table.values();
      absent *= 1.0 - prior[1] * std::get<NoisyMaxCpd>(net.cpd(var_id(n))).links[i].rows[1][1];
    }
    const Factor expected({var_id(n)}, {2}, {absent, 1.0 - absent});
    if (max_abs_diff(p.distribution, expected) > 1e-9) {
      ok = false;
      log << "wrong marginal at n=" << n << "; ";
    }
    ns.push_back(double(n));
    mults.push_back(double(p.stats.multiplications));

    const auto* nm = std::get_if<NoisyMaxCpd>(&net.cpd(var_id(n)));
    VariableTable domains{net.variables()};
    const auto trivial = expand_trivial(*nm, domains, {.materialize = false});
    const std::uint64_t trivial_size = trivial.encoding_entry_count;
    if (trivial_size != ipow(2, n + 1)) {
      ok = false;
      log << "trivial size mismatch at n=" << n << "; ";
    }
    if (n >= 19 && !(trivial_size > 1'000'000)) {
      ok = false;
      log << "trivial table not above 1e6 at n=" << n << "; ";
    }
    if (n >= 12 && p.stats.multiplications >= trivial_size) {
      ok = false;
      log << "multiplicative cost not below trivial table at n=" << n << "; ";
    }
  }
  const auto coef = polyfit(ns, mults, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double fit = 0.0;
    for (std::size_t d = 0; d < coef.size(); ++d) fit += coef[d] * std::pow(ns[i], double(d));
    worst = std::max(worst, std::abs(fit - mults[i]) / mults[i]);
  }
  if (worst > 0.05) {
    ok = false;
    log << "cubic fit residual too large; ";
  }
  log << "mults n=2:" << mults.front() << " n=20:" << mults.back() << ", max relative residual " << fmt(worst);
  return {ok, log.str()};
}

Outcome ordering_freedom() {
  std::mt19937_64 rng(88);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Network net = testing::random_network(rng, 10, 4);
    const Query q = testing::random_query(rng, net, 3);
    const Factor expected = brute_force_joint(net, q);
    const Expansion e = expand(net, StrategyKind::Multiplicative);
    std::vector<VarId> order;
    for (const auto& v : e.network.variables) order.push_back(v.id);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(order.begin(), order.end(), rng);
      const Posterior p = query_posterior(e.network, q, order, {.prune_barren = false});
      worst = std::max(worst, max_abs_diff(p.distribution, expected));
    }
  }
  return {worst <= 1e-9, "100 orders, max deviation " + fmt(worst)};
}

std::string capture(const std::string& cmd, int& status) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot run " + cmd);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

Outcome determinism() {
  const std::string cli = NOISYMAX_CLI;
  const std::string gen = cli + " gen --kind bn2o --seed 42 --diseases 12 --findings 8 --max-parents 4";
  int s1 = 0, s2 = 0;
  const std::string a = capture(gen, s1);
  const std::string b = capture(gen, s2);
  if (s1 != 0 || s2 != 0 || a.empty()) return {false, "gen failed"};
  if (a != b) return {false, "gen output differs between runs"};

  const Network net = parse_network(a);
  BenchOptions opts;
  opts.heuristics = {HeuristicKind::MinSize, HeuristicKind::MinWeight};
  const BenchReport r1 = run_benchmark(net, opts);
  const BenchReport r2 = run_benchmark(net, opts);
  if (r1.rows.size() != r2.rows.size()) return {false, "bench row count differs"};
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    if (r1.rows[i].multiplications != r2.rows[i].multiplications) return {false, "bench counts differ"};
  }
  if (report_json(r1, false) != report_json(r2, false)) return {false, "bench reports differ"};
  return {true, std::to_string(a.size()) + " bytes, " + std::to_string(r1.rows.size()) + " bench cells"};
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run_criterion(1, "encoding size formulas", 1.0, size_formulas);
  ok &= run_criterion(2, "noisy-or marginalization identity", 5.0, noisy_or_identity);
  ok &= run_criterion(3, "noisy-max oracle equivalence", 30.0, oracle_equivalence);
  ok &= run_criterion(4, "end-to-end strategy agreement", 120.0, strategy_agreement);
  ok &= run_criterion(5, "binary-effect reduction", 0.0, binary_reduction);
  ok &= run_criterion(6, "three-value subspace identity", 0.0, subspace_identity);
  ok &= run_criterion(7, "single-effect scaling", 60.0, scaling);
  ok &= run_criterion(8, "ordering freedom", 0.0, ordering_freedom);
  ok &= run_criterion(9, "determinism", 0.0, determinism);
  return ok ? 0 : 1;
}
