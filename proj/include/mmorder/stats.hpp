#pragma once

// Discrete stochastic-dominance machinery and Monte Carlo estimators:
// Strassen couplings via max-flow, a permutation test for first-order
// dominance of real samples, and the coupled estimator for the stationary
// Wasserstein distance between genealogies with different resampling rates.

#include "mmorder/estimate.hpp"
#include "mmorder/matrix_measure.hpp"
#include "mmorder/rng.hpp"
#include "mmorder/scalar.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace mmorder {

template <class V, class W>
struct DiscreteLaw {
  std::map<V, W> atoms;  // value -> nonnegative weight

  W total() const {
    W t(0);
    for (const auto& [v, w] : atoms) t += w;
    return t;
  }

  void add(const V& v, const W& w) { atoms[v] += w; }
};

namespace detail {

// Edmonds-Karp max flow, templated on the weight type so exact laws get
// exact flows. `eps` is the smallest bottleneck worth pushing.
template <class W>
class MaxFlow {
public:
  explicit MaxFlow(int n) : graph_(n) {}

  void add_edge(int u, int v, W cap) {
    graph_[u].push_back({v, cap, static_cast<int>(graph_[v].size())});
    graph_[v].push_back({u, W(0), static_cast<int>(graph_[u].size()) - 1});
  }

  W run(int s, int t, W eps = W(0)) {
    W flow(0);
    for (;;) {
      std::vector<std::pair<int, int>> parent(graph_.size(), {-1, -1});
      std::vector<int> queue = {s};
      parent[s] = {s, 0};
      for (std::size_t qi = 0; qi < queue.size() && parent[t].first < 0; ++qi) {
        int u = queue[qi];
        for (std::size_t e = 0; e < graph_[u].size(); ++e) {
          const Edge& ed = graph_[u][e];
          if (parent[ed.to].first >= 0 || !(eps < ed.cap)) continue;
          parent[ed.to] = {u, static_cast<int>(e)};
          queue.push_back(ed.to);
        }
      }
      if (parent[t].first < 0) return flow;
      W bottleneck = graph_[parent[t].first][parent[t].second].cap;
      for (int v = t; v != s;) {
        auto [u, e] = parent[v];
        if (graph_[u][e].cap < bottleneck) bottleneck = graph_[u][e].cap;
        v = u;
      }
      for (int v = t; v != s;) {
        auto [u, e] = parent[v];
        graph_[u][e].cap -= bottleneck;
        graph_[graph_[u][e].to][graph_[u][e].rev].cap += bottleneck;
        v = u;
      }
      flow += bottleneck;
    }
  }

  // Positive flow on the reverse edge v->u equals flow pushed along u->v.
  W flow_on(int u, int edge_index) const {
    const Edge& e = graph_[u][edge_index];
    return graph_[e.to][e.rev].cap;
  }

  int edge_count(int u) const { return static_cast<int>(graph_[u].size()); }

private:
  struct Edge {
    int to;
    W cap;
    int rev;
  };
  std::vector<std::vector<Edge>> graph_;
};

}  // namespace detail

template <class V, class W>
struct StrassenResult {
  bool dominated = false;
  // Feasible monotone coupling: (value of mu, value of nu, joint weight).
  std::vector<std::tuple<V, V, W>> coupling;
};

// Decides mu <= nu in the stochastic order of `leq` (mu(A) <= nu(A) for all
// increasing A) by checking for a coupling supported on {(a,b): a leq b}.
template <class V, class W, class Leq>
StrassenResult<V, W> strassen_check(const DiscreteLaw<V, W>& mu, const DiscreteLaw<V, W>& nu,
                                    Leq leq, double tol = kDefaultTol) {
  if (!tol_eq(mu.total(), nu.total(), tol))
    throw std::invalid_argument("strassen_check requires equal total weights");
  std::vector<std::pair<V, W>> a(mu.atoms.begin(), mu.atoms.end());
  std::vector<std::pair<V, W>> b(nu.atoms.begin(), nu.atoms.end());
  const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  const int source = na + nb, sink = source + 1;
  detail::MaxFlow<W> mf(na + nb + 2);
  W total = mu.total();
  for (int i = 0; i < na; ++i) mf.add_edge(source, i, a[i].second);
  for (int j = 0; j < nb; ++j) mf.add_edge(na + j, sink, b[j].second);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (leq(a[i].first, b[j].first)) mf.add_edge(i, na + j, total);
  W eps(0);
  if constexpr (!scalar_traits<W>::is_exact) eps = tol / (1.0 + na + nb);
  W flow = mf.run(source, sink, eps);
  StrassenResult<V, W> res;
  res.dominated = tol_le(total, flow, tol);
  if (!res.dominated) return res;
  // Walk the admissible pairs in creation order; edge 0 of a mu node is the
  // reversal of its source edge, the rest are its mu->nu edges.
  std::vector<int> next_edge(na, 1);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (leq(a[i].first, b[j].first)) {
        W f = mf.flow_on(i, next_edge[i]);
        ++next_edge[i];
        if (W(0) < f) res.coupling.push_back({a[i].first, b[j].first, f});
      }
  return res;
}

// Convenience orders for strassen_check.
inline auto real_leq = [](const auto& x, const auto& y) { return !(y < x); };

template <class S>
struct componentwise_leq {
  double tol = 0.0;
  bool operator()(const std::vector<S>& x, const std::vector<S>& y) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!tol_le(x[i], y[i], tol)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// First-order dominance test for real samples
// ---------------------------------------------------------------------------

struct DominanceResult {
  bool accepted = false;   // "a <=_st b" not rejected at level alpha
  double statistic = 0.0;  // max positive violation of F_b <= F_a
  double threshold = 0.0;  // permutation (1-alpha) quantile of the statistic
  double p_value = 1.0;
  // Fraction of paired indices with a_i <= b_i; NaN when sizes differ.
  double paired_le_fraction = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double ecdf_max_violation(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> grid = a;
  grid.insert(grid.end(), b.begin(), b.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double worst = 0.0;
  for (double t : grid) {
    double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), t) - a.begin()) /
                static_cast<double>(a.size());
    double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), t) - b.begin()) /
                static_cast<double>(b.size());
    worst = std::max(worst, fb - fa);
  }
  return worst;
}

}  // namespace detail

// One-sided test of "a <=_st b": rejects when the empirical CDF of b exceeds
// that of a by more than a permutation-calibrated threshold.
inline DominanceResult test_first_order_dominance_1d(const std::vector<double>& a,
                                                     const std::vector<double>& b, double alpha,
                                                     int permutations = 1000,
                                                     std::uint64_t seed = 1) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("dominance test requires nonempty samples");
  DominanceResult res;
  res.statistic = detail::ecdf_max_violation(a, b);
  if (a.size() == b.size()) {
    std::size_t le = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] <= b[i]) ++le;
    res.paired_le_fraction = static_cast<double>(le) / static_cast<double>(a.size());
  }
  std::vector<double> pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  CounterRng rng(seed);
  std::vector<double> stats;
  stats.reserve(permutations);
  int geq = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.uniform_below(i)]);
    std::vector<double> pa(pool.begin(), pool.begin() + a.size());
    std::vector<double> pb(pool.begin() + a.size(), pool.end());
    double s = detail::ecdf_max_violation(pa, pb);
    stats.push_back(s);
    if (s >= res.statistic) ++geq;
  }
  std::sort(stats.begin(), stats.end());
  std::size_t q = static_cast<std::size_t>(std::ceil((1.0 - alpha) * (permutations + 1))) - 1;
  q = std::min(q, stats.size() - 1);
  res.threshold = stats[q];
  res.p_value = static_cast<double>(1 + geq) / static_cast<double>(permutations + 1);
  res.accepted = res.p_value > alpha;
  return res;
}

// ---------------------------------------------------------------------------
// Stationary Wasserstein estimator
// ---------------------------------------------------------------------------

// d_W^lambda between stationary genealogies with resampling rates gamma <
// gamma'. Under the dominance coupling the distance reduces to the
// difference of expected pair functionals; stationary pair distances are
// Exp(gamma) and Exp(gamma'), sampled here from one shared standard
// exponential per replicate.
inline Estimate estimate_wasserstein_coupled(double gamma, double gamma_prime, double lambda,
                                             long reps, std::uint64_t seed) {
  if (!(0 < gamma && gamma <= gamma_prime))
    throw std::invalid_argument("estimate_wasserstein_coupled requires 0 < gamma <= gamma'");
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (long rep = 0; rep < reps; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep));
    double e = rng.exponential(1.0);
    double slow = e / gamma;         // pair distance at rate gamma
    double fast = e / gamma_prime;   // coupled pair distance at rate gamma'
    double v = (1.0 - std::exp(-lambda * slow)) - (1.0 - std::exp(-lambda * fast));
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / static_cast<double>(reps);
  double var = std::max(0.0, sumsq / static_cast<double>(reps) - mean * mean);
  double se = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) : 0.0;
  return {mean, se, reps, seed};
}

// Average of eval_monomial over independently simulated spaces.
inline Estimate estimate_expected_monomial(
    const std::function<MmSpaceD(std::uint64_t)>& simulate, const Monomial<double>& phi,
    long reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (long rep = 0; rep < reps; ++rep) {
    std::uint64_t rep_seed = CounterRng::mix(seed ^ CounterRng::mix(rep + 1));
    double v = eval_monomial(simulate(rep_seed), phi);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / static_cast<double>(reps);
  double var = std::max(0.0, sumsq / static_cast<double>(reps) - mean * mean);
  double se = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) : 0.0;
  return {mean, se, reps, seed};
}

}  // namespace mmorder
