#pragma once

// Seeded simulators producing finite ultrametric measure spaces and coupled
// pairs of them:
//
//   simulate_moran                    graphical Moran model at a time horizon
//   simulate_coupled_coalescent_trees one Kingman topology realized at two
//                                     resampling rates (time-scaled coupling)
//   simulate_er_family                Erdos-Renyi graph metrics on shared
//                                     edge uniforms across several p values
//   simulate_coupled_gw               Galton-Watson forests with additively
//                                     coupled Poisson offspring (subtree)
//
// Determinism: identical configs (including seeds) give identical outputs;
// replicate batches use counter-based substreams. Rates follow the graphical
// construction: each ordered pair (i,j) carries arrows at rate gamma, so an
// unordered pair of lineages coalesces at rate 2*gamma and the stationary
// pairwise distance is Exp(gamma).

#include "mmorder/mm_space.hpp"
#include "mmorder/rng.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmorder {

struct SimMeta {
  std::string kind;
  std::map<std::string, std::string> fields;
};

struct SimOutput {
  std::vector<MmSpaceD> spaces;
  SimMeta meta;
};

namespace detail {

// Quotients exact zero-distance classes, summing masses. Simulator output is
// already positive-distance almost surely; this keeps the invariant exact.
inline MmSpaceD quotient_zero_classes(const MmSpaceD& x) {
  bool any = false;
  for (Eigen::Index i = 0; i < x.size() && !any; ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j)
      if (x.dist(i, j) == 0.0) {
        any = true;
        break;
      }
  if (!any) return x;
  Dsu dsu(static_cast<int>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j)
      if (x.dist(i, j) == 0.0) dsu.unite(static_cast<int>(i), static_cast<int>(j));
  std::vector<int> rep_id(x.size(), -1);
  std::vector<int> reps;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    int r = dsu.find(static_cast<int>(i));
    if (rep_id[r] < 0) {
      rep_id[r] = static_cast<int>(reps.size());
      reps.push_back(r);
    }
  }
  MmSpaceD y;
  const auto m = static_cast<Eigen::Index>(reps.size());
  y.dist.resize(m, m);
  y.mass = MmSpaceD::Vector::Zero(m);
  y.labels.resize(m);
  for (Eigen::Index i = 0; i < x.size(); ++i) y.mass(rep_id[dsu.find(static_cast<int>(i))]) += x.mass(i);
  for (Eigen::Index a = 0; a < m; ++a) {
    y.labels[a] = x.labels[reps[a]];
    for (Eigen::Index b = 0; b < m; ++b) y.dist(a, b) = x.dist(reps[a], reps[b]);
  }
  return y;
}

inline std::string fmt_double(double v) { return scalar_to_string(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Moran model
// ---------------------------------------------------------------------------

struct MoranConfig {
  std::uint64_t seed = 0;
  int N = 2;          // population size
  double gamma = 1.0; // resampling rate per ordered pair
  double t = 1.0;     // time horizon
};

// Graphical construction with a single rate gamma*N*(N-1) event stream and
// uniform ordered pairs; an arrow i->j at time s replaces individual j by an
// offspring of i. Distances are 2(t - last common ancestor time), capped at
// 2t for lineages without a common ancestor (the process starts with r0 = 0).
inline SimOutput simulate_moran(const MoranConfig& cfg) {
  if (cfg.N < 1) throw std::invalid_argument("simulate_moran requires N >= 1");
  if (cfg.gamma < 0 || cfg.t < 0) throw std::invalid_argument("rates and times must be >= 0");
  const int n = cfg.N;
  CounterRng rng(cfg.seed);
  struct Event {
    double time;
    int from, to;
  };
  std::vector<Event> events;
  if (n > 1 && cfg.gamma > 0) {
    double rate = cfg.gamma * n * (n - 1);
    double time = 0.0;
    for (;;) {
      time += rng.exponential(rate);
      if (time >= cfg.t) break;
      int i = static_cast<int>(rng.uniform_below(n));
      int j = static_cast<int>(rng.uniform_below(n - 1));
      if (j >= i) ++j;
      events.push_back({time, i, j});
    }
  }
  // Trace ancestry backward; record first times lineages meet.
  std::vector<int> anc(n);
  std::iota(anc.begin(), anc.end(), 0);
  Eigen::MatrixXd coal = Eigen::MatrixXd::Constant(n, n, -1.0);
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    std::vector<int> group_from, group_to;
    for (int u = 0; u < n; ++u) {
      if (anc[u] == it->to) group_to.push_back(u);
      if (anc[u] == it->from) group_from.push_back(u);
    }
    if (group_to.empty()) continue;
    for (int u : group_to) anc[u] = it->from;
    for (int u : group_to)
      for (int v : group_from) {
        coal(u, v) = it->time;
        coal(v, u) = it->time;
      }
  }
  MmSpaceD x;
  x.dist.resize(n, n);
  x.mass = MmSpaceD::Vector::Constant(n, 1.0 / n);
  x.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    x.labels[i] = std::to_string(i);
    x.dist(i, i) = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      x.dist(i, j) = coal(i, j) >= 0 ? 2.0 * (cfg.t - coal(i, j)) : 2.0 * cfg.t;
    }
  }
  SimOutput out;
  out.spaces.push_back(detail::quotient_zero_classes(x));
  out.meta.kind = "moran";
  out.meta.fields["seed"] = std::to_string(cfg.seed);
  out.meta.fields["N"] = std::to_string(cfg.N);
  out.meta.fields["gamma"] = detail::fmt_double(cfg.gamma);
  out.meta.fields["t"] = detail::fmt_double(cfg.t);
  out.meta.fields["events"] = std::to_string(events.size());
  return out;
}

// ---------------------------------------------------------------------------
// Coupled Kingman coalescents
// ---------------------------------------------------------------------------

struct CoalescentConfig {
  std::uint64_t seed = 0;
  int N = 2;
  double gamma = 1.0;        // slow resampling rate (> 0)
  double gamma_prime = 0.0;  // extra rate; the fast tree runs at gamma + gamma_prime
  std::optional<double> horizon;  // cap distances at 2*horizon; absent = run to the MRCA
};

// Samples one standard Kingman topology with standard holding times and
// realizes it at rates gamma and gamma + gamma', so the fast tree equals the
// slow tree with times scaled by gamma/(gamma+gamma') and states agree at
// corresponding mergers. spaces[0] is the fast tree, spaces[1] the slow one.
inline SimOutput simulate_coupled_coalescent_trees(const CoalescentConfig& cfg) {
  if (cfg.N < 1) throw std::invalid_argument("coalescent requires N >= 1");
  if (!(cfg.gamma > 0)) throw std::invalid_argument("coalescent requires gamma > 0");
  if (cfg.gamma_prime < 0) throw std::invalid_argument("gamma_prime must be >= 0");
  const int n = cfg.N;
  CounterRng rng(cfg.seed);
  const double ratio = cfg.gamma / (cfg.gamma + cfg.gamma_prime);

  std::vector<std::vector<int>> classes(n);
  for (int i = 0; i < n; ++i) classes[i] = {i};
  Eigen::MatrixXd slow_time(n, n), fast_time(n, n);
  slow_time.setZero();
  fast_time.setZero();
  double cum_standard = 0.0;
  int merges = 0;
  while (static_cast<int>(classes.size()) > 1) {
    int k = static_cast<int>(classes.size());
    // Standard holding time at rate C(k,2); every unordered pair of lineages
    // coalesces at rate 2*gamma, so realized time is standard / (2*gamma).
    cum_standard += rng.exponential(k * (k - 1) / 2.0);
    double t_slow = cum_standard / (2.0 * cfg.gamma);
    double t_fast = t_slow * ratio;
    int a = static_cast<int>(rng.uniform_below(k));
    int b = static_cast<int>(rng.uniform_below(k - 1));
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    for (int u : classes[a])
      for (int v : classes[b]) {
        slow_time(u, v) = slow_time(v, u) = t_slow;
        fast_time(u, v) = fast_time(v, u) = t_fast;
      }
    classes[a].insert(classes[a].end(), classes[b].begin(), classes[b].end());
    classes.erase(classes.begin() + b);
    ++merges;
  }
  auto build = [&](const Eigen::MatrixXd& times) {
    MmSpaceD x;
    x.dist.resize(n, n);
    x.mass = MmSpaceD::Vector::Constant(n, 1.0 / n);
    x.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      x.labels[i] = std::to_string(i);
      for (int j = 0; j < n; ++j) {
        double ct = cfg.horizon ? std::min(times(i, j), *cfg.horizon) : times(i, j);
        x.dist(i, j) = i == j ? 0.0 : 2.0 * ct;
      }
    }
    return detail::quotient_zero_classes(x);
  };
  SimOutput out;
  out.spaces.push_back(build(fast_time));
  out.spaces.push_back(build(slow_time));
  out.meta.kind = "coalescent";
  out.meta.fields["seed"] = std::to_string(cfg.seed);
  out.meta.fields["N"] = std::to_string(cfg.N);
  out.meta.fields["gamma"] = detail::fmt_double(cfg.gamma);
  out.meta.fields["gamma_prime"] = detail::fmt_double(cfg.gamma_prime);
  out.meta.fields["merges"] = std::to_string(merges);
  out.meta.fields["coupling"] = "shared-exponential time scaling";
  if (cfg.horizon) out.meta.fields["horizon"] = detail::fmt_double(*cfg.horizon);
  return out;
}

// ---------------------------------------------------------------------------
// Erdos-Renyi family on shared uniforms
// ---------------------------------------------------------------------------

struct ErConfig {
  std::uint64_t seed = 0;
  int n = 2;
  std::vector<double> ps;  // one output space per p
};

// Edge (i,j) is present for p iff U_ij <= p, so edge sets are nested along
// the p list. Distances are shortest path lengths with r = n for pairs in
// different components; masses are 1/n.
inline SimOutput simulate_er_family(const ErConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("simulate_er_family requires n >= 1");
  for (double p : cfg.ps)
    if (p < 0 || p > 1) throw std::invalid_argument("edge probabilities must lie in [0,1]");
  const int n = cfg.n;
  CounterRng rng(cfg.seed);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) u(i, j) = u(j, i) = rng.uniform01();
  SimOutput out;
  out.meta.kind = "er";
  out.meta.fields["seed"] = std::to_string(cfg.seed);
  out.meta.fields["n"] = std::to_string(n);
  for (double p : cfg.ps) {
    MmSpaceD x;
    x.dist = Eigen::MatrixXd::Constant(n, n, static_cast<double>(n));
    x.mass = MmSpaceD::Vector::Constant(n, 1.0 / n);
    x.labels.resize(n);
    long edges = 0;
    for (int i = 0; i < n; ++i) {
      x.labels[i] = std::to_string(i);
      x.dist(i, i) = 0.0;
    }
    // BFS from every vertex over the p-thresholded edge set.
    for (int s = 0; s < n; ++s) {
      std::vector<int> dist(n, -1), queue = {s};
      dist[s] = 0;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int w = 0; w < n; ++w) {
          if (w == v || dist[w] >= 0 || !(u(v, w) <= p)) continue;
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
      for (int v = 0; v < n; ++v)
        if (dist[v] >= 0) x.dist(s, v) = static_cast<double>(dist[v]);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(i, j) <= p) ++edges;
    out.spaces.push_back(x);
    out.meta.fields["edges_p=" + detail::fmt_double(p)] = std::to_string(edges);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coupled Galton-Watson forests
// ---------------------------------------------------------------------------

struct GwConfig {
  std::uint64_t seed = 0;
  double b1 = 0.0, b2 = 0.0;  // criticalities, b1 <= b2
  int scale = 10;             // N_gw: offspring means are 1 + b/scale, masses 1/scale
  int generations = 1;        // g >= 1
};

// Grows one forest with Poisson(1 + b2/N) offspring; each individual's
// b1-offspring count is the additively coupled Poisson(1 + b1/N) part, so
// the b1-tree is a subtree of the b2-tree. Outputs the two genealogies of
// the generation-g survivors; spaces[0] is the b1 tree, spaces[1] the b2
// tree. Extinction before g yields empty spaces (flagged, not an error).
inline SimOutput simulate_coupled_gw(const GwConfig& cfg) {
  if (cfg.b1 > cfg.b2) throw std::invalid_argument("simulate_coupled_gw requires b1 <= b2");
  if (cfg.scale < 1 || cfg.generations < 1)
    throw std::invalid_argument("simulate_coupled_gw requires scale >= 1 and generations >= 1");
  double mean1 = 1.0 + cfg.b1 / cfg.scale;
  double mean2 = 1.0 + cfg.b2 / cfg.scale;
  if (mean1 < 0) throw std::invalid_argument("offspring mean 1 + b1/scale must be >= 0");
  CounterRng rng(cfg.seed);

  struct Node {
    int parent;
    int gen;
    bool in_b1;
  };
  std::vector<Node> nodes = {{-1, 0, true}};
  std::vector<int> current = {0};
  for (int g = 1; g <= cfg.generations && !current.empty(); ++g) {
    std::vector<int> next;
    for (int parent : current) {
      long kids_b1 = 0, kids_total = 0;
      if (nodes[parent].in_b1) {
        kids_b1 = rng.poisson(mean1);
        kids_total = kids_b1 + rng.poisson(mean2 - mean1);
      } else {
        kids_total = rng.poisson(mean2);
      }
      for (long c = 0; c < kids_total; ++c) {
        nodes.push_back({parent, g, nodes[parent].in_b1 && c < kids_b1});
        next.push_back(static_cast<int>(nodes.size()) - 1);
      }
      if (nodes.size() > 2000000)
        throw std::runtime_error("simulate_coupled_gw population exceeded its budget");
    }
    current = std::move(next);
  }

  auto lca_generation = [&](int u, int v) {
    while (u != v) {
      if (nodes[u].gen >= nodes[v].gen)
        u = nodes[u].parent;
      else
        v = nodes[v].parent;
    }
    return nodes[u].gen;
  };

  auto build = [&](const std::vector<int>& leaves) {
    MmSpaceD x;
    const auto m = static_cast<Eigen::Index>(leaves.size());
    x.dist.resize(m, m);
    x.mass = MmSpaceD::Vector::Constant(m, 1.0 / cfg.scale);
    x.labels.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      x.labels[a] = std::to_string(leaves[a]);
      x.dist(a, a) = 0.0;
      for (Eigen::Index b = a + 1; b < m; ++b) {
        double d = 2.0 * (cfg.generations - lca_generation(leaves[a], leaves[b]));
        x.dist(a, b) = x.dist(b, a) = d;
      }
    }
    return x;
  };
  std::vector<int> leaves_b1, leaves_b2;
  for (int v : current) {
    leaves_b2.push_back(v);
    if (nodes[v].in_b1) leaves_b1.push_back(v);
  }
  SimOutput out;
  out.spaces.push_back(build(leaves_b1));
  out.spaces.push_back(build(leaves_b2));
  out.meta.kind = "gw";
  out.meta.fields["seed"] = std::to_string(cfg.seed);
  out.meta.fields["b1"] = detail::fmt_double(cfg.b1);
  out.meta.fields["b2"] = detail::fmt_double(cfg.b2);
  out.meta.fields["scale"] = std::to_string(cfg.scale);
  out.meta.fields["generations"] = std::to_string(cfg.generations);
  out.meta.fields["survivors_b1"] = std::to_string(leaves_b1.size());
  out.meta.fields["survivors_b2"] = std::to_string(leaves_b2.size());
  out.meta.fields["extinct_b1"] = leaves_b1.empty() ? "true" : "false";
  out.meta.fields["extinct_b2"] = leaves_b2.empty() ? "true" : "false";
  out.meta.fields["coupling"] = "poisson thinning subtree";
  return out;
}

// ---------------------------------------------------------------------------
// Stationary pairwise distance
// ---------------------------------------------------------------------------

// i.i.d. samples of the stationary pairwise distance R_inf, which is
// Exp(gamma) distributed. Replicates use independent substreams.
inline std::vector<double> sample_stationary_pair_distance(double gamma, long reps,
                                                           std::uint64_t seed) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  std::vector<double> out;
  out.reserve(reps);
  for (long rep = 0; rep < reps; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep));
    out.push_back(rng.exponential(gamma));
  }
  return out;
}

// Cross-validation mode: pairwise distances read off coalescent simulations
// run to their MRCA (a tagged pair coalesces at rate 2*gamma, so the
// distance is again Exp(gamma)).
inline std::vector<double> coalescent_pair_distance(double gamma, long reps, std::uint64_t seed,
                                                    int N = 2) {
  if (N < 2) throw std::invalid_argument("pairwise distances need N >= 2");
  std::vector<double> out;
  out.reserve(reps);
  for (long rep = 0; rep < reps; ++rep) {
    CoalescentConfig cfg;
    cfg.seed = CounterRng::mix(seed ^ CounterRng::mix(rep + 0x51ed2701));
    cfg.N = N;
    cfg.gamma = gamma;
    cfg.gamma_prime = 0.0;
    SimOutput sim = simulate_coupled_coalescent_trees(cfg);
    out.push_back(sim.spaces[1].dist(0, 1));
  }
  return out;
}

}  // namespace mmorder
