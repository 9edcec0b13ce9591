#pragma once

// Distance matrix measures nu^{m,x} and the monomial test functionals.
// nu^{m,x} is the law of the upper-triangular distance matrix of m points
// sampled independently from the space's measure; on finite spaces it is a
// weighted finite set of matrices obtained by exact enumeration.

#include "mmorder/estimate.hpp"
#include "mmorder/mm_space.hpp"
#include "mmorder/rng.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <variant>
#include <vector>

namespace mmorder {

struct EnumerationGuard {
  long long limit = 10'000'000;  // maximum n^m tuples
  bool unlimited = false;
};

template <class S>
struct DiscreteMatrixMeasure {
  int order = 2;
  // Key: upper-triangular entries (i<j, row-major) of an m x m distance
  // matrix. Weights are nonnegative and sum to (total mass)^m.
  std::map<std::vector<S>, S> atoms;

  S total_weight() const {
    S t(0);
    for (const auto& [key, w] : atoms) t += w;
    return t;
  }
};

namespace detail {

inline long long checked_pow_ll(long long base, int exp, long long cap) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

template <class S>
void check_enumeration(const MmSpace<S>& x, int m, const EnumerationGuard& g) {
  if (g.unlimited) return;
  long long n = static_cast<long long>(support_indices(x).size());
  if (checked_pow_ll(n, m, g.limit) > g.limit)
    throw std::invalid_argument(
        "enumeration guardrail: n^m exceeds the tuple limit; use the Monte Carlo "
        "estimator or pass an unlimited guard");
}

// Visits every ordered m-tuple of support points with its product weight.
template <class S, class F>
void for_each_support_tuple(const MmSpace<S>& x, int m, F&& f) {
  std::vector<int> sup = support_indices(x);
  if (sup.empty()) return;
  std::vector<int> idx(m, 0);
  std::vector<int> tuple(m);
  for (;;) {
    S w(1);
    for (int a = 0; a < m; ++a) {
      tuple[a] = sup[idx[a]];
      w *= x.mass(tuple[a]);
    }
    f(tuple, w);
    int pos = m - 1;
    while (pos >= 0 && idx[pos] + 1 == static_cast<int>(sup.size())) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++idx[pos];
  }
}

template <class S>
std::vector<S> tuple_distances(const MmSpace<S>& x, const std::vector<int>& tuple) {
  const int m = static_cast<int>(tuple.size());
  std::vector<S> r;
  r.reserve(m * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) r.push_back(x.dist(tuple[i], tuple[j]));
  return r;
}

inline int pair_count(int m) { return m * (m - 1) / 2; }

}  // namespace detail

template <class S>
DiscreteMatrixMeasure<S> distance_matrix_measure(const MmSpace<S>& x, int m,
                                                 EnumerationGuard g = {}) {
  if (m < 1) throw std::invalid_argument("distance_matrix_measure requires m >= 1");
  detail::check_enumeration(x, m, g);
  DiscreteMatrixMeasure<S> nu;
  nu.order = m;
  detail::for_each_support_tuple(x, m, [&](const std::vector<int>& tuple, const S& w) {
    nu.atoms[detail::tuple_distances(x, tuple)] += w;
  });
  return nu;
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

// A test functional Phi^{m,phi}(x) = <phi, nu^{m,x}>. The kernel acts on the
// flattened upper triangle of an m x m distance matrix. Built-in kernels
// carry monotonicity/nonnegativity flags; orthant indicators and coordinate
// monomials evaluate exactly in exact mode.
template <class S>
struct Monomial {
  struct Constant {
    S value;
  };
  // offset + scale * exp(-sum_ij lambda_ij r_ij)
  struct AffineExp {
    double offset = 0.0, scale = 1.0;
    std::vector<double> lambda;
  };
  struct UpperOrthant {
    std::vector<S> thresholds;
  };
  struct CoordMonomial {
    std::vector<unsigned> exponents;
  };
  struct Callback {
    std::function<double(const std::vector<double>&)> fn;
  };

  int order = 2;
  bool increasing = false;
  bool nonnegative = false;
  std::variant<Constant, AffineExp, UpperOrthant, CoordMonomial, Callback> kernel;

  static Monomial constant(int m, S v) {
    Monomial phi;
    phi.order = m;
    bool nonneg = !(v < S(0));
    phi.increasing = true;
    phi.nonnegative = nonneg;
    phi.kernel = Constant{std::move(v)};
    return phi;
  }

  static Monomial exp_product(int m, std::vector<double> lambda) {
    require_pairs(m, lambda.size());
    Monomial phi;
    phi.order = m;
    phi.increasing = false;  // decreasing in every coordinate
    phi.nonnegative = true;
    phi.kernel = AffineExp{0.0, 1.0, std::move(lambda)};
    return phi;
  }

  // 1 - exp(-lambda r_12) on pairs; increasing and nonnegative.
  static Monomial one_minus_exp(double lambda) {
    Monomial phi;
    phi.order = 2;
    phi.increasing = true;
    phi.nonnegative = true;
    phi.kernel = AffineExp{1.0, -1.0, {lambda}};
    return phi;
  }

  static Monomial upper_orthant(int m, std::vector<S> thresholds) {
    require_pairs(m, thresholds.size());
    Monomial phi;
    phi.order = m;
    phi.increasing = true;
    phi.nonnegative = true;
    phi.kernel = UpperOrthant{std::move(thresholds)};
    return phi;
  }

  static Monomial coord_monomial(int m, std::vector<unsigned> exponents) {
    require_pairs(m, exponents.size());
    Monomial phi;
    phi.order = m;
    phi.increasing = true;  // on nonnegative matrices
    phi.nonnegative = true;
    phi.kernel = CoordMonomial{std::move(exponents)};
    return phi;
  }

  static Monomial callback(int m, std::function<double(const std::vector<double>&)> fn,
                           bool increasing = false, bool nonnegative = false) {
    Monomial phi;
    phi.order = m;
    phi.increasing = increasing;
    phi.nonnegative = nonnegative;
    phi.kernel = Callback{std::move(fn)};
    return phi;
  }

private:
  static void require_pairs(int m, std::size_t got) {
    if (static_cast<int>(got) != detail::pair_count(m))
      throw std::invalid_argument("kernel coefficient count must be m(m-1)/2");
  }
};

namespace detail {

template <class S>
double kernel_value(const Monomial<S>& phi, const std::vector<S>& r) {
  using M = Monomial<S>;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, typename M::Constant>) {
          return scalar_traits<S>::to_double(k.value);
        } else if constexpr (std::is_same_v<K, typename M::AffineExp>) {
          double e = 0.0;
          for (std::size_t a = 0; a < r.size(); ++a)
            e += k.lambda[a] * scalar_traits<S>::to_double(r[a]);
          return k.offset + k.scale * std::exp(-e);
        } else if constexpr (std::is_same_v<K, typename M::UpperOrthant>) {
          for (std::size_t a = 0; a < r.size(); ++a)
            if (r[a] < k.thresholds[a]) return 0.0;
          return 1.0;
        } else if constexpr (std::is_same_v<K, typename M::CoordMonomial>) {
          double v = 1.0;
          for (std::size_t a = 0; a < r.size(); ++a)
            v *= std::pow(scalar_traits<S>::to_double(r[a]), k.exponents[a]);
          return v;
        } else {
          std::vector<double> rd(r.size());
          for (std::size_t a = 0; a < r.size(); ++a) rd[a] = scalar_traits<S>::to_double(r[a]);
          return k.fn(rd);
        }
      },
      phi.kernel);
}

template <class S>
S kernel_value_exact(const Monomial<S>& phi, const std::vector<S>& r) {
  using M = Monomial<S>;
  return std::visit(
      [&](const auto& k) -> S {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, typename M::Constant>) {
          return k.value;
        } else if constexpr (std::is_same_v<K, typename M::UpperOrthant>) {
          for (std::size_t a = 0; a < r.size(); ++a)
            if (r[a] < k.thresholds[a]) return S(0);
          return S(1);
        } else if constexpr (std::is_same_v<K, typename M::CoordMonomial>) {
          S v(1);
          for (std::size_t a = 0; a < r.size(); ++a) v *= scalar_pow(r[a], k.exponents[a]);
          return v;
        } else {
          throw std::invalid_argument("kernel is not exactly evaluable");
        }
      },
      phi.kernel);
}

}  // namespace detail

// <phi, nu^{m,x}> by exact enumeration, accumulated in double.
template <class S>
double eval_monomial(const MmSpace<S>& x, const Monomial<S>& phi, EnumerationGuard g = {}) {
  detail::check_enumeration(x, phi.order, g);
  double acc = 0.0;
  detail::for_each_support_tuple(x, phi.order, [&](const std::vector<int>& tuple, const S& w) {
    acc += scalar_traits<S>::to_double(w) *
           detail::kernel_value(phi, detail::tuple_distances(x, tuple));
  });
  return acc;
}

// Exact-mode evaluation; requires an exactly evaluable kernel.
template <class S>
S eval_monomial_exact(const MmSpace<S>& x, const Monomial<S>& phi, EnumerationGuard g = {}) {
  detail::check_enumeration(x, phi.order, g);
  S acc(0);
  detail::for_each_support_tuple(x, phi.order, [&](const std::vector<int>& tuple, const S& w) {
    acc += w * detail::kernel_value_exact(phi, detail::tuple_distances(x, tuple));
  });
  return acc;
}

// Unbiased Monte Carlo estimate of <phi, nu^{m,x}>: samples m points i.i.d.
// from the normalized measure and rescales by (total mass)^m.
template <class S>
Estimate eval_monomial_mc(const MmSpace<S>& x, const Monomial<S>& phi, long reps,
                          std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("eval_monomial_mc requires reps >= 1");
  std::vector<int> sup = detail::support_indices(x);
  if (sup.empty()) return {0.0, 0.0, reps, seed};
  double total = scalar_traits<S>::to_double(x.total_mass());
  std::vector<double> cdf;
  double acc = 0.0;
  for (int i : sup) {
    acc += scalar_traits<S>::to_double(x.mass(i)) / total;
    cdf.push_back(acc);
  }
  cdf.back() = 1.0;
  CounterRng rng(seed);
  double scale = std::pow(total, phi.order);
  double sum = 0.0, sumsq = 0.0;
  std::vector<int> tuple(phi.order);
  for (long rep = 0; rep < reps; ++rep) {
    for (int a = 0; a < phi.order; ++a) {
      double u = rng.uniform01();
      tuple[a] = sup[std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()];
    }
    double v = scale * detail::kernel_value(phi, detail::tuple_distances(x, tuple));
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / static_cast<double>(reps);
  double var = std::max(0.0, sumsq / static_cast<double>(reps) - mean * mean);
  double se = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) : 0.0;
  return {mean, se, reps, seed};
}

// ---------------------------------------------------------------------------
// Upper orthant evaluation
// ---------------------------------------------------------------------------

// nu^{m,x}( prod_{i<j} [R_ij, inf) ) for an explicit threshold matrix given
// as its flattened upper triangle; full enumeration.
template <class S>
S eval_upper_orthant(const MmSpace<S>& x, int m, const std::vector<S>& thresholds,
                     EnumerationGuard g = {}) {
  if (static_cast<int>(thresholds.size()) != detail::pair_count(m))
    throw std::invalid_argument("threshold count must be m(m-1)/2");
  return eval_monomial_exact(x, Monomial<S>::upper_orthant(m, thresholds), g);
}

// Block pattern of a sample (a,...,a,b,...,b) with k entries per block:
// within-block thresholds are zero, cross thresholds equal `cross`. Counts
// over (support of block 1, support of block 2) subset pairs with surjection
// weights by inclusion-exclusion, so large k stays cheap.
template <class S>
S eval_upper_orthant_block(const MmSpace<S>& x, int k, const S& cross) {
  if (k < 1) throw std::invalid_argument("block length k must be >= 1");
  std::vector<int> sup = detail::support_indices(x);
  const int n = static_cast<int>(sup.size());
  if (n > 20)
    throw std::invalid_argument("block orthant evaluator supports at most 20 support points");
  if (n == 0) return S(0);
  const std::uint32_t full = (n == 32 ? ~0u : (1u << n) - 1);
  std::vector<S> msum(static_cast<std::size_t>(1) << n, S(0));
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    int low = std::countr_zero(mask);
    msum[mask] = msum[mask & (mask - 1)] + x.mass(sup[low]);
  }
  std::vector<std::uint32_t> allowed(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (!(x.dist(sup[a], sup[b]) < cross)) allowed[a] |= 1u << b;
  S total(0);
  for (std::uint32_t s1 = 1; s1 <= full; ++s1) {
    std::uint32_t adm = full;
    for (int a = 0; a < n; ++a)
      if (s1 & (1u << a)) adm &= allowed[a];
    S reach = scalar_pow(msum[adm], static_cast<unsigned>(k));
    if (reach == S(0)) continue;
    // Weight of k-tuples whose support is exactly s1.
    S w(0);
    int bits1 = std::popcount(s1);
    for (std::uint32_t u = s1;; u = (u - 1) & s1) {
      S term = scalar_pow(msum[u], static_cast<unsigned>(k));
      if (((bits1 - std::popcount(u)) & 1) == 0)
        w += term;
      else
        w -= term;
      if (u == 0) break;
    }
    total += w * reach;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Pair functional
// ---------------------------------------------------------------------------

// integral of (1 - e^{-lambda r}) against nu^{2,x}, by direct double sum
// over point pairs. Transcendental, so the result is a double even in exact
// mode.
template <class S>
double pair_functional(const MmSpace<S>& x, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("pair_functional requires lambda > 0");
  double acc = 0.0;
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double mi = scalar_traits<S>::to_double(x.mass(i));
    if (mi == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;  // diagonal pairs contribute 1 - e^0 = 0
      double mj = scalar_traits<S>::to_double(x.mass(j));
      double r = scalar_traits<S>::to_double(x.dist(i, j));
      acc += mi * mj * (1.0 - std::exp(-lambda * r));
    }
  }
  return acc;
}

}  // namespace mmorder
