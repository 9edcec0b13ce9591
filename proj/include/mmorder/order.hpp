#pragma once

// Decision procedures with witnesses for the partial orders on finite mm
// spaces:
//
//   le_measure    x embeds isometrically into y with pointwise smaller masses
//   le_metric     equal masses, measure-preserving sub-isometry supp(y)->supp(x)
//   le_gen        a sub-measure of y maps onto x measure-preservingly and
//                 sub-isometrically (the general order)
//   le_global_map the strict variant: one sub-measure preserving sub-isometry
//                 defined on all of supp(y)
//
// All verdicts are produced by backtracking searches over candidate maps and
// every positive verdict carries a witness that re-verifies against the raw
// definition through an independent routine.

#include "mmorder/mm_space.hpp"
#include "mmorder/stats.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace mmorder {

struct OrderOptions {
  double tol = kDefaultTol;  // float mode only; exact mode compares exactly
  int max_points = 12;       // guardrail per space for the backtracking search
  bool unlimited = false;
};

// Injective map from the support of x into the support of y, distance
// preserving, with mass(x_i) <= mass(y_{iota(i)}).
struct MeasureWitness {
  std::vector<std::pair<int, int>> embedding;  // (index in x, index in y)
};

// Map from the support of y onto the support of x with exact pushforward.
struct MetricWitness {
  std::vector<std::pair<int, int>> tau;  // (index in y, index in x)
};

// Used subset S of supp(y), map g: S -> supp(x), positive submasses on S
// pushing forward exactly to the masses of x.
template <class S>
struct GenWitness {
  std::vector<std::pair<int, int>> map;  // (index in y, index in x), only used points
  std::vector<S> submass;                // parallel to map
};

struct GlobalMapWitness {
  std::vector<std::pair<int, int>> tau;  // (index in y, index in x), all of supp(y)
};

template <class S>
using OrderWitness =
    std::variant<MeasureWitness, MetricWitness, GenWitness<S>, GlobalMapWitness>;

template <class S>
struct OrderDecision {
  bool verdict = false;
  std::optional<OrderWitness<S>> witness;
  std::uint64_t nodes = 0;  // backtracking nodes explored
};

namespace detail {

template <class S>
void check_order_guardrail(const MmSpace<S>& x, const MmSpace<S>& y, const OrderOptions& opt) {
  if (opt.unlimited) return;
  if (static_cast<int>(support_indices(x).size()) > opt.max_points ||
      static_cast<int>(support_indices(y).size()) > opt.max_points)
    throw std::invalid_argument(
        "order checker guardrail: support exceeds max_points; raise the limit to proceed");
}

template <class S>
std::vector<int> by_decreasing_mass(const MmSpace<S>& x, std::vector<int> idx) {
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (x.mass(b) < x.mass(a)) return true;
    if (x.mass(a) < x.mass(b)) return false;
    return a < b;
  });
  return idx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// le_measure
// ---------------------------------------------------------------------------

template <class S>
OrderDecision<S> le_measure(const MmSpace<S>& x, const MmSpace<S>& y,
                            const OrderOptions& opt = {}) {
  detail::check_order_guardrail(x, y, opt);
  std::vector<int> sx = detail::by_decreasing_mass(x, detail::support_indices(x));
  std::vector<int> sy = detail::support_indices(y);
  OrderDecision<S> dec;
  if (sx.size() > sy.size()) return dec;

  std::vector<int> image(sx.size(), -1);
  std::vector<bool> used(sy.size(), false);
  auto dfs = [&](auto&& self, std::size_t depth) -> bool {
    ++dec.nodes;
    if (depth == sx.size()) return true;
    int i = sx[depth];
    for (std::size_t t = 0; t < sy.size(); ++t) {
      if (used[t]) continue;
      int j = sy[t];
      if (!tol_le(x.mass(i), y.mass(j), opt.tol)) continue;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d)
        ok = tol_eq(x.dist(i, sx[d]), y.dist(j, sy[image[d]]), opt.tol);
      if (!ok) continue;
      image[depth] = static_cast<int>(t);
      used[t] = true;
      if (self(self, depth + 1)) return true;
      used[t] = false;
    }
    return false;
  };
  if (!dfs(dfs, 0)) return dec;
  dec.verdict = true;
  MeasureWitness w;
  for (std::size_t d = 0; d < sx.size(); ++d) w.embedding.push_back({sx[d], sy[image[d]]});
  std::sort(w.embedding.begin(), w.embedding.end());
  dec.witness = OrderWitness<S>(std::move(w));
  return dec;
}

// ---------------------------------------------------------------------------
// le_metric
// ---------------------------------------------------------------------------

template <class S>
OrderDecision<S> le_metric(const MmSpace<S>& x, const MmSpace<S>& y,
                           const OrderOptions& opt = {}) {
  detail::check_order_guardrail(x, y, opt);
  if (!tol_eq(x.total_mass(), y.total_mass(), opt.tol))
    throw std::invalid_argument("le_metric requires equal total masses");
  std::vector<int> sx = detail::support_indices(x);
  std::vector<int> sy = detail::by_decreasing_mass(y, detail::support_indices(y));
  OrderDecision<S> dec;

  std::vector<int> target(sy.size(), -1);       // position in sx for each sy point
  std::vector<S> deficit;                       // remaining mass each x point needs
  deficit.reserve(sx.size());
  for (int i : sx) deficit.push_back(x.mass(i));
  S remaining = y.total_mass();

  auto dfs = [&](auto&& self, std::size_t depth) -> bool {
    ++dec.nodes;
    if (depth == sy.size()) {
      for (const S& d : deficit)
        if (!tol_eq(d, S(0), opt.tol)) return false;
      return true;
    }
    int j = sy[depth];
    const S& mj = y.mass(j);
    for (std::size_t t = 0; t < sx.size(); ++t) {
      int i = sx[t];
      if (!tol_le(mj, deficit[t], opt.tol)) continue;  // x point cannot absorb j
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d)
        ok = tol_le(x.dist(i, sx[target[d]]), y.dist(j, sy[d]), opt.tol);
      if (!ok) continue;
      target[depth] = static_cast<int>(t);
      deficit[t] -= mj;
      remaining -= mj;
      // Every x point must still be coverable by what is left.
      bool feasible = true;
      for (const S& d : deficit)
        if (!tol_le(d, remaining, opt.tol)) {
          feasible = false;
          break;
        }
      if (feasible && self(self, depth + 1)) return true;
      deficit[t] += mj;
      remaining += mj;
    }
    return false;
  };
  if (!dfs(dfs, 0)) return dec;
  dec.verdict = true;
  MetricWitness w;
  for (std::size_t d = 0; d < sy.size(); ++d) w.tau.push_back({sy[d], sx[target[d]]});
  std::sort(w.tau.begin(), w.tau.end());
  dec.witness = OrderWitness<S>(std::move(w));
  return dec;
}

// ---------------------------------------------------------------------------
// le_gen and le_global_map
// ---------------------------------------------------------------------------

namespace detail {

// Shared search: assigns every support point of y either to a support point
// of x or (when allow_unused) to nothing, subject to the sub-isometry
// constraint among assigned points, such that the y-mass mapped to each x
// point covers its mass. `le_gen` then splits masses proportionally.
template <class S>
bool cover_search(const MmSpace<S>& x, const MmSpace<S>& y, const std::vector<int>& sx,
                  const std::vector<int>& sy, bool allow_unused, const OrderOptions& opt,
                  std::vector<int>& assign, std::uint64_t& nodes) {
  std::vector<S> covered(sx.size(), S(0));
  S remaining(0);
  for (int j : sy) remaining += y.mass(j);

  auto feasible = [&]() {
    for (std::size_t t = 0; t < sx.size(); ++t) {
      S need = x.mass(sx[t]) - covered[t];
      if (!tol_le(need, remaining, opt.tol)) return false;
    }
    return true;
  };

  auto dfs = [&](auto&& self, std::size_t depth) -> bool {
    ++nodes;
    if (depth == sy.size()) {
      for (std::size_t t = 0; t < sx.size(); ++t)
        if (!tol_le(x.mass(sx[t]), covered[t], opt.tol)) return false;
      return true;
    }
    int j = sy[depth];
    const S& mj = y.mass(j);
    for (std::size_t t = 0; t < sx.size(); ++t) {
      int i = sx[t];
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d) {
        if (assign[d] < 0) continue;
        ok = tol_le(x.dist(i, sx[assign[d]]), y.dist(j, sy[d]), opt.tol);
      }
      if (!ok) continue;
      assign[depth] = static_cast<int>(t);
      covered[t] += mj;
      remaining -= mj;
      if (feasible() && self(self, depth + 1)) return true;
      covered[t] -= mj;
      remaining += mj;
    }
    if (allow_unused) {
      assign[depth] = -1;
      remaining -= mj;
      if (feasible() && self(self, depth + 1)) return true;
      remaining += mj;
    }
    return false;
  };
  return dfs(dfs, 0);
}

}  // namespace detail

template <class S>
OrderDecision<S> le_gen(const MmSpace<S>& x, const MmSpace<S>& y, const OrderOptions& opt = {}) {
  detail::check_order_guardrail(x, y, opt);
  OrderDecision<S> dec;
  if (!tol_le(x.total_mass(), y.total_mass(), opt.tol)) return dec;
  std::vector<int> sx = detail::support_indices(x);
  std::vector<int> sy = detail::by_decreasing_mass(y, detail::support_indices(y));
  std::vector<int> assign(sy.size(), -1);
  if (!detail::cover_search(x, y, sx, sy, /*allow_unused=*/true, opt, assign, dec.nodes))
    return dec;
  dec.verdict = true;
  GenWitness<S> w;
  std::vector<S> covered(sx.size(), S(0));
  for (std::size_t d = 0; d < sy.size(); ++d)
    if (assign[d] >= 0) covered[assign[d]] += y.mass(sy[d]);
  for (std::size_t d = 0; d < sy.size(); ++d) {
    if (assign[d] < 0) continue;
    int t = assign[d];
    w.map.push_back({sy[d], sx[t]});
    // Proportional submass: y contributes its share of the x mass it covers.
    w.submass.push_back(y.mass(sy[d]) * x.mass(sx[t]) / covered[t]);
  }
  dec.witness = OrderWitness<S>(std::move(w));
  return dec;
}

template <class S>
OrderDecision<S> le_global_map(const MmSpace<S>& x, const MmSpace<S>& y,
                               const OrderOptions& opt = {}) {
  detail::check_order_guardrail(x, y, opt);
  OrderDecision<S> dec;
  if (!tol_le(x.total_mass(), y.total_mass(), opt.tol)) return dec;
  std::vector<int> sx = detail::support_indices(x);
  std::vector<int> sy = detail::by_decreasing_mass(y, detail::support_indices(y));
  if (sy.size() > 0 && sx.empty()) return dec;  // nothing to map onto
  std::vector<int> assign(sy.size(), -1);
  if (!detail::cover_search(x, y, sx, sy, /*allow_unused=*/false, opt, assign, dec.nodes))
    return dec;
  dec.verdict = true;
  GlobalMapWitness w;
  for (std::size_t d = 0; d < sy.size(); ++d) w.tau.push_back({sy[d], sx[assign[d]]});
  std::sort(w.tau.begin(), w.tau.end());
  dec.witness = OrderWitness<S>(std::move(w));
  return dec;
}

// ---------------------------------------------------------------------------
// Independent witness verification
// ---------------------------------------------------------------------------

// Re-checks a witness against the raw definitions; shares no code with the
// searches above.
template <class S>
bool verify_witness(const MmSpace<S>& x, const MmSpace<S>& y, const OrderWitness<S>& witness,
                    double tol = kDefaultTol) {
  const S zero(0);
  return std::visit(
      [&](const auto& w) -> bool {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, MeasureWitness>) {
          // Distance-preserving injection with pointwise mass domination,
          // covering every support point of x.
          std::vector<bool> seen_x(x.size(), false), seen_y(y.size(), false);
          for (auto [i, j] : w.embedding) {
            if (i < 0 || i >= x.size() || j < 0 || j >= y.size()) return false;
            if (seen_x[i] || seen_y[j]) return false;  // not a function / not injective
            seen_x[i] = true;
            seen_y[j] = true;
            if (!tol_le(x.mass(i), y.mass(j), tol)) return false;
          }
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (zero < x.mass(i) && !seen_x[i]) return false;
          for (auto [i, j] : w.embedding)
            for (auto [k, l] : w.embedding)
              if (!tol_eq(x.dist(i, k), y.dist(j, l), tol)) return false;
          return true;
        } else if constexpr (std::is_same_v<W, MetricWitness>) {
          if (!tol_eq(x.total_mass(), y.total_mass(), tol)) return false;
          std::vector<bool> seen_y(y.size(), false);
          std::vector<S> push(x.size(), zero);
          for (auto [j, i] : w.tau) {
            if (i < 0 || i >= x.size() || j < 0 || j >= y.size()) return false;
            if (seen_y[j]) return false;
            seen_y[j] = true;
            push[i] += y.mass(j);
          }
          for (Eigen::Index j = 0; j < y.size(); ++j)
            if (zero < y.mass(j) && !seen_y[j]) return false;  // tau not total on supp(y)
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!tol_eq(push[i], x.mass(i), tol * (1.0 + y.size()))) return false;
          for (auto [j1, i1] : w.tau)
            for (auto [j2, i2] : w.tau)
              if (!tol_le(x.dist(i1, i2), y.dist(j1, j2), tol)) return false;
          return true;
        } else if constexpr (std::is_same_v<W, GenWitness<S>>) {
          if (w.map.size() != w.submass.size()) return false;
          std::vector<bool> seen_y(y.size(), false);
          std::vector<S> push(x.size(), zero);
          for (std::size_t a = 0; a < w.map.size(); ++a) {
            auto [j, i] = w.map[a];
            if (i < 0 || i >= x.size() || j < 0 || j >= y.size()) return false;
            if (seen_y[j]) return false;
            seen_y[j] = true;
            const S& s = w.submass[a];
            if (!(zero < s)) return false;                 // submass must be positive
            if (!tol_le(s, y.mass(j), tol)) return false;  // and bounded by mu_Y
            push[i] += s;
          }
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!tol_eq(push[i], x.mass(i), tol * (1.0 + y.size()))) return false;
          for (auto [j1, i1] : w.map)
            for (auto [j2, i2] : w.map)
              if (!tol_le(x.dist(i1, i2), y.dist(j1, j2), tol)) return false;
          return true;
        } else {
          static_assert(std::is_same_v<W, GlobalMapWitness>);
          std::vector<bool> seen_y(y.size(), false);
          std::vector<S> push(x.size(), zero);
          for (auto [j, i] : w.tau) {
            if (i < 0 || i >= x.size() || j < 0 || j >= y.size()) return false;
            if (seen_y[j]) return false;
            seen_y[j] = true;
            if (!(zero < x.mass(i))) return false;  // must land in supp(x)
            push[i] += y.mass(j);
          }
          for (Eigen::Index j = 0; j < y.size(); ++j)
            if (zero < y.mass(j) && !seen_y[j]) return false;
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!tol_le(x.mass(i), push[i], tol * (1.0 + y.size()))) return false;
          for (auto [j1, i1] : w.tau)
            for (auto [j2, i2] : w.tau)
              if (!tol_le(x.dist(i1, i2), y.dist(j1, j2), tol)) return false;
          return true;
        }
      },
      witness);
}

// ---------------------------------------------------------------------------
// Distance matrix measure dominance (Theorem-style necessary condition)
// ---------------------------------------------------------------------------

template <class S>
struct NuDominanceResult {
  bool dominated = false;
  // Monotone coupling between atoms of nu^{m,x} and nu^{m,y}.
  std::vector<std::tuple<std::vector<S>, std::vector<S>, S>> coupling;
};

// Decides nu^{m,x}(A) <= nu^{m,y}(A) for all increasing Borel A via the
// finite-poset Strassen criterion on the atom laws under the componentwise
// matrix order.
template <class S>
NuDominanceResult<S> check_nu_dominance(const MmSpace<S>& x, const MmSpace<S>& y, int m,
                                        EnumerationGuard guard = {}, double tol = kDefaultTol) {
  if (!tol_eq(x.total_mass(), y.total_mass(), tol))
    throw std::invalid_argument("check_nu_dominance requires equal total masses");
  MmSpace<S> xn = x, yn = y;
  S tx = x.total_mass();
  if (!(tx == S(0)) && !(tx == S(1))) {
    for (Eigen::Index i = 0; i < xn.size(); ++i) xn.mass(i) = xn.mass(i) / tx;
    S ty = y.total_mass();
    for (Eigen::Index j = 0; j < yn.size(); ++j) yn.mass(j) = yn.mass(j) / ty;
  }
  auto nux = distance_matrix_measure(xn, m, guard);
  auto nuy = distance_matrix_measure(yn, m, guard);
  DiscreteLaw<std::vector<S>, S> mu{nux.atoms}, nu{nuy.atoms};
  double entry_tol = scalar_traits<S>::is_exact ? 0.0 : tol;
  auto res = strassen_check(mu, nu, componentwise_leq<S>{entry_tol}, tol);
  NuDominanceResult<S> out;
  out.dominated = res.dominated;
  out.coupling = std::move(res.coupling);
  return out;
}

}  // namespace mmorder
