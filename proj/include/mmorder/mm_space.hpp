#pragma once

// Finite metric measure spaces: a point set with a symmetric distance matrix
// and nonnegative point masses, considered up to measure-preserving isometry
// of supports. Spaces are homogeneous in numeric mode: MmSpace<Rational> is
// the exact representation, MmSpace<double> the float one.

#include "mmorder/canonical.hpp"
#include "mmorder/scalar.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmorder {

template <class S>
struct MmSpace {
  using Scalar = S;
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  std::vector<std::string> labels;
  Matrix dist;  // n x n, symmetric, zero diagonal
  Vector mass;  // n, entries >= 0

  Eigen::Index size() const { return mass.size(); }

  S total_mass() const {
    if (mass.size() == 0) return S(0);
    return mass.sum();
  }

  static MmSpace point(S m, std::string label = "p") {
    MmSpace x;
    x.labels = {std::move(label)};
    x.dist = Matrix::Zero(1, 1);
    x.mass = Vector::Constant(1, std::move(m));
    return x;
  }

  static MmSpace from_rows(std::vector<std::string> labels,
                           const std::vector<std::vector<S>>& rows, std::vector<S> masses) {
    MmSpace x;
    x.labels = std::move(labels);
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
    x.dist.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != c)
        throw std::invalid_argument("from_rows: ragged distance rows");
      for (Eigen::Index j = 0; j < c; ++j) x.dist(i, j) = rows[i][j];
    }
    x.mass.resize(static_cast<Eigen::Index>(masses.size()));
    for (std::size_t i = 0; i < masses.size(); ++i)
      x.mass(static_cast<Eigen::Index>(i)) = masses[i];
    return x;
  }

  friend bool operator==(const MmSpace& a, const MmSpace& b) {
    if (a.labels != b.labels || a.mass.size() != b.mass.size() ||
        a.dist.rows() != b.dist.rows() || a.dist.cols() != b.dist.cols())
      return false;
    for (Eigen::Index i = 0; i < a.mass.size(); ++i)
      if (!(a.mass(i) == b.mass(i))) return false;
    for (Eigen::Index i = 0; i < a.dist.rows(); ++i)
      for (Eigen::Index j = 0; j < a.dist.cols(); ++j)
        if (!(a.dist(i, j) == b.dist(i, j))) return false;
    return true;
  }
};

using MmSpaceQ = MmSpace<Rational>;
using MmSpaceD = MmSpace<double>;

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
  enum class Kind {
    shape,               // malformed matrix/vector dimensions
    non_finite,          // NaN or infinity (float mode)
    diagonal,            // dist(i,i) != 0
    symmetry,            // dist(i,j) != dist(j,i)
    negative_distance,   // dist(i,j) < 0
    triangle,            // dist(i,k) > dist(i,j) + dist(j,k)
    negative_mass,       // mass(i) < 0
    zero_distance_pair,  // i != j with dist(i,j) == 0 (unmerged duplicates)
  };
  Kind kind;
  int i = -1, j = -1, k = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool structural = false;   // a shape issue; axiom checks were skipped
  bool ultrametric = false;  // meaningful only when valid()
  bool valid() const { return issues.empty(); }

  std::string summary() const {
    if (issues.empty()) return "valid";
    std::ostringstream os;
    for (std::size_t k = 0; k < issues.size(); ++k) {
      if (k) os << "; ";
      os << issues[k].message;
    }
    return os.str();
  }
};

namespace detail {

template <class S>
bool entry_finite(const S&) {
  return true;
}
inline bool entry_finite(double v) { return std::isfinite(v); }

template <class S>
bool is_ultrametric_matrix(const typename MmSpace<S>::Matrix& d) {
  const auto n = d.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        const S& big = d(i, k) < d(k, j) ? d(k, j) : d(i, k);
        if (big < d(i, j)) return false;
      }
  return true;
}

inline std::string idx2(const char* what, Eigen::Index i, Eigen::Index j) {
  std::ostringstream os;
  os << what << " at (" << i << "," << j << ")";
  return os.str();
}

}  // namespace detail

template <class S>
ValidationReport validate(const MmSpace<S>& x) {
  ValidationReport rep;
  const auto n = static_cast<Eigen::Index>(x.labels.size());
  if (x.dist.rows() != n || x.dist.cols() != n || x.mass.size() != n) {
    std::ostringstream os;
    os << "shape mismatch: " << n << " labels, " << x.dist.rows() << "x" << x.dist.cols()
       << " distance matrix, " << x.mass.size() << " masses";
    rep.issues.push_back({ValidationIssue::Kind::shape, -1, -1, -1, os.str()});
    rep.structural = true;
    return rep;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!detail::entry_finite(x.mass(i)))
      rep.issues.push_back({ValidationIssue::Kind::non_finite, static_cast<int>(i), -1, -1,
                            "non-finite mass at " + std::to_string(i)});
    for (Eigen::Index j = 0; j < n; ++j)
      if (!detail::entry_finite(x.dist(i, j))) {
        rep.issues.push_back({ValidationIssue::Kind::non_finite, static_cast<int>(i),
                              static_cast<int>(j), -1, detail::idx2("non-finite distance", i, j)});
        return rep;  // further numeric checks would be meaningless
      }
  }
  const S zero(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x.mass(i) < zero)
      rep.issues.push_back({ValidationIssue::Kind::negative_mass, static_cast<int>(i), -1, -1,
                            "negative mass at " + std::to_string(i)});
    if (!(x.dist(i, i) == zero))
      rep.issues.push_back({ValidationIssue::Kind::diagonal, static_cast<int>(i),
                            static_cast<int>(i), -1,
                            "nonzero diagonal at " + std::to_string(i)});
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!(x.dist(i, j) == x.dist(j, i)))
        rep.issues.push_back({ValidationIssue::Kind::symmetry, static_cast<int>(i),
                              static_cast<int>(j), -1, detail::idx2("asymmetric entry", i, j)});
      if (x.dist(i, j) < zero)
        rep.issues.push_back({ValidationIssue::Kind::negative_distance, static_cast<int>(i),
                              static_cast<int>(j), -1, detail::idx2("negative distance", i, j)});
      if (x.dist(i, j) == zero)
        rep.issues.push_back({ValidationIssue::Kind::zero_distance_pair, static_cast<int>(i),
                              static_cast<int>(j), -1,
                              detail::idx2("unmerged zero-distance pair", i, j)});
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        S lhs = x.dist(i, k);
        S rhs = x.dist(i, j) + x.dist(j, k);
        if (rhs < lhs) {
          std::ostringstream os;
          os << "triangle violation at (" << i << "," << j << "," << k << ")";
          rep.issues.push_back({ValidationIssue::Kind::triangle, static_cast<int>(i),
                                static_cast<int>(j), static_cast<int>(k), os.str()});
        }
      }
  if (rep.issues.empty()) rep.ultrametric = detail::is_ultrametric_matrix<S>(x.dist);
  return rep;
}

template <class S>
bool is_ultrametric(const MmSpace<S>& x) {
  return detail::is_ultrametric_matrix<S>(x.dist);
}

// ---------------------------------------------------------------------------
// Canonicalization and equivalence
// ---------------------------------------------------------------------------

namespace detail {

// Throws unless the space is valid up to unmerged zero-distance pairs and
// zero masses.
template <class S>
void require_mergeable(const MmSpace<S>& x) {
  ValidationReport rep = validate(x);
  for (const auto& issue : rep.issues)
    if (issue.kind != ValidationIssue::Kind::zero_distance_pair)
      throw std::invalid_argument("invalid mm space: " + issue.message);
}

}  // namespace detail

// Normal form of the equivalence class: zero-mass points dropped, points at
// distance zero merged (masses added), points ordered by the canonical
// labeling, labels replaced by positions. Idempotent; equal classes give
// equal values.
template <class S>
MmSpace<S> canonicalize(const MmSpace<S>& x) {
  detail::require_mergeable(x);
  const auto n = x.size();
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (S(0) < x.mass(i)) keep.push_back(static_cast<int>(i));

  detail::Dsu dsu(static_cast<int>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = a + 1; b < keep.size(); ++b)
      if (x.dist(keep[a], keep[b]) == S(0)) dsu.unite(static_cast<int>(a), static_cast<int>(b));

  std::vector<int> reps;  // indices into keep
  std::vector<int> rep_of(keep.size(), -1);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    int r = dsu.find(static_cast<int>(a));
    if (rep_of[r] < 0) {
      rep_of[r] = static_cast<int>(reps.size());
      reps.push_back(static_cast<int>(a));
    }
  }

  const auto m = static_cast<Eigen::Index>(reps.size());
  MmSpace<S> y;
  y.dist.resize(m, m);
  y.mass = MmSpace<S>::Vector::Constant(m, S(0));
  for (std::size_t a = 0; a < keep.size(); ++a)
    y.mass(rep_of[dsu.find(static_cast<int>(a))]) += x.mass(keep[a]);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) y.dist(a, b) = x.dist(keep[reps[a]], keep[reps[b]]);

  detail::CanonicalLabeler<S> labeler(y.dist, y.mass);
  std::vector<int> perm = labeler.run();

  MmSpace<S> z;
  z.dist.resize(m, m);
  z.mass.resize(m);
  z.labels.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    z.mass(a) = y.mass(perm[a]);
    z.labels[a] = std::to_string(a);
    for (Eigen::Index b = 0; b < m; ++b) z.dist(a, b) = y.dist(perm[a], perm[b]);
  }
  return z;
}

struct EquivalenceResult {
  bool equivalent = false;
  // For each support point of a (original index), the matched original index
  // in b. Mass-preserving and distance-preserving by construction.
  std::vector<std::pair<int, int>> isomorphism;
};

namespace detail {

template <class S>
bool iso_backtrack(const MmSpace<S>& a, const MmSpace<S>& b, const std::vector<int>& sa,
                   const std::vector<int>& sb, double tol, std::vector<int>& match,
                   std::vector<bool>& used, std::size_t depth) {
  if (depth == sa.size()) return true;
  int i = sa[depth];
  for (std::size_t t = 0; t < sb.size(); ++t) {
    if (used[t]) continue;
    int j = sb[t];
    if (!tol_eq(a.mass(i), b.mass(j), tol)) continue;
    bool ok = true;
    for (std::size_t d = 0; d < depth; ++d) {
      if (!tol_eq(a.dist(i, sa[d]), b.dist(j, sb[match[d]]), tol)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    match[depth] = static_cast<int>(t);
    used[t] = true;
    if (iso_backtrack(a, b, sa, sb, tol, match, used, depth + 1)) return true;
    used[t] = false;
  }
  return false;
}

template <class S>
std::vector<int> support_indices(const MmSpace<S>& x) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (S(0) < x.mass(i)) s.push_back(static_cast<int>(i));
  return s;
}

}  // namespace detail

// Equivalence of mm spaces: a mass-preserving distance-preserving bijection
// of supports. In float mode entries are compared within tol.
template <class S>
EquivalenceResult is_equivalent(const MmSpace<S>& a, const MmSpace<S>& b,
                                double tol = kDefaultTol) {
  EquivalenceResult res;
  std::vector<int> sa = detail::support_indices(a), sb = detail::support_indices(b);
  if (sa.size() != sb.size()) return res;
  if (!tol_eq(a.total_mass(), b.total_mass(), tol * (1.0 + sa.size()))) return res;
  std::sort(sa.begin(), sa.end(), [&](int u, int v) {
    if (a.mass(u) < a.mass(v)) return false;
    if (a.mass(v) < a.mass(u)) return true;
    return u < v;
  });
  std::vector<int> match(sa.size(), -1);
  std::vector<bool> used(sb.size(), false);
  if (!detail::iso_backtrack(a, b, sa, sb, tol, match, used, 0)) return res;
  res.equivalent = true;
  for (std::size_t d = 0; d < sa.size(); ++d) res.isomorphism.push_back({sa[d], sb[match[d]]});
  std::sort(res.isomorphism.begin(), res.isomorphism.end());
  return res;
}

// ---------------------------------------------------------------------------
// Semigroup actions and binary operations
// ---------------------------------------------------------------------------

enum class Action { metric, measure };

// a * x scales every distance (Action::metric); a . x scales every mass
// (Action::measure). Result is canonical.
template <class S>
MmSpace<S> scalar_action(Action kind, const S& a, const MmSpace<S>& x) {
  if (a < S(0)) throw std::invalid_argument("scalar_action requires a >= 0");
  MmSpace<S> y = x;
  if (kind == Action::metric)
    y.dist = (y.dist * a).eval();
  else
    y.mass = (y.mass * a).eval();
  return canonicalize(y);
}

inline constexpr double kLpMax = std::numeric_limits<double>::infinity();

namespace detail {

inline double lp_combine(double a, double b, double p) {
  if (std::isinf(p)) return std::max(a, b);
  if (p == 1.0) return a + b;
  if (p == 2.0) return std::hypot(a, b);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

template <class S>
S lp_combine_exact(const S& a, const S& b, double p) {
  if (std::isinf(p)) return a < b ? b : a;
  return a + b;  // p == 1 is the only other exact case; caller enforces
}

}  // namespace detail

// Cartesian product space with l_p-combined metric and product measure.
// p = kLpMax gives the max combination used by the least upper bound.
// Exact mode supports p = 1 and p = infinity; other exponents need floats.
template <class S>
MmSpace<S> box_plus(const MmSpace<S>& x, const MmSpace<S>& y, double p = 1.0) {
  if (!(p >= 1.0)) throw std::invalid_argument("box_plus requires p >= 1");
  if (scalar_traits<S>::is_exact && p != 1.0 && !std::isinf(p))
    throw std::invalid_argument("box_plus with p not in {1, infinity} requires float mode");
  const auto nx = x.size(), ny = y.size();
  MmSpace<S> z;
  z.dist.resize(nx * ny, nx * ny);
  z.mass.resize(nx * ny);
  z.labels.resize(static_cast<std::size_t>(nx * ny));
  auto id = [&](Eigen::Index i, Eigen::Index j) { return i * ny + j; };
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < ny; ++j) {
      z.mass(id(i, j)) = x.mass(i) * y.mass(j);
      z.labels[id(i, j)] = x.labels[i] + "|" + y.labels[j];
      for (Eigen::Index k = 0; k < nx; ++k)
        for (Eigen::Index l = 0; l < ny; ++l) {
          if constexpr (scalar_traits<S>::is_exact)
            z.dist(id(i, j), id(k, l)) = detail::lp_combine_exact(x.dist(i, k), y.dist(j, l), p);
          else
            z.dist(id(i, j), id(k, l)) = detail::lp_combine(x.dist(i, k), y.dist(j, l), p);
        }
    }
  if constexpr (!scalar_traits<S>::is_exact) {
    // Rounded l_p combinations can miss the triangle inequality by an ulp;
    // relax to the min-plus fixpoint so the result validates as-is.
    const auto n = z.dist.rows();
    for (bool changed = true; changed;) {
      changed = false;
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) {
            double via = z.dist(i, k) + z.dist(k, j);
            if (via < z.dist(i, j)) {
              z.dist(i, j) = via;
              changed = true;
            }
          }
    }
  }
  return canonicalize(z);
}

// h-concatenation of h-bounded ultrametric spaces: disjoint union with all
// cross distances equal to h.
template <class S>
MmSpace<S> concat_h(const MmSpace<S>& x, const MmSpace<S>& y, const S& h) {
  if (!(S(0) < h)) throw std::invalid_argument("concat_h requires h > 0");
  for (const auto* side : {&x, &y}) {
    const char* name = side == &x ? "left" : "right";
    if (!is_ultrametric(*side))
      throw std::invalid_argument(std::string("concat_h: ") + name + " operand is not ultrametric");
    for (Eigen::Index i = 0; i < side->size(); ++i)
      for (Eigen::Index j = i + 1; j < side->size(); ++j)
        if (h < side->dist(i, j)) {
          std::ostringstream os;
          os << "concat_h: " << name << " operand has distance > h at pair (" << i << "," << j
             << ")";
          throw std::invalid_argument(os.str());
        }
  }
  const auto nx = x.size(), ny = y.size();
  MmSpace<S> z;
  z.dist = MmSpace<S>::Matrix::Constant(nx + ny, nx + ny, h);
  z.mass.resize(nx + ny);
  z.labels.resize(static_cast<std::size_t>(nx + ny));
  for (Eigen::Index i = 0; i < nx; ++i) {
    z.mass(i) = x.mass(i);
    z.labels[i] = x.labels[i];
    for (Eigen::Index j = 0; j < nx; ++j) z.dist(i, j) = x.dist(i, j);
  }
  for (Eigen::Index i = 0; i < ny; ++i) {
    z.mass(nx + i) = y.mass(i);
    z.labels[nx + i] = y.labels[i];
    for (Eigen::Index j = 0; j < ny; ++j) z.dist(nx + i, nx + j) = y.dist(i, j);
  }
  return z;
}

inline MmSpaceD to_float(const MmSpaceQ& x) {
  MmSpaceD y;
  y.labels = x.labels;
  y.dist.resize(x.dist.rows(), x.dist.cols());
  y.mass.resize(x.mass.size());
  for (Eigen::Index i = 0; i < x.dist.rows(); ++i)
    for (Eigen::Index j = 0; j < x.dist.cols(); ++j) y.dist(i, j) = x.dist(i, j).to_double();
  for (Eigen::Index i = 0; i < x.mass.size(); ++i) y.mass(i) = x.mass(i).to_double();
  return y;
}

inline const MmSpaceD& to_float(const MmSpaceD& x) { return x; }

}  // namespace mmorder
