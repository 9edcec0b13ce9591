#pragma once

// Shared fixtures and random generators for the test suites. The named
// spaces x1/y1/x2/y2, the two/three point pair behind the order-10 orthant
// threshold, and the integer-line pair are used across many suites.

#include "mmorder/mm_space.hpp"

#include <random>
#include <vector>

namespace testutil {

using mmorder::MmSpace;
using mmorder::MmSpaceD;
using mmorder::MmSpaceQ;
using mmorder::Rational;

// x1 = [{a,b}, r(a,b)=1, (delta_a+delta_b)/2]
inline MmSpaceQ x1() {
  return MmSpaceQ::from_rows({"a", "b"}, {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}},
                             {Rational(1, 2), Rational(1, 2)});
}

// y1 = 2 * x1 (metric doubled)
inline MmSpaceQ y1() {
  return MmSpaceQ::from_rows({"c", "d"}, {{Rational(0), Rational(2)}, {Rational(2), Rational(0)}},
                             {Rational(1, 2), Rational(1, 2)});
}

// x2 = [{e}, 0, delta_e], y2 = [{f}, 0, 2 delta_f]
inline MmSpaceQ x2() { return MmSpaceQ::point(Rational(1), "e"); }
inline MmSpaceQ y2() { return MmSpaceQ::point(Rational(2), "f"); }

// The three point space {c,d,e} with r(c,d)=1, r(c,e)=r(d,e)=2 and uniform
// mass 1/3; together with x1 it needs distance matrices of order 10 to be
// told apart from a dominated pair.
inline MmSpaceQ three_point_cde() {
  Rational z(0), one(1), two(2), third(1, 3);
  return MmSpaceQ::from_rows({"c", "d", "e"},
                             {{z, one, two}, {one, z, two}, {two, two, z}},
                             {third, third, third});
}

// Integer-line pair: x = [{1,2,4}, |i-j|, sum of deltas],
// y = [{1,2,3,4}, |i-j|, sum of deltas].
inline MmSpaceQ line_points(std::vector<int> pts) {
  std::vector<std::string> labels;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> mass;
  for (int p : pts) {
    labels.push_back(std::to_string(p));
    mass.push_back(Rational(1));
    std::vector<Rational> row;
    for (int q : pts) row.push_back(Rational(p > q ? p - q : q - p));
    rows.push_back(row);
  }
  return MmSpaceQ::from_rows(labels, rows, mass);
}
inline MmSpaceQ x_135() { return line_points({1, 2, 4}); }
inline MmSpaceQ y_1234() { return line_points({1, 2, 3, 4}); }

// Applies a label permutation: point order scrambled, structure kept.
template <class S>
MmSpace<S> shuffled(const MmSpace<S>& x, std::mt19937_64& rng) {
  std::vector<int> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  MmSpace<S> y;
  y.labels.resize(x.labels.size());
  y.dist.resize(x.size(), x.size());
  y.mass.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y.labels[i] = x.labels[perm[i]];
    y.mass(i) = x.mass(perm[i]);
    for (Eigen::Index j = 0; j < x.size(); ++j) y.dist(i, j) = x.dist(perm[i], perm[j]);
  }
  return y;
}

// Random valid exact space: entries from a small rational grid, then a
// min-plus closure to restore the triangle inequality.
inline MmSpaceQ random_space(std::mt19937_64& rng, int max_n) {
  int n = 1 + static_cast<int>(rng() % max_n);
  std::vector<Rational> dgrid = {Rational(1, 2), Rational(1), Rational(3, 2), Rational(2),
                                 Rational(3)};
  std::vector<Rational> mgrid = {Rational(1, 3), Rational(1, 2), Rational(1), Rational(2)};
  MmSpaceQ x;
  x.dist.resize(n, n);
  x.mass.resize(n);
  x.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    x.labels[i] = "p" + std::to_string(i);
    x.mass(i) = mgrid[rng() % mgrid.size()];
    x.dist(i, i) = Rational(0);
    for (int j = 0; j < i; ++j) {
      Rational d = dgrid[rng() % dgrid.size()];
      x.dist(i, j) = d;
      x.dist(j, i) = d;
    }
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Rational via = x.dist(i, k) + x.dist(k, j);
        if (via < x.dist(i, j)) x.dist(i, j) = via;
      }
  return x;
}

// Random ultrametric space with distances <= bound: recursive split, cross
// distance = current level.
inline void ultra_fill(MmSpaceQ& x, std::vector<int>& idx, Rational level, std::mt19937_64& rng) {
  if (idx.size() <= 1) return;
  std::vector<int> left, right;
  for (int v : idx) (rng() & 1 ? left : right).push_back(v);
  if (left.empty() || right.empty()) {
    left.clear();
    right.clear();
    for (std::size_t k = 0; k < idx.size(); ++k) (k % 2 ? left : right).push_back(idx[k]);
  }
  for (int a : left)
    for (int b : right) {
      x.dist(a, b) = level;
      x.dist(b, a) = level;
    }
  Rational next = level * Rational(1, 2);
  ultra_fill(x, left, next, rng);
  ultra_fill(x, right, next, rng);
}

// Constructs a pair with x <= y in the Lipschitz (le_metric) order: y is a
// random mass-split refinement of x whose metric adds a positive discrete
// bump, so the forgetful map is a measure-preserving sub-isometry.
struct DominatedPair {
  MmSpaceQ x, y;
};
inline DominatedPair metric_dominated_pair(std::mt19937_64& rng, int max_n) {
  DominatedPair out;
  out.x = random_space(rng, max_n);
  int nx = static_cast<int>(out.x.size());
  std::vector<int> tau;  // y point -> x point
  for (int i = 0; i < nx; ++i) {
    int copies = 1 + static_cast<int>(rng() % 2);
    for (int c = 0; c < copies; ++c) tau.push_back(i);
  }
  int ny = static_cast<int>(tau.size());
  Rational bump(1 + static_cast<long long>(rng() % 3), 2);
  out.y.dist.resize(ny, ny);
  out.y.mass.resize(ny);
  out.y.labels.resize(ny);
  std::vector<int> copies_of(nx, 0);
  for (int j = 0; j < ny; ++j) ++copies_of[tau[j]];
  for (int j = 0; j < ny; ++j) {
    out.y.labels[j] = "y" + std::to_string(j);
    out.y.mass(j) = out.x.mass(tau[j]) / Rational(copies_of[tau[j]]);
    for (int k = 0; k < ny; ++k)
      out.y.dist(j, k) = j == k ? Rational(0) : out.x.dist(tau[j], tau[k]) + bump;
  }
  return out;
}

inline MmSpaceQ random_ultrametric(std::mt19937_64& rng, int max_n, Rational bound) {
  int n = 1 + static_cast<int>(rng() % max_n);
  MmSpaceQ x;
  x.dist = MmSpaceQ::Matrix::Constant(n, n, Rational(0));
  x.mass.resize(n);
  x.labels.resize(n);
  std::vector<Rational> mgrid = {Rational(1, 2), Rational(1), Rational(2)};
  for (int i = 0; i < n; ++i) {
    x.labels[i] = "u" + std::to_string(i);
    x.mass(i) = mgrid[rng() % mgrid.size()];
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  ultra_fill(x, idx, bound, rng);
  return x;
}

}  // namespace testutil
