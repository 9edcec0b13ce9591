#pragma once

// Canonical labeling of a finite weighted metric structure by iterative
// color refinement plus individualization search. Two spaces are equivalent
// iff their canonically ordered (mass, distance matrix) data agree, so
// class equality reduces to plain equality of the reordered arrays.

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mmorder::detail {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

template <class S>
class CanonicalLabeler {
public:
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  CanonicalLabeler(const Matrix& dist, const Vector& mass)
      : dist_(dist), mass_(mass), n_(static_cast<int>(mass.size())) {}

  // Returns perm with perm[k] = input index placed at canonical position k.
  std::vector<int> run() {
    if (n_ == 0) return {};
    std::vector<int> colors = initial_colors();
    refine(colors);
    dfs(colors);
    return best_perm_;
  }

private:
  const Matrix& dist_;
  const Vector& mass_;
  int n_;
  std::vector<int> best_perm_;
  bool have_best_ = false;
  std::vector<S> best_key_;
  std::vector<std::vector<int>> autos_;  // discovered automorphisms
  std::vector<int> chosen_;              // individualized vertices on this path
  long nodes_ = 0;
  static constexpr long kNodeBudget = 2000000;

  std::vector<int> initial_colors() const {
    using Key = std::pair<S, std::vector<S>>;
    std::vector<std::pair<Key, int>> keyed(n_);
    for (int i = 0; i < n_; ++i) {
      std::vector<S> row;
      row.reserve(n_ - 1);
      for (int j = 0; j < n_; ++j)
        if (j != i) row.push_back(dist_(i, j));
      std::sort(row.begin(), row.end());
      keyed[i] = {{mass_(i), std::move(row)}, i};
    }
    return rank_by_key(keyed);
  }

  template <class Key>
  static std::vector<int> rank_by_key(std::vector<std::pair<Key, int>>& keyed) {
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<int> colors(keyed.size());
    int rank = 0;
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k > 0 && keyed[k].first != keyed[k - 1].first) ++rank;
      colors[keyed[k].second] = rank;
    }
    return colors;
  }

  static int color_count(const std::vector<int>& colors) {
    return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
  }

  void refine(std::vector<int>& colors) const {
    int before = color_count(colors);
    for (;;) {
      using Key = std::pair<int, std::vector<std::pair<int, S>>>;
      std::vector<std::pair<Key, int>> keyed(n_);
      for (int i = 0; i < n_; ++i) {
        std::vector<std::pair<int, S>> nb;
        nb.reserve(n_ - 1);
        for (int j = 0; j < n_; ++j)
          if (j != i) nb.emplace_back(colors[j], dist_(i, j));
        std::sort(nb.begin(), nb.end());
        keyed[i] = {{colors[i], std::move(nb)}, i};
      }
      std::vector<int> next = rank_by_key(keyed);
      int after = color_count(next);
      colors = std::move(next);
      if (after == before || after == n_) return;
      before = after;
    }
  }

  void dfs(const std::vector<int>& colors) {
    if (++nodes_ > kNodeBudget)
      throw std::runtime_error("canonical labeling exceeded its search budget");
    int nc = color_count(colors);
    std::vector<std::vector<int>> cells(nc);
    for (int i = 0; i < n_; ++i) cells[colors[i]].push_back(i);
    int target = -1;
    for (int c = 0; c < nc; ++c)
      if (cells[c].size() > 1) {
        target = c;
        break;
      }
    if (target < 0) {
      leaf(colors);
      return;
    }
    std::vector<int> tried;
    for (int v : cells[target]) {
      if (in_tried_orbit(v, tried)) continue;
      tried.push_back(v);
      // Split v off to the front of its cell, keeping all other order.
      std::vector<int> split(n_);
      for (int i = 0; i < n_; ++i) split[i] = 2 * colors[i] + (i == v ? 0 : 1);
      using Key = int;
      std::vector<std::pair<Key, int>> keyed(n_);
      for (int i = 0; i < n_; ++i) keyed[i] = {split[i], i};
      std::vector<int> child = rank_by_key(keyed);
      refine(child);
      chosen_.push_back(v);
      dfs(child);
      chosen_.pop_back();
    }
  }

  // Candidates equivalent to an already-expanded sibling under an
  // automorphism fixing the individualized prefix lead to the same leaves.
  bool in_tried_orbit(int v, const std::vector<int>& tried) {
    if (tried.empty() || autos_.empty()) return false;
    Dsu dsu(n_);
    for (const auto& g : autos_) {
      bool fixes = true;
      for (int u : chosen_)
        if (g[u] != u) {
          fixes = false;
          break;
        }
      if (!fixes) continue;
      for (int u = 0; u < n_; ++u) dsu.unite(u, g[u]);
    }
    for (int u : tried)
      if (dsu.find(u) == dsu.find(v)) return true;
    return false;
  }

  void leaf(const std::vector<int>& colors) {
    std::vector<int> perm(n_);
    for (int i = 0; i < n_; ++i) perm[colors[i]] = i;
    std::vector<S> key;
    key.reserve(n_ + n_ * (n_ - 1) / 2);
    for (int k = 0; k < n_; ++k) key.push_back(mass_(perm[k]));
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b) key.push_back(dist_(perm[a], perm[b]));
    if (!have_best_ || key < best_key_) {
      best_key_ = std::move(key);
      best_perm_ = std::move(perm);
      have_best_ = true;
      return;
    }
    if (key == best_key_) {
      // Equal keys mean perm maps the structure exactly as best_perm_ does.
      std::vector<int> g(n_);
      for (int k = 0; k < n_; ++k) g[best_perm_[k]] = perm[k];
      autos_.push_back(std::move(g));
    }
  }
};

}  // namespace mmorder::detail
