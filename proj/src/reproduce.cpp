#include "scenarios.hpp"

#include "mmorder/genealogy.hpp"
#include "mmorder/order.hpp"
#include "mmorder/stats.hpp"
#include "mmorder/transport.hpp"

#include <cmath>
#include <iostream>

namespace mmorder::cli {

namespace {

// The named small spaces the scenarios revolve around.

MmSpaceQ two_point_unit() {  // two points at distance 1, masses 1/2
  return MmSpaceQ::from_rows({"a", "b"}, {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}},
                             {Rational(1, 2), Rational(1, 2)});
}

MmSpaceQ two_point_doubled() {  // the same with the metric doubled
  return MmSpaceQ::from_rows({"c", "d"}, {{Rational(0), Rational(2)}, {Rational(2), Rational(0)}},
                             {Rational(1, 2), Rational(1, 2)});
}

MmSpaceQ three_point_split() {  // r(c,d)=1, r(c,e)=r(d,e)=2, uniform thirds
  Rational z(0), one(1), two(2), third(1, 3);
  return MmSpaceQ::from_rows({"c", "d", "e"}, {{z, one, two}, {one, z, two}, {two, two, z}},
                             {third, third, third});
}

MmSpaceQ line_space(std::vector<int> pts) {
  std::vector<std::string> labels;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> mass;
  for (int p : pts) {
    labels.push_back(std::to_string(p));
    mass.push_back(Rational(1));
    std::vector<Rational> row;
    for (int q : pts) row.push_back(Rational(std::abs(p - q)));
    rows.push_back(row);
  }
  return MmSpaceQ::from_rows(labels, rows, mass);
}

struct Check {
  int failures = 0;
  void expect(bool ok, const std::string& what) {
    std::cout << (ok ? "  [ok]   " : "  [FAIL] ") << what << "\n";
    if (!ok) ++failures;
  }
};

int scenario_m10_threshold() {
  std::cout << "block orthant mass on the 2-point space (x) and the 3-point space (y),\n"
               "cross threshold 1, block length k; domination of x's value flips at k = 10\n";
  Check ck;
  auto x = two_point_unit();
  auto y = three_point_split();
  for (int k = 1; k <= 12; ++k) {
    Rational vx = eval_upper_orthant_block(x, k, Rational(1));
    Rational vy = eval_upper_orthant_block(y, k, Rational(1));
    Rational expect_x(BigInt(2ll), BigInt::pow(BigInt(2ll), 2 * k));
    BigInt pow2k = BigInt::pow(BigInt(2ll), k);
    Rational expect_y(BigInt(3ll) * pow2k + BigInt(3ll) * (pow2k - BigInt(2ll)),
                      BigInt::pow(BigInt(3ll), 2 * k));
    bool dominated = vy <= vx;
    std::cout << "  k=" << k << "  x: " << vx.to_string() << "  y: " << vy.to_string()
              << "  y<=x: " << (dominated ? "yes" : "no") << "\n";
    ck.expect(vx == expect_x && vy == expect_y, "closed forms at k=" + std::to_string(k));
    ck.expect(dominated == (k >= 10), "flip position at k=" + std::to_string(k));
  }
  return ck.failures == 0 ? 0 : 1;
}

int scenario_pony_order() {
  Check ck;
  auto x1 = two_point_unit(), y1 = two_point_doubled();
  auto dec_metric = le_metric(x1, y1);
  ck.expect(dec_metric.verdict && verify_witness(x1, y1, *dec_metric.witness),
            "metric order: unit pair below doubled pair, witness verified");
  MmSpaceQ x2 = MmSpaceQ::point(Rational(1), "e"), y2 = MmSpaceQ::point(Rational(2), "f");
  auto dec_measure = le_measure(x2, y2);
  ck.expect(dec_measure.verdict && verify_witness(x2, y2, *dec_measure.witness),
            "measure order: unit mass below doubled mass, witness verified");
  auto xs = line_space({1, 2, 4}), ys = line_space({1, 2, 3, 4});
  auto dec_gen = le_gen(xs, ys);
  ck.expect(dec_gen.verdict && verify_witness(xs, ys, *dec_gen.witness),
            "general order holds on the integer-line pair");
  ck.expect(!le_global_map(xs, ys).verdict,
            "no single global sub-measure preserving sub-isometry exists for it");
  // A pony: shrink both the metric and the mass of a horse.
  auto horse = three_point_split();
  auto pony = scalar_action(Action::measure, Rational(1, 2),
                            scalar_action(Action::metric, Rational(1, 2), horse));
  auto dec_pony = le_gen(pony, horse);
  ck.expect(dec_pony.verdict && verify_witness(pony, horse, *dec_pony.witness),
            "a pony (contracted, lighter) is below the horse in the general order");
  return ck.failures == 0 ? 0 : 1;
}

int scenario_eurandom_closed_form() {
  Check ck;
  EurandomConfig cfg;
  cfg.lambda = 1.0;
  auto res = eurandom(two_point_unit(), two_point_doubled(), cfg);
  double expected = (std::exp(-1.0) - std::exp(-2.0)) / 2.0;
  std::cout << "  d_Eur(x, 2*x) at lambda=1: upper " << res.upper << ", lower " << res.lower
            << ", closed form " << expected << "\n";
  ck.expect(res.certified, "optimizer certified (upper meets lower bound)");
  ck.expect(std::abs(res.upper - expected) <= 1e-6, "value matches the closed form");
  auto self = eurandom(two_point_unit(), two_point_unit(), cfg);
  ck.expect(self.certified && self.upper <= 1e-9, "distance of a space to itself is zero");
  return ck.failures == 0 ? 0 : 1;
}

int scenario_lub_identity() {
  Check ck;
  EurandomConfig cfg;
  cfg.lambda = 1.0;
  auto self = lub(two_point_unit(), two_point_unit(), cfg);
  ck.expect(self.report.le1 && self.report.le2, "lub(x,x): both factors metric-below zbar");
  ck.expect(self.report.additivity_residual <= 1e-6, "lub(x,x): additivity residual <= 1e-6");
  ck.expect(is_equivalent(self.zbar, canonicalize(to_float(two_point_unit())), 1e-9).equivalent,
            "lub(x,x) is equivalent to x");
  auto dom = lub(two_point_unit(), two_point_doubled(), cfg);
  ck.expect(dom.report.le1 && dom.report.le2, "lub(x,2*x): both factors metric-below zbar");
  ck.expect(dom.report.additivity_residual <= 1e-6, "lub(x,2*x): additivity residual <= 1e-6");
  ck.expect(is_equivalent(dom.zbar, canonicalize(to_float(two_point_doubled())), 1e-9).equivalent,
            "lub(x,2*x) is equivalent to 2*x (the dominating factor)");
  return ck.failures == 0 ? 0 : 1;
}

int scenario_er_monotone() {
  Check ck;
  OrderOptions opt;
  for (int n = 3; n <= 7; ++n) {
    int good = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      auto out = simulate_er_family({static_cast<std::uint64_t>(1000 * n + s), n, {0.7, 0.3}});
      if (le_metric(out.spaces[0], out.spaces[1], opt).verdict) ++good;
    }
    ck.expect(good == seeds, "ER(" + std::to_string(n) + ",0.7) <= ER(" + std::to_string(n) +
                                 ",0.3) in all " + std::to_string(seeds) + " trials");
  }
  return ck.failures == 0 ? 0 : 1;
}

int scenario_moran_coupling() {
  Check ck;
  OrderOptions opt;
  for (int n = 2; n <= 7; ++n) {
    int good = 0, exact_ratio = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      CoalescentConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(500 * n + s);
      cfg.N = n;
      cfg.gamma = 1.0;
      cfg.gamma_prime = 1.0;
      auto out = simulate_coupled_coalescent_trees(cfg);
      const auto& fast = out.spaces[0];
      const auto& slow = out.spaces[1];
      if (le_metric(fast, slow, opt).verdict) ++good;
      bool ratio_ok = true;
      for (Eigen::Index i = 0; i < fast.size(); ++i)
        for (Eigen::Index j = 0; j < fast.size(); ++j)
          ratio_ok = ratio_ok && fast.dist(i, j) == 0.5 * slow.dist(i, j);
      if (ratio_ok) ++exact_ratio;
    }
    ck.expect(good == seeds,
              "N=" + std::to_string(n) + ": fast tree metric-below slow tree in all trials");
    ck.expect(exact_ratio == seeds,
              "N=" + std::to_string(n) + ": distance ratio gamma/(gamma+gamma') exact");
  }
  return ck.failures == 0 ? 0 : 1;
}

int scenario_gw_subtree() {
  Check ck;
  OrderOptions opt;
  opt.unlimited = true;
  int non_extinct = 0, good = 0;
  const int seeds = 60;
  for (int s = 0; s < seeds; ++s) {
    auto out = simulate_coupled_gw({static_cast<std::uint64_t>(s), 0.0, 1.0, 10, 4});
    if (out.meta.fields.at("extinct_b2") == "true") continue;
    ++non_extinct;
    if (le_measure(out.spaces[0], out.spaces[1], opt).verdict) ++good;
  }
  std::cout << "  " << non_extinct << " of " << seeds << " trials non-extinct\n";
  ck.expect(non_extinct > 0, "some trials survive to generation 4");
  ck.expect(good == non_extinct, "subtree embedding holds in every non-extinct trial");
  return ck.failures == 0 ? 0 : 1;
}

int scenario_fv_wasserstein() {
  Check ck;
  auto run = [&](double g, double g2, double lam, double expect) {
    auto est = estimate_wasserstein_coupled(g, g2, lam, 100000, 2024);
    std::cout << "  gamma=" << g << " gamma'=" << g2 << " lambda=" << lam << ": " << est.value
              << " +- " << est.std_error << " (closed form " << expect << ")\n";
    ck.expect(std::abs(est.value - expect) <= 3 * est.std_error,
              "estimate within 3 standard errors of the closed form");
  };
  run(1.0, 2.0, 1.0, 2.0 / 3.0 - 1.0 / 2.0);
  run(1.0, 3.0, 2.0, 3.0 / 5.0 - 1.0 / 3.0);
  return ck.failures == 0 ? 0 : 1;
}

}  // namespace

std::string scenario_names() {
  return "m10-threshold pony-order eurandom-closed-form lub-identity er-monotone "
         "moran-coupling gw-subtree fv-wasserstein";
}

int run_scenario(const std::string& name) {
  std::cout << "scenario " << name << "\n";
  if (name == "m10-threshold") return scenario_m10_threshold();
  if (name == "pony-order") return scenario_pony_order();
  if (name == "eurandom-closed-form") return scenario_eurandom_closed_form();
  if (name == "lub-identity") return scenario_lub_identity();
  if (name == "er-monotone") return scenario_er_monotone();
  if (name == "moran-coupling") return scenario_moran_coupling();
  if (name == "gw-subtree") return scenario_gw_subtree();
  if (name == "fv-wasserstein") return scenario_fv_wasserstein();
  std::cerr << "unknown scenario \"" << name << "\"; available: " << scenario_names() << "\n";
  return 2;
}

}  // namespace mmorder::cli
