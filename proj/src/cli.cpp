#include "cli.hpp"

#include "scenarios.hpp"

#include "mmorder/genealogy.hpp"
#include "mmorder/order.hpp"
#include "mmorder/space_io.hpp"
#include "mmorder/stats.hpp"
#include "mmorder/transport.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace mmorder::cli {

namespace {

using nlohmann::json;

// Loaded pair coerced to a common mode. Mixed exact/float input is an error
// unless a tolerance was given explicitly, in which case the exact side is
// converted to floats.
struct SpacePair {
  std::variant<std::pair<MmSpaceQ, MmSpaceQ>, std::pair<MmSpaceD, MmSpaceD>> spaces;
};

SpacePair load_pair(const std::string& pa, const std::string& pb, bool tol_given) {
  AnySpace a = read_space(pa), b = read_space(pb);
  if (a.index() == b.index()) {
    if (std::holds_alternative<MmSpaceQ>(a))
      return {std::make_pair(std::get<MmSpaceQ>(std::move(a)), std::get<MmSpaceQ>(std::move(b)))};
    return {std::make_pair(std::get<MmSpaceD>(std::move(a)), std::get<MmSpaceD>(std::move(b)))};
  }
  if (!tol_given)
    throw std::invalid_argument(
        "mixed exact/float inputs; pass --tol to compare them as floats");
  auto as_float = [](AnySpace s) {
    if (std::holds_alternative<MmSpaceD>(s)) return std::get<MmSpaceD>(std::move(s));
    return to_float(std::get<MmSpaceQ>(s));
  };
  return {std::make_pair(as_float(std::move(a)), as_float(std::move(b)))};
}

template <class S>
json witness_to_json(const MmSpace<S>& x, const MmSpace<S>& y, const OrderWitness<S>& w) {
  json out;
  std::visit(
      [&](const auto& v) {
        using W = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<W, MeasureWitness>) {
          out["type"] = "measure";
          out["embedding"] = json::array();
          for (auto [i, j] : v.embedding)
            out["embedding"].push_back(
                {{"x", i}, {"x_label", x.labels[i]}, {"y", j}, {"y_label", y.labels[j]}});
        } else if constexpr (std::is_same_v<W, MetricWitness>) {
          out["type"] = "metric";
          out["tau"] = json::array();
          for (auto [j, i] : v.tau)
            out["tau"].push_back(
                {{"y", j}, {"y_label", y.labels[j]}, {"x", i}, {"x_label", x.labels[i]}});
        } else if constexpr (std::is_same_v<W, GenWitness<S>>) {
          out["type"] = "gen";
          out["map"] = json::array();
          for (std::size_t k = 0; k < v.map.size(); ++k) {
            auto [j, i] = v.map[k];
            out["map"].push_back({{"y", j},
                                  {"y_label", y.labels[j]},
                                  {"x", i},
                                  {"x_label", x.labels[i]},
                                  {"submass", scalar_to_string(v.submass[k])}});
          }
        } else {
          out["type"] = "global";
          out["tau"] = json::array();
          for (auto [j, i] : v.tau)
            out["tau"].push_back(
                {{"y", j}, {"y_label", y.labels[j]}, {"x", i}, {"x_label", x.labels[i]}});
        }
      },
      w);
  return out;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

int cmd_validate(const std::string& path) {
  AnySpace s = read_space(path, /*check_axioms=*/false);
  auto rep = std::visit([](const auto& x) { return validate(x); }, s);
  if (rep.valid()) {
    std::cout << "valid" << (rep.ultrametric ? " (ultrametric)" : "") << "\n";
    return 0;
  }
  for (const auto& issue : rep.issues) std::cout << issue.message << "\n";
  return 1;
}

int cmd_canon(const std::string& path, const std::string& out_path) {
  AnySpace s = read_space(path, /*check_axioms=*/false);
  AnySpace c = std::visit([](const auto& x) { return AnySpace(canonicalize(x)); }, s);
  if (out_path.empty())
    std::cout << space_to_json(c).dump(2) << "\n";
  else
    write_space(c, out_path);
  return 0;
}

int cmd_compare(const std::string& order, const std::string& pa, const std::string& pb,
                std::optional<double> tol, bool unlimited, const std::string& witness_path) {
  SpacePair pair = load_pair(pa, pb, tol.has_value());
  OrderOptions opt;
  if (tol) opt.tol = *tol;
  opt.unlimited = unlimited;
  int code = 1;
  std::visit(
      [&](auto& ab) {
        auto& [x, y] = ab;
        using S = typename std::decay_t<decltype(x)>::Scalar;
        OrderDecision<S> dec;
        if (order == "measure")
          dec = le_measure(x, y, opt);
        else if (order == "metric")
          dec = le_metric(x, y, opt);
        else if (order == "gen")
          dec = le_gen(x, y, opt);
        else
          dec = le_global_map(x, y, opt);
        if (dec.verdict && dec.witness && !verify_witness(x, y, *dec.witness, opt.tol))
          throw std::runtime_error("internal error: witness failed re-verification");
        std::cout << (dec.verdict ? "related" : "not related") << " (order=" << order
                  << ", nodes=" << dec.nodes << ")\n";
        if (dec.verdict && !witness_path.empty()) {
          json w;
          w["order"] = order;
          w["verdict"] = true;
          w["witness"] = witness_to_json(x, y, *dec.witness);
          write_json(w, witness_path);
        }
        code = dec.verdict ? 0 : 1;
      },
      pair.spaces);
  return code;
}

int cmd_dmm(const std::string& path, int m, const std::string& json_path, int block_k,
            const std::string& cross) {
  AnySpace s = read_space(path);
  json out;
  std::visit(
      [&](const auto& x) {
        using S = typename std::decay_t<decltype(x)>::Scalar;
        if (block_k > 0) {
          S c = [&]() -> S {
            if constexpr (scalar_traits<S>::is_exact)
              return Rational::parse(cross);
            else
              return std::stod(cross);
          }();
          S v = eval_upper_orthant_block(x, block_k, c);
          out["order"] = 2 * block_k;
          out["block_k"] = block_k;
          out["cross_threshold"] = scalar_to_string(c);
          out["orthant_mass"] = scalar_to_string(v);
          std::cout << "orthant mass = " << scalar_to_string(v) << "\n";
          return;
        }
        auto nu = distance_matrix_measure(x, m);
        out["order"] = m;
        out["atoms"] = json::array();
        for (const auto& [key, w] : nu.atoms) {
          json atom;
          atom["matrix"] = json::array();
          for (const auto& v : key) atom["matrix"].push_back(scalar_to_string(v));
          atom["weight"] = scalar_to_string(w);
          out["atoms"].push_back(std::move(atom));
          std::cout << "[";
          for (std::size_t i = 0; i < key.size(); ++i)
            std::cout << (i ? " " : "") << scalar_to_string(key[i]);
          std::cout << "] : " << scalar_to_string(w) << "\n";
        }
        out["total_weight"] = scalar_to_string(nu.total_weight());
      },
      s);
  if (!json_path.empty()) write_json(out, json_path);
  return 0;
}

int cmd_dist(const std::string& pa, const std::string& pb, double lambda, bool generalized,
             int restarts, std::uint64_t seed, const std::string& coupling_path) {
  SpacePair pair = load_pair(pa, pb, /*tol_given=*/true);  // the optimizer works in floats
  EurandomConfig cfg;
  cfg.lambda = lambda;
  cfg.restarts = restarts;
  cfg.seed = seed;
  std::visit(
      [&](auto& ab) {
        auto& [x, y] = ab;
        json out;
        Eigen::MatrixXd coupling;
        std::vector<std::string> row_labels = x.labels, col_labels = y.labels;
        if (generalized) {
          auto res = gen_eurandom(x, y, cfg);
          std::cout << (res.certified ? "certified " : "best-effort ") << "d_gEur = " << res.upper
                    << " (lower bound " << res.lower << ")\n";
          out["value"] = res.upper;
          out["lower"] = res.lower;
          out["certified"] = res.certified;
          coupling = res.coupling;
        } else {
          auto res = eurandom(x, y, cfg);
          std::cout << (res.certified ? "certified " : "best-effort ") << "d_Eur = " << res.upper
                    << " (lower bound " << res.lower << ", restarts " << res.restarts_used
                    << ")\n";
          out["value"] = res.upper;
          out["lower"] = res.lower;
          out["certified"] = res.certified;
          coupling = res.coupling;
        }
        if (!coupling_path.empty()) {
          json cj;
          cj["rows"] = row_labels;
          cj["cols"] = col_labels;
          cj["matrix"] = json::array();
          for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < coupling.cols(); ++j) row.push_back(coupling(i, j));
            cj["matrix"].push_back(std::move(row));
          }
          write_json(cj, coupling_path);
        }
      },
      pair.spaces);
  return 0;
}

int cmd_lub(const std::string& pa, const std::string& pb, double lambda, int restarts,
            std::uint64_t seed, bool best_effort, const std::string& out_path,
            const std::string& report_path) {
  SpacePair pair = load_pair(pa, pb, /*tol_given=*/true);
  EurandomConfig cfg;
  cfg.lambda = lambda;
  cfg.restarts = restarts;
  cfg.seed = seed;
  std::visit(
      [&](auto& ab) {
        auto& [x, y] = ab;
        auto res = lub(x, y, cfg, best_effort);
        std::cout << "lub: " << res.zbar.size() << " points; le_metric flags "
                  << res.report.le1 << "," << res.report.le2 << "; additivity residual "
                  << res.report.additivity_residual << "\n";
        if (!out_path.empty()) write_space(AnySpace(res.zbar), out_path);
        if (!report_path.empty()) {
          json r;
          r["certified"] = res.report.certified;
          r["le_metric_x1"] = res.report.le1;
          r["le_metric_x2"] = res.report.le2;
          r["d12"] = res.report.d12;
          r["d1z"] = res.report.d1z;
          r["dz2"] = res.report.dz2;
          r["additivity_residual"] = res.report.additivity_residual;
          write_json(r, report_path);
        }
      },
      pair.spaces);
  return 0;
}

json meta_to_json(const SimMeta& meta) {
  json m;
  m["kind"] = meta.kind;
  for (const auto& [k, v] : meta.fields) m[k] = v;
  return m;
}

int emit_sim(const SimOutput& out, const std::vector<std::string>& names,
             const std::string& out_dir) {
  if (out_dir.empty()) {
    json bundle;
    bundle["meta"] = meta_to_json(out.meta);
    bundle["spaces"] = json::object();
    for (std::size_t i = 0; i < out.spaces.size(); ++i)
      bundle["spaces"][names[i]] = space_to_json(out.spaces[i]);
    std::cout << bundle.dump(2) << "\n";
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < out.spaces.size(); ++i)
    write_space(AnySpace(out.spaces[i]), out_dir + "/" + names[i] + ".json");
  write_json(meta_to_json(out.meta), out_dir + "/meta.json");
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"partial orders, Eurandom distances and coupled genealogies on finite mm spaces"};
  app.require_subcommand(1);
  int exit_code = 0;

  // validate
  std::string v_file;
  auto* validate_cmd = app.add_subcommand("validate", "check the mm-space axioms of a space file");
  validate_cmd->add_option("file", v_file, "space JSON file")->required();
  validate_cmd->callback([&] { exit_code = cmd_validate(v_file); });

  // canon
  std::string c_file, c_out;
  auto* canon_cmd = app.add_subcommand("canon", "canonical form of a space");
  canon_cmd->add_option("file", c_file)->required();
  canon_cmd->add_option("--out", c_out, "output path (stdout when omitted)");
  canon_cmd->callback([&] { exit_code = cmd_canon(c_file, c_out); });

  // compare
  std::string cmp_order, cmp_a, cmp_b, cmp_witness;
  std::optional<double> cmp_tol;
  bool cmp_unlimited = false;
  auto* compare_cmd = app.add_subcommand("compare", "decide an order relation between two spaces");
  compare_cmd->add_option("--order", cmp_order, "measure|metric|gen|global")
      ->required()
      ->check(CLI::IsMember({"measure", "metric", "gen", "global"}));
  compare_cmd->add_option("a", cmp_a)->required();
  compare_cmd->add_option("b", cmp_b)->required();
  compare_cmd->add_option("--tol", cmp_tol, "float-mode tolerance (enables mixed-mode compare)");
  compare_cmd->add_flag("--unlimited", cmp_unlimited, "lift the search-size guardrail");
  compare_cmd->add_option("--witness", cmp_witness, "write the witness JSON here");
  compare_cmd->callback([&] {
    exit_code = cmd_compare(cmp_order, cmp_a, cmp_b, cmp_tol, cmp_unlimited, cmp_witness);
  });

  // dmm
  std::string d_file, d_json, d_cross = "1";
  int d_order = 2, d_block = 0;
  auto* dmm_cmd = app.add_subcommand("dmm", "distance matrix measure or block orthant mass");
  dmm_cmd->add_option("file", d_file)->required();
  dmm_cmd->add_option("-m,--order", d_order, "matrix order m >= 2");
  dmm_cmd->add_option("--json", d_json, "write the measure as JSON");
  dmm_cmd->add_option("--block-orthant", d_block,
                      "evaluate the 2k-order block orthant for this k instead");
  dmm_cmd->add_option("--cross", d_cross, "cross-block threshold for --block-orthant");
  dmm_cmd->callback([&] { exit_code = cmd_dmm(d_file, d_order, d_json, d_block, d_cross); });

  // dist
  std::string e_a, e_b, e_coupling;
  double e_lambda = 1.0;
  bool e_gen = false;
  int e_restarts = 32;
  std::uint64_t e_seed = 0;
  auto* dist_cmd = app.add_subcommand("dist", "Eurandom distance by coupling optimization");
  dist_cmd->add_option("--lambda", e_lambda, "kernel rate lambda > 0")->required();
  dist_cmd->add_option("a", e_a)->required();
  dist_cmd->add_option("b", e_b)->required();
  dist_cmd->add_flag("--generalized", e_gen, "generalized Eurandom distance");
  dist_cmd->add_option("--restarts", e_restarts);
  dist_cmd->add_option("--seed", e_seed);
  dist_cmd->add_option("--coupling", e_coupling, "write the optimal coupling here");
  dist_cmd->callback(
      [&] { exit_code = cmd_dist(e_a, e_b, e_lambda, e_gen, e_restarts, e_seed, e_coupling); });

  // lub
  std::string l_a, l_b, l_out, l_report;
  double l_lambda = 1.0;
  int l_restarts = 32;
  std::uint64_t l_seed = 0;
  bool l_best_effort = false;
  auto* lub_cmd = app.add_subcommand("lub", "least upper bound from an optimal coupling");
  lub_cmd->add_option("--lambda", l_lambda)->required();
  lub_cmd->add_option("a", l_a)->required();
  lub_cmd->add_option("b", l_b)->required();
  lub_cmd->add_option("--out", l_out, "write zbar here");
  lub_cmd->add_option("--report", l_report, "write the order/additivity report here");
  lub_cmd->add_option("--restarts", l_restarts);
  lub_cmd->add_option("--seed", l_seed);
  lub_cmd->add_flag("--best-effort", l_best_effort, "proceed without certification");
  lub_cmd->callback([&] {
    exit_code = cmd_lub(l_a, l_b, l_lambda, l_restarts, l_seed, l_best_effort, l_out, l_report);
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "seeded genealogy simulators");
  sim_cmd->require_subcommand(1);
  std::string s_out;
  std::uint64_t s_seed = 0;

  auto* moran = sim_cmd->add_subcommand("moran", "tree-valued Moran model");
  int m_n = 5;
  double m_gamma = 1.0, m_t = 1.0;
  moran->add_option("--seed", s_seed)->required();
  moran->add_option("-N,--individuals", m_n);
  moran->add_option("--gamma", m_gamma);
  moran->add_option("-t,--horizon", m_t);
  moran->add_option("--out", s_out, "output directory");
  moran->callback([&] {
    exit_code = emit_sim(simulate_moran({s_seed, m_n, m_gamma, m_t}), {"space"}, s_out);
  });

  auto* coal = sim_cmd->add_subcommand("coalescent", "coupled Kingman coalescent trees");
  int k_n = 5;
  double k_gamma = 1.0, k_gamma2 = 0.0;
  std::optional<double> k_horizon;
  coal->add_option("--seed", s_seed)->required();
  coal->add_option("-N,--individuals", k_n);
  coal->add_option("--gamma", k_gamma);
  coal->add_option("--gamma2", k_gamma2, "extra rate gamma'");
  coal->add_option("--horizon", k_horizon, "cap distances at 2*horizon");
  coal->add_option("--out", s_out);
  coal->callback([&] {
    exit_code =
        emit_sim(simulate_coupled_coalescent_trees({s_seed, k_n, k_gamma, k_gamma2, k_horizon}),
                 {"fast", "slow"}, s_out);
  });

  auto* er = sim_cmd->add_subcommand("er", "Erdos-Renyi graph metric family");
  int er_n = 5;
  std::vector<double> er_ps;
  er->add_option("--seed", s_seed)->required();
  er->add_option("-n,--vertices", er_n);
  er->add_option("-p,--edge-prob", er_ps, "one space per value")->required();
  er->add_option("--out", s_out);
  er->callback([&] {
    std::vector<std::string> names;
    for (double p : er_ps) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "p_%g", p);
      names.push_back(buf);
    }
    exit_code = emit_sim(simulate_er_family({s_seed, er_n, er_ps}), names, s_out);
  });

  auto* gw = sim_cmd->add_subcommand("gw", "coupled Galton-Watson forests");
  double gw_b1 = 0.0, gw_b2 = 1.0;
  int gw_scale = 10, gw_gens = 4;
  gw->add_option("--seed", s_seed)->required();
  gw->add_option("--b1", gw_b1);
  gw->add_option("--b2", gw_b2);
  gw->add_option("--scale", gw_scale, "N_gw");
  gw->add_option("-g,--generations", gw_gens);
  gw->add_option("--out", s_out);
  gw->callback([&] {
    exit_code = emit_sim(simulate_coupled_gw({s_seed, gw_b1, gw_b2, gw_scale, gw_gens}),
                         {"b1", "b2"}, s_out);
  });

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Monte Carlo estimators");
  est_cmd->require_subcommand(1);
  std::string est_json;
  long est_reps = 10000;
  std::uint64_t est_seed = 0;

  auto* was = est_cmd->add_subcommand("wasserstein", "stationary d_W between resampling rates");
  double w_gamma = 1.0, w_gamma2 = 2.0, w_lambda = 1.0;
  was->add_option("--gamma", w_gamma)->required();
  was->add_option("--gamma2", w_gamma2)->required();
  was->add_option("--lambda", w_lambda)->required();
  was->add_option("--reps", est_reps);
  was->add_option("--seed", est_seed)->required();
  was->add_option("--json", est_json);
  was->callback([&] {
    auto est = estimate_wasserstein_coupled(w_gamma, w_gamma2, w_lambda, est_reps, est_seed);
    double closed = w_gamma2 / (w_gamma2 + w_lambda) - w_gamma / (w_gamma + w_lambda);
    std::cout << "d_W estimate = " << est.value << " +- " << est.std_error << " (closed form "
              << closed << ")\n";
    if (!est_json.empty())
      write_json({{"value", est.value},
                  {"std_error", est.std_error},
                  {"reps", est.reps},
                  {"seed", est.seed},
                  {"closed_form", closed}},
                 est_json);
  });

  auto* r12 = est_cmd->add_subcommand("r12", "stationary pairwise distance sampler");
  double r_gamma = 1.0;
  bool r_cross = false;
  double r_alpha = 0.05;
  r12->add_option("--gamma", r_gamma)->required();
  r12->add_option("--reps", est_reps);
  r12->add_option("--seed", est_seed)->required();
  r12->add_flag("--cross-validate", r_cross, "compare against coalescent-derived distances");
  r12->add_option("--alpha", r_alpha);
  r12->add_option("--json", est_json);
  r12->callback([&] {
    auto samples = sample_stationary_pair_distance(r_gamma, est_reps, est_seed);
    double mean = 0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    std::cout << "mean pair distance = " << mean << " (theory " << 1.0 / r_gamma << ")\n";
    json out{{"mean", mean}, {"reps", est_reps}, {"seed", est_seed}};
    if (r_cross) {
      auto derived = coalescent_pair_distance(r_gamma, est_reps, est_seed + 1);
      auto fwd = test_first_order_dominance_1d(samples, derived, r_alpha, 1000, est_seed + 2);
      auto bwd = test_first_order_dominance_1d(derived, samples, r_alpha, 1000, est_seed + 3);
      std::cout << "cross-validation: direct<=derived " << (fwd.accepted ? "accepted" : "rejected")
                << ", derived<=direct " << (bwd.accepted ? "accepted" : "rejected") << "\n";
      out["cross_accept_forward"] = fwd.accepted;
      out["cross_accept_backward"] = bwd.accepted;
      exit_code = (fwd.accepted && bwd.accepted) ? 0 : 1;
    }
    if (!est_json.empty()) write_json(out, est_json);
  });

  auto* mono = est_cmd->add_subcommand("monomial", "expected monomial over simulated spaces");
  std::string mono_sim = "moran";
  double mono_lambda = 1.0, mono_gamma = 1.0, mono_t = 5.0;
  int mono_n = 5;
  mono->add_option("--sim", mono_sim)->check(CLI::IsMember({"moran", "coalescent"}));
  mono->add_option("--lambda", mono_lambda, "kernel 1 - exp(-lambda r12)");
  mono->add_option("--gamma", mono_gamma);
  mono->add_option("-N,--individuals", mono_n);
  mono->add_option("-t,--horizon", mono_t);
  mono->add_option("--reps", est_reps);
  mono->add_option("--seed", est_seed)->required();
  mono->add_option("--json", est_json);
  mono->callback([&] {
    auto phi = Monomial<double>::one_minus_exp(mono_lambda);
    std::function<MmSpaceD(std::uint64_t)> gen;
    if (mono_sim == "moran")
      gen = [&](std::uint64_t s) {
        return simulate_moran({s, mono_n, mono_gamma, mono_t}).spaces[0];
      };
    else
      gen = [&](std::uint64_t s) {
        return simulate_coupled_coalescent_trees({s, mono_n, mono_gamma, 0.0, mono_t}).spaces[1];
      };
    auto est = estimate_expected_monomial(gen, phi, est_reps, est_seed);
    std::cout << "E[Phi] = " << est.value << " +- " << est.std_error << "\n";
    if (!est_json.empty())
      write_json({{"value", est.value}, {"std_error", est.std_error}, {"reps", est.reps}},
                 est_json);
  });

  // reproduce
  std::string scenario;
  auto* rep_cmd = app.add_subcommand("reproduce", "run a named scenario: " + scenario_names());
  rep_cmd->add_option("scenario", scenario)->required();
  rep_cmd->callback([&] { exit_code = run_scenario(scenario); });

  std::vector<const char*> argv;
  argv.push_back("mmorder");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

}  // namespace mmorder::cli
