#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "netmanip/altmin.hpp"
#include "netmanip/oracle.hpp"
#include "netmanip/scenario_io.hpp"

namespace {

using namespace netmanip;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitBoundViolation = 3;
constexpr int kExitNonConvergence = 4;

Scenario load(const std::string& path) {
  std::vector<std::string> notices;
  Scenario s = parse_scenario(path, &notices);
  for (const auto& n : notices) std::cerr << "note: " << n << "\n";
  return s;
}

int cmd_constants(const std::string& scenario_path) {
  const Scenario s = load(scenario_path);
  const ConvergenceConstants c = constants(s);
  json out;
  out["sigma1"] = c.sigma1;
  out["sigma2"] = c.sigma2;
  out["L1"] = c.L1;
  out["L2"] = c.L2;
  out["lambda"] = c.lambda;
  out["kappa"] = s.network.condition_number();
  out["stable"] = c.stable;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, bool force_exact, bool force_inexact,
            const std::string& out_path, const std::string& format,
            const std::string& reference_path) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario s = load(scenario_path);
  const ConvergenceConstants c = constants(s);

  const bool exact = force_exact || (!force_inexact && s.delta1 == 0.0 && s.delta2 == 0.0);

  RunOptions options;
  if (!reference_path.empty()) {
    options.reference = load_reference(reference_path);
  } else if (c.stable) {
    options.reference = reference_optimum(s);
  }

  const RunTrace trace = exact ? run_exact(s, options) : run_inexact(s, options);

  if (!out_path.empty()) {
    if (format == "json") {
      std::ofstream out(out_path);
      out << trace_to_json(trace).dump(2) << "\n";
    } else {
      write_trace_csv(trace, out_path);
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json report = make_report(trace, wall);
  std::cout << report.dump(2) << "\n";

  if (trace.has_reference && c.stable && bound_violations(trace) > 0) return kExitBoundViolation;
  return kExitOk;
}

struct VerifySuite {
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    if (ok) {
      std::cout << "[ ok ] " << name << "\n";
    } else {
      ++failures;
      std::cout << "[FAIL] " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    }
  }

  void skip(const std::string& name, const std::string& why) {
    std::cout << "[skip] " << name << " (" << why << ")\n";
  }
};

int cmd_verify(const std::string& scenario_path) {
  Scenario s = load(scenario_path);
  const ConvergenceConstants c = constants(s);
  const Eigen::Index n = s.n();
  const Eigen::Index k = s.num_orgs();
  const Eigen::Index na = s.num_agents();
  VerifySuite suite;
  Rng rng(s.seed + 1);

  auto random_x = [&](Rng& r) {
    Matrix x(n, k);
    for (Eigen::Index j = 0; j < k; ++j) x.col(j) = r.simplex_point(n);
    return x;
  };
  auto random_p = [&](Rng& r) {
    Matrix p(k, na);
    for (Eigen::Index j = 0; j < na; ++j) p.col(j) = r.simplex_point(k);
    return p;
  };

  // potential decomposition agrees on random feasible points
  {
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      try {
        potential(s, random_x(rng), random_p(rng));
      } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
      }
    }
    suite.check("potential decomposition", ok, detail);
  }

  // rational inattention solution equals probabilities at negated cost
  {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
      const auto& model = s.agents[static_cast<std::size_t>(i)].model;
      for (int trial = 0; trial < 100; ++trial) {
        Vector g(k);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = std::sqrt(2.0) * rng.uniform01();
        worst = std::max(
            worst,
            (rational_inattention_solve(model, g) - probabilities(model, -g)).lpNorm<Eigen::Infinity>());
      }
    }
    suite.check("conjugate duality", worst <= 1e-10, "max deviation " + std::to_string(worst));
  }

  // gradient of the surplus equals the choice probabilities
  {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
      const auto& model = s.agents[static_cast<std::size_t>(i)].model;
      for (int trial = 0; trial < 20; ++trial) {
        Vector u(k);
        for (Eigen::Index j = 0; j < k; ++j) u[j] = 4.0 * rng.uniform01() - 2.0;
        const Vector fd = fd_gradient([&](const Vector& v) { return surplus(model, v); }, u, 1e-6);
        worst = std::max(worst, (fd - probabilities(model, u)).lpNorm<Eigen::Infinity>());
      }
    }
    suite.check("surplus gradient (Williams-Daly-Zachary)", worst <= 1e-6,
                "max deviation " + std::to_string(worst));
  }

  // strong convexity probes at the moduli the constants assume
  {
    double shortfall = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
      const auto& model = s.agents[static_cast<std::size_t>(i)].model;
      const double beta = convexity_parameter(model);
      const double observed = strong_convexity_probe(
          [&](const Vector& p) { return conjugate(model, p); },
          [&](Rng& r) { return r.simplex_point(k); },
          [](const Vector& d) { return d.lpNorm<1>(); }, 200, s.seed + 11 + i);
      shortfall = std::max(shortfall, beta - observed);
    }
    suite.check("conjugate strong convexity (beta)", shortfall <= 1e-8,
                "shortfall " + std::to_string(shortfall));
  }
  {
    const double observed = strong_convexity_probe(
        [&](const Vector& flat) {
          double acc = 0.0;
          for (Eigen::Index i = 0; i < na; ++i)
            acc += conjugate(s.agents[static_cast<std::size_t>(i)].model,
                             flat.segment(i * k, k));
          return acc;
        },
        [&](Rng& r) {
          Vector flat(k * na);
          for (Eigen::Index i = 0; i < na; ++i) flat.segment(i * k, k) = r.simplex_point(k);
          return flat;
        },
        [&](const Vector& d) {
          return h_norm(Eigen::Map<const Matrix>(d.data(), k, na));
        },
        200, s.seed + 12);
    suite.check("h strong convexity (sigma2)", observed >= c.sigma2 - 1e-8,
                "observed " + std::to_string(observed) + " vs " + std::to_string(c.sigma2));
  }
  {
    const Matrix a = s.network.power(s.horizon);
    const double observed = strong_convexity_probe(
        [&](const Vector& flat) {
          const Eigen::Map<const Matrix> x(flat.data(), n, k);
          double acc = 0.0;
          for (Eigen::Index j = 0; j < k; ++j) {
            const auto& org = s.orgs[static_cast<std::size_t>(j)];
            acc += 0.5 * (org.tau / org.eta) * (a * x.col(j) - org.anchor).squaredNorm();
          }
          return acc;
        },
        [&](Rng& r) {
          Vector flat(n * k);
          for (Eigen::Index j = 0; j < k; ++j) flat.segment(j * n, n) = r.simplex_point(n);
          return flat;
        },
        [](const Vector& d) { return d.norm(); }, 200, s.seed + 13);
    suite.check("f strong convexity (sigma1)", observed >= c.sigma1 - 1e-8,
                "observed " + std::to_string(observed) + " vs " + std::to_string(c.sigma1));
  }

  // Lipschitz bound on the distance operator
  {
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const Matrix x = random_x(rng);
      const Matrix y = random_x(rng);
      const double lhs = h_dual_norm(distance_matrix(s.agents, x, s.network, s.horizon) -
                                     distance_matrix(s.agents, y, s.network, s.horizon));
      const double rhs = c.L1 * f_norm(x - y) + 1e-10;
      worst = std::max(worst, lhs - rhs);
      ok = ok && lhs <= rhs;
    }
    suite.check("distance operator Lipschitz (L1)", ok, "excess " + std::to_string(worst));
  }

  // propagation preserves the simplex
  {
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      const Vector x = rng.simplex_point(n);
      const int t = static_cast<int>(rng.next_u64() % 11);
      const Vector y = propagate(s.network, x, t);
      ok = std::abs(y.sum() - 1.0) <= 1e-10 && y.minCoeff() >= 0.0;
    }
    suite.check("propagation preserves the simplex", ok);
  }

  // subproblem certificates against exhaustive search
  if (n <= 4) {
    const ChoiceMatrix p = choice_matrix(s.agents, s.x0, s.network, s.horizon);
    const Matrix a = s.network.power(s.horizon);
    const double res = n <= 2 ? 1e-4 : (n == 3 ? 1e-3 : 1e-2);
    bool ok = true;
    std::string detail;
    for (Eigen::Index j = 0; j < k && ok; ++j) {
      const auto& org = s.orgs[static_cast<std::size_t>(j)];
      const Vector row = p.row(j).transpose();
      const OrgSolution sol =
          solve_org_subproblem(org, row, s.agents, s.network, s.horizon, 1e-4);
      const double lipschitz =
          s.network.sigma_max() * (row.sum() + (org.tau / org.eta) * std::sqrt(2.0));
      const GridMinimum grid = grid_minimize(
          [&](const Vector& x) { return org_objective(org, x, row, s.agents, s.network, s.horizon); },
          GridSpec{static_cast<int>(n), res}, lipschitz);
      const double lhs = org_objective(org, sol.x, row, s.agents, s.network, s.horizon);
      if (lhs > grid.value + sol.certificate.gap + grid.error_bound) {
        ok = false;
        detail = "column " + std::to_string(j) + ": " + std::to_string(lhs) + " vs " +
                 std::to_string(grid.value + sol.certificate.gap + grid.error_bound);
      }
    }
    suite.check("subproblem certificate soundness", ok, detail);
  } else {
    suite.skip("subproblem certificate soundness", "grid search only runs for n <= 4");
  }

  // constants arithmetic and the stability verdict
  {
    const double lambda = c.L1 * c.L1 * c.L2 * c.L2 / (c.sigma1 * c.sigma2);
    suite.check("contraction factor identity",
                std::abs(lambda - c.lambda) <= 1e-12 * std::max(1.0, lambda));
    std::cout << "lambda = " << c.lambda << " -> " << (c.stable ? "stable" : "UNSTABLE")
              << "\n";
  }

  return suite.failures == 0 ? kExitOk : kExitBoundViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network manipulation via inexact alternating minimization"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string format = "csv";
  std::string reference_path;
  bool force_exact = false;
  bool force_inexact = false;

  CLI::App* run = app.add_subcommand("run", "run the alternating scheme and report");
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_flag("--exact", force_exact, "force exact mode (deltas = 0)");
  run->add_flag("--inexact", force_inexact, "force inexact mode (deltas from the file)");
  run->add_option("--out", out_path, "trace output path");
  run->add_option("--format", format, "trace format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--ref-optimum", reference_path, "reference optimum JSON file");

  CLI::App* consts = app.add_subcommand("constants", "print the convergence constants");
  consts->add_option("--scenario", scenario_path, "scenario JSON file")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite on the instance");
  verify->add_option("--scenario", scenario_path, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (force_exact && force_inexact) {
        std::cerr << "error: --exact and --inexact are mutually exclusive\n";
        return kExitError;
      }
      return cmd_run(scenario_path, force_exact, force_inexact, out_path, format, reference_path);
    }
    if (consts->parsed()) return cmd_constants(scenario_path);
    if (verify->parsed()) return cmd_verify(scenario_path);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidModel& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidSimplex& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitParse;
  } catch (const DimensionMismatch& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kExitParse;
  } catch (const NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
