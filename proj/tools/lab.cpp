// lab: command-line front end for the heatlab library.
//
// Subcommands: run, list, kernel, decompose, harnack, quotient, energy-check.
// Exit status: 0 when all asserted checks pass, 1 on a check/decomposition
// failure (reports are still written), 2 on parse/config errors.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heatlab/energy.hpp"
#include "heatlab/io.hpp"
#include "heatlab/projection.hpp"
#include "heatlab/scenario.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/widder.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

int exit_code_for(Errc code) {
  // Mathematical failures map to 1 (like a failed check); malformed input,
  // geometry, and precondition errors map to 2.
  return code == Errc::decomposition_failed ? 1 : 2;
}

void print_check(const CheckResult& check) {
  std::string status;
  switch (check.verdict) {
    case Verdict::pass: status = "PASS"; break;
    case Verdict::fail: status = "FAIL"; break;
    case Verdict::not_applicable: status = "N/A "; break;
  }
  std::cout << "  [" << status << "] " << check.name;
  if (!check.asserted) std::cout << " (info)";
  for (const auto& [key, value] : check.values)
    std::cout << "  " << key << "=" << format_double(value);
  std::cout << "\n";
  if (!check.note.empty()) std::cout << "         " << check.note << "\n";
}

int cmd_run(const std::string& target, const std::string& out_dir, unsigned seed) {
  const ScenarioReport report = execute_scenario(target, out_dir, seed);
  std::cout << "scenario " << report.scenario << " (seed " << report.seed << ")\n";
  int asserted = 0;
  int passed = 0;
  for (const auto& check : report.checks) {
    print_check(check);
    if (check.asserted) {
      ++asserted;
      if (check.verdict == Verdict::pass) ++passed;
    }
  }
  std::cout << (report.all_pass() ? "PASS" : "FAIL") << " (" << passed << "/" << asserted
            << " asserted checks)\n";
  std::cout << "report: " << (fs::path(out_dir) / report.scenario / "report.json").string()
            << "\n";
  return report.all_pass() ? 0 : 1;
}

int cmd_list(bool as_json) {
  if (as_json) {
    std::cout << catalog_json();
    return 0;
  }
  for (const auto& s : scenario_catalog())
    std::cout << s.name << "\n    " << s.summary << "\n";
  return 0;
}

int cmd_kernel(const std::string& space_arg, std::vector<double> times, int x, int y,
               const std::string& dump_path) {
  const DirichletSpace space = parse_space_arg(space_arg);
  if (x < 0 || x >= space.size() || y < 0 || y >= space.size())
    fail(Errc::invalid_input, "vertex out of range");
  if (times.empty()) times = {1.0};
  const HeatEngine engine(space);
  for (double t : times)
    std::cout << "p(" << format_double(t) << ", " << x << ", " << y
              << ") = " << format_double(engine.kernel(t, x, y)) << "\n";
  if (!dump_path.empty()) {
    dump_kernel(engine, times, dump_path);
    std::cout << "kernel table: " << dump_path << "\n";
  }
  return 0;
}

int cmd_decompose(const std::string& space_arg, const std::string& solution_path,
                  std::vector<double> eps, std::vector<int> domain,
                  const std::string& out_dir) {
  const DirichletSpace space = parse_space_arg(space_arg);
  const SpaceTimeFunction u = load_solution(space, solution_path);
  if (eps.empty()) eps = {4e-4, 2e-4, 1e-4};
  const HeatEngine engine(space);
  const Subdomain U =
      domain.empty() ? Subdomain::full(space) : Subdomain(space, domain);
  const WidderDecomposition dec = widder_local_decompose(engine, u, U, eps);
  std::cout << "nu_total = " << format_double(dec.nu.total()) << "\n";
  std::cout << "h_max = " << format_double(dec.h.values.cwiseAbs().maxCoeff()) << "\n";
  std::cout << "reconstruction_residual = " << format_double(dec.reconstruction_residual)
            << "\n";
  std::cout << "richardson = " << (dec.richardson_applied ? "yes" : "no")
            << " (order " << format_double(dec.richardson_order) << ")\n";
  const fs::path out(out_dir);
  fs::create_directories(out);
  save_measure(dec.nu, out / "nu.csv");
  save_solution(space, dec.h, out / "h.csv");
  std::cout << "wrote " << (out / "nu.csv").string() << ", " << (out / "h.csv").string()
            << "\n";
  return 0;
}

int cmd_harnack(const std::string& space_arg, std::vector<double> window,
                std::vector<int> K, int samples) {
  const DirichletSpace space = parse_space_arg(space_arg);
  if (window.empty()) window = {0.25, 0.5, 0.75, 1.0};
  if (window.size() != 4) fail(Errc::invalid_input, "--window needs a b c d");
  if (K.empty())
    for (int v = 0; v < space.size(); ++v) K.push_back(v);
  const HeatEngine engine(space);
  const HarnackWindow w{window[0], window[1], window[2], window[3], K};
  const double constant = harnack_family_constant(engine, w, samples);
  std::cout << "harnack_family_constant = " << format_double(constant) << "\n";
  return std::isfinite(constant) ? 0 : 1;
}

int cmd_quotient(const std::string& space_arg, const std::vector<int>& perm,
                 std::vector<double> times, const std::string& out_path, double tol) {
  const DirichletSpace space = parse_space_arg(space_arg);
  const GroupAction action = make_group_action(space, {perm});
  const Quotient q = build_quotient(space, action);
  std::cout << "group order " << action.order() << ", quotient vertices "
            << q.space.size() << "\n";
  if (times.empty()) times = {0.1, 1.0};
  const HeatEngine engine1(space);
  const HeatEngine engine2(q.space);
  double max_gap = 0.0;
  for (double t : times) {
    const double gap = verify_kernel_projection(engine1, engine2, q.map, t);
    max_gap = std::max(max_gap, gap);
    std::cout << "t = " << format_double(t) << ": kernel gap " << format_double(gap)
              << "\n";
  }
  if (!out_path.empty()) {
    save_space(q.space, out_path);
    std::cout << "quotient space: " << out_path << "\n";
  }
  std::cout << (max_gap <= tol ? "PASS" : "FAIL") << " (max gap "
            << format_double(max_gap) << ", tolerance " << format_double(tol) << ")\n";
  return max_gap <= tol ? 0 : 1;
}

int cmd_energy_check(const std::string& space_arg, int trials, unsigned seed, double tol) {
  const DirichletSpace space = parse_space_arg(space_arg);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Vector f(space.size());
    for (int i = 0; i < space.size(); ++i) f[i] = normal(rng);
    return f;
  };
  double worst_leibniz = 0.0;
  double worst_cs = 0.0;
  double worst_amgm = 0.0;
  double worst_product = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const EnergyIdentityReport r =
        check_energy_identities(space, draw(), draw(), draw(), draw());
    worst_leibniz = std::max(worst_leibniz, r.leibniz_symmetrized_max_abs);
    worst_cs = std::min(worst_cs, r.cauchy_schwarz_slack);
    worst_amgm = std::min(worst_amgm, r.am_gm_slack);
    worst_product = std::min(worst_product, r.product_bound_slack);
  }
  std::cout << "leibniz_symmetrized_max = " << format_double(worst_leibniz) << "\n";
  std::cout << "cauchy_schwarz_min_slack = " << format_double(worst_cs) << "\n";
  std::cout << "am_gm_min_slack = " << format_double(worst_amgm) << "\n";
  std::cout << "product_bound_min_slack = " << format_double(worst_product) << "\n";
  const bool ok = worst_leibniz <= tol && worst_cs >= -tol && worst_amgm >= -tol &&
                  worst_product >= -tol;
  std::cout << (ok ? "PASS" : "FAIL") << " (tolerance " << format_double(tol) << ")\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heatlab laboratory for heat flow on finite symmetric Dirichlet spaces"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* run = app.add_subcommand("run", "Run a catalog scenario or a JSON config");
  {
    auto target = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>("out");
    auto seed = std::make_shared<unsigned>(1);
    run->add_option("target", *target, "scenario name or config path")->required();
    run->add_option("--out", *out_dir, "output directory (default: out)");
    run->add_option("--seed", *seed, "seed for randomized checks (default: 1)");
    run->callback([=, &action] { action = [=] { return cmd_run(*target, *out_dir, *seed); }; });
  }

  auto* list = app.add_subcommand("list", "List the built-in scenario catalog");
  {
    auto as_json = std::make_shared<bool>(false);
    list->add_flag("--json", *as_json, "emit machine-readable catalog");
    list->callback([=, &action] { action = [=] { return cmd_list(*as_json); }; });
  }

  auto* kernel = app.add_subcommand("kernel", "Evaluate the heat kernel of a space");
  {
    auto space = std::make_shared<std::string>();
    auto times = std::make_shared<std::vector<double>>();
    auto x = std::make_shared<int>(0);
    auto y = std::make_shared<int>(0);
    auto dump = std::make_shared<std::string>();
    kernel->add_option("space", *space, "path(n[,s[,l,r]]), cycle(n[,w,m]), grid(nx,ny[,s]) or JSON file")
        ->required();
    kernel->add_option("--t", *times, "times (default: 1.0)");
    kernel->add_option("--x", *x, "source vertex");
    kernel->add_option("--y", *y, "target vertex");
    kernel->add_option("--dump", *dump, "write the full (t,x,y,p) table to a CSV file");
    kernel->callback([=, &action] {
      action = [=] { return cmd_kernel(*space, *times, *x, *y, *dump); };
    });
  }

  auto* decompose =
      app.add_subcommand("decompose", "Widder decomposition u = P_t nu + h of a sampled solution");
  {
    auto space = std::make_shared<std::string>();
    auto solution = std::make_shared<std::string>();
    auto eps = std::make_shared<std::vector<double>>();
    auto domain = std::make_shared<std::vector<int>>();
    auto out_dir = std::make_shared<std::string>(".");
    decompose->add_option("space", *space, "space description")->required();
    decompose->add_option("solution", *solution, "solution CSV (with sidecar JSON)")->required();
    decompose->add_option("--eps", *eps, "descending eps grid (default: 4e-4 2e-4 1e-4)");
    decompose->add_option("--domain", *domain, "subdomain members (default: all vertices)");
    decompose->add_option("--out", *out_dir, "directory for nu.csv and h.csv");
    decompose->callback([=, &action] {
      action = [=] { return cmd_decompose(*space, *solution, *eps, *domain, *out_dir); };
    });
  }

  auto* harnack = app.add_subcommand("harnack", "Empirical parabolic Harnack family constant");
  {
    auto space = std::make_shared<std::string>();
    auto window = std::make_shared<std::vector<double>>();
    auto K = std::make_shared<std::vector<int>>();
    auto samples = std::make_shared<int>(33);
    harnack->add_option("space", *space, "space description")->required();
    harnack->add_option("--window", *window, "window times a b c d (default: 0.25 0.5 0.75 1)");
    harnack->add_option("--K", *K, "compact vertex set (default: all)");
    harnack->add_option("--samples", *samples, "time samples per window segment");
    harnack->callback([=, &action] {
      action = [=] { return cmd_harnack(*space, *window, *K, *samples); };
    });
  }

  auto* quotient = app.add_subcommand("quotient", "Quotient by a group action and verify the kernel identity");
  {
    auto space = std::make_shared<std::string>();
    auto perm = std::make_shared<std::vector<int>>();
    auto times = std::make_shared<std::vector<double>>();
    auto out = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(1e-10);
    quotient->add_option("space", *space, "space description")->required();
    quotient->add_option("--perm", *perm, "generator permutation, one image per vertex")->required();
    quotient->add_option("--t", *times, "times to check (default: 0.1 1)");
    quotient->add_option("--out", *out, "write the quotient space JSON here");
    quotient->add_option("--tol", *tol, "kernel gap tolerance");
    quotient->callback([=, &action] {
      action = [=] { return cmd_quotient(*space, *perm, *times, *out, *tol); };
    });
  }

  auto* energy = app.add_subcommand("energy-check", "Randomized energy-measure identity sweep");
  {
    auto space = std::make_shared<std::string>();
    auto trials = std::make_shared<int>(1000);
    auto seed = std::make_shared<unsigned>(1);
    auto tol = std::make_shared<double>(1e-9);
    energy->add_option("space", *space, "space description")->required();
    energy->add_option("--trials", *trials, "number of random quadruples");
    energy->add_option("--seed", *seed, "RNG seed");
    energy->add_option("--tol", *tol, "slack tolerance");
    energy->callback([=, &action] {
      action = [=] { return cmd_energy_check(*space, *trials, *seed, *tol); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
