// Command-line front end: solve the optimal allocation, evaluate candidate
// sequences, run seeded simulations, and emit the CSV tables behind the
// throughput-vs-window and xi-vs-j figures.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ehpc/core.hpp"
#include "ehpc/format.hpp"
#include "ehpc/objective.hpp"
#include "ehpc/policy.hpp"
#include "ehpc/simulator.hpp"
#include "ehpc/solver.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitCheck = 3;

struct CommonOpts {
  double p = 0.0;
  double gamma = 0.0;
  double battery = 0.0;
  int window = 0;
  double tol = ehpc::kDefaultSolverTol;
  std::string format = "text";
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_window) {
  cmd->add_option("-p,--prob", o.p, "arrival probability (0,1)")->required();
  cmd->add_option("-g,--gamma", o.gamma, "channel gain")->required();
  cmd->add_option("-B,--battery", o.battery, "battery capacity")->required();
  auto* w = cmd->add_option("-w,--window", o.window, "look-ahead window");
  if (need_window) w->required();
  cmd->add_option("--tol", o.tol, "solver/tail tolerance (default 1e-12)");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "text"}));
  cmd->add_option("--out", o.out, "write output to this path (default stdout)");
}

ehpc::SystemParams params_of(const CommonOpts& o) {
  return ehpc::validate_params(o.p, o.gamma, o.battery, o.window);
}

// Output sink: --out PATH or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fd(double v) { return ehpc::format_double(v); }

std::vector<double> parse_xi_list(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(ehpc::parse_double(cell));
  if (vals.empty()) throw std::invalid_argument("empty xi list");
  return vals;
}

void render_params(std::ostream& os, const ehpc::SystemParams& P,
                   const char* prefix) {
  os << prefix << "p=" << fd(P.p) << " gamma=" << fd(P.gamma)
     << " B=" << fd(P.battery_capacity) << " w=" << P.window << "\n";
}

void render_solver_report(std::ostream& os, const ehpc::SystemParams& P,
                          const ehpc::SolverReport& rep,
                          const std::string& format) {
  const auto structure =
      ehpc::verify_structure(P, rep.xi, rep.horizon);
  const bool infinite = rep.horizon == ehpc::Horizon::truncated_infinite;
  if (format == "csv") {
    os << "j,xi\n";
    for (std::size_t j = 0; j < rep.xi.values.size(); ++j) {
      os << (j + 1) << ',' << fd(rep.xi.values[j]) << "\n";
    }
    os << "# horizon=" << (infinite ? "infinite" : "finite") << "\n";
    if (infinite) os << "# truncation_index=" << rep.truncation_index << "\n";
    os << "# residual=" << fd(rep.xi.residual) << "\n";
    os << "# objective=" << fd(rep.objective) << "\n";
    os << "# max_kkt_residual=" << fd(rep.max_kkt_residual) << "\n";
    os << "# bisection_iterations=" << rep.bisection_iterations << "\n";
    os << "# bracket_width_final=" << fd(rep.bracket_width_final) << "\n";
    os << "# structure_ok=" << (structure.ok(rep.horizon) ? 1 : 0) << "\n";
    os << "# generator=" << rep.generator << "\n";
    return;
  }
  os << "command: solve\n";
  render_params(os, P, "params: ");
  os << "horizon: " << (infinite ? "infinite" : "finite") << "\n";
  os << "N: " << rep.N << "\n";
  if (infinite) os << "truncation_index: " << rep.truncation_index << "\n";
  os << "objective: " << fd(rep.objective) << "\n";
  os << "residual: " << fd(rep.xi.residual) << "\n";
  os << "max_kkt_residual: " << fd(rep.max_kkt_residual) << "\n";
  os << "bisection_iterations: " << rep.bisection_iterations << "\n";
  os << "bracket_width_final: " << fd(rep.bracket_width_final) << "\n";
  os << "structure: positive=" << (structure.all_positive ? "yes" : "no")
     << " decreasing=" << (structure.strictly_decreasing ? "yes" : "no")
     << " window_bound=" << (structure.window_bound_strict ? "yes" : "no");
  if (!infinite) {
    os << " terminal=" << (structure.terminal_equality ? "yes" : "no")
       << " residual_bound=" << (structure.residual_bound ? "yes" : "no");
  }
  os << "\n";
  os << "generator: " << rep.generator << "\n";
  os << "xi:\n";
  for (std::size_t j = 0; j < rep.xi.values.size(); ++j) {
    os << "  " << (j + 1) << " " << fd(rep.xi.values[j]) << "\n";
  }
}

void render_throughput_report(std::ostream& os, const ehpc::ThroughputReport& r,
                              const std::string& format) {
  if (format == "csv") {
    os << "key,value\n";
    os << "simulated_mean," << fd(r.simulated_mean) << "\n";
    os << "std_error," << fd(r.std_error) << "\n";
    os << "analytic," << fd(r.analytic) << "\n";
    os << "z_score," << fd(r.z_score) << "\n";
    os << "slots," << r.slots << "\n";
    os << "cycle_count," << r.cycle_count << "\n";
    os << "mean_cycle_length," << fd(r.mean_cycle_length) << "\n";
    os << "initial_battery," << fd(r.initial_battery) << "\n";
    os << "seed," << r.seed << "\n";
    os << "generator," << r.generator << "\n";
    return;
  }
  os << "simulated_mean: " << fd(r.simulated_mean) << "\n";
  os << "std_error: " << fd(r.std_error) << "\n";
  os << "analytic: " << fd(r.analytic) << "\n";
  os << "z_score: " << fd(r.z_score) << "\n";
  os << "slots: " << r.slots << "\n";
  os << "cycle_count: " << r.cycle_count << "\n";
  os << "mean_cycle_length: " << fd(r.mean_cycle_length) << "\n";
  os << "initial_battery: " << fd(r.initial_battery) << "\n";
  os << "seed: " << r.seed << "\n";
  os << "generator: " << r.generator << "\n";
}

int cmd_solve(const CommonOpts& o, int finite_n) {
  const auto P = params_of(o);
  const auto rep = finite_n > 0 ? ehpc::solve_finite(P, finite_n, o.tol)
                                : ehpc::solve_infinite(P, o.tol);
  Sink sink(o.out);
  render_solver_report(sink.os(), P, rep, o.format);
  return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& xi_text) {
  const auto P = params_of(o);
  const auto xi =
      ehpc::make_allocation(parse_xi_list(xi_text), P.battery_capacity);
  Sink sink(o.out);
  std::ostream& os = sink.os();
  const double tn = ehpc::eval_T_N(P, xi);
  const double tinf = ehpc::eval_T_infinity(P, xi, o.tol);
  const auto structure = ehpc::verify_structure(P, xi, ehpc::Horizon::finite);
  const char* sep = o.format == "csv" ? "," : ": ";
  if (o.format == "csv") os << "key,value\n";
  os << "N" << sep << xi.values.size() << "\n";
  os << "T_N" << sep << fd(tn) << "\n";
  os << "T_infinity" << sep << fd(tinf) << "\n";
  os << "residual" << sep << fd(xi.residual) << "\n";
  bool interior = true;
  for (double v : xi.values) interior = interior && v > 0.0;
  if (interior && !xi.values.empty()) {
    const auto kkt = ehpc::kkt_residuals(P, xi);
    os << "max_kkt_residual" << sep << fd(kkt.max_abs_residual) << "\n";
  }
  os << "positive" << sep << structure.all_positive << "\n";
  os << "decreasing" << sep << structure.strictly_decreasing << "\n";
  os << "window_bound" << sep << structure.window_bound_strict << "\n";
  return 0;
}

int cmd_sweep_window(const CommonOpts& o, int w_min, int w_max) {
  if (w_min < 1 || w_max < w_min) {
    throw std::invalid_argument("need 1 <= w-min <= w-max");
  }
  struct Row {
    int w;
    double throughput, offline, gap;
  };
  std::vector<Row> rows;
  double prev_gamma = -1.0, prev_gap = 2.0;
  for (int w = w_min; w <= w_max; ++w) {
    const auto P = ehpc::validate_params(o.p, o.gamma, o.battery, w);
    const auto rep = ehpc::solve_infinite(P, o.tol);
    const double off = ehpc::offline_bound(P, o.tol);
    const double gap = (off - rep.objective) / off;
    if (rep.objective <= prev_gamma || gap >= prev_gap) {
      throw std::runtime_error(
          "sweep row w=" + std::to_string(w) +
          " broke monotonicity; solver output is inconsistent");
    }
    prev_gamma = rep.objective;
    prev_gap = gap;
    rows.push_back(Row{w, rep.objective, off, gap});
  }
  Sink sink(o.out);
  std::ostream& os = sink.os();
  if (o.format == "csv") {
    os << "w,throughput,offline_bound,relative_gap\n";
    for (const auto& r : rows) {
      os << r.w << ',' << fd(r.throughput) << ',' << fd(r.offline) << ','
         << fd(r.gap) << "\n";
    }
  } else {
    os << "command: sweep-window\n";
    os << "w throughput offline_bound relative_gap\n";
    for (const auto& r : rows) {
      os << r.w << ' ' << fd(r.throughput) << ' ' << fd(r.offline) << ' '
         << fd(r.gap) << "\n";
    }
  }
  return 0;
}

int cmd_xi_table(const CommonOpts& o, std::vector<int> n_list) {
  if (n_list.empty()) throw std::invalid_argument("need a nonempty N list");
  const auto P = params_of(o);
  std::vector<ehpc::SolverReport> finite;
  int rows = 0;
  for (int n : n_list) {
    finite.push_back(ehpc::solve_finite(P, n, o.tol));
    rows = std::max(rows, n);
  }
  const auto inf = ehpc::solve_infinite(P, o.tol);

  Sink sink(o.out);
  std::ostream& os = sink.os();
  const char sep = o.format == "csv" ? ',' : ' ';
  os << "j";
  for (int n : n_list) os << sep << "xi_N" << n;
  os << sep << "xi_inf\n";
  for (int j = 1; j <= rows; ++j) {
    os << j;
    for (const auto& rep : finite) {
      os << sep;
      if (j <= rep.N) os << fd(rep.xi.values[static_cast<std::size_t>(j - 1)]);
    }
    os << sep;
    if (j <= inf.N) os << fd(inf.xi.values[static_cast<std::size_t>(j - 1)]);
    os << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOpts& o, std::size_t slots,
                 std::vector<std::uint64_t> seeds, double initial_battery,
                 bool have_initial, const std::string& xi_text, bool check,
                 double z_max, const std::string& trace_path) {
  const auto P = params_of(o);
  const auto xi = xi_text.empty()
                      ? ehpc::solve_infinite(P, o.tol).xi
                      : ehpc::make_allocation(parse_xi_list(xi_text),
                                              P.battery_capacity);
  if (seeds.empty()) seeds.push_back(1);
  const double b0 = have_initial ? initial_battery : P.battery_capacity;

  Sink sink(o.out);
  std::ostream& os = sink.os();
  double z = 0.0;
  if (seeds.size() == 1) {
    std::vector<ehpc::SlotRecord> log;
    const auto rep =
        ehpc::simulate(P, xi, slots, seeds.front(), b0, o.tol,
                       trace_path.empty() ? nullptr : &log);
    if (!trace_path.empty()) {
      std::ofstream tf(trace_path);
      if (!tf) {
        throw std::invalid_argument("cannot open '" + trace_path + "'");
      }
      tf << "slot,arrival,distance,action,battery,reward\n";
      for (const auto& s : log) {
        tf << s.slot << ',' << (s.arrival ? 1 : 0) << ',' << s.distance << ','
           << fd(s.action) << ',' << fd(s.battery) << ',' << fd(s.reward)
           << "\n";
      }
    }
    render_throughput_report(os, rep, o.format);
    z = rep.z_score;
  } else {
    if (!trace_path.empty()) {
      throw std::invalid_argument("--trace needs a single seed");
    }
    const auto agg = ehpc::compare(P, xi, slots, seeds);
    const char* sep = o.format == "csv" ? "," : ": ";
    if (o.format == "csv") os << "key,value\n";
    for (const auto& r : agg.runs) {
      os << "seed_" << r.seed << "_mean" << sep << fd(r.simulated_mean)
         << "\n";
      os << "seed_" << r.seed << "_std_error" << sep << fd(r.std_error)
         << "\n";
    }
    os << "pooled_mean" << sep << fd(agg.pooled_mean) << "\n";
    os << "pooled_std_error" << sep << fd(agg.pooled_std_error) << "\n";
    os << "analytic" << sep << fd(agg.analytic) << "\n";
    os << "pooled_z" << sep << fd(agg.pooled_z) << "\n";
    z = agg.pooled_z;
  }
  if (check && !(std::abs(z) <= z_max)) {
    std::cerr << "check failed: |z| = " << fd(std::abs(z)) << " > "
              << fd(z_max) << "\n";
    return kExitCheck;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal power control for an energy-harvesting transmitter "
               "with Bernoulli arrivals and a finite look-ahead window"};
  app.require_subcommand(1);

  CommonOpts solve_o, eval_o, sim_o, sweep_o, table_o;
  int finite_n = 0;
  std::string eval_xi, sim_xi, trace_path;
  std::size_t slots = 0;
  std::vector<std::uint64_t> seeds;
  double initial_battery = 0.0;
  bool check = false;
  double z_max = 3.0;
  int w_min = 1, w_max = 1;
  std::vector<int> n_list;

  auto* solve = app.add_subcommand("solve", "optimal allocation sequence");
  add_common(solve, solve_o, true);
  solve->add_option("--finite-N", finite_n,
                    "solve the N-dimensional problem instead of the "
                    "infinite-horizon one");

  auto* eval = app.add_subcommand("eval", "evaluate a candidate sequence");
  add_common(eval, eval_o, true);
  eval->add_option("--xi", eval_xi, "comma-separated allocation values")
      ->required();

  auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo run");
  add_common(sim, sim_o, true);
  sim->add_option("-T,--slots", slots, "number of slots")->required();
  sim->add_option("--seed,--seeds", seeds, "seed(s); several seeds pool")
      ->delimiter(',');
  auto* ib = sim->add_option("--initial-battery", initial_battery,
                             "initial level (default: full)");
  sim->add_option("--xi", sim_xi,
                  "simulate this sequence instead of the solved optimum");
  sim->add_flag("--check", check, "fail (exit 3) when |z| exceeds --z-max");
  sim->add_option("--z-max", z_max, "z-score threshold for --check");
  sim->add_option("--trace", trace_path, "write a per-slot dump to this path");

  auto* sweep = app.add_subcommand(
      "sweep-window", "throughput vs window-size table (figure 1 data)");
  add_common(sweep, sweep_o, false);
  sweep->add_option("--w-min", w_min, "first window size")->required();
  sweep->add_option("--w-max", w_max, "last window size")->required();

  auto* table = app.add_subcommand(
      "xi-table", "xi_j for several horizons (figure 2 data)");
  add_common(table, table_o, true);
  table->add_option("--N-list", n_list, "finite horizons, comma separated")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_o, finite_n);
    if (eval->parsed()) return cmd_eval(eval_o, eval_xi);
    if (sim->parsed()) {
      return cmd_simulate(sim_o, slots, seeds, initial_battery,
                          ib->count() > 0, sim_xi, check, z_max, trace_path);
    }
    if (sweep->parsed()) return cmd_sweep_window(sweep_o, w_min, w_max);
    if (table->parsed()) return cmd_xi_table(table_o, n_list);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
