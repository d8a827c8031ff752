#include "dsmooth/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "dsmooth/driver.hpp"
#include "dsmooth/io.hpp"

namespace dsmooth {

namespace {

struct SolveOptions {
  std::string model;
  std::string algo;
  double eps = 1e-3;
  bool relative = false;
  double gamma = 4.0;
  double eta = 2.0;
  int inner_cycles = 3;
  std::string rho0 = "auto";
  std::int64_t max_oracle_calls = 10000;
  std::string trace;
  std::string labeling_out;
};

struct GenOptions {
  index height = 0;
  index width = 0;
  index labels = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EvalOptions {
  std::string model;
  std::string labeling;
};

struct CompareOptions {
  std::string model;
  double eps = 1e-3;
  bool relative = false;
  std::int64_t max_oracle_calls = 10000;
};

template<typename Write>
void write_file(const std::string& path, Write&& write)
{
  std::ofstream file(path);
  if (!file)
    throw input_error("cannot open '" + path + "' for writing");
  write(file);
  file.flush();
  if (!file)
    throw input_error("failed writing '" + path + "'");
}

SolveParams solve_params(const SolveOptions& o)
{
  SolveParams p;
  p.schedule.epsilon = o.eps;
  p.schedule.relative = o.relative;
  p.schedule.gamma = o.gamma;
  p.schedule.eta = o.eta;
  p.schedule.inner_cycles = o.inner_cycles;
  if (o.rho0 != "auto") {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(o.rho0, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != o.rho0.size())
      throw input_error("--rho0 expects a positive real or 'auto', got '" + o.rho0 + "'");
    p.schedule.rho0 = value;
  }
  p.max_oracle_calls = o.max_oracle_calls;
  return p;
}

int cmd_solve(const SolveOptions& o, std::ostream& out)
{
  const auto strategy = parse_strategy(o.algo);
  if (!strategy)
    throw input_error("unknown --algo '" + o.algo + "'");
  const SolveParams params = solve_params(o);
  const GridModel model = read_model_file(o.model);

  SolveResult r;
  try {
    r = solve(model, *strategy, params);
  } catch (const solve_error& e) {
    if (!o.trace.empty())
      write_file(o.trace, [&](std::ostream& f) { write_trace_csv(f, e.partial_trace); });
    throw;
  }

  if (!o.trace.empty())
    write_file(o.trace, [&](std::ostream& f) { write_trace_csv(f, r.trace); });
  if (!o.labeling_out.empty())
    write_file(o.labeling_out, [&](std::ostream& f) { write_labeling(f, model, r.best_labeling); });

  const bool converged = r.status == SolveStatus::converged;
  out << "algo " << to_string(r.strategy) << '\n'
      << "status " << (converged ? "converged" : "budget_exhausted") << '\n'
      << "primal " << format_real(r.e_min) << '\n'
      << "integer " << format_real(r.e_int_best) << '\n'
      << "dual " << format_real(r.dual_final) << '\n'
      << "gap " << format_real(r.gap_abs) << '\n'
      << "gap_rel " << format_real(r.gap_rel) << '\n'
      << "rho " << format_real(r.rho_final) << '\n'
      << "oracle_calls " << r.oracle_calls << '\n';
  return converged ? 0 : 2;
}

int cmd_gen(const GenOptions& o)
{
  const GridModel model = generate_random_grid(o.height, o.width, o.labels, o.seed);
  write_file(o.out, [&](std::ostream& f) { write_model(f, model); });
  return 0;
}

int cmd_eval(const EvalOptions& o, std::ostream& out)
{
  const GridModel model = read_model_file(o.model);
  std::ifstream in(o.labeling);
  if (!in)
    throw input_error("cannot open labeling file '" + o.labeling + "'");
  const Labeling x = read_labeling(in, model, o.labeling);
  out << format_real(energy(model, x)) << '\n';
  return 0;
}

int cmd_compare(const CompareOptions& o, std::ostream& out)
{
  const GridModel model = read_model_file(o.model);
  SolveParams params;
  params.schedule.epsilon = o.eps;
  params.schedule.relative = o.relative;
  params.max_oracle_calls = o.max_oracle_calls;
  const auto runs = compare_strategies(
      model, {Strategy::a_dsal, Strategy::wc_dsal, Strategy::a_strws, Strategy::wc_strws}, params);
  write_comparison_table(out, runs);
  for (const auto& run : runs)
    if (!run.result)
      return 1;
  return 0;
}

}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app("Smoothed TRW-S with diminishing smoothing for grid MRF MAP inference", "dsmooth");
  app.require_subcommand(1);

  SolveOptions so;
  auto* solve_cmd = app.add_subcommand("solve", "Run one smoothing strategy on a model file");
  solve_cmd->add_option("--model", so.model, "Model file")->required();
  solve_cmd->add_option("--algo", so.algo, "a-dsal | wc-dsal | a-strws | wc-strws")->required();
  solve_cmd->add_option("--eps", so.eps, "Target duality gap")->required();
  solve_cmd->add_flag("--relative", so.relative, "Interpret --eps relative to |E_min|");
  solve_cmd->add_option("--gamma", so.gamma, "Gap share reserved for smoothing")->capture_default_str();
  solve_cmd->add_option("--eta", so.eta, "Stall division factor")->capture_default_str();
  solve_cmd->add_option("--inner-cycles", so.inner_cycles, "Sweeps per outer iteration")
      ->capture_default_str();
  solve_cmd->add_option("--rho0", so.rho0, "Initial smoothing, a real or 'auto'")
      ->capture_default_str();
  solve_cmd->add_option("--max-oracle-calls", so.max_oracle_calls, "Oracle call budget")
      ->capture_default_str();
  solve_cmd->add_option("--trace", so.trace, "Trace CSV output");
  solve_cmd->add_option("--labeling-out", so.labeling_out, "Best labeling output");

  GenOptions go;
  auto* gen_cmd = app.add_subcommand("gen", "Write a random grid model with uniform [0,1) potentials");
  gen_cmd->add_option("--height", go.height)->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--width", go.width)->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--labels", go.labels)->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", go.seed)->required();
  gen_cmd->add_option("--out", go.out)->required();

  EvalOptions eo;
  auto* eval_cmd = app.add_subcommand("eval", "Print the energy of a labeling");
  eval_cmd->add_option("--model", eo.model)->required();
  eval_cmd->add_option("--labeling", eo.labeling)->required();

  CompareOptions co;
  auto* compare_cmd = app.add_subcommand("compare", "Run all four strategies and tabulate");
  compare_cmd->add_option("--model", co.model)->required();
  compare_cmd->add_option("--eps", co.eps)->capture_default_str();
  compare_cmd->add_flag("--relative", co.relative);
  compare_cmd->add_option("--max-oracle-calls", co.max_oracle_calls)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (*solve_cmd)
      return cmd_solve(so, out);
    if (*gen_cmd)
      return cmd_gen(go);
    if (*eval_cmd)
      return cmd_eval(eo, out);
    return cmd_compare(co, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}
