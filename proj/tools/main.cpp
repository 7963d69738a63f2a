// Command-line front end for the sparse-bandit simulator.
//
//   sparse_bandit design <actions.json>   E-optimal design for an action set
//   sparse_bandit run <config.json>       run a configured experiment
//   sparse_bandit slope <summary.csv>     log-log regret slope per policy
//   sparse_bandit plot <results.csv>      re-plot curves from a results CSV
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsebandit/design.hpp"
#include "sparsebandit/harness.hpp"
#include "sparsebandit/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw std::runtime_error("read failed for " + path);
  return buf.str();
}

void write_or_print(const std::string& out_path, const std::string& contents) {
  if (out_path.empty()) {
    std::cout << contents;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + out_path);
}

int cmd_design(const std::string& actions_path, const std::string& out_path, double tol) {
  const sparsebandit::ActionSet actions = sparsebandit::actions_from_json(read_file(actions_path));
  const auto [design, cert] = sparsebandit::solve_e_optimal(actions, tol);
  write_or_print(out_path, sparsebandit::design_to_json(design, cert));
  std::cerr << "design: dim=" << actions.dim() << " actions=" << actions.size()
            << " objective=" << cert.objective << " fw_gap=" << cert.fw_gap
            << " iterations=" << cert.iterations << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path) {
  const sparsebandit::ExperimentConfig config =
      sparsebandit::config_from_json(read_file(config_path));
  const sparsebandit::ExperimentResult result = sparsebandit::run_experiment(config);
  sparsebandit::emit_csv(result, config.csv_path);
  sparsebandit::emit_summary(result, config.summary_path);
  sparsebandit::emit_svg(result, config.svg_path);
  for (const sparsebandit::SummaryRow& row : sparsebandit::summarize(result)) {
    std::cout << row.policy << " n=" << row.horizon << " median=" << row.median
              << " iqr=" << row.iqr << "\n";
  }
  std::cerr << "run: wrote " << config.csv_path << ", " << config.summary_path << ", "
            << config.svg_path << "\n";
  return kExitOk;
}

int cmd_slope(const std::string& summary_path) {
  const std::vector<sparsebandit::SummaryRow> rows =
      sparsebandit::summary_from_csv(read_file(summary_path));
  // Group rows per policy, preserving file order.
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> series;
  for (const sparsebandit::SummaryRow& row : rows) {
    if (series.find(row.policy) == series.end()) order.push_back(row.policy);
    series[row.policy].first.push_back(row.horizon);
    series[row.policy].second.push_back(row.median);
  }
  if (order.empty()) throw std::invalid_argument("slope: summary CSV has no data rows");
  for (const std::string& policy : order) {
    const auto& [horizons, medians] = series[policy];
    const double slope = sparsebandit::loglog_slope(horizons, medians);
    std::printf("%s %.6f\n", policy.c_str(), slope);
  }
  return kExitOk;
}

int cmd_plot(const std::string& results_path, const std::string& out_path) {
  const std::vector<sparsebandit::RegretCurve> curves =
      sparsebandit::curves_from_csv(read_file(results_path));
  if (curves.empty()) throw std::invalid_argument("plot: results CSV has no data rows");
  sparsebandit::emit_svg(curves, out_path);
  std::cerr << "plot: wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse linear bandit simulator"};
  app.require_subcommand(1);

  std::string actions_path, design_out;
  double design_tol = 1e-3;
  CLI::App* design = app.add_subcommand("design", "Solve the E-optimal design for an action set");
  design->add_option("actions", actions_path, "Action-set JSON file")->required();
  design->add_option("-o,--output", design_out, "Output JSON path (default: stdout)");
  design->add_option("--tol", design_tol, "Optimality-gap tolerance")->check(CLI::PositiveNumber);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("config", config_path, "Experiment config JSON file")->required();

  std::string summary_path;
  CLI::App* slope = app.add_subcommand("slope", "Fit log-log regret slopes from a summary CSV");
  slope->add_option("summary", summary_path, "Summary CSV file")->required();

  std::string results_path, plot_out = "regret.svg";
  CLI::App* plot = app.add_subcommand("plot", "Render an SVG regret plot from a results CSV");
  plot->add_option("results", results_path, "Long-form results CSV file")->required();
  plot->add_option("-o,--output", plot_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (design->parsed()) return cmd_design(actions_path, design_out, design_tol);
    if (run->parsed()) return cmd_run(config_path);
    if (slope->parsed()) return cmd_slope(summary_path);
    if (plot->parsed()) return cmd_plot(results_path, plot_out);
    std::cerr << "error: no subcommand\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}
