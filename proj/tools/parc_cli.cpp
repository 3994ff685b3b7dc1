// Command-line front end: run, suite, testbed, report.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parc/analytic_testbed.hpp"
#include "parc/harness.hpp"
#include "parc/trace_io.hpp"

namespace fs = std::filesystem;
using namespace parc;

namespace {

void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void write_rows(const fs::path& path, const std::vector<ResultRow>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  for (const auto& row : rows) out << row_to_json(row) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
}

int cmd_run(const fs::path& config_path, const std::vector<std::string>& sets) {
  ExperimentConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  apply_overrides(config, sets);
  const ExperimentResult result = run_experiment(config);
  std::cout << row_to_json(result.row) << '\n';
  if (!config.out_dir.empty()) {
    std::ofstream(config.out_dir / "results.jsonl", std::ios::app) << row_to_json(result.row) << '\n';
  }
  return result.row.ok() ? 0 : 1;
}

int cmd_suite(const fs::path& dir, int repeats, int threads, const fs::path& out,
              const std::vector<std::string>& sets) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ExperimentConfig> configs;
  for (const auto& f : files) {
    ExperimentConfig c = load_config(f);
    apply_overrides(c, sets);
    if (!out.empty()) c.out_dir = out / "traces";
    configs.push_back(std::move(c));
  }
  const ResultTable table = run_suite(configs, repeats, threads);
  const std::string rendered = render_table(table.summary);
  const Report report = compare_report(table.summary);
  std::cout << rendered << '\n' << report.markdown;
  if (!out.empty()) {
    write_rows(out / "results.jsonl", table.rows);
    write_text(out / "table.md", rendered);
    write_text(out / "report.md", report.markdown);
  }
  const bool all_ok =
      std::all_of(table.rows.begin(), table.rows.end(), [](const ResultRow& r) { return r.ok(); });
  return all_ok ? 0 : 1;
}

int cmd_report(const fs::path& results, const fs::path& out) {
  std::ifstream in(results);
  if (!in) throw ConfigError("cannot open " + results.string());
  const auto rows = read_results_jsonl(in);
  const auto summary = summarize(rows);
  const Report report = compare_report(summary);
  const std::string text = render_table(summary) + "\n" + report.markdown;
  std::cout << text;
  if (!out.empty()) write_text(out, text);
  const bool all_ok =
      std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.ok(); });
  return all_ok ? 0 : 1;
}

bool check(bool ok, const std::string& what) {
  std::cout << (ok ? "PASS  " : "FAIL  ") << what << '\n';
  return ok;
}

int cmd_testbed(const fs::path& out, double ds) {
  bool ok = true;
  const RootProblem fold = fold_problem();
  const ParamVector start = ParamVector::Constant(1, 1.0);

  AnalyticRunConfig cfg;
  cfg.ds = ds;
  cfg.bootstrap_dlambda = ds;
  const ContinuationTrace newton = parc_run_analytic(fold, start, cfg);
  double max_h = 0.0, max_lambda = 0.0;
  int decreasing_on_lower = 0;
  for (std::size_t i = 0; i < newton.size(); ++i) {
    const auto& p = newton.points[i].point;
    max_h = std::max(max_h, std::abs(fold.residual(p.theta, p.lambda)[0]));
    max_lambda = std::max(max_lambda, p.lambda);
    if (i > 0 && p.theta[0] < 0 && p.lambda < newton.points[i - 1].point.lambda) {
      ++decreasing_on_lower;
    }
  }
  ok &= check(max_h <= 1e-8, "fold/PARC+Newton: every point has |H| <= 1e-8 (max " +
                                 std::to_string(max_h) + ")");
  ok &= check(max_lambda > 0.999, "fold/PARC+Newton: lambda max " + std::to_string(max_lambda) +
                                      " > 0.999");
  ok &= check(decreasing_on_lower >= 10, "fold/PARC+Newton: " + std::to_string(decreasing_on_lower) +
                                             " steps with decreasing lambda on theta < 0");

  double npc_lambda_max = 0.0;
  bool stalled = false;
  try {
    const auto npc = npc_run_analytic(fold, start, static_cast<int>(std::lround(1.0 / ds)), 0.0, 1.0,
                                      cfg.newton);
    npc_lambda_max = npc.back().point.lambda;
  } catch (const ContinuationStalled& e) {
    stalled = true;
    for (const auto& p : e.partial.points) npc_lambda_max = std::max(npc_lambda_max, p.point.lambda);
  }
  ok &= check(stalled && npc_lambda_max < 1.0,
              "fold/NPC+Newton stalls before the fold (lambda max " + std::to_string(npc_lambda_max) +
                  ")");

  const RootProblem logistic = logistic_fixed_points();
  AnalyticRunConfig lcfg;
  lcfg.ds = ds;
  lcfg.bootstrap_dlambda = ds;
  lcfg.lambda_start = 2.0;
  lcfg.lambda_floor = 0.5;
  lcfg.lambda_ceiling = 4.0;
  const ContinuationTrace logistic_trace =
      parc_run_analytic(logistic, ParamVector::Constant(1, 0.5), lcfg);
  ok &= check(!logistic_trace.empty(), "logistic/PARC+Newton traced " +
                                           std::to_string(logistic_trace.size()) + " points");

  if (!out.empty()) {
    write_trace_csv(out / "fold_parc_newton.csv", newton);
    write_trace_csv(out / "logistic_parc_newton.csv", logistic_trace);
    write_sidecar(out / "fold_parc_newton.csv",
                  "{\"problem\": \"fold\", \"ds\": " + std::to_string(ds) + ", \"theta0\": 1.0}");
    write_sidecar(out / "logistic_parc_newton.csv",
                  "{\"problem\": \"logistic\", \"ds\": " + std::to_string(ds) +
                      ", \"theta0\": 0.5, \"lambda0\": 2.0}");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homotopy continuation training for small networks"};
  app.require_subcommand(1);

  fs::path config_path;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "Run one experiment configuration");
  run->add_option("-c,--config", config_path, "key = value config file");
  run->add_option("-s,--set", sets, "Override a config key (key=value)");

  fs::path suite_dir, suite_out;
  int repeats = 5, threads = 0;
  auto* suite = app.add_subcommand("suite", "Run every *.cfg in a directory");
  suite->add_option("configs", suite_dir, "Directory of config files")->required();
  suite->add_option("-r,--repeats", repeats, "Seeds per config")->check(CLI::PositiveNumber);
  suite->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
  suite->add_option("-o,--out", suite_out, "Output directory");
  suite->add_option("-s,--set", sets, "Override a config key in every file (key=value)");

  fs::path testbed_out;
  double ds = 0.05;
  auto* testbed = app.add_subcommand("testbed", "Run the analytic fold/logistic oracles");
  testbed->add_option("-o,--out", testbed_out, "Directory for trace CSVs");
  testbed->add_option("--ds", ds, "Arclength step")->check(CLI::PositiveNumber);

  fs::path results_path, report_out;
  auto* report = app.add_subcommand("report", "Aggregate a results.jsonl file");
  report->add_option("results", results_path, "results.jsonl")->required();
  report->add_option("-o,--out", report_out, "Write the report here");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, sets);
    if (*suite) return cmd_suite(suite_dir, repeats, threads, suite_out, sets);
    if (*testbed) return cmd_testbed(testbed_out, ds);
    if (*report) return cmd_report(results_path, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
