#pragma once

// Experiment runner: standard training versus NPC and PARC on the 6x6
// autoencoder and classifier tasks.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parc/continuation.hpp"
#include "parc/data.hpp"
#include "parc/homotopy.hpp"
#include "parc/solvers.hpp"

namespace parc {

enum class Task { Autoencoder, Classifier };
enum class Method { Standard, Npc, Parc };
enum class DataSource { Mnist, Synthetic };

std::string to_string(Task task);
std::string to_string(Method method);
std::string to_string(DataSource source);
Task task_from_string(const std::string& name);
Method method_from_string(const std::string& name);
DataSource data_source_from_string(const std::string& name);

struct ExperimentConfig {
  Task task = Task::Autoencoder;
  Method method = Method::Standard;
  HomotopySpec homotopy = HomotopySpec::none(Activation::Relu);
  double gamma = 10.0;
  double ds = 0.05;
  int n_steps = 10;
  /// Total gradient steps, shared by every method.
  std::int64_t budget = 20000;
  std::uint64_t seed = 0;
  DataSource data = DataSource::Synthetic;
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;

  // Optional keys (defaults documented in the README).
  double learning_rate = 1e-3;
  Eigen::Index batch_size = 64;
  Eigen::Index train_size = 4000;
  Eigen::Index test_size = 1000;
  NormalizationMode normalization = NormalizationMode::Joint;
  PenaltyForm penalty = PenaltyForm::Squared;
  double bootstrap_dlambda = 0.02;
  /// Gradient steps per PARC corrector; 0 picks budget / (4 * (n_steps + 1)).
  int corrector_steps = 0;
  int max_parc_steps = 400;

  void validate() const;
  /// Short identifier such as "autoencoder_parc_h-sigmoid".
  std::string tag() const;
};

/// Parses the flat `key = value` format ('#' starts a comment).
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
/// A relative data_dir set in the file is resolved against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Applies one key/value pair; throws ConfigError for unknown keys or bad
/// values.
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string config_to_json(const ExperimentConfig& config);

struct ResultRow {
  Task task = Task::Autoencoder;
  Method method = Method::Standard;
  std::string homotopy;
  double train_loss = 0.0;
  double test_loss = 0.0;
  std::optional<double> test_accuracy;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::int64_t gradient_steps = 0;
  double final_lambda = 1.0;
  /// "ok" or a failure marker ("stalled: ...", "error: ...").
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

std::string row_to_json(const ResultRow& row);
ResultRow row_from_json(const std::string& line);
std::vector<ResultRow> read_results_jsonl(std::istream& in);

/// True when every field except wall_seconds matches bit-for-bit.
bool same_result(const ResultRow& a, const ResultRow& b);

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Train/test splits for a config (fixed data seeds, independent of the run
/// seed). The data directory falls back to $PARC_DATA_DIR.
ExperimentData load_experiment_data(const ExperimentConfig& config);

struct ExperimentResult {
  ResultRow row;
  ContinuationTrace trace;
};

/// Runs one configuration. When out_dir is set, writes the trace CSV, its
/// JSON sidecar and a one-line result JSON there.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data);

struct SummaryRow {
  Task task = Task::Autoencoder;
  Method method = Method::Standard;
  std::string homotopy;
  int runs = 0;
  int failures = 0;
  double train_loss_mean = 0.0, train_loss_std = 0.0;
  double test_loss_mean = 0.0, test_loss_std = 0.0;
  std::optional<double> accuracy_mean, accuracy_std;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

/// Mean and sample standard deviation per (task, method, homotopy), in
/// table order: Standard, NPC, PARC.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Runs each config with seeds seed+0 .. seed+repeats-1, in parallel over
/// `threads` workers (0 = hardware concurrency). Failures stay in their row.
ResultTable run_suite(const std::vector<ExperimentConfig>& configs, int repeats, int threads = 0);

/// Markdown tables, one section per task, rows in summary order.
std::string render_table(const std::vector<SummaryRow>& summary);

enum class Verdict { Wins, Loses, Inconclusive };
std::string to_string(Verdict v);

struct Comparison {
  Task task = Task::Autoencoder;
  Method method = Method::Standard;
  std::string homotopy;
  std::string baseline;
  Verdict by_test_loss = Verdict::Inconclusive;
  std::optional<Verdict> by_accuracy;
};

struct Report {
  /// Per task: method/homotopy labels ordered by mean test loss (best first).
  std::map<Task, std::vector<std::string>> ordering;
  std::vector<Comparison> comparisons;
  int wins = 0;
  int total = 0;
  std::string markdown;
};

/// Orders methods by mean test loss per task and compares every continuation
/// row with the matching standard baseline. Differences within one standard
/// deviation are inconclusive.
Report compare_report(const std::vector<SummaryRow>& summary);

}  // namespace parc
