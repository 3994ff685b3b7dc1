#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "parc/harness.hpp"

using namespace parc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(Method method, HomotopySpec h, Task task = Task::Autoencoder) {
  ExperimentConfig c;
  c.task = task;
  c.method = method;
  c.homotopy = h;
  c.budget = 600;
  c.n_steps = 4;
  c.train_size = 120;
  c.test_size = 60;
  c.batch_size = 32;
  c.learning_rate = 0.01;
  c.corrector_steps = 40;
  return c;
}

SummaryRow summary(Task task, Method m, const std::string& h, double test, double sd = 0.0,
                   std::optional<double> acc = std::nullopt, double acc_sd = 0.0) {
  SummaryRow s;
  s.task = task;
  s.method = m;
  s.homotopy = h;
  s.runs = 5;
  s.train_loss_mean = test;
  s.test_loss_mean = test;
  s.test_loss_std = sd;
  s.accuracy_mean = acc;
  if (acc) s.accuracy_std = acc_sd;
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "task = classifier\n"
      "method = parc   # trailing\n"
      "homotopy = h-brightness\n"
      "gamma = 5\nds = 0.1\nn_steps = 7\nbudget = 1234\nseed = 42\n"
      "data = synthetic\nout_dir = /tmp/x\nnormalization = paper_literal\n");
  const ExperimentConfig c = parse_config(in);
  CHECK(c.task == Task::Classifier);
  CHECK(c.method == Method::Parc);
  CHECK(c.homotopy.kind == HomotopyKind::HBrightness);
  CHECK(c.gamma == 5.0);
  CHECK(c.ds == 0.1);
  CHECK(c.n_steps == 7);
  CHECK(c.budget == 1234);
  CHECK(c.seed == 42);
  CHECK(c.out_dir == fs::path("/tmp/x"));
  CHECK(c.normalization == NormalizationMode::PaperLiteral);
  CHECK(c.tag() == "classifier_parc_h-brightness");

  ExperimentConfig d;
  apply_config_value(d, "homotopy", "h-brightness:sigmoid");
  CHECK(d.homotopy.activation == Activation::Sigmoid);
}

TEST_CASE("config errors") {
  ExperimentConfig c;
  CHECK_THROWS_AS(apply_config_value(c, "colour", "blue"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "budget", "lots"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "method", "magic"), ConfigError);
  std::istringstream no_eq("budget 10\n");
  CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);

  ExperimentConfig bad = small(Method::Standard, HomotopySpec::h_relu());
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small(Method::Npc, HomotopySpec::h_relu());
  bad.n_steps = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.n_steps = 3;
  bad.budget = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("budget zero evaluates the initialization") {
  ExperimentConfig c = small(Method::Parc, HomotopySpec::h_sigmoid());
  c.budget = 0;
  const ExperimentData data = load_experiment_data(c);
  const ExperimentResult r = run_experiment(c, data);
  CHECK(r.row.ok());
  CHECK(r.row.gradient_steps == 0);
  const MlpModel model = MlpModel::autoencoder(HomotopySpec::h_sigmoid());
  const ParamVector theta0 = init_params(model, InitScheme::XavierUniform, c.seed);
  CHECK(r.row.test_loss == loss_value(model, theta0, data.test.as_batch(), 1.0));
}

TEST_CASE("runs are deterministic and respect the budget") {
  for (const auto& c : {small(Method::Standard, HomotopySpec::none(Activation::Sigmoid)),
                        small(Method::Npc, HomotopySpec::h_sigmoid()),
                        small(Method::Parc, HomotopySpec::h_sigmoid()),
                        small(Method::Parc, HomotopySpec::h_relu(), Task::Classifier)}) {
    CAPTURE(c.tag());
    const ExperimentData data = load_experiment_data(c);
    const ExperimentResult a = run_experiment(c, data);
    const ExperimentResult b = run_experiment(c, data);
    CHECK(a.row.ok());
    CHECK(same_result(a.row, b.row));
    CHECK(a.row.final_lambda == 1.0);
    CHECK(a.row.train_loss >= 0.0);
    CHECK(std::abs(a.row.gradient_steps - c.budget) <= c.corrector_steps);
    if (c.task == Task::Classifier) {
      REQUIRE(a.row.test_accuracy);
      CHECK(*a.row.test_accuracy >= 0.0);
      CHECK(*a.row.test_accuracy <= 1.0);
    }
  }
}

TEST_CASE("divergence is recorded as a failure marker") {
  ExperimentConfig c = small(Method::Npc, HomotopySpec::h_relu());
  c.learning_rate = 1e200;
  const ExperimentResult r = run_experiment(c, load_experiment_data(c));
  CHECK_FALSE(r.row.ok());
  CHECK(r.row.status.rfind("stalled", 0) == 0);
}

TEST_CASE("result json round trip") {
  ResultRow row;
  row.task = Task::Classifier;
  row.method = Method::Npc;
  row.homotopy = "h-brightness:sigmoid";
  row.train_loss = 0.1234567890123;
  row.test_loss = 1.0 / 3.0;
  row.test_accuracy = 0.875;
  row.wall_seconds = 2.5;
  row.seed = 17;
  row.gradient_steps = 900;
  row.final_lambda = 1.0;
  const ResultRow back = row_from_json(row_to_json(row));
  CHECK(same_result(row, back));
  CHECK(back.wall_seconds == 2.5);

  std::istringstream lines(row_to_json(row) + "\n\n" + row_to_json(row) + "\n");
  CHECK(read_results_jsonl(lines).size() == 2);
  CHECK_THROWS(row_from_json("{not json"));
}

TEST_CASE("out_dir receives trace, sidecar and result") {
  const fs::path dir = fs::temp_directory_path() / "parc_test_harness_out";
  fs::remove_all(dir);
  ExperimentConfig c = small(Method::Npc, HomotopySpec::h_relu());
  c.out_dir = dir;
  run_experiment(c);
  const std::string stem = c.tag() + "_seed0";
  CHECK(fs::exists(dir / (stem + ".csv")));
  CHECK(fs::exists(dir / (stem + ".json")));
  CHECK(fs::exists(dir / (stem + ".result.json")));
}

TEST_CASE("suite") {
  CHECK(run_suite({}, 3).rows.empty());
  CHECK_THROWS_AS(run_suite({small(Method::Npc, HomotopySpec::h_relu())}, 0), ConfigError);

  ExperimentConfig c = small(Method::Npc, HomotopySpec::h_relu());
  c.budget = 150;
  c.seed = 10;
  const ResultTable t = run_suite({c}, 3, 2);
  REQUIRE(t.rows.size() == 3);
  REQUIRE(t.summary.size() == 1);
  CHECK(t.rows[2].seed == 12);
  const double mean = (t.rows[0].test_loss + t.rows[1].test_loss + t.rows[2].test_loss) / 3.0;
  CHECK(t.summary[0].test_loss_mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(t.summary[0].runs == 3);
  // Threads do not change results.
  const ResultTable serial = run_suite({c}, 3, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same_result(t.rows[i], serial.rows[i]));
}

TEST_CASE("summary and table order") {
  std::vector<ResultRow> rows;
  auto add = [&](Method m, const std::string& h, double loss) {
    ResultRow r;
    r.method = m;
    r.homotopy = h;
    r.test_loss = loss;
    rows.push_back(r);
  };
  add(Method::Parc, "h-brightness", 0.1);
  add(Method::Parc, "h-relu", 0.1);
  add(Method::Standard, "sigmoid", 0.2);
  add(Method::Npc, "h-sigmoid", 0.3);
  add(Method::Standard, "relu", 0.4);
  add(Method::Standard, "relu", 0.6);
  const auto s = summarize(rows);
  REQUIRE(s.size() == 5);
  CHECK(s[0].homotopy == "relu");
  CHECK(s[0].test_loss_mean == doctest::Approx(0.5));
  CHECK(s[0].test_loss_std == doctest::Approx(std::sqrt(0.02)));
  CHECK(s[1].homotopy == "sigmoid");
  CHECK(s[2].method == Method::Npc);
  CHECK(s[3].homotopy == "h-relu");
  CHECK(s[4].homotopy == "h-brightness");

  const std::string table = render_table(s);
  CHECK(table.find("Standard | relu") < table.find("NPC | h-sigmoid"));
  CHECK(table.find("NPC | h-sigmoid") < table.find("PARC | h-relu"));
}

TEST_CASE("report ordering and verdicts") {
  const Task ae = Task::Autoencoder;
  const Report r = compare_report({summary(ae, Method::Standard, "sigmoid", 0.30, 0.01),
                                   summary(ae, Method::Npc, "h-sigmoid", 0.20, 0.01),
                                   summary(ae, Method::Parc, "h-sigmoid", 0.10, 0.01)});
  REQUIRE(r.ordering.at(ae).size() == 3);
  CHECK(r.ordering.at(ae)[0] == "PARC h-sigmoid");
  CHECK(r.ordering.at(ae)[2] == "Standard sigmoid");
  CHECK(r.wins == 2);
  CHECK(r.total == 2);
  CHECK(r.markdown.find("2/2") != std::string::npos);

  const Report tie = compare_report({summary(ae, Method::Standard, "sigmoid", 0.30, 0.05),
                                     summary(ae, Method::Parc, "h-sigmoid", 0.28, 0.01)});
  REQUIRE(tie.comparisons.size() == 1);
  CHECK(tie.comparisons[0].by_test_loss == Verdict::Inconclusive);
  CHECK(tie.wins == 0);
}

TEST_CASE("report on a fixed eight-row autoencoder table") {
  const Task ae = Task::Autoencoder;
  const Report r = compare_report({
      summary(ae, Method::Standard, "relu", 0.0422), summary(ae, Method::Standard, "sigmoid", 0.0458),
      summary(ae, Method::Npc, "h-relu", 0.042),     summary(ae, Method::Npc, "h-sigmoid", 0.0401),
      summary(ae, Method::Npc, "h-brightness", 0.0402), summary(ae, Method::Parc, "h-relu", 0.040),
      summary(ae, Method::Parc, "h-sigmoid", 0.0399), summary(ae, Method::Parc, "h-brightness", 0.0398),
  });
  const auto& order = r.ordering.at(ae);
  // The two PARC activation/data homotopies lead; brightness edges sigmoid by 1e-4.
  CHECK(order[0] == "PARC h-brightness");
  CHECK(order[1] == "PARC h-sigmoid");
  CHECK(order.back() == "Standard sigmoid");
  CHECK(r.wins == 6);
}

TEST_CASE("report on a fixed five-row classifier table") {
  const Task clf = Task::Classifier;
  const Report r = compare_report({
      summary(clf, Method::Standard, "relu", 0.675, 0.0, 0.78),
      summary(clf, Method::Npc, "h-relu", 0.59, 0.0, 0.814),
      summary(clf, Method::Npc, "h-brightness", 0.53, 0.0, 0.827),
      summary(clf, Method::Parc, "h-relu", 0.53, 0.0, 0.834),
      summary(clf, Method::Parc, "h-brightness", 0.731, 0.0, 0.772),
  });
  CHECK(r.wins == 3);
  CHECK(r.total == 4);
  CHECK(r.markdown.find("known regression") != std::string::npos);
}

TEST_CASE("relative data_dir resolves against the config file") {
  const fs::path dir = fs::temp_directory_path() / "parc_test_harness_cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "a.cfg") << "data = mnist\ndata_dir = ../mnist\n";
  CHECK(load_config(dir / "a.cfg").data_dir == (dir / "../mnist").lexically_normal());
  std::ofstream(dir / "b.cfg") << "data_dir = /abs/path\n";
  CHECK(load_config(dir / "b.cfg").data_dir == fs::path("/abs/path"));
  ExperimentConfig base;
  base.data_dir = "keep/me";
  std::ofstream(dir / "c.cfg") << "budget = 5\n";
  CHECK(load_config(dir / "c.cfg", base).data_dir == fs::path("keep/me"));
}
