#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <fstream>

#include "orthofuse/config.hpp"
#include "orthofuse/errors.hpp"
#include "orthofuse/report.hpp"
#include "orthofuse/stats.hpp"

using namespace orthofuse;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("orthofuse_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunConfig random_config(Rng& rng) {
  RunConfig cfg;
  cfg.mode = rng.next_bernoulli(0.5) ? RunMode::simulate : RunMode::fit;
  cfg.model = static_cast<ModelKind>(rng.next_below(3));
  cfg.seed = rng.next_u64() % 100000;
  cfg.reps = 1 + static_cast<int>(rng.next_below(50));
  cfg.level = 0.5 + 0.45 * rng.next_double();
  cfg.crossfit_R = 2 + static_cast<int>(rng.next_below(3));
  cfg.refit = rng.next_bernoulli(0.5);
  cfg.output_dir = "out" + std::to_string(rng.next_below(10));
  cfg.clip = {0.01 + 0.2 * rng.next_double(), 0.7 + 0.2 * rng.next_double()};
  cfg.dgp.m = 2 + static_cast<int>(rng.next_below(20));
  cfg.dgp.K = 1 + static_cast<int>(rng.next_below(cfg.dgp.m));
  cfg.dgp.delta = 0.1 + rng.next_double();
  cfg.dgp.xi_max = rng.next_bernoulli(0.3) ? 0.05 : 0.0;
  cfg.dgp.model = cfg.model;
  cfg.dgp.seed = cfg.seed;
  cfg.methods = {MethodSpec{MethodSpec::Kind::adaptive, 0.0},
                 MethodSpec{MethodSpec::Kind::uniform, rng.next_double()}};
  cfg.learner.trees = 1 + static_cast<int>(rng.next_below(200));
  cfg.learner.learning_rate = 0.05 + 0.9 * rng.next_double();
  cfg.fusion.tau = 10.0 * rng.next_double();
  cfg.solver.rho = 0.5 + rng.next_double();
  if (cfg.mode == RunMode::fit) {
    cfg.data.path = "data.csv";
    cfg.data.mapping.task_col = "task";
    cfg.data.mapping.outcome_cols = {"y"};
    cfg.data.mapping.treatment_col = "t";
    cfg.data.mapping.covariate_cols = {"x1", "x2"};
  }
  return cfg;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("round trip preserves randomized configs") {
  Rng rng(900, 0);
  for (int t = 0; t < 30; ++t) {
    const RunConfig cfg = random_config(rng);
    const RunConfig back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));
  }
}

TEST_CASE("unknown keys are rejected") {
  nlohmann::json j{{"mode", "simulate"}, {"modell", "plm"}};
  CHECK_THROWS_AS(parse_config(j), Error);
}

TEST_CASE("invalid ranges are rejected") {
  nlohmann::json bad_level{{"level", 1.5}};
  CHECK_THROWS_AS(parse_config(bad_level), Error);
  nlohmann::json bad_clip{{"clip", {0.5, 0.2}}};
  CHECK_THROWS_AS(parse_config(bad_clip), Error);
  nlohmann::json bad_method{{"methods", {"turbo"}}};
  CHECK_THROWS_AS(parse_config(bad_method), Error);
}

}  // TEST_SUITE

TEST_SUITE("csv") {

TEST_CASE("task csv round trip and grouping") {
  const auto dir = temp_dir("csv");
  DgpConfig cfg;
  cfg.m = 2;
  cfg.K = 1;
  cfg.n0 = 40;
  cfg.n_step = 10;
  cfg.p0 = 5;
  cfg.p_step = 0;  // common dimension so both tasks share columns
  Rng truth_rng(1, 0);
  const SimTruth truth = assign_clusters(cfg, truth_rng);
  std::vector<TaskDataset> tasks;
  for (int j = 1; j <= 2; ++j) {
    Rng rng(1, j);
    tasks.push_back(generate_task(cfg, truth, j, rng));
  }
  const std::string path = (dir / "tasks.csv").string();
  write_tasks_csv(path, tasks, {"alpha", "beta"}, ModelKind::plm);
  const TaskTable table =
      read_task_csv(path, default_sim_mapping(5, ModelKind::plm), ModelKind::plm);
  REQUIRE(table.tasks.size() == 2);
  CHECK(table.labels == std::vector<std::string>{"alpha", "beta"});
  for (int j = 0; j < 2; ++j) {
    CHECK(table.tasks[j].outcome == tasks[j].outcome);
    CHECK(table.tasks[j].treatment == tasks[j].treatment);
    CHECK(table.tasks[j].covariates == tasks[j].covariates);
  }
}

TEST_CASE("missing column and bad cells are reported") {
  const auto dir = temp_dir("csv_bad");
  const std::string path = (dir / "bad.csv").string();
  std::ofstream(path) << "task,y,t,x1\n"
                         "a,1.0,0.5,2.0\n"
                         "a,NA,0.5,2.0\n";
  ColumnMapping mapping = default_sim_mapping(1, ModelKind::plm, 1);
  try {
    read_task_csv(path, mapping, ModelKind::plm);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_numeric_cell);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  mapping.covariate_cols = {"x9"};
  try {
    read_task_csv(path, mapping, ModelKind::plm);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_column);
  }
}

TEST_CASE("small tasks are rejected with a listing") {
  const auto dir = temp_dir("csv_small");
  const std::string path = (dir / "small.csv").string();
  std::ofstream out(path);
  out << "task,y,t,x1\n";
  for (int i = 0; i < 25; ++i) out << "big," << i << ",0.5,1.0\n";
  out << "tiny,1.0,0.5,1.0\n";
  out.close();
  try {
    read_task_csv(path, default_sim_mapping(1, ModelKind::plm), ModelKind::plm);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_small_task);
    CHECK(std::string(e.what()).find("tiny") != std::string::npos);
  }
}

TEST_CASE("did mapping needs two outcome columns") {
  const auto dir = temp_dir("csv_did");
  const std::string path = (dir / "did.csv").string();
  std::ofstream(path) << "task,y,t,x1\na,1,1,0\n";
  CHECK_THROWS_AS(read_task_csv(path, default_sim_mapping(1, ModelKind::plm, 1), ModelKind::did),
                  Error);
}

TEST_CASE("csv escaping quotes fields with separators") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

}  // TEST_SUITE

TEST_SUITE("report") {

TEST_CASE("fit report round trip is byte identical") {
  const auto dir = temp_dir("report");
  FitReport r;
  r.config_hash = "deadbeef00112233";
  r.seed = 42;
  r.version = kVersion;
  r.model = "plm";
  r.task_labels = {"a", "b"};
  r.theta_hat = {{0.25}, {0.25}};
  r.cluster_of = {0, 0};
  ClusterInference ci;
  ci.cluster_id = 0;
  ci.members = {0, 1};
  ci.n_pooled = 123;
  ci.estimate = {0.25};
  ci.se = {0.03125};
  ci.ci_lo = {0.1887};
  ci.ci_hi = {0.3112};
  ci.level = 0.95;
  ci.psi_hat = Matrix(1, 1);
  ci.psi_hat(0, 0) = 2.0;
  ci.omega_hat = Matrix(1, 1);
  ci.omega_hat(0, 0) = 4.0 / 3.0;
  r.clusters = {ci};

  const std::string p1 = (dir / "report1.json").string();
  const std::string p2 = (dir / "report2.json").string();
  write_fit_report(p1, r);
  const FitReport back = read_fit_report(p1);
  write_fit_report(p2, back);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(back.task_labels == r.task_labels);
  CHECK(back.clusters[0].n_pooled == 123);
}

TEST_CASE("records csv round trip") {
  const auto dir = temp_dir("records");
  std::vector<RepRecord> records;
  for (int i = 0; i < 12; ++i) {
    RepRecord rec;
    rec.rep = i / 3;
    rec.method = "adaptive";
    rec.task = i % 3 + 1;
    rec.cluster_true = i % 2;
    rec.cluster_est = i % 2;
    rec.theta_true = 0.1 * i;
    rec.theta_hat = 0.1 * i + 0.01;
    rec.se = 0.05;
    records.push_back(rec);
  }
  const std::string path = (dir / "records.csv").string();
  write_records_csv(path, records);
  const auto back = read_records_csv(path);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].theta_hat == records[i].theta_hat);
    CHECK(back[i].method == records[i].method);
  }
}

TEST_CASE("qq bands cover exact normal scores") {
  // inputs constructed as the plotting positions themselves sit on the
  // diagonal and inside the 99% band
  Vec z(100);
  for (int i = 1; i <= 100; ++i) z[i - 1] = norm_ppf((i - 0.5) / 100.0);
  const QqData qq = make_qq(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(qq.empirical[i] == doctest::Approx(qq.theoretical[i]).epsilon(1e-12));
    CHECK(qq.empirical[i] >= qq.band_lo[i]);
    CHECK(qq.empirical[i] <= qq.band_hi[i]);
  }
}

TEST_CASE("histogram of constant values occupies a single bin") {
  const HistData h = make_hist(Vec(25, 3.0));
  REQUIRE(h.counts.size() == 1);
  CHECK(h.counts[0] == 25);
  CHECK(h.edges.front() < 3.0);
  CHECK(h.edges.back() > 3.0);
}

TEST_CASE("svg diagnostics are well-formed and self-contained") {
  const auto dir = temp_dir("svg");
  std::vector<RepRecord> records;
  Rng rng(77, 0);
  for (int i = 0; i < 60; ++i) {
    RepRecord rec;
    rec.rep = i;
    rec.method = "adaptive";
    rec.task = 1;
    rec.theta_true = 0.0;
    rec.theta_hat = 0.1 * rng.next_normal();
    rec.se = 0.1;
    records.push_back(rec);
  }
  const auto paths = emit_svg_diagnostics(records, dir.string());
  REQUIRE(paths.size() == 4);
  for (const auto& p : paths) CHECK(std::filesystem::exists(p));
  for (const auto& p : paths) {
    if (p.find(".svg") == std::string::npos) continue;
    const std::string svg = slurp(p);
    CHECK(svg.find("<?xml") == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
    // the only URL is the SVG namespace; nothing external is referenced
    CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));
    CHECK(svg.find("href") == std::string::npos);
    auto count = [&](const std::string& needle) {
      std::size_t n = 0, pos = 0;
      while ((pos = svg.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
      }
      return n;
    };
    CHECK(count("<text") == count("</text>"));
  }
  // too few values
  records.resize(5);
  CHECK_THROWS_AS(emit_svg_diagnostics(records, dir.string()), Error);
}

}  // TEST_SUITE
