#include "orthofuse/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "orthofuse/config.hpp"
#include "orthofuse/csv.hpp"
#include "orthofuse/errors.hpp"
#include "orthofuse/report.hpp"

namespace orthofuse {

namespace {

int exit_code_for(Errc code) {
  if (is_numerical_error(code)) return 3;
  if (code == Errc::invalid_config || code == Errc::invalid_spec) return 1;
  return 2;
}

struct CommonFlags {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> model;
  std::optional<int> crossfit;
  std::optional<double> level;
  bool refit = false;
};

void apply_overrides(RunConfig& cfg, const CommonFlags& flags) {
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.reps) cfg.reps = *flags.reps;
  if (flags.model) cfg.model = model_from_name(*flags.model);
  if (flags.crossfit) cfg.crossfit_R = *flags.crossfit;
  if (flags.level) cfg.level = *flags.level;
  if (flags.refit) cfg.refit = true;
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (!flags.data_path.empty()) cfg.data.path = flags.data_path;
  cfg.dgp.model = cfg.model;
  cfg.dgp.seed = cfg.seed;
  if (!(cfg.level > 0 && cfg.level < 1))
    throw Error(Errc::invalid_config, "level must be in (0,1)");
  if (cfg.crossfit_R < 2) throw Error(Errc::invalid_config, "crossfit_R must be >= 2");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::empty_data, "cannot create output directory '" + dir + "'");
}

int run_simulate(RunConfig cfg) {
  if (cfg.mode != RunMode::simulate)
    throw Error(Errc::invalid_config, "config mode is not 'simulate'");
  ensure_dir(cfg.output_dir);
  const MonteCarloResult result =
      run_monte_carlo(cfg.dgp, cfg.methods, cfg.reps, cfg.pipeline(), 0);
  write_records_csv(cfg.output_dir + "/records.csv", result.records);
  write_summary_json(cfg.output_dir + "/summary.json", result.report, config_hash(cfg), cfg.seed);
  for (const auto& m : result.report.methods) {
    std::cout << m.method << ": rmse_median=" << format_double(m.rmse_median)
              << " wrmse_median=" << format_double(m.wrmse_median)
              << " ari_median=" << format_double(m.ari_median)
              << " coverage=" << format_double(m.coverage) << "\n";
  }
  if (!result.report.failed_reps.empty())
    std::cerr << result.report.failed_reps.size() << " replication(s) failed and were excluded\n";
  return 0;
}

FitReport build_fit_report(const RunConfig& cfg, const TaskTable& table) {
  const PipelineConfig pipeline = cfg.pipeline();
  PreparedTasks prepared = prepare_tasks(table.tasks, pipeline, cfg.seed, 0);
  const MethodResult res = run_method(prepared, MethodSpec{MethodSpec::Kind::adaptive, 0.0}, pipeline);

  FitReport report;
  report.config_hash = config_hash(cfg);
  report.seed = cfg.seed;
  report.version = kVersion;
  report.model = model_name(cfg.model);
  report.task_labels = table.labels;
  report.theta_hat = res.solution.theta_hat;
  report.cluster_of = res.cluster_of;
  report.clusters = res.inference;
  report.refit_estimates = res.refit_estimates;
  return report;
}

int run_fit(RunConfig cfg) {
  if (cfg.mode != RunMode::fit) throw Error(Errc::invalid_config, "config mode is not 'fit'");
  if (cfg.data.path.empty()) throw Error(Errc::invalid_config, "fit needs --data or data_source.path");
  ensure_dir(cfg.output_dir);
  const TaskTable table = read_task_csv(cfg.data.path, cfg.data.mapping, cfg.model);
  const FitReport report = build_fit_report(cfg, table);
  write_fit_report(cfg.output_dir + "/fit_report.json", report);
  write_inference_csv(cfg.output_dir + "/inference.csv", report);
  for (const auto& c : report.clusters) {
    std::cout << "cluster " << c.cluster_id << ": estimate=" << format_double(c.estimate[0])
              << " se=" << format_double(c.se[0]) << " members=" << c.members.size() << "\n";
  }
  return 0;
}

int run_weights(RunConfig cfg) {
  const PipelineConfig pipeline = cfg.pipeline();
  std::vector<TaskDataset> tasks;
  if (cfg.mode == RunMode::fit) {
    if (cfg.data.path.empty())
      throw Error(Errc::invalid_config, "weights on real data needs data_source.path");
    tasks = read_task_csv(cfg.data.path, cfg.data.mapping, cfg.model).tasks;
  } else {
    Rng truth_rng(cfg.seed, stream::salted(stream::kTruth, 0, 0));
    const SimTruth truth = assign_clusters(cfg.dgp, truth_rng);
    for (int j = 1; j <= cfg.dgp.m; ++j) {
      Rng rng(cfg.seed, stream::data(0, j));
      tasks.push_back(generate_task(cfg.dgp, truth, j, rng));
    }
  }
  PilotEstimates pilots;
  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    Rng rng(cfg.seed, stream::salted(stream::kPilot, 0, idx + 1));
    pilots.theta_init.push_back(fit_pilot(tasks[idx], cfg.model, cfg.learner, cfg.clip, rng));
  }
  const PenaltyMatrix pen = compute_weights(pilots, cfg.fusion);

  std::cout << "j,jp,weight,lambda,provenance\n";
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < pen.size(); ++j) {
    for (int k = j + 1; k < pen.size(); ++k) {
      const char* prov = pen.provenance(j, k) == PenaltyProvenance::floor ? "floor" : "adaptive";
      std::cout << (j + 1) << "," << (k + 1) << "," << format_double(pen.weight(j, k)) << ","
                << format_double(pen.lambda(j, k)) << "," << prov << "\n";
      rows.push_back({std::to_string(j + 1), std::to_string(k + 1),
                      format_double(pen.weight(j, k)), format_double(pen.lambda(j, k)), prov});
    }
  }
  if (!cfg.output_dir.empty()) {
    ensure_dir(cfg.output_dir);
    write_csv(cfg.output_dir + "/weights.csv", {"j", "jp", "weight", "lambda", "provenance"}, rows);
  }
  return 0;
}

int run_report(const std::string& records_path, const std::string& out_dir,
               const std::string& method_filter) {
  std::vector<RepRecord> records = read_records_csv(records_path);
  if (!method_filter.empty()) {
    std::vector<RepRecord> filtered;
    for (auto& r : records)
      if (r.method == method_filter) filtered.push_back(std::move(r));
    records = std::move(filtered);
  }
  if (records.empty()) throw Error(Errc::too_few_points, "no records match");
  ensure_dir(out_dir);
  const auto paths = emit_svg_diagnostics(records, out_dir);
  for (const auto& p : paths) std::cout << p << "\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"adaptive orthogonal multitask estimation"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", flags.config_path, "JSON configuration file");
    if (needs_config) opt->required();
    sub->add_option("--data", flags.data_path, "input CSV (fit mode)");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--seed", flags.seed, "RNG seed override");
    sub->add_option("--reps", flags.reps, "replication count override");
    sub->add_option("--model", flags.model, "model override: plm|ate|did");
    sub->add_option("--crossfit", flags.crossfit, "cross-fitting folds R (2 = single split)");
    sub->add_option("--level", flags.level, "confidence level");
    sub->add_flag("--refit", flags.refit, "report pooled per-cluster refits");
  };

  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo study");
  add_common(sim, true);
  auto* fit = app.add_subcommand("fit", "run the full pipeline on a CSV dataset");
  add_common(fit, true);
  auto* weights = app.add_subcommand("weights", "print the adaptive penalty matrix");
  add_common(weights, true);

  std::string records_path, report_out = "out", method_filter;
  auto* report = app.add_subcommand("report", "render QQ and histogram diagnostics");
  report->add_option("--records", records_path, "records.csv from a simulate run")->required();
  report->add_option("--out", report_out, "output directory");
  report->add_option("--method", method_filter, "only use records of this method");

  std::vector<std::string> argv_copy(args);
  try {
    std::vector<const char*> argv;
    argv.push_back("orthofuse");
    for (const auto& a : argv_copy) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (report->parsed()) return run_report(records_path, report_out, method_filter);
    RunConfig cfg = load_config(flags.config_path);
    if (fit->parsed() || (weights->parsed() && !flags.data_path.empty()))
      cfg.mode = RunMode::fit;
    apply_overrides(cfg, flags);
    if (sim->parsed()) return run_simulate(std::move(cfg));
    if (fit->parsed()) return run_fit(std::move(cfg));
    return run_weights(std::move(cfg));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

}  // namespace orthofuse
