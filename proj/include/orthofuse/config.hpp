#ifndef ORTHOFUSE_CONFIG_HPP_
#define ORTHOFUSE_CONFIG_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "orthofuse/csv.hpp"
#include "orthofuse/pipeline.hpp"
#include "orthofuse/simulate.hpp"

namespace orthofuse {

inline constexpr const char* kVersion = "0.1.0";

enum class RunMode { simulate, fit, infer_report };

const char* run_mode_name(RunMode m);
RunMode run_mode_from_name(const std::string& s);

struct DataSourceConfig {
  std::string path;
  ColumnMapping mapping;
  bool operator==(const DataSourceConfig&) const = default;
};

//! Everything one run needs, loadable from a single JSON document; the
//! schema is documented in docs/config.md.
struct RunConfig {
  RunMode mode = RunMode::simulate;
  ModelKind model = ModelKind::plm;
  std::uint64_t seed = 1;
  int reps = 100;
  double level = 0.95;
  int crossfit_R = 2;
  bool refit = false;
  std::string output_dir = "out";
  std::pair<double, double> clip = {0.05, 0.95};

  DgpConfig dgp;                   // simulate mode
  std::vector<MethodSpec> methods; // simulate mode
  DataSourceConfig data;           // fit mode

  NuisanceLearnerSpec learner;
  FusionHyperparams fusion;
  SolverConfig solver;

  PipelineConfig pipeline() const;
  bool operator==(const RunConfig&) const = default;
};

nlohmann::json serialize_config(const RunConfig& cfg);
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

//! FNV-1a hash of the canonical serialized form, hex encoded.
std::string config_hash(const RunConfig& cfg);

}  // namespace orthofuse

#endif  // ORTHOFUSE_CONFIG_HPP_
