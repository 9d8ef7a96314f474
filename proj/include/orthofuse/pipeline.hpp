#ifndef ORTHOFUSE_PIPELINE_HPP_
#define ORTHOFUSE_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "orthofuse/dataset.hpp"
#include "orthofuse/inference.hpp"
#include "orthofuse/learners.hpp"
#include "orthofuse/loss.hpp"
#include "orthofuse/solver.hpp"
#include "orthofuse/weights.hpp"

namespace orthofuse {

struct PipelineConfig {
  ModelKind model = ModelKind::plm;
  NuisanceLearnerSpec learner;
  FusionHyperparams fusion;
  SolverConfig solver;
  int crossfit_R = 2;  // 2 = single split (nuisances on fold 0, loss on fold 1)
  double level = 0.95;
  bool refit = false;
  std::pair<double, double> clip = {0.05, 0.95};
};

struct MethodSpec {
  enum class Kind { adaptive, personalized, uniform, fixed };
  Kind kind = Kind::adaptive;
  double lambda = 0.0;  // uniform / fixed only

  std::string label() const;
  static MethodSpec parse(const std::string& label);
  bool operator==(const MethodSpec&) const = default;
};

//! Stage-1 pilots plus the stage-2 orthogonal losses, shared by every
//! method that runs on the same draw.
struct PreparedTasks {
  std::vector<TaskDataset> tasks;  // with folds assigned
  std::vector<TaskLoss> losses;
  PilotEstimates pilots;
};

//! Deterministic per-purpose stream ids; the data stream for task j of
//! replication r is (r << 20) | j, auxiliary streams salt the high bits.
namespace stream {
inline constexpr std::uint64_t data(std::uint64_t rep, std::uint64_t task) {
  return (rep << 20) | task;
}
inline constexpr std::uint64_t salted(std::uint64_t purpose, std::uint64_t rep,
                                      std::uint64_t task) {
  return (purpose << 40) | (rep << 20) | task;
}
inline constexpr std::uint64_t kTruth = 1, kSplit = 2, kLearner = 3, kPilot = 4, kRetry = 5;
}  // namespace stream

//! Pilot fits, sample splitting, nuisance estimation on the training folds
//! and orthogonal loss construction on the held-out folds.
PreparedTasks prepare_tasks(std::vector<TaskDataset> tasks, const PipelineConfig& cfg,
                            std::uint64_t seed, std::uint64_t rep);

struct MethodResult {
  PenaltyMatrix penalty;
  FusionSolution solution;
  std::vector<ClusterInference> inference;
  std::vector<int> cluster_of;        // task -> index into solution.partition
  std::vector<Vec> refit_estimates;   // empty unless cfg.refit
};

//! Penalty construction, fused solve and pooled inference for one method.
MethodResult run_method(const PreparedTasks& prepared, const MethodSpec& method,
                        const PipelineConfig& cfg);

}  // namespace orthofuse

#endif  // ORTHOFUSE_PIPELINE_HPP_
