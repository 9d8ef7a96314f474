#ifndef ORTHOFUSE_DATASET_HPP_
#define ORTHOFUSE_DATASET_HPP_

#include <string>
#include <vector>

#include "orthofuse/linalg.hpp"
#include "orthofuse/rng.hpp"

namespace orthofuse {

enum class ModelKind { plm, ate, did };

const char* model_name(ModelKind m);
ModelKind model_from_name(const std::string& s);

//! Fold selector value meaning "all rows".
inline constexpr int kFullData = -1;

//! One task's observations plus the fold partition used for sample
//! splitting. For DID the outcome holds the post period and outcome_pre the
//! pre period; both are empty-compatible with PLM/ATE where outcome_pre is
//! unused.
struct TaskDataset {
  int task_id = 0;
  Vec outcome;       // Y (post-period Y1 for DID)
  Vec outcome_pre;   // Y0, DID only
  Vec treatment;     // T continuous (PLM) or D in {0,1} (ATE/DID)
  Matrix covariates; // n x p
  std::vector<std::vector<int>> folds;

  int n() const { return static_cast<int>(outcome.size()); }
  int p() const { return covariates.cols(); }
  int n_folds() const { return static_cast<int>(folds.size()); }

  //! Checks the structural invariants (column lengths, fold partition,
  //! binary treatment for ATE/DID). Throws Error on violation.
  void validate(ModelKind model) const;
};

std::vector<int> fold_rows(const TaskDataset& data, int fold);       // fold id or kFullData
std::vector<int> complement_rows(const TaskDataset& data, int fold);
std::vector<int> all_rows(const TaskDataset& data);

//! Assigns a uniformly random partition of [n] into R folds whose sizes
//! differ by at most one (random permutation, then contiguous chunks).
TaskDataset split_dataset(TaskDataset data, int folds, Rng& rng);

}  // namespace orthofuse

#endif  // ORTHOFUSE_DATASET_HPP_
