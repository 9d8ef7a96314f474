#ifndef ORTHOFUSE_NUISANCE_HPP_
#define ORTHOFUSE_NUISANCE_HPP_

#include <map>
#include <string>
#include <vector>

#include "orthofuse/dataset.hpp"
#include "orthofuse/learners.hpp"

namespace orthofuse {

using NuisanceSet = std::map<std::string, NuisanceFit>;

//! Fits the model-specific nuisance set on the given training rows:
//!   plm: {"h": E[T|X], "m": E[Y|X]}
//!   ate: {"pi": propensity, "m1": E[Y|X,D=1], "m0": E[Y|X,D=0]}
//!   did: {"pi": propensity, "m": E[dY|X,D=0]}
//! Conditional regressions use only the matching treatment arm inside the
//! training rows and fail with NoTreatedRows / NoControlRows when empty.
NuisanceSet fit_task_nuisances(const TaskDataset& data, ModelKind model,
                               const NuisanceLearnerSpec& spec, const std::vector<int>& train_rows,
                               std::pair<double, double> clip, Rng& rng);

//! Full-length (n rows) prediction vectors for every nuisance in the set.
std::map<std::string, Vec> predict_all(const NuisanceSet& fits, const Matrix& x);

}  // namespace orthofuse

#endif  // ORTHOFUSE_NUISANCE_HPP_
