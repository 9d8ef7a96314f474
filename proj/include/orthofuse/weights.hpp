#ifndef ORTHOFUSE_WEIGHTS_HPP_
#define ORTHOFUSE_WEIGHTS_HPP_

#include <vector>

#include "orthofuse/dataset.hpp"
#include "orthofuse/learners.hpp"
#include "orthofuse/linalg.hpp"

namespace orthofuse {

struct PilotEstimates {
  std::vector<Vec> theta_init;
  int count() const { return static_cast<int>(theta_init.size()); }
};

struct FusionHyperparams {
  double c_w = 0.1;
  double gamma = 2.0;
  double tau = 10.0;
  double eps_n = 1e-12;
  double w_cap = 1e12;  // penalty for coincident pilots (distance zero)

  bool operator==(const FusionHyperparams&) const = default;
};

enum class PenaltyProvenance { adaptive, floor };

//! Symmetric nonnegative pairwise penalties with zero diagonal. Each
//! off-diagonal entry remembers whether it came from the adaptive weight or
//! from the floor eps_n.
class PenaltyMatrix {
 public:
  PenaltyMatrix() = default;
  explicit PenaltyMatrix(int m)
      : m_(m), lambda_(static_cast<std::size_t>(m) * m, 0.0),
        weight_(static_cast<std::size_t>(m) * m, 0.0),
        prov_(static_cast<std::size_t>(m) * m, PenaltyProvenance::adaptive) {}

  int size() const { return m_; }
  double lambda(int j, int k) const { return lambda_[idx(j, k)]; }
  double weight(int j, int k) const { return weight_[idx(j, k)]; }
  PenaltyProvenance provenance(int j, int k) const { return prov_[idx(j, k)]; }

  void set(int j, int k, double lambda, double weight, PenaltyProvenance p);

 private:
  std::size_t idx(int j, int k) const { return static_cast<std::size_t>(j) * m_ + k; }
  int m_ = 0;
  std::vector<double> lambda_;
  std::vector<double> weight_;
  std::vector<PenaltyProvenance> prov_;
};

//! Stage-1 pilot: nuisances fit on every row, the task's orthogonal loss
//! built on every row, and its unpenalized minimizer returned.
Vec fit_pilot(const TaskDataset& data, ModelKind model, const NuisanceLearnerSpec& learner,
              std::pair<double, double> clip, Rng& rng);

//! Adaptive pairwise penalties from pilot distances:
//! w = min(c_w * dist^{-gamma}, w_cap); lambda = eps_n when w <= tau, else w.
PenaltyMatrix compute_weights(const PilotEstimates& pilots, const FusionHyperparams& hp);

//! Constant off-diagonal penalty (personalized when lambda == 0).
PenaltyMatrix uniform_penalty(int m, double lambda);

}  // namespace orthofuse

#endif  // ORTHOFUSE_WEIGHTS_HPP_
