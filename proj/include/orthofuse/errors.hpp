#ifndef ORTHOFUSE_ERRORS_HPP_
#define ORTHOFUSE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace orthofuse {

// Every recoverable failure carries one of these codes so callers (and the
// CLI exit-code mapping) can react without string matching.
enum class Errc {
  // numerical
  not_positive_definite,
  degenerate_design,
  singular_system,
  singular_hessian,
  unclipped_propensity,
  zero_se,
  // data / preconditions
  too_few_observations,
  empty_data,
  degenerate_target,
  dimension_mismatch,
  no_control_rows,
  no_treated_rows,
  no_treated_in_weight_fold,
  zero_control_mass,
  requires_truth,
  empty_cluster,
  single_element,
  missing_column,
  non_numeric_cell,
  too_small_task,
  too_few_points,
  invalid_spec,
  invalid_config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Numerical failures map to CLI exit code 3, everything else to 2.
inline bool is_numerical_error(Errc c) {
  switch (c) {
    case Errc::not_positive_definite:
    case Errc::degenerate_design:
    case Errc::singular_system:
    case Errc::singular_hessian:
    case Errc::unclipped_propensity:
    case Errc::zero_se:
      return true;
    default:
      return false;
  }
}

}  // namespace orthofuse

#endif  // ORTHOFUSE_ERRORS_HPP_
