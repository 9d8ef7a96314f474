#include "orthofuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "orthofuse/errors.hpp"

namespace orthofuse {

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::plm: return "plm";
    case ModelKind::ate: return "ate";
    case ModelKind::did: return "did";
  }
  return "?";
}

ModelKind model_from_name(const std::string& s) {
  if (s == "plm") return ModelKind::plm;
  if (s == "ate") return ModelKind::ate;
  if (s == "did") return ModelKind::did;
  throw Error(Errc::invalid_config, "unknown model '" + s + "'");
}

void TaskDataset::validate(ModelKind model) const {
  const int nn = n();
  if (static_cast<int>(treatment.size()) != nn || covariates.rows() != nn)
    throw Error(Errc::dimension_mismatch, "task columns have unequal lengths");
  if (model == ModelKind::did && static_cast<int>(outcome_pre.size()) != nn)
    throw Error(Errc::dimension_mismatch, "DID task needs a pre-period outcome of length n");
  if (p() < 1) throw Error(Errc::dimension_mismatch, "task needs at least one covariate");
  if (model == ModelKind::ate || model == ModelKind::did) {
    for (double d : treatment)
      if (d != 0.0 && d != 1.0)
        throw Error(Errc::invalid_spec, "binary treatment required for ate/did");
  }
  if (!folds.empty()) {
    if (nn < 2 * n_folds())
      throw Error(Errc::too_few_observations, "need n >= 2 * folds");
    std::vector<int> seen(nn, 0);
    std::size_t lo = outcome.size(), hi = 0;
    for (const auto& f : folds) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      for (int r : f) {
        if (r < 0 || r >= nn || seen[r]++)
          throw Error(Errc::invalid_spec, "folds must partition the row set");
      }
    }
    if (std::accumulate(seen.begin(), seen.end(), 0) != nn)
      throw Error(Errc::invalid_spec, "folds must cover all rows");
    if (hi - lo > 1) throw Error(Errc::invalid_spec, "fold sizes differ by more than one");
  }
}

std::vector<int> all_rows(const TaskDataset& data) {
  std::vector<int> r(data.n());
  std::iota(r.begin(), r.end(), 0);
  return r;
}

std::vector<int> fold_rows(const TaskDataset& data, int fold) {
  if (fold == kFullData) return all_rows(data);
  if (fold < 0 || fold >= data.n_folds())
    throw Error(Errc::invalid_spec, "fold id out of range");
  return data.folds[fold];
}

std::vector<int> complement_rows(const TaskDataset& data, int fold) {
  if (fold == kFullData) return {};
  std::vector<int> out;
  out.reserve(data.n());
  for (int f = 0; f < data.n_folds(); ++f) {
    if (f == fold) continue;
    out.insert(out.end(), data.folds[f].begin(), data.folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TaskDataset split_dataset(TaskDataset data, int folds, Rng& rng) {
  if (folds < 2) throw Error(Errc::invalid_spec, "need at least 2 folds");
  const int n = data.n();
  if (n < 2 * folds)
    throw Error(Errc::too_few_observations,
                "task " + std::to_string(data.task_id) + ": n=" + std::to_string(n) +
                    " too small for " + std::to_string(folds) + " folds");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  data.folds.assign(folds, {});
  const int base = n / folds, extra = n % folds;
  int pos = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    data.folds[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(data.folds[f].begin(), data.folds[f].end());
    pos += size;
  }
  return data;
}

}  // namespace orthofuse
