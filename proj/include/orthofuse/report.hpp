#ifndef ORTHOFUSE_REPORT_HPP_
#define ORTHOFUSE_REPORT_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "orthofuse/inference.hpp"
#include "orthofuse/simulate.hpp"

namespace orthofuse {

//! Result of a full pipeline run over real or simulated data, serialized as
//! JSON with a byte-identical write -> read -> write round trip.
struct FitReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string model;
  std::vector<std::string> task_labels;
  std::vector<Vec> theta_hat;
  std::vector<int> cluster_of;
  std::vector<ClusterInference> clusters;
  std::vector<Vec> refit_estimates;  // empty unless refit ran
};

nlohmann::json fit_report_to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& j);
void write_fit_report(const std::string& path, const FitReport& report);
FitReport read_fit_report(const std::string& path);

//! cluster_id, members, estimate, se, ci_lo, ci_hi table.
void write_inference_csv(const std::string& path, const FitReport& report);

void write_records_csv(const std::string& path, const std::vector<RepRecord>& records);
std::vector<RepRecord> read_records_csv(const std::string& path);
void write_summary_json(const std::string& path, const MetricsReport& report,
                        const std::string& cfg_hash, std::uint64_t seed);

struct QqData {
  Vec theoretical, empirical, band_lo, band_hi;
};

//! Normal QQ data with pointwise order-statistic confidence bands: the i-th
//! uniform order statistic is Beta(i, n-i+1), mapped through the normal
//! quantile at the band level (99% by default).
QqData make_qq(Vec standardized, double band_level = 0.99);

struct HistData {
  Vec edges;                      // bins+1 edges
  std::vector<long long> counts;  // bins entries
};

HistData make_hist(const Vec& values, int bins = 0);  // bins<=0 picks sqrt rule

void write_qq_csv(const std::string& path, const QqData& qq);
void write_hist_csv(const std::string& path, const HistData& hist);
void write_qq_svg(const std::string& path, const QqData& qq);
void write_hist_svg(const std::string& path, const HistData& hist);

//! Standardizes records (needs >= 10 usable values), writes qq.csv,
//! hist.csv and self-contained SVG renderings into out_dir; returns the
//! written paths.
std::vector<std::string> emit_svg_diagnostics(const std::vector<RepRecord>& records,
                                              const std::string& out_dir);

}  // namespace orthofuse

#endif  // ORTHOFUSE_REPORT_HPP_
