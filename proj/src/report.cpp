#include "orthofuse/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "orthofuse/config.hpp"
#include "orthofuse/csv.hpp"
#include "orthofuse/errors.hpp"
#include "orthofuse/stats.hpp"

namespace orthofuse {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) { return json(v); }

Vec vec_from_json(const json& j) { return j.get<Vec>(); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

json fit_report_to_json(const FitReport& report) {
  json tasks = json::array();
  for (std::size_t j = 0; j < report.task_labels.size(); ++j) {
    tasks.push_back(json{{"task", report.task_labels[j]},
                         {"theta_hat", vec_to_json(report.theta_hat[j])},
                         {"cluster", report.cluster_of[j]}});
  }
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json jc{{"cluster", c.cluster_id},
            {"members", c.members},
            {"N", c.n_pooled},
            {"estimate", vec_to_json(c.estimate)},
            {"se", vec_to_json(c.se)},
            {"ci_lo", vec_to_json(c.ci_lo)},
            {"ci_hi", vec_to_json(c.ci_hi)},
            {"level", c.level},
            {"psi_hat", matrix_to_json(c.psi_hat)},
            {"omega_hat", matrix_to_json(c.omega_hat)}};
    clusters.push_back(std::move(jc));
  }
  json j{{"config_hash", report.config_hash},
         {"seed", report.seed},
         {"version", report.version},
         {"model", report.model},
         {"tasks", tasks},
         {"clusters", clusters}};
  if (!report.refit_estimates.empty()) {
    json refit = json::array();
    for (const auto& v : report.refit_estimates) refit.push_back(vec_to_json(v));
    j["refit_estimates"] = refit;
  }
  return j;
}

FitReport fit_report_from_json(const json& j) {
  FitReport r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.version = j.at("version").get<std::string>();
  r.model = j.at("model").get<std::string>();
  for (const auto& t : j.at("tasks")) {
    r.task_labels.push_back(t.at("task").get<std::string>());
    r.theta_hat.push_back(vec_from_json(t.at("theta_hat")));
    r.cluster_of.push_back(t.at("cluster").get<int>());
  }
  for (const auto& c : j.at("clusters")) {
    ClusterInference ci;
    ci.cluster_id = c.at("cluster").get<int>();
    ci.members = c.at("members").get<std::vector<int>>();
    ci.n_pooled = c.at("N").get<long long>();
    ci.estimate = vec_from_json(c.at("estimate"));
    ci.se = vec_from_json(c.at("se"));
    ci.ci_lo = vec_from_json(c.at("ci_lo"));
    ci.ci_hi = vec_from_json(c.at("ci_hi"));
    ci.level = c.at("level").get<double>();
    ci.psi_hat = matrix_from_json(c.at("psi_hat"));
    ci.omega_hat = matrix_from_json(c.at("omega_hat"));
    r.clusters.push_back(std::move(ci));
  }
  if (j.contains("refit_estimates"))
    for (const auto& v : j.at("refit_estimates")) r.refit_estimates.push_back(vec_from_json(v));
  return r;
}

void write_fit_report(const std::string& path, const FitReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::empty_data, "cannot write '" + path + "'");
  out << fit_report_to_json(report).dump(2) << "\n";
}

FitReport read_fit_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::empty_data, "cannot open '" + path + "'");
  json j;
  in >> j;
  return fit_report_from_json(j);
}

void write_inference_csv(const std::string& path, const FitReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : report.clusters) {
    std::string members;
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      if (i) members += ";";
      members += report.task_labels[c.members[i]];
    }
    rows.push_back({std::to_string(c.cluster_id), members, format_double(c.estimate[0]),
                    format_double(c.se[0]), format_double(c.ci_lo[0]),
                    format_double(c.ci_hi[0])});
  }
  write_csv(path, {"cluster_id", "members", "estimate", "se", "ci_lo", "ci_hi"}, rows);
}

void write_records_csv(const std::string& path, const std::vector<RepRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({std::to_string(r.rep), r.method, std::to_string(r.task),
                    std::to_string(r.cluster_true), std::to_string(r.cluster_est),
                    format_double(r.theta_true), format_double(r.theta_hat),
                    format_double(r.se)});
  }
  write_csv(path,
            {"rep", "method", "task", "cluster_true", "cluster_est", "theta_true", "theta_hat",
             "se"},
            rows);
}

std::vector<RepRecord> read_records_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  for (const char* col : {"rep", "method", "task", "cluster_true", "cluster_est", "theta_true",
                          "theta_hat", "se"})
    if (table.column(col) < 0)
      throw Error(Errc::missing_column, std::string("records file lacks column '") + col + "'");
  std::vector<RepRecord> records;
  records.reserve(table.rows.size());
  auto num = [&](const std::vector<std::string>& row, const char* col) {
    const std::string& cell = row[table.column(col)];
    double v = 0;
    const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size())
      throw Error(Errc::non_numeric_cell, "bad value '" + cell + "' in column " + col);
    return v;
  };
  for (const auto& row : table.rows) {
    RepRecord r;
    r.rep = static_cast<int>(num(row, "rep"));
    r.method = row[table.column("method")];
    r.task = static_cast<int>(num(row, "task"));
    r.cluster_true = static_cast<int>(num(row, "cluster_true"));
    r.cluster_est = static_cast<int>(num(row, "cluster_est"));
    r.theta_true = num(row, "theta_true");
    r.theta_hat = num(row, "theta_hat");
    r.se = num(row, "se");
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_json(const std::string& path, const MetricsReport& report,
                        const std::string& cfg_hash, std::uint64_t seed) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back(json{{"method", m.method},
                           {"rmse_mean", m.rmse_mean},
                           {"rmse_median", m.rmse_median},
                           {"wrmse_mean", m.wrmse_mean},
                           {"wrmse_median", m.wrmse_median},
                           {"ari_mean", m.ari_mean},
                           {"ari_median", m.ari_median},
                           {"coverage", m.coverage}});
  }
  json j{{"config_hash", cfg_hash},
         {"seed", seed},
         {"version", kVersion},
         {"completed_reps", report.completed_reps},
         {"failed_reps", report.failed_reps},
         {"methods", methods}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::empty_data, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

QqData make_qq(Vec standardized, double band_level) {
  if (standardized.size() < 10)
    throw Error(Errc::too_few_points, "qq needs at least 10 standardized values");
  std::sort(standardized.begin(), standardized.end());
  const int n = static_cast<int>(standardized.size());
  const double alpha = (1.0 - band_level) / 2.0;
  QqData qq;
  qq.empirical = standardized;
  qq.theoretical.resize(n);
  qq.band_lo.resize(n);
  qq.band_hi.resize(n);
  for (int i = 1; i <= n; ++i) {
    qq.theoretical[i - 1] = norm_ppf((i - 0.5) / n);
    qq.band_lo[i - 1] = norm_ppf(beta_inc_inv(i, n - i + 1, alpha));
    qq.band_hi[i - 1] = norm_ppf(beta_inc_inv(i, n - i + 1, 1.0 - alpha));
  }
  return qq;
}

HistData make_hist(const Vec& values, int bins) {
  if (values.empty()) throw Error(Errc::too_few_points, "histogram needs data");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  HistData h;
  if (lo == hi) {
    // constant data occupies a single bin
    h.edges = {lo - 0.5, lo + 0.5};
    h.counts = {static_cast<long long>(values.size())};
    return h;
  }
  if (bins <= 0)
    bins = std::clamp(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(values.size())))),
                      1, 60);
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  h.counts.assign(bins, 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

void write_qq_csv(const std::string& path, const QqData& qq) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < qq.theoretical.size(); ++i)
    rows.push_back({format_double(qq.theoretical[i]), format_double(qq.empirical[i]),
                    format_double(qq.band_lo[i]), format_double(qq.band_hi[i])});
  write_csv(path, {"theoretical", "empirical", "band_lo", "band_hi"}, rows);
}

void write_hist_csv(const std::string& path, const HistData& hist) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t b = 0; b < hist.counts.size(); ++b)
    rows.push_back({format_double(hist.edges[b]), format_double(hist.edges[b + 1]),
                    std::to_string(hist.counts[b])});
  write_csv(path, {"bin_lo", "bin_hi", "count"}, rows);
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct SvgScale {
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return 60.0 + (x - xmin) / (xmax - xmin) * 480.0; }
  double py(double y) const { return 540.0 - (y - ymin) / (ymax - ymin) * 480.0; }
};

void svg_header(std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
         "viewBox=\"0 0 600 600\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n";
}

void svg_axes(std::ostream& out) {
  out << "<line x1=\"60\" y1=\"540\" x2=\"540\" y2=\"540\" stroke=\"black\"/>\n"
      << "<line x1=\"60\" y1=\"60\" x2=\"60\" y2=\"540\" stroke=\"black\"/>\n";
}

}  // namespace

void write_qq_svg(const std::string& path, const QqData& qq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::empty_data, "cannot write '" + path + "'");
  double lo = qq.band_lo.front(), hi = qq.band_hi.back();
  for (double v : qq.empirical) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  lo = std::min(lo, qq.theoretical.front());
  hi = std::max(hi, qq.theoretical.back());
  const double pad = 0.05 * (hi - lo + 1e-12);
  SvgScale sc{lo - pad, hi + pad, lo - pad, hi + pad};

  svg_header(out);
  // confidence band polygon
  out << "<polygon fill=\"#c8d8f0\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < qq.theoretical.size(); ++i)
    out << svg_num(sc.px(qq.theoretical[i])) << "," << svg_num(sc.py(qq.band_lo[i])) << " ";
  for (std::size_t i = qq.theoretical.size(); i-- > 0;)
    out << svg_num(sc.px(qq.theoretical[i])) << "," << svg_num(sc.py(qq.band_hi[i])) << " ";
  out << "\"/>\n";
  svg_axes(out);
  out << "<line x1=\"" << svg_num(sc.px(sc.xmin)) << "\" y1=\"" << svg_num(sc.py(sc.xmin))
      << "\" x2=\"" << svg_num(sc.px(sc.xmax)) << "\" y2=\"" << svg_num(sc.py(sc.xmax))
      << "\" stroke=\"#b04040\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < qq.theoretical.size(); ++i)
    out << "<circle cx=\"" << svg_num(sc.px(qq.theoretical[i])) << "\" cy=\""
        << svg_num(sc.py(qq.empirical[i])) << "\" r=\"2\" fill=\"#204080\"/>\n";
  out << "<text x=\"300\" y=\"575\" text-anchor=\"middle\" font-size=\"14\">theoretical "
         "quantile</text>\n"
      << "<text x=\"20\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 20 300)\">empirical quantile</text>\n"
      << "</svg>\n";
}

void write_hist_svg(const std::string& path, const HistData& hist) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::empty_data, "cannot write '" + path + "'");
  long long cmax = 1;
  for (long long c : hist.counts) cmax = std::max(cmax, c);
  SvgScale sc{hist.edges.front(), hist.edges.back(), 0.0, static_cast<double>(cmax) * 1.05};

  svg_header(out);
  svg_axes(out);
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double x0 = sc.px(hist.edges[b]);
    const double x1 = sc.px(hist.edges[b + 1]);
    const double y = sc.py(static_cast<double>(hist.counts[b]));
    out << "<rect x=\"" << svg_num(x0) << "\" y=\"" << svg_num(y) << "\" width=\""
        << svg_num(std::max(x1 - x0 - 0.5, 0.5)) << "\" height=\"" << svg_num(540.0 - y)
        << "\" fill=\"#4878a8\"/>\n";
  }
  out << "<text x=\"300\" y=\"575\" text-anchor=\"middle\" font-size=\"14\">estimate</text>\n"
      << "<text x=\"20\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 20 300)\">count</text>\n"
      << "</svg>\n";
}

std::vector<std::string> emit_svg_diagnostics(const std::vector<RepRecord>& records,
                                              const std::string& out_dir) {
  Vec z, theta;
  for (const auto& r : records) {
    theta.push_back(r.theta_hat);
    if (r.se > 0.0) z.push_back((r.theta_hat - r.theta_true) / r.se);
  }
  if (z.size() < 10)
    throw Error(Errc::too_few_points, "need at least 10 standardized values for the QQ data");

  const QqData qq = make_qq(std::move(z));
  const HistData hist = make_hist(theta);
  std::vector<std::string> paths{out_dir + "/qq.csv", out_dir + "/hist.csv",
                                 out_dir + "/qq.svg", out_dir + "/hist.svg"};
  write_qq_csv(paths[0], qq);
  write_hist_csv(paths[1], hist);
  write_qq_svg(paths[2], qq);
  write_hist_svg(paths[3], hist);
  return paths;
}

}  // namespace orthofuse
