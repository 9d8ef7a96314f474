#include "orthofuse/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "orthofuse/errors.hpp"

namespace orthofuse {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_cell(const std::string& cell, int data_row, const std::string& col) {
  double v = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(Errc::non_numeric_cell, "non-numeric cell '" + cell + "' at row " +
                                            std::to_string(data_row) + ", column '" + col + "'");
  return v;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::empty_data, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::empty_data, "'" + path + "' is empty");
  table.header = parse_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = parse_line(line);
    if (fields.size() != table.header.size())
      throw Error(Errc::non_numeric_cell,
                  "row " + std::to_string(table.rows.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::empty_data, "cannot write '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csv_escape(header[i]);
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
}

TaskTable read_task_csv(const std::string& path, const ColumnMapping& mapping, ModelKind model) {
  const CsvTable table = read_csv(path);

  if ((model == ModelKind::did && mapping.outcome_cols.size() != 2) ||
      (model != ModelKind::did && mapping.outcome_cols.size() != 1))
    throw Error(Errc::invalid_config, model == ModelKind::did
                                          ? "did needs two outcome columns (Y0, Y1)"
                                          : "one outcome column expected");

  std::vector<std::string> needed{mapping.task_col, mapping.treatment_col};
  needed.insert(needed.end(), mapping.outcome_cols.begin(), mapping.outcome_cols.end());
  needed.insert(needed.end(), mapping.covariate_cols.begin(), mapping.covariate_cols.end());
  std::vector<int> cols;
  for (const auto& name : needed) {
    const int c = table.column(name);
    if (c < 0) throw Error(Errc::missing_column, "column '" + name + "' not found in " + path);
    cols.push_back(c);
  }
  if (mapping.covariate_cols.empty())
    throw Error(Errc::invalid_config, "at least one covariate column required");

  const int task_c = table.column(mapping.task_col);
  std::vector<std::string> labels;
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& key = table.rows[r][task_c];
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) labels.push_back(key);
    it->second.push_back(static_cast<int>(r));
  }

  std::vector<std::string> too_small;
  for (const auto& label : labels) {
    if (static_cast<int>(groups[label].size()) < mapping.min_task_size)
      too_small.push_back(label + " (n=" + std::to_string(groups[label].size()) + ")");
  }
  if (!too_small.empty()) {
    std::string msg = "tasks below the minimum size of " + std::to_string(mapping.min_task_size) + ":";
    for (const auto& t : too_small) msg += " " + t;
    throw Error(Errc::too_small_task, msg);
  }

  TaskTable out;
  out.labels = labels;
  const int p = static_cast<int>(mapping.covariate_cols.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto& rows = groups[labels[t]];
    TaskDataset task;
    task.task_id = static_cast<int>(t) + 1;
    const int n = static_cast<int>(rows.size());
    task.outcome.resize(n);
    if (model == ModelKind::did) task.outcome_pre.resize(n);
    task.treatment.resize(n);
    task.covariates = Matrix(n, p);
    for (int i = 0; i < n; ++i) {
      const auto& row = table.rows[rows[i]];
      const int data_row = rows[i] + 1;
      if (model == ModelKind::did) {
        task.outcome_pre[i] =
            parse_cell(row[table.column(mapping.outcome_cols[0])], data_row, mapping.outcome_cols[0]);
        task.outcome[i] =
            parse_cell(row[table.column(mapping.outcome_cols[1])], data_row, mapping.outcome_cols[1]);
      } else {
        task.outcome[i] =
            parse_cell(row[table.column(mapping.outcome_cols[0])], data_row, mapping.outcome_cols[0]);
      }
      task.treatment[i] =
          parse_cell(row[table.column(mapping.treatment_col)], data_row, mapping.treatment_col);
      for (int c = 0; c < p; ++c)
        task.covariates(i, c) =
            parse_cell(row[table.column(mapping.covariate_cols[c])], data_row,
                       mapping.covariate_cols[c]);
    }
    task.validate(model);
    out.tasks.push_back(std::move(task));
  }
  return out;
}

void write_tasks_csv(const std::string& path, const std::vector<TaskDataset>& tasks,
                     const std::vector<std::string>& labels, ModelKind model) {
  if (tasks.empty()) throw Error(Errc::empty_data, "no tasks to write");
  const int p = tasks[0].p();
  for (const auto& t : tasks)
    if (t.p() != p)
      throw Error(Errc::dimension_mismatch, "csv export needs a common covariate dimension");

  std::vector<std::string> header{"task"};
  if (model == ModelKind::did) {
    header.push_back("y0");
    header.push_back("y1");
  } else {
    header.push_back("y");
  }
  header.push_back("t");
  for (int c = 0; c < p; ++c) header.push_back("x" + std::to_string(c + 1));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskDataset& task = tasks[t];
    const std::string label = t < labels.size() ? labels[t] : std::to_string(task.task_id);
    for (int i = 0; i < task.n(); ++i) {
      std::vector<std::string> row{label};
      if (model == ModelKind::did) row.push_back(format_double(task.outcome_pre[i]));
      row.push_back(format_double(task.outcome[i]));
      row.push_back(format_double(task.treatment[i]));
      for (int c = 0; c < p; ++c) row.push_back(format_double(task.covariates(i, c)));
      rows.push_back(std::move(row));
    }
  }
  write_csv(path, header, rows);
}

ColumnMapping default_sim_mapping(int p, ModelKind model, int min_task_size) {
  ColumnMapping m;
  m.task_col = "task";
  if (model == ModelKind::did)
    m.outcome_cols = {"y0", "y1"};
  else
    m.outcome_cols = {"y"};
  m.treatment_col = "t";
  for (int c = 0; c < p; ++c) m.covariate_cols.push_back("x" + std::to_string(c + 1));
  m.min_task_size = min_task_size;
  return m;
}

}  // namespace orthofuse
