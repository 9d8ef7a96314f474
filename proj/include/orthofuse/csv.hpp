#ifndef ORTHOFUSE_CSV_HPP_
#define ORTHOFUSE_CSV_HPP_

#include <string>
#include <vector>

#include "orthofuse/dataset.hpp"

namespace orthofuse {

//! %.17g formatting: deterministic and exact on round trip.
std::string format_double(double v);

//! RFC-4180 subset: quote fields containing comma, quote or newline.
std::string csv_escape(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct ColumnMapping {
  std::string task_col;
  std::vector<std::string> outcome_cols;  // one column; DID takes {Y0, Y1}
  std::string treatment_col;
  std::vector<std::string> covariate_cols;
  int min_task_size = 20;

  bool operator==(const ColumnMapping&) const = default;
};

struct TaskTable {
  std::vector<TaskDataset> tasks;
  std::vector<std::string> labels;  // task label per entry, first-appearance order
};

//! Groups rows by the task column into TaskDatasets. Strict numeric parsing
//! (NonNumericCell reports the offending row and column); tasks smaller than
//! min_task_size fail with a listing.
TaskTable read_task_csv(const std::string& path, const ColumnMapping& mapping, ModelKind model);

//! Inverse of read_task_csv for simulated data (columns: task, y [, y0], t, x1..xp).
void write_tasks_csv(const std::string& path, const std::vector<TaskDataset>& tasks,
                     const std::vector<std::string>& labels, ModelKind model);

ColumnMapping default_sim_mapping(int p, ModelKind model, int min_task_size = 20);

}  // namespace orthofuse

#endif  // ORTHOFUSE_CSV_HPP_
