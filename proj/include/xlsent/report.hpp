#pragma once

#include <string>
#include <vector>

namespace xlsent {

struct ReportRow {
  std::string regime;
  bool translation = false;
  std::string language;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::vector<double> fold_scores;
};

std::vector<ReportRow> read_eval_csv(const std::string& path);

// Rows = method x translation flag, columns = languages, cells "mean ± std".
std::string merged_table(const std::vector<ReportRow>& rows);

// language,method,mean,std — consumed by external plotting.
std::string plot_csv(const std::vector<ReportRow>& rows);

}  // namespace xlsent
