#include "xlsent/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "xlsent/errors.hpp"
#include "xlsent/evaluation.hpp"

namespace xlsent {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

std::vector<ReportRow> read_eval_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open eval CSV \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) throw DataError("eval CSV \"" + path + "\" is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "regime" || header[2] != "language") {
    throw DataError("eval CSV \"" + path + "\": unexpected header");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < 5) {
      throw DataError("eval CSV \"" + path + "\" line " + std::to_string(line_no) + ": too few fields");
    }
    ReportRow row;
    row.regime = fields[0];
    row.translation = fields[1] == "yes";
    row.language = fields[2];
    try {
      row.mean_f1 = std::stod(fields[3]);
      row.std_f1 = std::stod(fields[4]);
      for (std::size_t i = 5; i < fields.size(); ++i) {
        if (!fields[i].empty()) row.fold_scores.push_back(std::stod(fields[i]));
      }
    } catch (const std::exception&) {
      throw DataError("eval CSV \"" + path + "\" line " + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string method_key(const ReportRow& row) {
  return row.regime + (row.translation ? "+translation" : "");
}

}  // namespace

std::string merged_table(const std::vector<ReportRow>& rows) {
  std::vector<std::string> languages;
  std::vector<std::pair<std::string, bool>> methods;
  for (const ReportRow& row : rows) {
    if (std::find(languages.begin(), languages.end(), row.language) == languages.end()) {
      languages.push_back(row.language);
    }
    const std::pair<std::string, bool> method{row.regime, row.translation};
    if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
  }
  std::stable_sort(languages.begin(), languages.end(), [](const std::string& a, const std::string& b) {
    const int ra = language_report_rank(a), rb = language_report_rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });

  std::map<std::string, const ReportRow*> cell;
  for (const ReportRow& row : rows) cell[method_key(row) + '|' + row.language] = &row;

  std::ostringstream out;
  out << "method,translation";
  for (const std::string& lang : languages) out << ',' << lang;
  out << '\n';
  for (const auto& [regime, translation] : methods) {
    out << regime << ',' << (translation ? "Yes" : "No");
    for (const std::string& lang : languages) {
      ReportRow probe;
      probe.regime = regime;
      probe.translation = translation;
      auto it = cell.find(method_key(probe) + '|' + lang);
      out << ',';
      if (it != cell.end()) out << fmt2(it->second->mean_f1) << " ± " << fmt2(it->second->std_f1);
    }
    out << '\n';
  }
  return out.str();
}

std::string plot_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "language,method,mean,std\n";
  for (const ReportRow& row : rows) {
    out << row.language << ',' << method_key(row) << ',' << fmt2(row.mean_f1) << ',' << fmt2(row.std_f1)
        << '\n';
  }
  return out.str();
}

}  // namespace xlsent
