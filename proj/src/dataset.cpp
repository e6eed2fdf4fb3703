#include "causalkit/dataset.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "causalkit/errors.hpp"

namespace causalkit {
namespace {

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_cell(const std::string& cell, int line) {
  double v = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    fail(ErrorCode::kParse,
         "line " + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void check_column_names(const std::vector<std::string>& names) {
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) fail(ErrorCode::kArgument, "empty column name");
    if (!seen.insert(name).second) {
      fail(ErrorCode::kArgument, "duplicate column name: " + name);
    }
  }
}

}  // namespace

Dataset::Dataset(std::vector<std::string> columns,
                 std::vector<std::vector<double>> data)
    : columns_(std::move(columns)), data_(std::move(data)) {
  if (columns_.size() != data_.size()) {
    fail(ErrorCode::kArgument, "column name count does not match data");
  }
  check_column_names(columns_);
  n_rows_ = data_.empty() ? 0 : static_cast<int>(data_[0].size());
  for (const auto& col : data_) {
    if (static_cast<int>(col.size()) != n_rows_) {
      fail(ErrorCode::kArgument, "columns have unequal lengths");
    }
  }
}

Dataset Dataset::from_csv_text(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.empty()) fail(ErrorCode::kParse, "line 1: missing header");

  const std::vector<std::string> names = split_fields(lines[0]);
  check_column_names(names);
  std::vector<std::vector<double>> data(names.size());
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != names.size()) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(names.size()) +
                                  " fields, got " +
                                  std::to_string(fields.size()));
    }
    for (size_t c = 0; c < fields.size(); ++c) {
      data[c].push_back(parse_cell(fields[c], line_no));
    }
  }
  return Dataset(names, std::move(data));
}

Dataset Dataset::read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kParse, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_text(buf.str());
}

std::string Dataset::to_csv_text() const {
  std::string out;
  for (int c = 0; c < n_cols(); ++c) {
    if (c > 0) out.push_back(',');
    out += columns_[c];
  }
  out.push_back('\n');
  for (int r = 0; r < n_rows_; ++r) {
    for (int c = 0; c < n_cols(); ++c) {
      if (c > 0) out.push_back(',');
      out += format_double(data_[c][r]);
    }
    out.push_back('\n');
  }
  return out;
}

void Dataset::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kArgument, "cannot write file: " + path);
  out << to_csv_text();
  if (!out) fail(ErrorCode::kArgument, "write failed: " + path);
}

bool Dataset::has_column(const std::string& name) const {
  for (const auto& col : columns_) {
    if (col == name) return true;
  }
  return false;
}

int Dataset::column_index(const std::string& name) const {
  for (int i = 0; i < n_cols(); ++i) {
    if (columns_[i] == name) return i;
  }
  fail(ErrorCode::kName, "no such column: " + name);
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  return data_[column_index(name)];
}

const std::vector<double>& Dataset::column_at(int index) const {
  if (index < 0 || index >= n_cols()) {
    fail(ErrorCode::kArgument, "column index out of range");
  }
  return data_[index];
}

void Dataset::set_roles(const std::string& outcome,
                        const std::string& treatment,
                        const std::vector<std::string>& covariates) {
  column_index(outcome);
  column_index(treatment);
  std::set<std::string> used = {outcome, treatment};
  if (used.size() != 2) {
    fail(ErrorCode::kArgument, "outcome and treatment must differ");
  }
  for (const auto& cov : covariates) {
    column_index(cov);
    if (!used.insert(cov).second) {
      fail(ErrorCode::kArgument, "role overlap on column: " + cov);
    }
  }
  outcome_ = outcome;
  treatment_ = treatment;
  covariates_ = covariates;
}

const std::string& Dataset::outcome_name() const {
  if (!has_roles()) fail(ErrorCode::kArgument, "roles not set");
  return outcome_;
}

const std::string& Dataset::treatment_name() const {
  if (!has_roles()) fail(ErrorCode::kArgument, "roles not set");
  return treatment_;
}

const std::vector<std::string>& Dataset::covariate_names() const {
  if (!has_roles()) fail(ErrorCode::kArgument, "roles not set");
  return covariates_;
}

const std::vector<double>& Dataset::outcome() const {
  return column(outcome_name());
}

const std::vector<double>& Dataset::treatment() const {
  return column(treatment_name());
}

bool Dataset::treatment_is_binary() const {
  for (double v : treatment()) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

void Dataset::require_binary_treatment() const {
  if (!treatment_is_binary()) {
    fail(ErrorCode::kArgument,
         "treatment column '" + treatment_name() + "' is not binary 0/1");
  }
}

Eigen::MatrixXd Dataset::covariate_matrix() const {
  const auto& names = covariate_names();
  Eigen::MatrixXd x(n_rows_, static_cast<int>(names.size()));
  for (size_t c = 0; c < names.size(); ++c) {
    const auto& col = column(names[c]);
    for (int r = 0; r < n_rows_; ++r) x(r, static_cast<int>(c)) = col[r];
  }
  return x;
}

Eigen::VectorXd Dataset::outcome_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(outcome().data(), n_rows_);
}

Eigen::VectorXd Dataset::treatment_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(treatment().data(), n_rows_);
}

Dataset Dataset::take_rows(const std::vector<int>& rows) const {
  std::vector<std::vector<double>> data(n_cols());
  for (int c = 0; c < n_cols(); ++c) data[c].reserve(rows.size());
  for (int r : rows) {
    if (r < 0 || r >= n_rows_) {
      fail(ErrorCode::kArgument, "row index out of range");
    }
    for (int c = 0; c < n_cols(); ++c) data[c].push_back(data_[c][r]);
  }
  Dataset out(columns_, std::move(data));
  out.n_rows_ = static_cast<int>(rows.size());
  out.outcome_ = outcome_;
  out.treatment_ = treatment_;
  out.covariates_ = covariates_;
  return out;
}

}  // namespace causalkit
