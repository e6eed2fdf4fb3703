#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace causalkit {

// Rectangular numeric table with named columns and optional designated roles
// (outcome / treatment / covariates).  Values are doubles; CSV io uses
// shortest round-trip formatting so write -> read is value-identical.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> columns,
          std::vector<std::vector<double>> data);  // column-major

  static Dataset from_csv_text(const std::string& text);
  static Dataset read_csv(const std::string& path);
  std::string to_csv_text() const;
  void write_csv(const std::string& path) const;

  int n_rows() const { return n_rows_; }
  int n_cols() const { return static_cast<int>(columns_.size()); }
  const std::vector<std::string>& columns() const { return columns_; }
  bool has_column(const std::string& name) const;
  int column_index(const std::string& name) const;  // kName when absent
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<double>& column_at(int index) const;

  // Role designation; names must exist and may not overlap.
  void set_roles(const std::string& outcome, const std::string& treatment,
                 const std::vector<std::string>& covariates);
  bool has_roles() const { return !outcome_.empty(); }
  const std::string& outcome_name() const;    // kArgument when unset
  const std::string& treatment_name() const;  // kArgument when unset
  const std::vector<std::string>& covariate_names() const;

  // Role-based accessors.
  const std::vector<double>& outcome() const;
  const std::vector<double>& treatment() const;
  bool treatment_is_binary() const;  // every value exactly 0 or 1
  // Throws kArgument unless the treatment column is strictly {0,1}.
  void require_binary_treatment() const;
  Eigen::MatrixXd covariate_matrix() const;  // n x #covariates
  Eigen::VectorXd outcome_vector() const;
  Eigen::VectorXd treatment_vector() const;

  // Row subset (with the same columns and roles), used by the bootstrap.
  Dataset take_rows(const std::vector<int>& rows) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> data_;  // column-major
  int n_rows_ = 0;
  std::string outcome_, treatment_;
  std::vector<std::string> covariates_;
};

}  // namespace causalkit
