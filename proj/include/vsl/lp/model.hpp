#pragma once

// Sparse linear and mixed-binary models.

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vsl::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Sense { kMinimize, kMaximize };

struct Column {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool binary = false;
};

// A ranged row lower <= a.x <= upper. Equality rows have lower == upper;
// one-sided rows use an infinite bound.
struct Row {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  std::vector<int> index;
  std::vector<double> value;
};

class LpModel {
 public:
  Sense sense = Sense::kMaximize;
  double objective_offset = 0.0;

  int add_column(std::string name, double lower, double upper, double cost = 0.0);
  int add_binary(std::string name, double cost = 0.0);

  int add_row(std::string name, double lower, double upper,
              std::vector<std::pair<int, double>> terms);
  int add_le(std::string name, std::vector<std::pair<int, double>> terms, double rhs) {
    return add_row(std::move(name), -kInf, rhs, std::move(terms));
  }
  int add_ge(std::string name, std::vector<std::pair<int, double>> terms, double rhs) {
    return add_row(std::move(name), rhs, kInf, std::move(terms));
  }
  int add_eq(std::string name, std::vector<std::pair<int, double>> terms, double rhs) {
    return add_row(std::move(name), rhs, rhs, std::move(terms));
  }

  int num_cols() const { return static_cast<int>(cols_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  long long nnz() const;

  const Column& column(int j) const { return cols_.at(j); }
  const Row& row(int i) const { return rows_.at(i); }
  const std::vector<Column>& columns() const { return cols_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_bounds(int j, double lower, double upper);
  void set_cost(int j, double cost) { cols_.at(j).cost = cost; }
  void set_binary(int j);

  std::vector<int> binary_columns() const;
  bool has_binaries() const;

  // Objective including the offset, in the model's own sense.
  double evaluate_objective(const std::vector<double>& x) const;
  // Largest absolute violation of row and column bounds.
  double max_violation(const std::vector<double>& x) const;
  std::vector<double> row_activity(const std::vector<double>& x) const;

  // Throws ModelError on dangling indices, non-finite coefficients,
  // crossed bounds or binary columns with bounds outside [0, 1].
  void validate() const;

 private:
  std::vector<Column> cols_;
  std::vector<Row> rows_;
};

// The binary markers live on the columns; the alias names the role.
using MilpModel = LpModel;

// Plain-text dump in CPLEX LP file syntax (Maximize/Subject To/Bounds/
// Binaries/End) so the model can be read by external solvers.
void write_lp_format(std::ostream& os, const LpModel& model);

}  // namespace vsl::lp
