#include "vsl/lp/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

namespace vsl::lp {

int LpModel::add_column(std::string name, double lower, double upper, double cost) {
  cols_.push_back(Column{std::move(name), lower, upper, cost, false});
  return num_cols() - 1;
}

int LpModel::add_binary(std::string name, double cost) {
  cols_.push_back(Column{std::move(name), 0.0, 1.0, cost, true});
  return num_cols() - 1;
}

int LpModel::add_row(std::string name, double lower, double upper,
                     std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Row r;
  r.name = std::move(name);
  r.lower = lower;
  r.upper = upper;
  for (const auto& [j, a] : terms) {
    if (!r.index.empty() && r.index.back() == j) {
      r.value.back() += a;
    } else {
      r.index.push_back(j);
      r.value.push_back(a);
    }
  }
  // Drop entries that cancelled or were given as zero.
  std::size_t k = 0;
  for (std::size_t i = 0; i < r.index.size(); ++i) {
    if (r.value[i] != 0.0) {
      r.index[k] = r.index[i];
      r.value[k] = r.value[i];
      ++k;
    }
  }
  r.index.resize(k);
  r.value.resize(k);
  rows_.push_back(std::move(r));
  return num_rows() - 1;
}

long long LpModel::nnz() const {
  long long total = 0;
  for (const auto& r : rows_) total += static_cast<long long>(r.index.size());
  return total;
}

void LpModel::set_bounds(int j, double lower, double upper) {
  auto& c = cols_.at(j);
  c.lower = lower;
  c.upper = upper;
}

void LpModel::set_binary(int j) {
  auto& c = cols_.at(j);
  c.binary = true;
  c.lower = std::max(c.lower, 0.0);
  c.upper = std::min(c.upper, 1.0);
}

std::vector<int> LpModel::binary_columns() const {
  std::vector<int> out;
  for (int j = 0; j < num_cols(); ++j) {
    if (cols_[j].binary) out.push_back(j);
  }
  return out;
}

bool LpModel::has_binaries() const {
  return std::any_of(cols_.begin(), cols_.end(), [](const Column& c) { return c.binary; });
}

double LpModel::evaluate_objective(const std::vector<double>& x) const {
  double v = objective_offset;
  for (int j = 0; j < num_cols(); ++j) v += cols_[j].cost * x.at(j);
  return v;
}

std::vector<double> LpModel::row_activity(const std::vector<double>& x) const {
  std::vector<double> act(rows_.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    double s = 0.0;
    for (std::size_t k = 0; k < r.index.size(); ++k) s += r.value[k] * x.at(r.index[k]);
    act[i] = s;
  }
  return act;
}

double LpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_cols(); ++j) {
    worst = std::max({worst, cols_[j].lower - x.at(j), x.at(j) - cols_[j].upper});
  }
  const auto act = row_activity(x);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    worst = std::max({worst, rows_[i].lower - act[i], act[i] - rows_[i].upper});
  }
  return worst;
}

void LpModel::validate() const {
  for (int j = 0; j < num_cols(); ++j) {
    const auto& c = cols_[j];
    const std::string where = "column " + std::to_string(j) + " (" + c.name + ")";
    if (std::isnan(c.lower) || std::isnan(c.upper) || c.lower > c.upper ||
        c.lower == kInf || c.upper == -kInf) {
      throw ModelError(where + ": invalid bounds");
    }
    if (!std::isfinite(c.cost)) throw ModelError(where + ": non-finite cost");
    if (c.binary && (c.lower < 0.0 || c.upper > 1.0)) {
      throw ModelError(where + ": binary bounds must lie in [0, 1]");
    }
  }
  for (int i = 0; i < num_rows(); ++i) {
    const auto& r = rows_[i];
    const std::string where = "row " + std::to_string(i) + " (" + r.name + ")";
    if (std::isnan(r.lower) || std::isnan(r.upper) || r.lower > r.upper ||
        r.lower == kInf || r.upper == -kInf) {
      throw ModelError(where + ": invalid bounds");
    }
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      if (r.index[k] < 0 || r.index[k] >= num_cols()) {
        throw ModelError(where + ": references undeclared column " +
                         std::to_string(r.index[k]));
      }
      if (!std::isfinite(r.value[k])) throw ModelError(where + ": non-finite coefficient");
    }
  }
  if (!std::isfinite(objective_offset)) throw ModelError("objective offset is not finite");
}

namespace {

std::string sanitize(const std::string& name, char prefix, int index) {
  if (name.empty()) return std::string(1, prefix) + std::to_string(index);
  std::string out;
  for (char ch : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') out.insert(0, 1, prefix);
  return out;
}

void write_terms(std::ostream& os, const std::vector<int>& idx,
                 const std::vector<double>& val, const std::vector<std::string>& names) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    os << (val[k] < 0 ? " - " : " + ") << std::abs(val[k]) << ' ' << names[idx[k]];
    if (k % 6 == 5) os << "\n   ";
  }
}

}  // namespace

void write_lp_format(std::ostream& os, const LpModel& model) {
  const auto old_precision = os.precision(17);
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (int j = 0; j < model.num_cols(); ++j) {
    std::string n = sanitize(model.column(j).name, 'x', j);
    if (seen[n]++) n += "_" + std::to_string(j);
    names.push_back(n);
  }
  os << (model.sense == Sense::kMaximize ? "Maximize\n" : "Minimize\n") << " obj:";
  bool any = false;
  for (int j = 0; j < model.num_cols(); ++j) {
    const double c = model.column(j).cost;
    if (c == 0.0) continue;
    os << (c < 0 ? " - " : " + ") << std::abs(c) << ' ' << names[j];
    any = true;
  }
  if (!any && model.num_cols() > 0) os << " 0 " << names[0];
  if (model.objective_offset != 0.0) os << "\n\\ objective offset " << model.objective_offset;
  os << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    const std::string name = sanitize(r.name, 'c', i);
    auto emit = [&](const std::string& label, const char* op, double rhs) {
      os << ' ' << label << ':';
      if (r.index.empty()) {
        os << " 0 " << (names.empty() ? std::string("x0") : names[0]);
      } else {
        write_terms(os, r.index, r.value, names);
      }
      os << ' ' << op << ' ' << rhs << '\n';
    };
    if (r.lower == r.upper) {
      emit(name, "=", r.lower);
    } else if (std::isfinite(r.lower) && std::isfinite(r.upper)) {
      emit(name + "_lo", ">=", r.lower);
      emit(name + "_hi", "<=", r.upper);
    } else if (std::isfinite(r.lower)) {
      emit(name, ">=", r.lower);
    } else if (std::isfinite(r.upper)) {
      emit(name, "<=", r.upper);
    } else {
      os << "\\ " << name << " is a free row\n";
    }
  }
  os << "Bounds\n";
  for (int j = 0; j < model.num_cols(); ++j) {
    const auto& c = model.column(j);
    if (c.binary) continue;
    if (c.lower == -kInf && c.upper == kInf) {
      os << ' ' << names[j] << " free\n";
    } else if (c.lower == c.upper) {
      os << ' ' << names[j] << " = " << c.lower << '\n';
    } else {
      os << ' ';
      if (c.lower == -kInf) {
        os << "-inf";
      } else {
        os << c.lower;
      }
      os << " <= " << names[j] << " <= ";
      if (c.upper == kInf) {
        os << "+inf";
      } else {
        os << c.upper;
      }
      os << '\n';
    }
  }
  // Binaries fixed by bound tightening are written as bounded generals so
  // the fixing survives the round trip.
  std::vector<int> bins, generals;
  for (int j : model.binary_columns()) {
    const auto& c = model.column(j);
    (c.lower > 0.0 || c.upper < 1.0 ? generals : bins).push_back(j);
  }
  for (int j : generals) {
    const auto& c = model.column(j);
    os << ' ' << c.lower << " <= " << names[j] << " <= " << c.upper << '\n';
  }
  auto list = [&](const char* header, const std::vector<int>& cols) {
    if (cols.empty()) return;
    os << header << '\n';
    for (std::size_t k = 0; k < cols.size(); ++k) {
      os << ' ' << names[cols[k]];
      if (k % 8 == 7 || k + 1 == cols.size()) os << '\n';
    }
  };
  list("Binaries", bins);
  list("Generals", generals);
  os << "End\n";
  os.precision(old_precision);
}

}  // namespace vsl::lp
