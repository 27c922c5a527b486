#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanassign {

/// Channel index used for users that hold no channel.
inline constexpr int kUnassigned = -1;

class ParseError : public std::runtime_error {
 public:
  ParseError(int row, int col, const std::string& what)
      : std::runtime_error("row " + std::to_string(row + 1) + ", column " +
                           std::to_string(col + 1) + ": " + what),
        row(row),
        col(col) {}
  int row;
  int col;
};

/// N x K matrix of nonnegative weighted rates R(n,k), row-major.
class RewardMatrix {
 public:
  RewardMatrix(int n_users, int n_channels, double fill = 0.0)
      : n_users_(n_users),
        n_channels_(n_channels),
        data_(static_cast<std::size_t>(n_users) * n_channels, fill) {
    if (n_users < 1 || n_channels < 1) {
      throw std::invalid_argument("RewardMatrix dimensions must be >= 1x1");
    }
  }

  RewardMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : RewardMatrix(static_cast<int>(rows.size()),
                     static_cast<int>(rows.begin()->size())) {
    int n = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n_channels_) {
        throw std::invalid_argument("ragged initializer");
      }
      int k = 0;
      for (double v : row) (*this)(n, k++) = v;
      ++n;
    }
  }

  int n_users() const { return n_users_; }
  int n_channels() const { return n_channels_; }

  double operator()(int n, int k) const {
    return data_[static_cast<std::size_t>(n) * n_channels_ + k];
  }
  double& operator()(int n, int k) {
    return data_[static_cast<std::size_t>(n) * n_channels_ + k];
  }

  double row_sum(int n) const {
    double s = 0;
    for (int k = 0; k < n_channels_; ++k) s += (*this)(n, k);
    return s;
  }

  double max_entry() const {
    return *std::max_element(data_.begin(), data_.end());
  }

  /// Entries must be nonnegative and finite.
  void validate() const {
    for (int n = 0; n < n_users_; ++n) {
      for (int k = 0; k < n_channels_; ++k) {
        double v = (*this)(n, k);
        if (!std::isfinite(v) || v < 0) {
          throw std::invalid_argument("reward entry (" + std::to_string(n) +
                                      "," + std::to_string(k) +
                                      ") is negative or non-finite");
        }
      }
    }
  }

  /// CSV: one row per user, comma separated decimals, no header.
  static RewardMatrix from_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int r = 0;
    while (std::getline(in, line)) {
      if (line.empty() && in.eof()) break;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      int c = 0;
      while (std::getline(ss, cell, ',')) {
        std::size_t pos = 0;
        double v;
        try {
          v = std::stod(cell, &pos);
        } catch (const std::exception&) {
          throw ParseError(r, c, "not a number: '" + cell + "'");
        }
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw ParseError(r, c, "trailing junk: '" + cell + "'");
        if (!std::isfinite(v) || v < 0) throw ParseError(r, c, "negative or non-finite rate");
        row.push_back(v);
        ++c;
      }
      if (row.empty()) throw ParseError(r, 0, "empty row");
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw ParseError(r, static_cast<int>(row.size()), "ragged row");
      }
      rows.push_back(std::move(row));
      ++r;
    }
    if (rows.empty()) throw ParseError(0, 0, "empty matrix");
    RewardMatrix m(static_cast<int>(rows.size()),
                   static_cast<int>(rows.front().size()));
    for (int n = 0; n < m.n_users(); ++n)
      for (int k = 0; k < m.n_channels(); ++k) m(n, k) = rows[n][k];
    return m;
  }

  static RewardMatrix load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return from_csv(in);
  }

  void to_csv(std::ostream& out) const {
    out.precision(17);
    for (int n = 0; n < n_users_; ++n) {
      for (int k = 0; k < n_channels_; ++k) {
        if (k) out << ',';
        out << (*this)(n, k);
      }
      out << '\n';
    }
  }

 private:
  int n_users_;
  int n_channels_;
  std::vector<double> data_;
};

/// Injective (on assigned entries) user -> channel map plus its total value.
struct Assignment {
  std::vector<int> channel_of;  // kUnassigned allowed
  double value = 0.0;

  int n_users() const { return static_cast<int>(channel_of.size()); }
};

inline double assignment_value(const RewardMatrix& r, const Assignment& a) {
  if (a.n_users() != r.n_users()) {
    throw std::invalid_argument("assignment/matrix user count mismatch");
  }
  double v = 0;
  for (int n = 0; n < r.n_users(); ++n) {
    int k = a.channel_of[n];
    if (k == kUnassigned) continue;
    if (k < 0 || k >= r.n_channels()) {
      throw std::invalid_argument("assignment channel index out of range");
    }
    v += r(n, k);
  }
  return v;
}

/// N > K reduction: append N-K all-zero columns so the matrix is square.
/// Square or wide inputs are returned unchanged.
inline RewardMatrix pad_zero_columns(const RewardMatrix& r) {
  if (r.n_users() <= r.n_channels()) return r;
  RewardMatrix out(r.n_users(), r.n_users(), 0.0);
  for (int n = 0; n < r.n_users(); ++n)
    for (int k = 0; k < r.n_channels(); ++k) out(n, k) = r(n, k);
  return out;
}

/// Map channels that only exist in the padded view back to kUnassigned.
inline Assignment unpad_assignment(const Assignment& a, const RewardMatrix& original) {
  Assignment out = a;
  for (int& k : out.channel_of) {
    if (k >= original.n_channels()) k = kUnassigned;
  }
  out.value = assignment_value(original, out);
  return out;
}

}  // namespace chanassign
