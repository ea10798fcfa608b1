#pragma once

#include <vector>

namespace tiltwalk {

// Row-major banded matrix: entry (i, j) is stored when j - i lies in
// [-lower, upper]. Indices are 0-based.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int n, int lower, int upper)
      : n_(n), lower_(lower), upper_(upper), data_(static_cast<std::size_t>(n) * width(), 0.0) {}

  int size() const { return n_; }
  int lower() const { return lower_; }
  int upper() const { return upper_; }
  int width() const { return lower_ + upper_ + 1; }

  bool in_band(int i, int j) const {
    const int d = j - i;
    return j >= 0 && j < n_ && d >= -lower_ && d <= upper_;
  }

  double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * width() + (j - i + lower_)]; }
  double at(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * width() + (j - i + lower_)];
  }
  double get(int i, int j) const { return in_band(i, j) ? at(i, j) : 0.0; }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const;
  void matvec_transpose(const std::vector<double>& x, std::vector<double>& y) const;
  BandedMatrix transpose() const;

  double row_sum(int i) const;
  bool row_is_zero(int i) const;

  std::vector<std::vector<double>> to_dense() const;

 private:
  int n_ = 0, lower_ = 0, upper_ = 0;
  std::vector<double> data_;
};

// LU factorization of (sigma I - A) without pivoting. Valid whenever sigma
// exceeds the spectral radius of the nonnegative matrix A (M-matrix case,
// where elimination is stable and the band does not fill in).
class ShiftedBandedLU {
 public:
  ShiftedBandedLU(const BandedMatrix& A, double sigma);
  bool ok() const { return ok_; }
  // Solves (sigma I - A) x = b in place.
  void solve(std::vector<double>& b) const;

 private:
  BandedMatrix lu_;
  bool ok_ = false;
};

}  // namespace tiltwalk
