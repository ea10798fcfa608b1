#include "tiltwalk/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tiltwalk {

void BandedMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    const int j0 = std::max(0, i - lower_);
    const int j1 = std::min(n_ - 1, i + upper_);
    double acc = 0.0;
    for (int j = j0; j <= j1; ++j) acc += at(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = acc;
  }
}

void BandedMatrix::matvec_transpose(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    const int j0 = std::max(0, i - lower_);
    const int j1 = std::min(n_ - 1, i + upper_);
    const double xi = x[static_cast<std::size_t>(i)];
    for (int j = j0; j <= j1; ++j) y[static_cast<std::size_t>(j)] += at(i, j) * xi;
  }
}

BandedMatrix BandedMatrix::transpose() const {
  BandedMatrix t(n_, upper_, lower_);
  for (int i = 0; i < n_; ++i) {
    const int j0 = std::max(0, i - lower_);
    const int j1 = std::min(n_ - 1, i + upper_);
    for (int j = j0; j <= j1; ++j) t.at(j, i) = at(i, j);
  }
  return t;
}

double BandedMatrix::row_sum(int i) const {
  const int j0 = std::max(0, i - lower_);
  const int j1 = std::min(n_ - 1, i + upper_);
  double acc = 0.0;
  for (int j = j0; j <= j1; ++j) acc += at(i, j);
  return acc;
}

bool BandedMatrix::row_is_zero(int i) const {
  const int j0 = std::max(0, i - lower_);
  const int j1 = std::min(n_ - 1, i + upper_);
  for (int j = j0; j <= j1; ++j)
    if (at(i, j) != 0.0) return false;
  return true;
}

std::vector<std::vector<double>> BandedMatrix::to_dense() const {
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n_),
                                     std::vector<double>(static_cast<std::size_t>(n_), 0.0));
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j)
      d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = at(i, j);
  return d;
}

ShiftedBandedLU::ShiftedBandedLU(const BandedMatrix& A, double sigma)
    : lu_(A.size(), A.lower(), A.upper()) {
  const int n = A.size();
  for (int i = 0; i < n; ++i) {
    const int j0 = std::max(0, i - A.lower());
    const int j1 = std::min(n - 1, i + A.upper());
    for (int j = j0; j <= j1; ++j) lu_.at(i, j) = (i == j ? sigma : 0.0) - A.at(i, j);
  }
  for (int k = 0; k < n; ++k) {
    const double piv = lu_.at(k, k);
    if (!(piv > 0.0)) return;  // shift not above the spectral radius
    const int imax = std::min(n - 1, k + lu_.lower());
    const int jmax = std::min(n - 1, k + lu_.upper());
    for (int i = k + 1; i <= imax; ++i) {
      const double l = lu_.at(i, k) / piv;
      lu_.at(i, k) = l;
      for (int j = k + 1; j <= jmax; ++j) lu_.at(i, j) -= l * lu_.at(k, j);
    }
  }
  ok_ = true;
}

void ShiftedBandedLU::solve(std::vector<double>& b) const {
  if (!ok_) throw std::runtime_error("ShiftedBandedLU: factorization failed");
  const int n = lu_.size();
  for (int i = 0; i < n; ++i) {
    const int k0 = std::max(0, i - lu_.lower());
    double acc = b[static_cast<std::size_t>(i)];
    for (int k = k0; k < i; ++k) acc -= lu_.at(i, k) * b[static_cast<std::size_t>(k)];
    b[static_cast<std::size_t>(i)] = acc;
  }
  for (int i = n - 1; i >= 0; --i) {
    const int j1 = std::min(n - 1, i + lu_.upper());
    double acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j <= j1; ++j) acc -= lu_.at(i, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(i)] = acc / lu_.at(i, i);
  }
}

}  // namespace tiltwalk
