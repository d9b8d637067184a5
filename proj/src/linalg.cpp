#include "vss/linalg.hpp"

#include <cmath>
#include <cstdlib>

namespace vss {

bool lu_solve(DenseMatrix A, std::vector<double> b, std::vector<double>& x) {
  const int n = A.rows;
  if (n != A.cols || static_cast<int>(b.size()) != n) return false;
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(A.at(k, k));
    for (int r = k + 1; r < n; ++r) {
      const double v = std::abs(A.at(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) return false;
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(A.at(k, c), A.at(piv, c));
      std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(piv)]);
    }
    const double d = A.at(k, k);
    for (int r = k + 1; r < n; ++r) {
      const double f = A.at(r, k) / d;
      if (f == 0.0) continue;
      A.at(r, k) = 0.0;
      for (int c = k + 1; c < n; ++c) A.at(r, c) -= f * A.at(k, c);
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(k)];
    }
  }
  x.assign(static_cast<size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<size_t>(r)];
    for (int c = r + 1; c < n; ++c) acc -= A.at(r, c) * x[static_cast<size_t>(c)];
    x[static_cast<size_t>(r)] = acc / A.at(r, r);
  }
  return true;
}

bool least_squares(const std::vector<std::vector<double>>& columns,
                   const std::vector<double>& rhs, std::vector<double>& coeffs) {
  const int k = static_cast<int>(columns.size());
  if (k == 0) return false;
  const size_t n = rhs.size();
  DenseMatrix normal(k, k);
  std::vector<double> moment(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    if (columns[static_cast<size_t>(i)].size() != n) return false;
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (size_t r = 0; r < n; ++r)
        acc += columns[static_cast<size_t>(i)][r] * columns[static_cast<size_t>(j)][r];
      normal.at(i, j) = acc;
    }
    double acc = 0.0;
    for (size_t r = 0; r < n; ++r) acc += columns[static_cast<size_t>(i)][r] * rhs[r];
    moment[static_cast<size_t>(i)] = acc;
  }
  return lu_solve(normal, moment, coeffs);
}

bool penta_solve(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                 std::vector<double> d, std::vector<double> e, std::vector<double> rhs,
                 std::vector<double>& x) {
  const size_t n = c.size();
  if (a.size() != n || b.size() != n || d.size() != n || e.size() != n || rhs.size() != n)
    return false;
  // forward elimination of the two sub-diagonals
  for (size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(c[i]) < 1e-300) return false;
    {
      const double f = b[i + 1] / c[i];
      c[i + 1] -= f * d[i];
      d[i + 1] -= f * e[i];
      rhs[i + 1] -= f * rhs[i];
      b[i + 1] = 0.0;
    }
    if (i + 2 < n) {
      const double f = a[i + 2] / c[i];
      b[i + 2] -= f * d[i];
      c[i + 2] -= f * e[i];
      rhs[i + 2] -= f * rhs[i];
      a[i + 2] = 0.0;
    }
  }
  x.assign(n, 0.0);
  for (size_t ii = n; ii-- > 0;) {
    double acc = rhs[ii];
    if (ii + 1 < n) acc -= d[ii] * x[ii + 1];
    if (ii + 2 < n) acc -= e[ii] * x[ii + 2];
    if (std::abs(c[ii]) < 1e-300) return false;
    x[ii] = acc / c[ii];
  }
  return true;
}

}  // namespace vss
