#pragma once

#include <vector>

namespace vss {

/// Dense row-major matrix just big enough for the shooting Jacobians.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

/// Solves A x = b in place by LU with partial pivoting.
/// Returns false when a pivot degenerates (singular system).
bool lu_solve(DenseMatrix A, std::vector<double> b, std::vector<double>& x);

/// Linear least squares for small column counts (normal equations).
/// Returns false when the normal matrix is singular.
bool least_squares(const std::vector<std::vector<double>>& columns,
                   const std::vector<double>& rhs, std::vector<double>& coeffs);

/// Pentadiagonal solver for rows (a,b,c,d,e) centered on the diagonal c.
/// Used by the implicit fourth-difference time step.
bool penta_solve(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                 std::vector<double> d, std::vector<double> e, std::vector<double> rhs,
                 std::vector<double>& x);

}  // namespace vss
