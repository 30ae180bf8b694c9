#pragma once

#include <vector>

#include "actree/poly.hpp"

namespace actree {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// det(x I - M) by Faddeev-LeVerrier.
inline Poly characteristic_polynomial(const RationalMatrix& M) {
  const int n = static_cast<int>(M.size());
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  RationalMatrix Mk(n, std::vector<Rational>(n));
  for (int k = 1; k <= n; ++k) {
    // Mk <- M * Mk + c[n-k+1] I
    RationalMatrix next(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Rational s = 0;
        for (int l = 0; l < n; ++l)
          if (M[i][l] != 0 && Mk[l][j] != 0) s += M[i][l] * Mk[l][j];
        next[i][j] = s;
      }
    for (int i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
    Mk = std::move(next);
    Rational tr = 0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) tr += M[i][l] * Mk[l][i];
    c[n - k] = -tr / k;
  }
  return Poly(std::move(c));
}

/// Basis of {x : A x = 0} by reduced row echelon form.
inline RationalMatrix nullspace(RationalMatrix A, int cols) {
  const int rows = static_cast<int>(A.size());
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = r;
    while (p < rows && A[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(A[p], A[r]);
    Rational inv = 1 / A[r][c];
    for (int k = 0; k < cols; ++k) A[r][k] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || A[i][c] == 0) continue;
      Rational f = A[i][c];
      for (int k = 0; k < cols; ++k) A[i][k] -= f * A[r][k];
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  RationalMatrix basis;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols);
    v[f] = 1;
    for (int i = 0; i < static_cast<int>(pivot_col.size()); ++i) v[pivot_col[i]] = -A[i][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Inverse of a nonsingular square matrix.
inline RationalMatrix inverse(RationalMatrix A) {
  const int n = static_cast<int>(A.size());
  RationalMatrix I(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i) I[i][i] = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && A[p][c] == 0) ++p;
    if (p == n) fail("IntegrityFailure", "singular matrix");
    std::swap(A[p], A[c]);
    std::swap(I[p], I[c]);
    Rational inv = 1 / A[c][c];
    for (int k = 0; k < n; ++k) {
      A[c][k] *= inv;
      I[c][k] *= inv;
    }
    for (int i = 0; i < n; ++i) {
      if (i == c || A[i][c] == 0) continue;
      Rational f = A[i][c];
      for (int k = 0; k < n; ++k) {
        A[i][k] -= f * A[c][k];
        I[i][k] -= f * I[c][k];
      }
    }
  }
  return I;
}

}  // namespace actree
