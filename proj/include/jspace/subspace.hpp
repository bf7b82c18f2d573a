#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "jspace/types.hpp"

namespace jspace {

/// K x 3 matrix of point coordinates; row i is the positional vector of
/// point i. Row order is fixed by landmark index. Planar data carries z = 0.
struct ShapeMatrix {
  Eigen::Matrix<double, Eigen::Dynamic, 3> points;

  ShapeMatrix() = default;
  explicit ShapeMatrix(Eigen::Matrix<double, Eigen::Dynamic, 3> pts);

  /// Builds a planar shape matrix (z = 0) from 2D points.
  static ShapeMatrix from_planar(std::span<const Point2d> pts);

  int point_count() const { return static_cast<int>(points.rows()); }

  /// K >= 3 and all entries finite.
  void validate() const;
};

/// Orthonormal basis of a shape subspace: columns span the column space of
/// the centered shape matrix. effective_dim is the numerically retained
/// rank (at most 3; 2 for planar data).
struct SubspaceBasis {
  Eigen::MatrixXd vectors;          // K x N, orthonormal columns
  Eigen::VectorXd singular_values;  // N retained values, non-increasing

  int point_count() const { return static_cast<int>(vectors.rows()); }
  int effective_dim() const { return static_cast<int>(vectors.cols()); }
};

/// Subtracts the column-wise mean from every row. Each output column sums
/// to zero (within round-off).
ShapeMatrix center_shape_matrix(const ShapeMatrix& m);

/// Centers m and returns the left singular vectors whose singular values
/// exceed rank_tolerance x (largest singular value), capped at 3.
/// Throws ErrorCode::degenerate_shape when all points coincide.
SubspaceBasis shape_subspace_basis(const ShapeMatrix& m,
                                   double rank_tolerance = 1e-8);

/// Mean squared cosine of the canonical angles between two subspaces,
/// computed as |Phi^T Psi|_F^2 / N. Equals trace(Q1 Q2) / N for the
/// corresponding projection matrices. Result lies in [0, 1] up to round-off.
double subspace_similarity(const SubspaceBasis& a, const SubspaceBasis& b);

/// Arithmetic mean of subspace_similarity(test, b) over the bank.
double mean_similarity(const SubspaceBasis& test,
                       std::span<const SubspaceBasis> bank);

}  // namespace jspace
