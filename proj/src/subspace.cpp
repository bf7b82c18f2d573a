#include "jspace/subspace.hpp"

#include <cmath>
#include <string>

#include "jspace/error.hpp"

namespace jspace {

ShapeMatrix::ShapeMatrix(Eigen::Matrix<double, Eigen::Dynamic, 3> pts)
    : points(std::move(pts)) {
  validate();
}

ShapeMatrix ShapeMatrix::from_planar(std::span<const Point2d> pts) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> m(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = pts[i].x;
    m(static_cast<Eigen::Index>(i), 1) = pts[i].y;
    m(static_cast<Eigen::Index>(i), 2) = 0.0;
  }
  return ShapeMatrix(std::move(m));
}

void ShapeMatrix::validate() const {
  if (points.rows() < 3) {
    raise(ErrorCode::invalid_input,
          "shape matrix needs at least 3 points, got " +
              std::to_string(points.rows()));
  }
  if (!points.allFinite()) {
    raise(ErrorCode::invalid_input, "shape matrix has non-finite entries");
  }
}

ShapeMatrix center_shape_matrix(const ShapeMatrix& m) {
  m.validate();
  ShapeMatrix out = m;
  out.points.rowwise() -= m.points.colwise().mean();
  return out;
}

SubspaceBasis shape_subspace_basis(const ShapeMatrix& m,
                                   double rank_tolerance) {
  if (!(rank_tolerance > 0.0)) {
    raise(ErrorCode::invalid_config, "rank_tolerance must be > 0");
  }
  const ShapeMatrix centered = center_shape_matrix(m);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered.points, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma(0);
  if (sigma_max <= 0.0) {
    raise(ErrorCode::degenerate_shape,
          "all points coincide; shape subspace is undefined");
  }

  int retained = 0;
  while (retained < sigma.size() && retained < 3 &&
         sigma(retained) > rank_tolerance * sigma_max) {
    ++retained;
  }

  SubspaceBasis basis;
  basis.vectors = svd.matrixU().leftCols(retained);
  basis.singular_values = sigma.head(retained);
  return basis;
}

double subspace_similarity(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.point_count() != b.point_count()) {
    raise(ErrorCode::dimension_mismatch,
          "subspace bases live in different point spaces: K=" +
              std::to_string(a.point_count()) + " vs " +
              std::to_string(b.point_count()));
  }
  if (a.effective_dim() != b.effective_dim() || a.effective_dim() == 0) {
    raise(ErrorCode::dimension_mismatch,
          "subspace dimensions differ: N=" + std::to_string(a.effective_dim()) +
              " vs " + std::to_string(b.effective_dim()));
  }
  // Cross-Gram route: |Phi^T Psi|_F^2 equals the sum of squared canonical
  // cosines; cheaper than forming the K x K projection matrices.
  const Eigen::MatrixXd gram = a.vectors.transpose() * b.vectors;
  return gram.squaredNorm() / static_cast<double>(a.effective_dim());
}

double mean_similarity(const SubspaceBasis& test,
                       std::span<const SubspaceBasis> bank) {
  if (bank.empty()) {
    raise(ErrorCode::invalid_config, "reference bank is empty");
  }
  double sum = 0.0;
  for (const SubspaceBasis& b : bank) {
    sum += subspace_similarity(test, b);
  }
  return sum / static_cast<double>(bank.size());
}

}  // namespace jspace
