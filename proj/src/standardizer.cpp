#include "gssl/standardizer.hpp"

#include "gssl/error.hpp"

#include <cmath>

namespace gssl {

Standardizer Standardizer::fit(const Matrix& features) {
  if (features.rows() == 0) throw Error(ErrorKind::EmptyDataset, "cannot fit scaling on zero rows");
  Standardizer s;
  const double n = static_cast<double>(features.rows());
  s.mean = features.colwise().sum().transpose() / n;
  s.scale.resize(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double var = (features.col(c).array() - s.mean[c]).square().sum() / n;
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& features) const {
  if (features.cols() != mean.size())
    throw Error(ErrorKind::ShapeMismatch, "feature width differs from fitted scaling");
  Matrix out = features;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

}  // namespace gssl
