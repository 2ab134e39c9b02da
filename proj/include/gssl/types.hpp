#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace gssl {

/// Dense row-major matrix of doubles. Rows are nodes / samples.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// The single random engine used across the library; seeded explicitly everywhere.
using Rng = std::mt19937_64;

}  // namespace gssl
