#pragma once

// Independent brute-force reference implementations used as oracles by the
// unit and acceptance suites. Everything here is deliberately written as
// plain scalar loops over dense containers, with no dependency on the library
// implementation paths being checked.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace recap::testing {

using DenseMatrix = std::vector<std::vector<double>>;

DenseMatrix dense_from_sparse(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix);
DenseMatrix dense_from_eigen(const Eigen::MatrixXd& matrix);

// Leaky ESN rollout with constant input, returning every intermediate state
// x_1..x_T (scalar loops, zeros included in the sums).
std::vector<std::vector<double>> oracle_rollout_states(const DenseMatrix& recurrent,
                                                       const DenseMatrix& input_weights,
                                                       const std::vector<double>& input,
                                                       double leak_rate, int steps,
                                                       const std::vector<double>& initial_state);

std::vector<double> oracle_rollout_average(const DenseMatrix& recurrent,
                                           const DenseMatrix& input_weights,
                                           const std::vector<double>& input, double leak_rate,
                                           int steps, int washout);

// Linear scan over the exact bin edges b_k = lo + (hi-lo) k / K; half-open
// bins with the top closed.
int oracle_quantize_scan(double value, int levels, double lo = -1.0, double hi = 1.0);

// Dense double-loop mask: m[i][j] = (z_i == z_j) and i != j.
std::vector<std::vector<int>> oracle_mask_dense(const std::vector<int>& levels);

// Scalar piecewise potentiation-decay step on a dense float matrix.
void oracle_hebbian_step(std::vector<std::vector<float>>& strengths,
                         const std::vector<std::vector<int>>& mask, float potentiation,
                         float decay);

struct OracleBinarized {
  float threshold = 0.0f;
  std::vector<std::vector<int>> bits;
};

// Full-sort nearest-rank binarization with the all-zero override.
OracleBinarized oracle_binarize(const std::vector<std::vector<float>>& strengths,
                                double sparsity_fraction);

std::uint64_t oracle_overlap(const std::vector<std::vector<int>>& a,
                             const std::vector<std::vector<int>>& b);

// Ridge normal equations solved in long double by Gauss-Jordan elimination.
// Returns the classes x width weight matrix (bias column last when enabled).
Eigen::MatrixXd oracle_ridge(const Eigen::MatrixXd& states, const std::vector<int>& labels,
                             int classes, double beta, bool include_bias);

}  // namespace recap::testing
