#pragma once

#include <Eigen/Dense>
#include <vector>

#include "recap/dataio.hpp"
#include "recap/model_meta.hpp"
#include "recap/reservoir.hpp"

namespace recap {

struct RidgeSpec {
  double regularization = 1e-5;  // beta
  bool include_bias = true;      // bias column is appended and left unregularized

  void validate() const;  // throws ConfigError
  bool operator==(const RidgeSpec&) const = default;
};

// Linear readout: classes x (n_features [+1]) weight matrix over time-averaged
// reservoir states.
struct RidgeReadout {
  Eigen::MatrixXd weights;
  int classes = 0;
  bool include_bias = true;
};

// ESN-Ridge baseline: the same fixed reservoir as RECAP with a closed-form
// ridge readout over one-hot targets.
struct EsnRidgeModel {
  ReservoirWeights reservoir;
  RidgeSpec spec;
  RidgeReadout readout;
  ModelMeta meta;
};

// Solves (Z^T Z + beta I~) W^T = Z^T Y via LDLT, where Z is the state matrix
// with an optional bias column and I~ skips the bias row. Throws NumericError
// if the factorization fails (practically impossible for beta > 0).
RidgeReadout fit_ridge(const Eigen::MatrixXd& states, const std::vector<int>& labels, int classes,
                       const RidgeSpec& spec);

Eigen::VectorXd ridge_scores(const RidgeReadout& readout, const Eigen::VectorXd& state);

// Rollout -> average -> affine map -> argmax (ties to the lowest class id).
int predict_ridge(const EsnRidgeModel& model, const Eigen::VectorXd& input);

std::vector<int> predict_ridge_batch(const EsnRidgeModel& model, const ImageBatch& batch,
                                     int threads = 1);

// n x N_r matrix of time-averaged states for a batch, rows in batch order.
// Shared between ridge fitting and diagnostics; rollouts run in parallel.
Eigen::MatrixXd average_states(const ReservoirWeights& reservoir, const ImageBatch& batch,
                               int threads = 1);

}  // namespace recap
