#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>

namespace recap {

// Fixed leaky echo-state reservoir. The recurrent and input weights are a
// deterministic function of the seed; nothing here is ever trained.
struct ReservoirSpec {
  int n_units = 1024;
  double spectral_radius = 1.0;
  double leak_rate = 0.5;
  double sparsity = 0.9;  // fraction of exactly-zero recurrent entries
  int input_dim = 784;
  int steps = 60;
  int washout = 0;  // leading steps excluded from the time average
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  bool operator==(const ReservoirSpec&) const = default;
};

struct ReservoirWeights {
  ReservoirSpec spec;
  Eigen::SparseMatrix<double, Eigen::RowMajor> recurrent;
  Eigen::MatrixXd input;  // n_units x input_dim, dense
};

// Time-averaged reservoir response to one static input.
struct StateVector {
  Eigen::VectorXd values;
  std::optional<int> label;
};

// Samples the recurrent matrix (exact zero count, uniform [-1,1] values),
// rescales it so the power-iteration estimate of the dominant eigenvalue
// magnitude equals spectral_radius, and samples dense input weights uniform
// on [-1,1]. Throws NumericError when the sampled matrix has a degenerate
// spectrum (e.g. all zeros at extreme sparsity).
ReservoirWeights build_reservoir(const ReservoirSpec& spec);

// Power-iteration estimate of |lambda_max|. Uses the geometric mean of
// consecutive step norms so complex conjugate pairs (period-2 oscillation)
// still settle. Throws NumericError when the iterate collapses to zero.
double estimate_spectral_radius(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix,
                                std::uint64_t seed, int max_iterations = 500,
                                double relative_tolerance = 1e-6);

// Rolls the reservoir for spec.steps cycles with the input held constant and
// returns the mean state over steps washout+1..steps. The initial state is
// zero unless a test hook supplies one.
StateVector run_to_average(const ReservoirWeights& weights, const Eigen::VectorXd& input,
                           const Eigen::VectorXd* initial_state = nullptr);

}  // namespace recap
