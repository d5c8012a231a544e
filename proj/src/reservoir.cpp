#include "recap/reservoir.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "recap/errors.hpp"
#include "recap/prng.hpp"

namespace recap {
namespace {

// Salts for the independent sampling streams derived from the spec seed.
constexpr std::uint64_t kSaltRecurrent = 0x5245435552ULL;
constexpr std::uint64_t kSaltInput = 0x494e505554ULL;
constexpr std::uint64_t kSaltPowerIter = 0x504f574552ULL;

}  // namespace

void ReservoirSpec::validate() const {
  if (n_units <= 0) throw ConfigError("n_units must be positive");
  if (input_dim <= 0) throw ConfigError("input_dim must be positive");
  if (!(spectral_radius > 0.0)) throw ConfigError("spectral_radius must be > 0");
  if (!(leak_rate > 0.0 && leak_rate <= 1.0)) throw ConfigError("leak_rate must be in (0,1]");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must be in [0,1)");
  if (steps <= 0) throw ConfigError("steps must be positive");
  if (washout < 0 || washout >= steps) throw ConfigError("washout must be in [0, steps)");
}

double estimate_spectral_radius(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix,
                                std::uint64_t seed, int max_iterations,
                                double relative_tolerance) {
  const Eigen::Index n = matrix.rows();
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  const double v_norm = v.norm();
  if (v_norm == 0.0) throw NumericError("power iteration start vector is zero");
  v /= v_norm;

  double previous_norm = 0.0;
  double previous_estimate = 0.0;
  double estimate = 0.0;
  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    Eigen::VectorXd w = matrix * v;
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NumericError("degenerate spectrum: power iteration collapsed to zero");
    v = w / norm;
    if (iteration >= 2) {
      // Geometric mean over two steps damps the period-2 oscillation a
      // dominant complex pair induces on the step norms.
      estimate = std::sqrt(norm * previous_norm);
      if (iteration >= 3 &&
          std::abs(estimate - previous_estimate) <= relative_tolerance * estimate)
        return estimate;
      previous_estimate = estimate;
    }
    previous_norm = norm;
  }
  // Not converged to tolerance; the smoothed estimate is still usable and the
  // rescale below is exact under the same estimator.
  return estimate > 0.0 ? estimate : previous_norm;
}

ReservoirWeights build_reservoir(const ReservoirSpec& spec) {
  spec.validate();
  const std::uint64_t n = static_cast<std::uint64_t>(spec.n_units);
  const std::uint64_t total = n * n;

  // Exact-count sparsity: select precisely round(sparsity * n^2) zero
  // positions via sequential sampling, so the realized zero fraction matches
  // the requested one to within a single entry regardless of seed.
  const std::uint64_t n_zero = static_cast<std::uint64_t>(std::llround(spec.sparsity * static_cast<double>(total)));
  std::uint64_t remaining_nonzero = total - n_zero;

  Rng recurrent_rng(derive_seed(spec.seed, kSaltRecurrent));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(remaining_nonzero));
  for (std::uint64_t position = 0; position < total && remaining_nonzero > 0; ++position) {
    if (recurrent_rng.below(total - position) < remaining_nonzero) {
      const auto row = static_cast<int>(position / n);
      const auto col = static_cast<int>(position % n);
      triplets.emplace_back(row, col, recurrent_rng.uniform(-1.0, 1.0));
      --remaining_nonzero;
    }
  }

  ReservoirWeights weights;
  weights.spec = spec;
  weights.recurrent.resize(spec.n_units, spec.n_units);
  weights.recurrent.setFromTriplets(triplets.begin(), triplets.end());
  weights.recurrent.makeCompressed();

  const double estimate =
      estimate_spectral_radius(weights.recurrent, derive_seed(spec.seed, kSaltPowerIter));
  weights.recurrent *= spec.spectral_radius / estimate;

  Rng input_rng(derive_seed(spec.seed, kSaltInput));
  weights.input.resize(spec.n_units, spec.input_dim);
  for (int row = 0; row < spec.n_units; ++row)
    for (int col = 0; col < spec.input_dim; ++col)
      weights.input(row, col) = input_rng.uniform(-1.0, 1.0);

  return weights;
}

StateVector run_to_average(const ReservoirWeights& weights, const Eigen::VectorXd& input,
                           const Eigen::VectorXd* initial_state) {
  const ReservoirSpec& spec = weights.spec;
  if (input.size() != spec.input_dim)
    throw DataError("input length " + std::to_string(input.size()) +
                    " does not match reservoir input_dim " + std::to_string(spec.input_dim));
  if (!input.allFinite()) throw DataError("reservoir input contains non-finite values");

  Eigen::VectorXd state = initial_state ? *initial_state : Eigen::VectorXd::Zero(spec.n_units);
  if (state.size() != spec.n_units) throw DataError("initial state length mismatch");

  // The input is constant across cycles, so its projection is hoisted out.
  const Eigen::VectorXd driven = weights.input * input;
  const double leak = spec.leak_rate;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.n_units);
  for (int step = 0; step < spec.steps; ++step) {
    Eigen::VectorXd pre = weights.recurrent * state + driven;
    for (int i = 0; i < spec.n_units; ++i)
      state[i] = (1.0 - leak) * state[i] + leak * std::tanh(pre[i]);
    if (step >= spec.washout) sum += state;
  }

  StateVector result;
  result.values = sum / static_cast<double>(spec.steps - spec.washout);
  return result;
}

}  // namespace recap
