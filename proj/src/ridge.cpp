#include "recap/ridge.hpp"

#include <string>

#include "recap/errors.hpp"
#include "recap/threading.hpp"

namespace recap {

void RidgeSpec::validate() const {
  if (!(regularization > 0.0)) throw ConfigError("ridge regularization must be > 0");
}

RidgeReadout fit_ridge(const Eigen::MatrixXd& states, const std::vector<int>& labels, int classes,
                       const RidgeSpec& spec) {
  spec.validate();
  if (states.rows() < 1) throw DataError("ridge fit needs at least one sample");
  if (states.rows() != static_cast<Eigen::Index>(labels.size()))
    throw DataError("state row count does not match label count");
  if (classes < 1) throw ConfigError("classes must be >= 1");
  for (int label : labels)
    if (label < 0 || label >= classes)
      throw DataError("label " + std::to_string(label) + " outside 0.." +
                      std::to_string(classes - 1));

  const Eigen::Index n = states.rows();
  const Eigen::Index d = states.cols();
  const Eigen::Index width = spec.include_bias ? d + 1 : d;

  Eigen::MatrixXd design(n, width);
  design.leftCols(d) = states;
  if (spec.include_bias) design.col(d).setOnes();

  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) targets(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd gram = design.transpose() * design;
  for (Eigen::Index i = 0; i < d; ++i) gram(i, i) += spec.regularization;
  // The bias diagonal entry is left unregularized.

  Eigen::LDLT<Eigen::MatrixXd> factorization(gram);
  if (factorization.info() != Eigen::Success)
    throw NumericError("ridge normal-equation factorization failed");
  Eigen::MatrixXd solution = factorization.solve(design.transpose() * targets);
  if (!solution.allFinite()) throw NumericError("ridge solution is not finite");

  RidgeReadout readout;
  readout.weights = solution.transpose();  // classes x width
  readout.classes = classes;
  readout.include_bias = spec.include_bias;
  return readout;
}

Eigen::VectorXd ridge_scores(const RidgeReadout& readout, const Eigen::VectorXd& state) {
  const Eigen::Index d = readout.weights.cols() - (readout.include_bias ? 1 : 0);
  if (state.size() != d) throw DataError("state length does not match readout width");
  Eigen::VectorXd scores = readout.weights.leftCols(d) * state;
  if (readout.include_bias) scores += readout.weights.col(d);
  return scores;
}

int predict_ridge(const EsnRidgeModel& model, const Eigen::VectorXd& input) {
  const StateVector state = run_to_average(model.reservoir, input);
  const Eigen::VectorXd scores = ridge_scores(model.readout, state.values);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return static_cast<int>(best);
}

std::vector<int> predict_ridge_batch(const EsnRidgeModel& model, const ImageBatch& batch,
                                     int threads) {
  std::vector<int> predictions(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      predictions[i] = predict_ridge(model, image_as_input(batch, i));
  });
  return predictions;
}

Eigen::MatrixXd average_states(const ReservoirWeights& reservoir, const ImageBatch& batch,
                               int threads) {
  Eigen::MatrixXd states(static_cast<Eigen::Index>(batch.size()), reservoir.spec.n_units);
  parallel_for(batch.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      states.row(static_cast<Eigen::Index>(i)) =
          run_to_average(reservoir, image_as_input(batch, i)).values.transpose();
  });
  return states;
}

}  // namespace recap
