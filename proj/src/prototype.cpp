#include "recap/prototype.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "recap/errors.hpp"
#include "recap/threading.hpp"

namespace recap {
namespace {

inline float clip01(float value) noexcept {
  if (value < 0.0f) return 0.0f;
  if (value > 1.0f) return 1.0f;
  return value;
}

void check_update_preconditions(const PrototypeState& state, const CoactivationMask& mask) {
  if (mask.n_units() != state.n_units)
    throw DataError("mask size " + std::to_string(mask.n_units()) +
                    " does not match prototype size " + std::to_string(state.n_units));
  if (!mask.label.has_value() || *mask.label != state.class_id)
    throw DataError("mask label does not match prototype class " +
                    std::to_string(state.class_id));
}

// Nearest-rank index (1-based) of the (1-p) quantile over m values.
std::size_t quantile_rank(double sparsity_fraction, std::size_t m) {
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - sparsity_fraction) * static_cast<double>(m)));
  if (rank < 1) rank = 1;
  if (rank > m) rank = m;
  return rank;
}

}  // namespace

void HebbSpec::validate() const {
  if (!(potentiation > 0.0)) throw ConfigError("potentiation must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must be in (0,1)");
  if (classes < 1) throw ConfigError("classes must be >= 1");
  if (!(sparsity_fraction > 0.0 && sparsity_fraction < 1.0))
    throw ConfigError("sparsity_fraction must be in (0,1)");
}

PrototypeState make_prototype_state(int class_id, std::uint32_t n_units) {
  PrototypeState state;
  state.class_id = class_id;
  state.n_units = n_units;
  state.strengths.assign(std::size_t{n_units} * n_units, 0.0f);
  return state;
}

void hebbian_update(PrototypeState& state, const CoactivationMask& mask, const HebbSpec& spec) {
  check_update_preconditions(state, mask);
  const auto n = state.n_units;
  const float potentiation = static_cast<float>(spec.potentiation);
  const float decay = static_cast<float>(spec.decay);

  // The level buckets partition the units, so this visits every row once:
  // gather the co-activated entries, decay the whole row vectorially, then
  // scatter the clipped potentiated values back. Produces exactly the
  // piecewise update.
  std::vector<float> gathered;
  for (const auto& bucket : mask.level_buckets) {
    for (std::uint32_t i : bucket) {
      float* row = state.strengths.data() + std::size_t{i} * n;
      gathered.resize(bucket.size());
      for (std::size_t k = 0; k < bucket.size(); ++k) gathered[k] = row[bucket[k]];
      for (std::uint32_t j = 0; j < n; ++j) row[j] *= decay;
      for (std::size_t k = 0; k < bucket.size(); ++k) {
        const std::uint32_t j = bucket[k];
        row[j] = (j == i) ? 0.0f : clip01(gathered[k] + potentiation);
      }
      row[i] = 0.0f;
    }
  }
  ++state.update_count;
}

void hebbian_update_piecewise(PrototypeState& state, const CoactivationMask& mask,
                              const HebbSpec& spec) {
  check_update_preconditions(state, mask);
  const auto n = state.n_units;
  const float potentiation = static_cast<float>(spec.potentiation);
  const float decay = static_cast<float>(spec.decay);
  for (std::uint32_t i = 0; i < n; ++i) {
    float* row = state.strengths.data() + std::size_t{i} * n;
    for (std::uint32_t j = 0; j < n; ++j)
      row[j] = mask.bits.test(i, j) ? clip01(row[j] + potentiation) : decay * row[j];
    row[i] = 0.0f;
  }
  ++state.update_count;
}

void hebbian_update_matrix(PrototypeState& state, const CoactivationMask& mask,
                           const HebbSpec& spec) {
  check_update_preconditions(state, mask);
  const auto n = state.n_units;
  const float potentiation = static_cast<float>(spec.potentiation);
  const float decay = static_cast<float>(spec.decay);
  for (std::uint32_t i = 0; i < n; ++i) {
    float* row = state.strengths.data() + std::size_t{i} * n;
    for (std::uint32_t j = 0; j < n; ++j) {
      const float m = mask.bits.test(i, j) ? 1.0f : 0.0f;
      row[j] = clip01(m * (row[j] + potentiation) + (1.0f - m) * (decay * row[j]));
    }
    row[i] = 0.0f;
  }
  ++state.update_count;
}

std::vector<PrototypeState> train_prototypes(const Dataset& dataset,
                                             const ReservoirWeights& reservoir,
                                             const QuantizerSpec& quantizer, const HebbSpec& spec,
                                             int epochs, int threads) {
  spec.validate();
  quantizer.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");

  const auto n_units = static_cast<std::uint32_t>(reservoir.spec.n_units);
  std::vector<PrototypeState> states;
  states.reserve(static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c) states.push_back(make_prototype_state(c, n_units));

  if (dataset.size() == 0) {
    std::cerr << "warning: empty training set, prototypes remain zero\n";
    return states;
  }
  for (std::uint8_t label : dataset.images.labels)
    if (label >= spec.classes)
      throw DataError("sample label " + std::to_string(label) + " outside 0.." +
                      std::to_string(spec.classes - 1));

  // Rollouts and mask construction are pipelined per chunk; the Hebbian
  // updates are applied strictly in dataset order.
  constexpr std::size_t kChunk = 256;
  std::vector<CoactivationMask> masks(std::min(kChunk, dataset.size()));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
      const std::size_t end = std::min(dataset.size(), start + kChunk);
      parallel_for(end - start, threads, [&](std::size_t chunk_begin, std::size_t chunk_end) {
        for (std::size_t k = chunk_begin; k < chunk_end; ++k) {
          const std::size_t index = start + k;
          StateVector state = run_to_average(reservoir, image_as_input(dataset.images, index));
          state.label = dataset.images.labels[index];
          masks[k] = build_mask(quantize(state, quantizer));
        }
      });
      for (std::size_t k = 0; k < end - start; ++k)
        hebbian_update(states[dataset.images.labels[start + k]], masks[k], spec);
    }
  }
  return states;
}

double PrototypeTemplate::density() const noexcept {
  const auto n = static_cast<double>(bits.size());
  if (n < 2.0) return 0.0;
  return static_cast<double>(bits.popcount()) / (n * (n - 1.0));
}

PrototypeTemplate binarize(const PrototypeState& state, double sparsity_fraction) {
  if (!(sparsity_fraction > 0.0 && sparsity_fraction < 1.0))
    throw ConfigError("sparsity_fraction must be in (0,1)");
  const auto n = state.n_units;
  PrototypeTemplate prototype;
  prototype.class_id = state.class_id;
  prototype.update_count = state.update_count;
  prototype.bits = SquareBitMatrix(n);
  prototype.threshold = 0.0f;
  if (n < 2) return prototype;

  bool any_nonzero = false;
  for (float value : state.strengths)
    if (value != 0.0f) {
      any_nonzero = true;
      break;
    }
  // A never-updated (all-zero) state binarizes to the all-zero template;
  // thresholding at the quantile would otherwise turn an unseen class into
  // an all-ones template that dominates every prediction.
  if (!any_nonzero) return prototype;

  std::vector<float> off_diagonal;
  off_diagonal.reserve(std::size_t{n} * (n - 1));
  for (std::uint32_t i = 0; i < n; ++i) {
    const float* row = state.strengths.data() + std::size_t{i} * n;
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != i) off_diagonal.push_back(row[j]);
  }
  const std::size_t rank = quantile_rank(sparsity_fraction, off_diagonal.size());
  std::nth_element(off_diagonal.begin(), off_diagonal.begin() + (rank - 1), off_diagonal.end());
  const float threshold = off_diagonal[rank - 1];

  prototype.threshold = threshold;
  for (std::uint32_t i = 0; i < n; ++i) {
    const float* row = state.strengths.data() + std::size_t{i} * n;
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != i && row[j] >= threshold) prototype.bits.set(i, j);
  }
  return prototype;
}

std::uint64_t score(const PrototypeTemplate& prototype, const CoactivationMask& mask) {
  if (prototype.bits.size() != mask.n_units())
    throw DataError("template size " + std::to_string(prototype.bits.size()) +
                    " does not match mask size " + std::to_string(mask.n_units()));
  return SquareBitMatrix::overlap(prototype.bits, mask.bits);
}

std::uint64_t score_buckets(const PrototypeTemplate& prototype, const CoactivationMask& mask) {
  if (prototype.bits.size() != mask.n_units())
    throw DataError("template size does not match mask size");
  const std::uint32_t words_per_row = prototype.bits.words_per_row();
  std::vector<std::uint64_t> bucket_words(words_per_row);
  std::uint64_t total = 0;
  for (const auto& bucket : mask.level_buckets) {
    if (bucket.size() < 2) continue;
    std::fill(bucket_words.begin(), bucket_words.end(), 0);
    for (std::uint32_t j : bucket) bucket_words[j >> 6] |= std::uint64_t{1} << (j & 63);
    for (std::uint32_t i : bucket) {
      const auto row = prototype.bits.row(i);
      // The template diagonal is zero, so including bit i in the bucket word
      // mask contributes nothing.
      for (std::uint32_t w = 0; w < words_per_row; ++w)
        total += static_cast<std::uint64_t>(std::popcount(row[w] & bucket_words[w]));
    }
  }
  return total;
}

void RecapModel::validate() const {
  if (templates.size() != static_cast<std::size_t>(hebb.classes))
    throw DataError("model must hold exactly one template per class");
  for (std::size_t c = 0; c < templates.size(); ++c) {
    if (templates[c].class_id != static_cast<int>(c))
      throw DataError("template class ids must be 0..C-1 in order");
    if (templates[c].bits.size() != static_cast<std::uint32_t>(reservoir.spec.n_units))
      throw DataError("template size does not match reservoir size");
  }
}

Prediction predict(const RecapModel& model, const Eigen::VectorXd& input) {
  const StateVector state = run_to_average(model.reservoir, input);
  const CoactivationMask mask = build_mask(quantize(state, model.quantizer));

  Prediction prediction;
  prediction.scores.resize(model.templates.size());
  for (std::size_t c = 0; c < model.templates.size(); ++c)
    prediction.scores[c] = score(model.templates[c], mask);

  std::size_t best = 0;
  for (std::size_t c = 1; c < prediction.scores.size(); ++c)
    if (prediction.scores[c] > prediction.scores[best]) best = c;
  prediction.class_id = static_cast<int>(best);
  return prediction;
}

std::vector<int> predict_batch(const RecapModel& model, const ImageBatch& batch, int threads) {
  std::vector<int> predictions(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      predictions[i] = predict(model, image_as_input(batch, i)).class_id;
  });
  return predictions;
}

}  // namespace recap
