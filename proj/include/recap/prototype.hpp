#pragma once

#include <cstdint>
#include <vector>

#include "recap/dataio.hpp"
#include "recap/encoding.hpp"
#include "recap/model_meta.hpp"
#include "recap/reservoir.hpp"

namespace recap {

// Potentiation-decay plasticity parameters and prototype sparsification
// target.
struct HebbSpec {
  double potentiation = 0.6;       // added to co-activated pairs, clamped to 1
  double decay = 0.96;             // multiplies non-co-activated pairs
  int classes = kNumClasses;
  double sparsity_fraction = 0.3;  // target density p of the binary templates

  void validate() const;  // throws ConfigError
  bool operator==(const HebbSpec&) const = default;
};

// Continuous per-class co-activation statistics. Entries live in [0,1] with a
// zero diagonal; stored dense 32-bit because the decay branch touches every
// entry on every class sample.
struct PrototypeState {
  int class_id = 0;
  std::uint32_t n_units = 0;
  std::vector<float> strengths;  // n_units * n_units, row-major
  std::uint64_t update_count = 0;

  float at(std::uint32_t i, std::uint32_t j) const noexcept {
    return strengths[std::size_t{i} * n_units + j];
  }
};

PrototypeState make_prototype_state(int class_id, std::uint32_t n_units);

// Quantile-thresholded binary prototype.
struct PrototypeTemplate {
  int class_id = 0;
  SquareBitMatrix bits;
  float threshold = 0.0f;
  std::uint64_t update_count = 0;

  // Fraction of off-diagonal ones.
  double density() const noexcept;
};

// One potentiation-decay step: co-activated pairs gain `potentiation` (clamped
// into [0,1]), all other off-diagonal pairs decay multiplicatively, and the
// diagonal is re-zeroed. The three implementations below are required to be
// byte-identical in effect; `hebbian_update` is the production path (row-wise
// decay with gather/scatter over the mask's level buckets), the other two
// follow the piecewise and matrix formulations literally and exist as
// cross-checked reference routes.
void hebbian_update(PrototypeState& state, const CoactivationMask& mask, const HebbSpec& spec);
void hebbian_update_piecewise(PrototypeState& state, const CoactivationMask& mask,
                              const HebbSpec& spec);
void hebbian_update_matrix(PrototypeState& state, const CoactivationMask& mask,
                           const HebbSpec& spec);

// Class-conditional training: every sample updates only its own class's
// prototype, in dataset order. Rollout and encoding of upcoming samples is
// pipelined across `threads` workers; updates themselves stay sequential.
// An empty dataset yields all-zero states (with a warning on stderr).
std::vector<PrototypeState> train_prototypes(const Dataset& dataset,
                                             const ReservoirWeights& reservoir,
                                             const QuantizerSpec& quantizer, const HebbSpec& spec,
                                             int epochs = 1, int threads = 1);

// Threshold at the nearest-rank (1-p) quantile of the off-diagonal entries;
// bits are S_ij >= theta with the diagonal excluded. An all-zero state yields
// an all-zero template so an untrained class can never win a prediction.
PrototypeTemplate binarize(const PrototypeState& state, double sparsity_fraction);

// Overlap score <P, M>_F. `score` goes through the packed-word kernel;
// `score_buckets` walks the mask's level buckets and must agree exactly.
std::uint64_t score(const PrototypeTemplate& prototype, const CoactivationMask& mask);
std::uint64_t score_buckets(const PrototypeTemplate& prototype, const CoactivationMask& mask);

// Complete inference bundle.
struct RecapModel {
  ReservoirWeights reservoir;
  QuantizerSpec quantizer;
  HebbSpec hebb;
  std::vector<PrototypeTemplate> templates;  // index == class id
  std::vector<PrototypeState> states;        // optional, kept for resumable training
  ModelMeta meta;

  void validate() const;  // throws DataError when templates are inconsistent
};

struct Prediction {
  int class_id = 0;
  std::vector<std::uint64_t> scores;
};

// Rollout -> quantize -> mask -> argmax of template overlaps. Ties break
// toward the lowest class id.
Prediction predict(const RecapModel& model, const Eigen::VectorXd& input);

std::vector<int> predict_batch(const RecapModel& model, const ImageBatch& batch, int threads = 1);

}  // namespace recap
