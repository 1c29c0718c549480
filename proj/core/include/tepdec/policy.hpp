#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tepdec/bits.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/tep.hpp"

namespace tepdec {

struct ActionMask {
  bool legal[2] = {false, false};
  unsigned count() const { return unsigned(legal[0]) + unsigned(legal[1]); }
  bool operator==(const ActionMask&) const = default;
};
ActionMask legal_actions(const Tep& t, const TreeParams& p);

struct ActionProbs {
  double p[2] = {0.0, 0.0};
};

// Dense ReLU network mapping a tree-state feature vector to two action
// logits. weights[l] is row-major (out x in); layer 0 reads the input, the
// final layer emits the logits.
struct PolicyModel {
  unsigned k = 0, n = 0;
  unsigned input_dim = 0;
  unsigned hidden_layers = 0;
  unsigned hidden_units = 0;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::size_t parameter_count() const;
  // multiply-accumulate count of one forward pass:
  // input_dim*u + (h-1)*u^2 + u*2
  std::uint64_t forward_macs() const;
};

// k + k*n + 2n + 1
unsigned policy_input_dim(unsigned k, unsigned n);

// Uniform(-a, a) with a = sqrt(6/(fan_in+fan_out)) per layer, biases zero.
PolicyModel init_policy(unsigned k, unsigned n, unsigned hidden_layers, unsigned hidden_units,
                        std::uint64_t seed);
// Arbitrary input width for small test models; k = n = 0, not checkpointable.
PolicyModel init_policy_raw(unsigned input_dim, unsigned hidden_layers, unsigned hidden_units,
                            std::uint64_t seed);
void validate(const PolicyModel& model);

struct FeatureOptions {
  // The flattened generator is a constant input block; dropping it is an
  // ablation that leaves only per-node signals.
  bool include_generator = true;
};

// Fixed layout: [tep bits (k) | candidate bits (n) | distance (1) |
// generator row-major (k*n) | normalized llr (n)].
std::vector<double> featurize(const LinearCode& code, const Tep& tep, const BitVector& candidate,
                              double distance, std::span<const double> llr_norm,
                              const FeatureOptions& opts = {});

// Masked softmax over the legal logits; illegal actions get exactly 0 and a
// single legal action gets exactly 1 (no network evaluation needed for the
// latter, but this function still runs the layers).
ActionProbs forward(const PolicyModel& model, std::span<const double> features,
                    const ActionMask& mask);

struct TrainBatchEntry {
  std::vector<double> features;
  ActionMask mask;
  double target[2] = {0.0, 0.0};  // visit distribution over legal actions
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};
Gradients zero_gradients(const PolicyModel& model);

// Mean cross-entropy of the masked softmax against the visit targets,
// gradients by backpropagation. log arguments are clamped at 1e-12.
double loss_and_grad(const PolicyModel& model, std::span<const TrainBatchEntry> batch,
                     Gradients& out);

struct AdamState {
  double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};
AdamState make_adam(const PolicyModel& model, double lr = 1e-4);
// Throws std::runtime_error on non-finite gradients (training divergence).
void adam_step(PolicyModel& model, AdamState& state, const Gradients& grads);

// Self-describing binary: magic, version, k, n, h, units, then per layer the
// weight matrix followed by the bias vector as little-endian doubles.
void save_checkpoint(const PolicyModel& model, const std::string& path);
PolicyModel load_checkpoint(const std::string& path, unsigned expect_k = 0,
                            unsigned expect_n = 0);

// Repeated forward passes against one frame share almost all of the first
// layer: the generator block is folded in at construction, the llr block once
// per frame, and each tree node then contributes a handful of sparse column
// updates. Scratch buffers make this type single-threaded; use one instance
// per worker.
class PolicyForward {
public:
  PolicyForward(const PolicyModel& model, const LinearCode& code, const FeatureOptions& opts = {});

  std::vector<double> frame_offset(std::span<const double> llr_norm) const;

  // Equivalent to forward(model, featurize(...), mask) up to float ordering.
  ActionProbs priors(std::span<const double> frame_offset, const Tep& tep,
                     const BitVector& candidate, double distance, const ActionMask& mask);

  const PolicyModel& model() const { return *model_; }

private:
  const PolicyModel* model_;
  unsigned k_, n_;
  std::vector<double> w0t_;   // first layer transposed (input x units)
  std::vector<double> base_;  // first-layer bias plus generator contribution
  std::vector<double> h_, h2_;
};

}  // namespace tepdec
