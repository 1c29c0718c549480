#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tepdec/channel.hpp"
#include "tepdec/decoders.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/mcts.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/tep.hpp"

namespace tepdec {

struct TrainingSample {
  std::vector<double> r;
  BitVector oracle_codeword;  // near-MLD label from high-order OSD
  Tep target;                 // flips turning the first k hard decisions into the label
  double snr_db = 0.0;
};

struct DatasetOptions {
  double snr_lo = 0.0, snr_hi = 5.0;
  unsigned m = 5;             // samples whose target weight exceeds m are discarded
  unsigned oracle_order = 4;  // label OSD order, no early stopping
  bool random_messages = false;
  // best-effort equal share per target weight 0..m; gives up on starved
  // weight classes after 50x oversampling
  bool stratify_by_weight = false;
};

struct DatasetStats {
  std::uint64_t kept = 0;
  std::uint64_t discarded = 0;
};

// nullopt when the derived target weighs more than opts.m.
std::optional<TrainingSample> make_sample(const LinearCode& code, const ReceivedFrame& frame,
                                          const DatasetOptions& opts);

// Draws snr ~ U[lo, hi] per frame and regenerates until `count` samples pass
// the weight filter.
std::vector<TrainingSample> generate_dataset(const LinearCode& code, std::size_t count,
                                             const DatasetOptions& opts, Rng& rng,
                                             DatasetStats* stats = nullptr);

// Text format: "name n k m count" header, then per sample four lines:
// snr_db, received values, label codeword bits, target weight + indices.
void save_dataset(const LinearCode& code, unsigned m,
                  std::span<const TrainingSample> samples, std::ostream& out);
void save_dataset_file(const LinearCode& code, unsigned m,
                       std::span<const TrainingSample> samples, const std::string& path);
struct DatasetFile {
  std::string code_name;
  std::size_t n = 0, k = 0;
  unsigned m = 0;
  std::vector<TrainingSample> samples;
};
DatasetFile load_dataset(std::istream& in);
DatasetFile load_dataset_file(const std::string& path);

struct TrainConfig {
  unsigned m = 5;
  unsigned max_steps = 0;  // per-episode budget M; 0 means m(2k-m+1)/2
  unsigned episodes = 500;  // K per sample
  unsigned epochs = 20;
  unsigned hidden_layers = 3;
  unsigned hidden_units = 128;
  std::size_t batch_size = 4096;
  double learning_rate = 1e-4;
  double c_puct = 1.38;
  std::uint64_t seed = 1;
  bool classic_mcts = false;
  ReachRule reach_rule = ReachRule::allow_equal_tail;
  bool include_generator_feature = true;
  bool pi_include_single_action = false;
};

struct EpochMetrics {
  unsigned epoch = 0;
  double loss = 0.0;  // mean over this epoch's optimizer steps, 0 when none
  double avg_episodes_to_target = 0.0;  // episodes count as K when never found
  std::uint64_t buffer_steps = 0;
};

struct TrainResult {
  PolicyModel model;
  std::vector<EpochMetrics> metrics;
};

// Algorithm: per epoch, per sample, run K guided episodes on a fresh search
// tree, harvest visit distributions into the replay buffer, and take one
// optimizer step whenever the buffer holds exactly batch_size entries; a
// partial buffer is flushed with one step at each epoch end. The per-sample
// episode loop breaks early once an episode reports the target found.
// Throws std::runtime_error when the loss turns non-finite.
TrainResult train(const LinearCode& code, std::span<const TrainingSample> samples,
                  const TrainConfig& config, std::ostream* log = nullptr);

// header: epoch,loss,avg_episodes_to_target,buffer_steps
void write_metrics_csv(std::span<const EpochMetrics> metrics, std::ostream& out);

struct EvalResult {
  double mean_teps = 0.0;
  std::vector<std::uint64_t> per_frame;
};

// Runs the guided decoder under perfect stopping (oracle = exhaustive MLD
// per frame); the mean visited-TEP count measures search efficiency.
EvalResult evaluate_policy(const PolicyModel& model, const LinearCode& code,
                           std::span<const ReceivedFrame> frames, unsigned m,
                           std::uint64_t budget = 0);

struct TrainPreset {
  std::string name;
  std::string code;  // resolve_code() spec
  std::size_t dataset_size = 0;
  TrainConfig config;
  bool long_running = false;
};
const std::vector<TrainPreset>& train_presets();
const TrainPreset* find_train_preset(const std::string& name);

}  // namespace tepdec
