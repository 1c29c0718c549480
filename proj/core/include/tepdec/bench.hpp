#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tepdec/decoders.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/policy.hpp"

namespace tepdec {

// Monte-Carlo campaign over an SNR grid: each (snr, decoder, order) cell
// simulates frames until the block-error target or the frame cap.
struct ExperimentConfig {
  std::string code = "ebch32";
  std::vector<std::string> decoders = {"osd"};  // osd | nonge-osd | mcts | mld
  std::vector<unsigned> orders = {3};
  std::vector<double> snrs_db = {0.0, 2.0, 4.0};
  StopKind stop = StopKind::none;
  double tau = 0.9;
  std::uint64_t target_errors = 200;
  std::uint64_t max_frames = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t budget = 0;  // guided decoder TEP budget; 0 = full tree
  std::string model_path;    // guided decoder checkpoint
  std::string out_prefix;    // empty = no files
  unsigned threads = 1;
  bool measure_time = false;  // false writes 0 for reproducible bytes
  bool random_messages = false;
  bool gnuplot = false;
};

struct FrameRecord {
  std::uint64_t frame_id = 0;
  double snr_db = 0.0;
  std::string decoder;
  unsigned order = 0;
  std::uint64_t teps_visited = 0;
  double distance = 0.0;
  StopReason reason = StopReason::tree_exhausted;
  bool correct = false;
  double wall_time_us = 0.0;
};

struct MetricRow {
  double snr_db = 0.0;
  std::string decoder;
  unsigned order = 0;
  double bler = 0.0;
  double avg_teps = 0.0;
  double avg_time_s = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t errors = 0;
};

struct BenchResult {
  std::vector<MetricRow> rows;
  std::vector<FrameRecord> frames;
};

// model may be null when no guided decoder is requested. Frame streams are
// seeded per (seed, snr index, frame index), so results are identical for
// any thread count and frames are paired across decoders.
BenchResult run_benchmark(const ExperimentConfig& config, const LinearCode& code,
                          const PolicyModel* model);

// Convenience: resolves the code, loads the checkpoint when needed, writes
// the configured output files.
BenchResult run_benchmark_files(const ExperimentConfig& config);

void write_frame_csv(const BenchResult& result, std::ostream& out);
void write_summary_csv(const BenchResult& result, std::ostream& out);
// one file per (decoder, order): rows of "snr bler avg_teps"
void write_gnuplot_files(const BenchResult& result, const std::string& prefix);

// ebch32-quick: SNR {0,2,4}, 50 errors. ebch32-paper-shape: SNR 0..5, 200.
ExperimentConfig bench_preset(const std::string& name);
std::vector<std::string> bench_preset_names();

// Flat key=value assignment; keys mirror the field names (model = model_path,
// stop = none|perfect|probability). Lists are comma separated. Unknown keys
// and malformed values throw invalid_argument.
void set_config(ExperimentConfig& config, const std::string& key, const std::string& value);
// '#' comments and blank lines ignored
ExperimentConfig load_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);

std::vector<double> parse_double_list(const std::string& text);
std::vector<unsigned> parse_unsigned_list(const std::string& text);
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace tepdec
