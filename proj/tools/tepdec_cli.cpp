// tepdec: build codes, generate training data, train the guide network,
// decode single frames, and run Monte-Carlo benchmark campaigns.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tepdec/bench.hpp"
#include "tepdec/channel.hpp"
#include "tepdec/decoders.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/tep.hpp"
#include "tepdec/trainer.hpp"

namespace {

using namespace tepdec;

int cmd_build_code(const std::string& spec, const std::string& out, bool with_min_distance) {
  LinearCode code = resolve_code(spec);
  if (!out.empty()) save_code_file(code, out);
  std::cout << "name " << code.name << "\n";
  std::cout << "n " << code.n << "\n";
  std::cout << "k " << code.k << "\n";
  if (with_min_distance) std::cout << "min_distance " << min_distance_bruteforce(code) << "\n";
  if (!out.empty()) std::cout << "saved " << out << "\n";
  return 0;
}

int cmd_gen_data(const std::string& spec, std::size_t count, const DatasetOptions& opts,
                 std::uint64_t seed, const std::string& out) {
  LinearCode code = resolve_code(spec);
  Rng rng(seed);
  DatasetStats stats;
  auto samples = generate_dataset(code, count, opts, rng, &stats);
  save_dataset_file(code, opts.m, samples, out);
  std::cout << "kept " << stats.kept << "\n";
  std::cout << "discarded " << stats.discarded << "\n";
  std::cout << "saved " << out << "\n";
  return 0;
}

struct TrainCli {
  std::string preset;
  std::string code_spec = "ebch32";
  std::string data_path;       // load instead of generating
  std::size_t samples = 1000;  // generated dataset size without --data
  double snr_lo = 0.0, snr_hi = 5.0;
  unsigned oracle_order = 4;
  bool stratify = false;
  bool random_messages = false;
  TrainConfig config;
  std::string out_model = "model.bin";
  std::string out_metrics;
  bool quiet = false;
};

int cmd_train(TrainCli& cli, const CLI::App& app) {
  if (!cli.preset.empty()) {
    const TrainPreset* preset = find_train_preset(cli.preset);
    if (!preset) throw std::invalid_argument("unknown train preset: " + cli.preset);
    // preset supplies defaults; explicit flags still win
    if (!app.count("--code")) cli.code_spec = preset->code;
    if (!app.count("--samples")) cli.samples = preset->dataset_size;
    TrainConfig base = preset->config;
    if (app.count("--m")) base.m = cli.config.m;
    if (app.count("--episodes")) base.episodes = cli.config.episodes;
    if (app.count("--epochs")) base.epochs = cli.config.epochs;
    if (app.count("--layers")) base.hidden_layers = cli.config.hidden_layers;
    if (app.count("--units")) base.hidden_units = cli.config.hidden_units;
    if (app.count("--batch")) base.batch_size = cli.config.batch_size;
    if (app.count("--lr")) base.learning_rate = cli.config.learning_rate;
    if (app.count("--c-puct")) base.c_puct = cli.config.c_puct;
    if (app.count("--seed")) base.seed = cli.config.seed;
    if (app.count("--max-steps")) base.max_steps = cli.config.max_steps;
    if (app.count("--classic-mcts")) base.classic_mcts = cli.config.classic_mcts;
    cli.config = base;
    if (preset->long_running && !cli.quiet)
      std::cout << "# preset " << preset->name << " is a long-running full-scale budget\n";
  }
  LinearCode code = resolve_code(cli.code_spec);

  std::vector<TrainingSample> samples;
  if (!cli.data_path.empty()) {
    DatasetFile file = load_dataset_file(cli.data_path);
    if (file.n != code.n || file.k != code.k)
      throw std::invalid_argument("dataset code shape mismatch");
    samples = std::move(file.samples);
  } else {
    DatasetOptions opts;
    opts.snr_lo = cli.snr_lo;
    opts.snr_hi = cli.snr_hi;
    opts.m = cli.config.m;
    opts.oracle_order = cli.oracle_order;
    opts.random_messages = cli.random_messages;
    opts.stratify_by_weight = cli.stratify;
    Rng rng(cli.config.seed);
    samples = generate_dataset(code, cli.samples, opts, rng);
    if (!cli.quiet) std::cout << "generated " << samples.size() << " samples\n";
  }

  TrainResult result = train(code, samples, cli.config, cli.quiet ? nullptr : &std::cout);
  save_checkpoint(result.model, cli.out_model);
  if (!cli.out_metrics.empty()) {
    std::ofstream f(cli.out_metrics);
    if (!f) throw std::runtime_error("cannot write " + cli.out_metrics);
    write_metrics_csv(result.metrics, f);
  }
  std::cout << "saved " << cli.out_model << "\n";
  return 0;
}

int cmd_decode(const std::string& spec, const std::string& frame_path,
               const std::string& decoder, unsigned order, const std::string& model_path,
               std::uint64_t budget, const std::string& stop_name, double tau) {
  LinearCode code = resolve_code(spec);
  ReceivedFrame frame = load_frame_file(frame_path);
  if (frame.r.size() != code.n) throw std::invalid_argument("frame length != n");

  StoppingRule stop = StoppingRule::none();
  if (stop_name == "perfect")
    stop = StoppingRule::perfect(mld_exhaustive(code, frame.r));
  else if (stop_name == "probability")
    stop = StoppingRule::probability(tau);
  else if (stop_name != "none")
    throw std::invalid_argument("unknown stop rule: " + stop_name);

  DecodeOutcome out;
  if (decoder == "osd")
    out = osd_decode(code, frame.r, frame.llr, order, stop);
  else if (decoder == "nonge-osd")
    out = non_ge_osd_decode(code, frame.r, frame.llr, order, stop);
  else if (decoder == "mld")
    out = mld_decode(code, frame.r);
  else if (decoder == "mcts")
    out = mcts_decode(code, frame.r, frame.llr, order,
                      load_checkpoint(model_path, static_cast<unsigned>(code.k),
                                      static_cast<unsigned>(code.n)),
                      budget, stop);
  else
    throw std::invalid_argument("unknown decoder: " + decoder);

  std::cout << "codeword " << out.codeword.to_string() << "\n";
  std::cout << "distance " << format_double(out.distance) << "\n";
  std::cout << "teps_visited " << out.teps_visited << "\n";
  std::cout << "stop_reason " << stop_reason_name(out.reason) << "\n";
  std::cout << "correct " << (out.codeword == frame.codeword ? 1 : 0) << "\n";
  std::cout << "wall_time_us " << format_double(out.wall_time_s * 1e6) << "\n";
  return 0;
}

int cmd_bench(const std::string& preset, const std::string& config_path,
              const std::vector<std::string>& sets, bool quiet) {
  ExperimentConfig cfg;
  if (!preset.empty())
    cfg = bench_preset(preset);
  else if (!config_path.empty())
    cfg = load_config_file(config_path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set wants key=value: " + kv);
    set_config(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  BenchResult result = run_benchmark_files(cfg);
  if (!quiet) write_summary_csv(result, std::cout);
  return 0;
}

int cmd_inspect_tree(unsigned k, unsigned m) {
  TepTree tree({k, m});
  const std::size_t count = tree.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& node = tree.node(i);
    std::cout << node.depth << " " << node.tep.to_bits(k).to_string();
    if (node.parent == TepTree::npos) {
      std::cout << " - -\n";
      continue;
    }
    const auto& parent = tree.node(static_cast<std::size_t>(node.parent));
    const Action action =
        parent.child[0] == static_cast<std::int32_t>(i) ? Action::extend : Action::adjacent;
    std::cout << " " << parent.tep.to_bits(k).to_string() << " " << action_name(action) << "\n";
  }
  return 0;
}

int cmd_describe_model(const std::string& path) {
  PolicyModel model = load_checkpoint(path);
  std::cout << "k " << model.k << "\n";
  std::cout << "n " << model.n << "\n";
  std::cout << "d_in " << model.input_dim << "\n";
  std::cout << "hidden_layers " << model.hidden_layers << "\n";
  std::cout << "hidden_units " << model.hidden_units << "\n";
  std::cout << "parameters " << model.parameter_count() << "\n";
  std::cout << "forward_macs " << model.forward_macs() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TEP-tree decoding toolkit for short binary block codes"};
  app.require_subcommand(1);

  // build-code
  std::string bc_code = "ebch32", bc_out;
  bool bc_mind = false;
  auto* build_code = app.add_subcommand("build-code", "construct a code and print its shape");
  build_code->add_option("--code", bc_code, "ebch32 | qr48 | path to a saved code");
  build_code->add_option("--out", bc_out, "write the generator matrix to this file");
  build_code->add_flag("--min-distance", bc_mind, "also run the exhaustive weight enumeration");

  // gen-data
  std::string gd_code = "ebch32", gd_out = "dataset.txt";
  std::size_t gd_count = 1000;
  std::uint64_t gd_seed = 1;
  DatasetOptions gd_opts;
  auto* gen_data = app.add_subcommand("gen-data", "sample labeled frames for training");
  gen_data->add_option("--code", gd_code, "code spec");
  gen_data->add_option("--count", gd_count, "samples to keep");
  gen_data->add_option("--m", gd_opts.m, "max target weight");
  gen_data->add_option("--snr-lo", gd_opts.snr_lo, "SNR range low (dB)");
  gen_data->add_option("--snr-hi", gd_opts.snr_hi, "SNR range high (dB)");
  gen_data->add_option("--oracle-order", gd_opts.oracle_order, "label OSD order");
  gen_data->add_flag("--random-messages", gd_opts.random_messages, "draw random messages");
  gen_data->add_flag("--stratify", gd_opts.stratify_by_weight, "balance target weights");
  gen_data->add_option("--seed", gd_seed, "rng seed");
  gen_data->add_option("--out", gd_out, "output dataset file");

  // train
  TrainCli tc;
  auto* train_cmd = app.add_subcommand("train", "fit the guide network with tree search");
  train_cmd->add_option("--preset", tc.preset, "ebch32-desk | ebch32-paper | qr48-paper");
  train_cmd->add_option("--code", tc.code_spec, "code spec");
  train_cmd->add_option("--data", tc.data_path, "dataset file (generated when omitted)");
  train_cmd->add_option("--samples", tc.samples, "generated dataset size");
  train_cmd->add_option("--snr-lo", tc.snr_lo, "generated dataset SNR low");
  train_cmd->add_option("--snr-hi", tc.snr_hi, "generated dataset SNR high");
  train_cmd->add_option("--oracle-order", tc.oracle_order, "label OSD order");
  train_cmd->add_flag("--stratify", tc.stratify, "balance target weights");
  train_cmd->add_flag("--random-messages", tc.random_messages, "draw random messages");
  train_cmd->add_option("--m", tc.config.m, "max TEP weight");
  train_cmd->add_option("--max-steps", tc.config.max_steps, "episode step budget, 0 = depth");
  train_cmd->add_option("--episodes", tc.config.episodes, "episodes per sample (K)");
  train_cmd->add_option("--epochs", tc.config.epochs, "training epochs");
  train_cmd->add_option("--layers", tc.config.hidden_layers, "hidden layers");
  train_cmd->add_option("--units", tc.config.hidden_units, "hidden units");
  train_cmd->add_option("--batch", tc.config.batch_size, "replay batch size");
  train_cmd->add_option("--lr", tc.config.learning_rate, "Adam learning rate");
  train_cmd->add_option("--c-puct", tc.config.c_puct, "exploration constant");
  train_cmd->add_option("--seed", tc.config.seed, "rng seed");
  train_cmd->add_flag("--classic-mcts", tc.config.classic_mcts, "one expansion per episode");
  train_cmd->add_option("--out", tc.out_model, "checkpoint path");
  train_cmd->add_option("--metrics", tc.out_metrics, "epoch metrics CSV path");
  train_cmd->add_flag("--quiet", tc.quiet, "suppress progress lines");

  // decode
  std::string dc_code = "ebch32", dc_frame, dc_decoder = "osd", dc_model, dc_stop = "none";
  unsigned dc_order = 3;
  std::uint64_t dc_budget = 0;
  double dc_tau = 0.9;
  auto* decode = app.add_subcommand("decode", "decode one saved frame");
  decode->add_option("--code", dc_code, "code spec");
  decode->add_option("--frame", dc_frame, "frame file")->required();
  decode->add_option("--decoder", dc_decoder, "osd | nonge-osd | mcts | mld");
  decode->add_option("--order", dc_order, "max TEP weight");
  decode->add_option("--model", dc_model, "checkpoint for the guided decoder");
  decode->add_option("--budget", dc_budget, "guided TEP budget, 0 = full tree");
  decode->add_option("--stop", dc_stop, "none | perfect | probability");
  decode->add_option("--tau", dc_tau, "probability threshold");

  // bench
  std::string bn_preset, bn_config;
  std::vector<std::string> bn_sets;
  bool bn_quiet = false;
  auto* bench = app.add_subcommand("bench", "Monte-Carlo campaign over an SNR grid");
  bench->add_option("--preset", bn_preset, "ebch32-quick | ebch32-paper-shape");
  bench->add_option("--config", bn_config, "key=value config file");
  bench->add_option("--set", bn_sets, "override, e.g. --set decoders=osd,mld");
  bench->add_flag("--quiet", bn_quiet, "omit the stdout summary");

  // inspect-tree
  unsigned it_k = 5, it_m = 3;
  auto* inspect = app.add_subcommand("inspect-tree", "print every node in preorder");
  inspect->add_option("--k", it_k, "information length");
  inspect->add_option("--m", it_m, "max weight");

  // describe-model
  std::string dm_model;
  auto* describe = app.add_subcommand("describe-model", "print checkpoint dimensions");
  describe->add_option("--model", dm_model, "checkpoint path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build_code->parsed()) return cmd_build_code(bc_code, bc_out, bc_mind);
    if (gen_data->parsed()) return cmd_gen_data(gd_code, gd_count, gd_opts, gd_seed, gd_out);
    if (train_cmd->parsed()) return cmd_train(tc, *train_cmd);
    if (decode->parsed())
      return cmd_decode(dc_code, dc_frame, dc_decoder, dc_order, dc_model, dc_budget, dc_stop,
                        dc_tau);
    if (bench->parsed()) return cmd_bench(bn_preset, bn_config, bn_sets, bn_quiet);
    if (inspect->parsed()) return cmd_inspect_tree(it_k, it_m);
    if (describe->parsed()) return cmd_describe_model(dm_model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
