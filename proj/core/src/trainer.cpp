#include "tepdec/trainer.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tepdec {

std::optional<TrainingSample> make_sample(const LinearCode& code, const ReceivedFrame& frame,
                                          const DatasetOptions& opts) {
  const DecodeOutcome oracle =
      osd_decode(code, frame.r, frame.llr, opts.oracle_order, StoppingRule::none());
  const BitVector b0 = hard_decision_prefix(frame.r, code.k);
  Tep target;
  for (std::size_t i = 0; i < code.k; ++i)
    if (b0.get(i) != oracle.codeword.get(i)) target.indices.push_back(static_cast<unsigned>(i + 1));
  if (target.weight() > opts.m) return std::nullopt;
  TrainingSample s;
  s.r = frame.r;
  s.oracle_codeword = oracle.codeword;
  s.target = std::move(target);
  s.snr_db = frame.snr_db;
  return s;
}

std::vector<TrainingSample> generate_dataset(const LinearCode& code, std::size_t count,
                                             const DatasetOptions& opts, Rng& rng,
                                             DatasetStats* stats) {
  if (opts.oracle_order > code.k) throw std::invalid_argument("oracle_order > k");
  if (opts.snr_hi < opts.snr_lo) throw std::invalid_argument("snr_hi < snr_lo");
  std::vector<TrainingSample> out;
  out.reserve(count);
  DatasetStats local;
  std::vector<std::size_t> per_weight(opts.m + 1, 0);
  const std::size_t bucket_cap = count == 0 ? 0 : (count + opts.m) / (opts.m + 1);
  const std::uint64_t max_attempts = 50 * static_cast<std::uint64_t>(count) + 100;
  std::uint64_t attempts = 0;
  BitVector zero_msg(code.k);
  while (out.size() < count) {
    ++attempts;
    const double snr = opts.snr_lo + (opts.snr_hi - opts.snr_lo) * rng.uniform();
    BitVector msg = zero_msg;
    if (opts.random_messages)
      for (std::size_t i = 0; i < code.k; ++i) msg.set(i, rng.next_u64() & 1);
    const ReceivedFrame frame = simulate(code, msg, snr, rng);
    auto sample = make_sample(code, frame, opts);
    if (!sample) {
      ++local.discarded;
      continue;
    }
    if (opts.stratify_by_weight && attempts <= max_attempts) {
      auto& bucket = per_weight[sample->target.weight()];
      if (bucket >= bucket_cap) {
        ++local.discarded;
        continue;
      }
      ++bucket;
    }
    out.push_back(std::move(*sample));
    ++local.kept;
  }
  if (stats) *stats = local;
  return out;
}

void save_dataset(const LinearCode& code, unsigned m, std::span<const TrainingSample> samples,
                  std::ostream& out) {
  out << code.name << ' ' << code.n << ' ' << code.k << ' ' << m << ' ' << samples.size() << '\n';
  for (const auto& s : samples) {
    out << format_double(s.snr_db) << '\n';
    for (std::size_t i = 0; i < s.r.size(); ++i) out << (i ? " " : "") << format_double(s.r[i]);
    out << '\n';
    for (std::size_t i = 0; i < s.oracle_codeword.size(); ++i)
      out << (i ? " " : "") << s.oracle_codeword.get(i);
    out << '\n';
    out << s.target.weight();
    for (unsigned idx : s.target.indices) out << ' ' << idx;
    out << '\n';
  }
}

void save_dataset_file(const LinearCode& code, unsigned m,
                       std::span<const TrainingSample> samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_dataset(code, m, samples, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetFile load_dataset(std::istream& in) {
  DatasetFile file;
  std::size_t count = 0;
  if (!(in >> file.code_name >> file.n >> file.k >> file.m >> count))
    throw std::runtime_error("malformed dataset header");
  if (file.k < 1 || file.k >= file.n) throw std::runtime_error("invalid dataset dimensions");
  file.samples.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    TrainingSample sample;
    if (!(in >> sample.snr_db)) throw std::runtime_error("truncated dataset");
    sample.r.resize(file.n);
    for (auto& v : sample.r)
      if (!(in >> v)) throw std::runtime_error("truncated dataset");
    sample.oracle_codeword = BitVector(file.n);
    for (std::size_t i = 0; i < file.n; ++i) {
      int bit = -1;
      if (!(in >> bit) || (bit != 0 && bit != 1)) throw std::runtime_error("bad codeword bit");
      sample.oracle_codeword.set(i, bit == 1);
    }
    std::size_t w = 0;
    if (!(in >> w) || w > file.m) throw std::runtime_error("bad target weight");
    sample.target.indices.resize(w);
    unsigned prev = 0;
    for (auto& idx : sample.target.indices) {
      if (!(in >> idx) || idx <= prev || idx > file.k) throw std::runtime_error("bad target index");
      prev = idx;
    }
    file.samples.push_back(std::move(sample));
  }
  return file;
}

DatasetFile load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_dataset(in);
}

TrainResult train(const LinearCode& code, std::span<const TrainingSample> samples,
                  const TrainConfig& config, std::ostream* log) {
  validate(code);
  if (samples.empty()) throw std::invalid_argument("empty dataset");
  if (config.m > code.k) throw std::invalid_argument("m > k");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size < 1");

  const FeatureOptions fopts{config.include_generator_feature};
  SearchParams sparams;
  sparams.tree = {static_cast<unsigned>(code.k), config.m};
  sparams.c_puct = config.c_puct;
  sparams.max_steps = config.max_steps;
  sparams.classic_mcts = config.classic_mcts;
  sparams.reach_rule = config.reach_rule;

  TrainResult result;
  result.model = init_policy(static_cast<unsigned>(code.k), static_cast<unsigned>(code.n),
                             config.hidden_layers, config.hidden_units, config.seed);
  AdamState adam = make_adam(result.model, config.learning_rate);

  // Forward caches bind to the current parameters; rebuild after each step.
  auto fwd = std::make_unique<PolicyForward>(result.model, code, fopts);

  std::vector<TrainBatchEntry> buffer;
  buffer.reserve(config.batch_size);
  Gradients grads;
  double epoch_loss_sum = 0.0;
  std::uint64_t epoch_steps = 0;

  auto optimizer_step = [&] {
    const double loss = loss_and_grad(result.model, buffer, grads);
    if (!std::isfinite(loss)) {
      std::ostringstream err;
      err << "training diverged: loss=" << loss << " at optimizer step " << (adam.step + 1);
      throw std::runtime_error(err.str());
    }
    adam_step(result.model, adam, grads);
    fwd = std::make_unique<PolicyForward>(result.model, code, fopts);
    buffer.clear();
    epoch_loss_sum += loss;
    epoch_steps += 1;
  };

  for (unsigned epoch = 0; epoch < config.epochs; ++epoch) {
    epoch_loss_sum = 0.0;
    epoch_steps = 0;
    std::uint64_t episode_sum = 0;
    for (const auto& sample : samples) {
      const std::vector<double> llr = [&] {
        // dataset stores r and the snr; reconstruct the llr scale
        const double sigma = noise_sigma(sample.snr_db);
        std::vector<double> v(sample.r.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * sample.r[i] / (sigma * sigma);
        return v;
      }();
      const FrameContext ctx = make_frame_context(code, sample.r, llr);
      const std::vector<double> offset = fwd->frame_offset(ctx.llr_norm);
      SearchTree tree(sparams, ctx);
      unsigned episodes_used = config.episodes;
      for (unsigned ep = 0; ep < config.episodes; ++ep) {
        const EpisodeOutcome oc = run_episode(tree, *fwd, offset, sample.target);
        if (oc.end == EpisodeEnd::target_found) {
          episodes_used = ep + 1;
          break;
        }
      }
      episode_sum += episodes_used;
      for (const VisitRecord& rec : visit_distributions(tree, config.pi_include_single_action)) {
        const SearchNode& node = tree.node(rec.node);
        TrainBatchEntry entry;
        entry.features =
            featurize(code, node.tep, node.candidate, node.distance, ctx.llr_norm, fopts);
        entry.mask = node.mask;
        entry.target[0] = rec.pi[0];
        entry.target[1] = rec.pi[1];
        buffer.push_back(std::move(entry));
        if (buffer.size() == config.batch_size) optimizer_step();
      }
    }
    if (!buffer.empty()) optimizer_step();

    EpochMetrics em;
    em.epoch = epoch;
    em.loss = epoch_steps ? epoch_loss_sum / static_cast<double>(epoch_steps) : 0.0;
    em.avg_episodes_to_target =
        static_cast<double>(episode_sum) / static_cast<double>(samples.size());
    em.buffer_steps = epoch_steps;
    result.metrics.push_back(em);
    if (log)
      *log << "epoch " << epoch << " loss " << em.loss << " episodes-to-target "
           << em.avg_episodes_to_target << " steps " << em.buffer_steps << '\n';
  }
  return result;
}

void write_metrics_csv(std::span<const EpochMetrics> metrics, std::ostream& out) {
  out << "epoch,loss,avg_episodes_to_target,buffer_steps\n";
  for (const auto& m : metrics)
    out << m.epoch << ',' << format_double(m.loss) << ','
        << format_double(m.avg_episodes_to_target) << ',' << m.buffer_steps << '\n';
}

EvalResult evaluate_policy(const PolicyModel& model, const LinearCode& code,
                           std::span<const ReceivedFrame> frames, unsigned m,
                           std::uint64_t budget) {
  EvalResult res;
  if (frames.empty()) return res;
  PolicyDecoder decoder(code, m, model);
  std::uint64_t total = 0;
  for (const auto& frame : frames) {
    const StoppingRule stop = StoppingRule::perfect(mld_exhaustive(code, frame.r));
    const DecodeOutcome out = decoder.decode(frame.r, frame.llr, budget, stop);
    res.per_frame.push_back(out.teps_visited);
    total += out.teps_visited;
  }
  res.mean_teps = static_cast<double>(total) / static_cast<double>(frames.size());
  return res;
}

const std::vector<TrainPreset>& train_presets() {
  static const std::vector<TrainPreset> presets = [] {
    std::vector<TrainPreset> v;
    {
      TrainPreset p;
      p.name = "ebch32-desk";
      p.code = "ebch32";
      p.dataset_size = 20'000;
      p.config.m = 5;
      p.config.episodes = 500;
      p.config.epochs = 20;
      p.config.hidden_layers = 3;
      v.push_back(p);
    }
    {
      TrainPreset p;
      p.name = "ebch32-paper";
      p.code = "ebch32";
      p.dataset_size = 110'000;
      p.config.m = 5;
      p.config.episodes = 3'000;
      p.config.epochs = 150;
      p.config.hidden_layers = 3;
      p.long_running = true;
      v.push_back(p);
    }
    {
      TrainPreset p;
      p.name = "qr48-paper";
      p.code = "qr48";
      p.dataset_size = 1'200'000;
      p.config.m = 6;
      p.config.episodes = 10'000;
      p.config.epochs = 150;
      p.config.hidden_layers = 6;
      p.long_running = true;
      v.push_back(p);
    }
    return v;
  }();
  return presets;
}

const TrainPreset* find_train_preset(const std::string& name) {
  for (const auto& p : train_presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace tepdec
