#include "tepdec/bench.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tepdec/channel.hpp"
#include "tepdec/rng.hpp"

namespace tepdec {

namespace {

const char* kFrameHeader =
    "frame_id,snr_db,decoder,order,teps_visited,distance,stop_reason,correct,wall_time_us";
const char* kSummaryHeader = "snr_db,decoder,order,bler,avg_teps,avg_time_s,frames,errors";

std::string host_metadata() {
  utsname u{};
  if (uname(&u) != 0) return "# host: unknown";
  std::string s = "# host: ";
  s += u.nodename;
  s += " ";
  s += u.sysname;
  s += " ";
  s += u.release;
  s += " ";
  s += u.machine;
  return s;
}

bool known_decoder(const std::string& name) {
  return name == "osd" || name == "nonge-osd" || name == "mcts" || name == "mld";
}

struct Cell {
  std::string decoder;
  unsigned order = 0;  // 0 for mld
};

std::vector<Cell> make_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (const auto& d : cfg.decoders) {
    if (!known_decoder(d)) throw std::invalid_argument("unknown decoder: " + d);
    if (d == "mld") {
      cells.push_back({d, 0});
      continue;
    }
    if (cfg.orders.empty()) throw std::invalid_argument("orders empty");
    for (unsigned o : cfg.orders) cells.push_back({d, o});
  }
  return cells;
}

// Frames depend only on (seed, snr index, frame index) so every decoder
// cell sees the same transmissions.
ReceivedFrame gen_frame(const LinearCode& code, const ExperimentConfig& cfg, double snr_db,
                        std::uint64_t snr_index, std::uint64_t frame_id) {
  Rng rng = Rng(cfg.seed).substream(snr_index).substream(frame_id);
  BitVector msg(code.k);
  if (cfg.random_messages)
    for (std::size_t i = 0; i < code.k; ++i) msg.set(i, rng.next_u64() & 1);
  return simulate(code, msg, snr_db, rng);
}

StoppingRule make_stop(const ExperimentConfig& cfg, const LinearCode& code,
                       const ReceivedFrame& frame) {
  switch (cfg.stop) {
    case StopKind::perfect:
      return StoppingRule::perfect(mld_exhaustive(code, frame.r));
    case StopKind::probability:
      return StoppingRule::probability(cfg.tau);
    case StopKind::none:
      break;
  }
  return StoppingRule::none();
}

FrameRecord run_one(const LinearCode& code, const ExperimentConfig& cfg, const Cell& cell,
                    PolicyDecoder* guided, const ReceivedFrame& frame, std::uint64_t frame_id) {
  const StoppingRule stop = make_stop(cfg, code, frame);
  DecodeOutcome out;
  if (cell.decoder == "osd")
    out = osd_decode(code, frame.r, frame.llr, cell.order, stop);
  else if (cell.decoder == "nonge-osd")
    out = non_ge_osd_decode(code, frame.r, frame.llr, cell.order, stop);
  else if (cell.decoder == "mld")
    out = mld_decode(code, frame.r);
  else
    out = guided->decode(frame.r, frame.llr, cfg.budget, stop);
  FrameRecord rec;
  rec.frame_id = frame_id;
  rec.snr_db = frame.snr_db;
  rec.decoder = cell.decoder;
  rec.order = cell.order;
  rec.teps_visited = out.teps_visited;
  rec.distance = out.distance;
  rec.reason = out.reason;
  rec.correct = out.codeword == frame.codeword;
  rec.wall_time_us = cfg.measure_time ? out.wall_time_s * 1e6 : 0.0;
  return rec;
}

MetricRow summarize(double snr_db, const Cell& cell, std::span<const FrameRecord> recs) {
  MetricRow row;
  row.snr_db = snr_db;
  row.decoder = cell.decoder;
  row.order = cell.order;
  row.frames = recs.size();
  double teps = 0.0, us = 0.0;
  for (const auto& r : recs) {
    row.errors += r.correct ? 0 : 1;
    teps += static_cast<double>(r.teps_visited);
    us += r.wall_time_us;
  }
  const double n = static_cast<double>(row.frames);
  row.bler = row.frames ? static_cast<double>(row.errors) / n : 0.0;
  row.avg_teps = row.frames ? teps / n : 0.0;
  row.avg_time_s = row.frames ? (us / n) * 1e-6 : 0.0;
  return row;
}

}  // namespace

BenchResult run_benchmark(const ExperimentConfig& cfg, const LinearCode& code,
                          const PolicyModel* model) {
  if (cfg.snrs_db.empty()) throw std::invalid_argument("snr grid empty");
  if (cfg.decoders.empty()) throw std::invalid_argument("decoder list empty");
  if (cfg.target_errors < 1) throw std::invalid_argument("target_errors < 1");
  if (cfg.max_frames < 1) throw std::invalid_argument("max_frames < 1");
  if (cfg.threads < 1) throw std::invalid_argument("threads < 1");
  const auto cells = make_cells(cfg);
  const bool wants_guided =
      std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.decoder == "mcts"; });
  if (wants_guided && !model) throw std::invalid_argument("mcts decoder needs a model");

  BenchResult result;
  for (std::size_t si = 0; si < cfg.snrs_db.size(); ++si) {
    const double snr = cfg.snrs_db[si];
    for (const auto& cell : cells) {
      // one guided decoder per worker: the forward cache is not shareable
      std::vector<std::unique_ptr<PolicyDecoder>> guided(cfg.threads);
      if (cell.decoder == "mcts")
        for (auto& g : guided) g = std::make_unique<PolicyDecoder>(code, cell.order, *model);

      std::vector<FrameRecord> cell_recs;
      std::uint64_t errors = 0;
      std::uint64_t next_id = 0;
      while (errors < cfg.target_errors && cell_recs.size() < cfg.max_frames) {
        if (cfg.threads == 1) {
          const ReceivedFrame frame = gen_frame(code, cfg, snr, si, next_id);
          cell_recs.push_back(run_one(code, cfg, cell, guided[0].get(), frame, next_id));
          errors += cell_recs.back().correct ? 0 : 1;
          ++next_id;
          continue;
        }
        // chunked: workers fill a block, then the block is consumed in frame
        // order with the same cutoff a sequential run would hit
        const std::uint64_t chunk =
            std::min<std::uint64_t>(cfg.threads * 16, cfg.max_frames - cell_recs.size());
        std::vector<FrameRecord> block(chunk);
        std::vector<std::thread> pool;
        pool.reserve(cfg.threads);
        for (unsigned t = 0; t < cfg.threads; ++t) {
          pool.emplace_back([&, t] {
            for (std::uint64_t i = t; i < chunk; i += cfg.threads) {
              const std::uint64_t fid = next_id + i;
              const ReceivedFrame frame = gen_frame(code, cfg, snr, si, fid);
              block[i] = run_one(code, cfg, cell, guided[t].get(), frame, fid);
            }
          });
        }
        for (auto& th : pool) th.join();
        for (auto& rec : block) {
          if (errors >= cfg.target_errors || cell_recs.size() >= cfg.max_frames) break;
          errors += rec.correct ? 0 : 1;
          cell_recs.push_back(std::move(rec));
        }
        next_id += chunk;
      }
      result.rows.push_back(summarize(snr, cell, cell_recs));
      result.frames.insert(result.frames.end(), std::make_move_iterator(cell_recs.begin()),
                           std::make_move_iterator(cell_recs.end()));
    }
  }
  return result;
}

BenchResult run_benchmark_files(const ExperimentConfig& cfg) {
  const LinearCode code = resolve_code(cfg.code);
  PolicyModel model;
  const PolicyModel* model_ptr = nullptr;
  const bool wants_guided =
      std::any_of(cfg.decoders.begin(), cfg.decoders.end(),
                  [](const std::string& d) { return d == "mcts"; });
  if (wants_guided) {
    if (cfg.model_path.empty()) throw std::invalid_argument("mcts decoder needs model=");
    model = load_checkpoint(cfg.model_path, static_cast<unsigned>(code.k),
                            static_cast<unsigned>(code.n));
    model_ptr = &model;
  }
  BenchResult result = run_benchmark(cfg, code, model_ptr);
  if (!cfg.out_prefix.empty()) {
    {
      std::ofstream f(cfg.out_prefix + "frames.csv");
      if (!f) throw std::runtime_error("cannot write " + cfg.out_prefix + "frames.csv");
      write_frame_csv(result, f);
    }
    {
      std::ofstream f(cfg.out_prefix + "summary.csv");
      if (!f) throw std::runtime_error("cannot write " + cfg.out_prefix + "summary.csv");
      write_summary_csv(result, f);
    }
    if (cfg.gnuplot) write_gnuplot_files(result, cfg.out_prefix);
  }
  return result;
}

void write_frame_csv(const BenchResult& result, std::ostream& out) {
  out << host_metadata() << "\n" << kFrameHeader << "\n";
  for (const auto& r : result.frames) {
    out << r.frame_id << ',' << format_double(r.snr_db) << ',' << r.decoder << ',' << r.order
        << ',' << r.teps_visited << ',' << format_double(r.distance) << ','
        << stop_reason_name(r.reason) << ',' << (r.correct ? 1 : 0) << ','
        << format_double(r.wall_time_us) << "\n";
  }
}

void write_summary_csv(const BenchResult& result, std::ostream& out) {
  out << host_metadata() << "\n" << kSummaryHeader << "\n";
  for (const auto& row : result.rows) {
    out << format_double(row.snr_db) << ',' << row.decoder << ',' << row.order << ','
        << format_double(row.bler) << ',' << format_double(row.avg_teps) << ','
        << format_double(row.avg_time_s) << ',' << row.frames << ',' << row.errors << "\n";
  }
}

void write_gnuplot_files(const BenchResult& result, const std::string& prefix) {
  // one curve per (decoder, order), x = snr
  std::vector<std::pair<std::string, unsigned>> curves;
  for (const auto& row : result.rows) {
    std::pair<std::string, unsigned> key{row.decoder, row.order};
    if (std::find(curves.begin(), curves.end(), key) == curves.end()) curves.push_back(key);
  }
  for (const auto& [decoder, order] : curves) {
    std::ostringstream name;
    name << prefix << decoder << "-o" << order << ".dat";
    std::ofstream f(name.str());
    if (!f) throw std::runtime_error("cannot write " + name.str());
    f << "# snr_db bler avg_teps avg_time_s\n";
    for (const auto& row : result.rows)
      if (row.decoder == decoder && row.order == order)
        f << format_double(row.snr_db) << ' ' << format_double(row.bler) << ' '
          << format_double(row.avg_teps) << ' ' << format_double(row.avg_time_s) << "\n";
  }
}

ExperimentConfig bench_preset(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "ebch32-quick") {
    cfg.code = "ebch32";
    cfg.decoders = {"osd"};
    cfg.orders = {1, 3};
    cfg.snrs_db = {0.0, 2.0, 4.0};
    cfg.target_errors = 50;
    cfg.max_frames = 10'000;
    return cfg;
  }
  if (name == "ebch32-paper-shape") {
    cfg.code = "ebch32";
    cfg.decoders = {"osd", "nonge-osd"};
    cfg.orders = {1, 3, 5};
    cfg.snrs_db = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    cfg.target_errors = 200;
    cfg.max_frames = 200'000;
    return cfg;
  }
  throw std::invalid_argument("unknown bench preset: " + name);
}

std::vector<std::string> bench_preset_names() { return {"ebch32-quick", "ebch32-paper-shape"}; }

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list item in: " + text);
    out.push_back(parse(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("bad flag: " + s);
}

StopKind parse_stop(const std::string& s) {
  if (s == "none") return StopKind::none;
  if (s == "perfect") return StopKind::perfect;
  if (s == "probability") return StopKind::probability;
  throw std::invalid_argument("bad stop rule: " + s);
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  return parse_list<double>(text, parse_double);
}

std::vector<unsigned> parse_unsigned_list(const std::string& text) {
  return parse_list<unsigned>(text, [](const std::string& s) {
    const std::uint64_t v = parse_u64(s);
    if (v > 64) throw std::invalid_argument("order out of range: " + s);
    return static_cast<unsigned>(v);
  });
}

std::vector<std::string> parse_name_list(const std::string& text) {
  return parse_list<std::string>(text, [](const std::string& s) { return s; });
}

void set_config(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "code")
    cfg.code = value;
  else if (key == "decoders")
    cfg.decoders = parse_name_list(value);
  else if (key == "orders")
    cfg.orders = parse_unsigned_list(value);
  else if (key == "snrs_db")
    cfg.snrs_db = parse_double_list(value);
  else if (key == "stop")
    cfg.stop = parse_stop(value);
  else if (key == "tau")
    cfg.tau = parse_double(value);
  else if (key == "target_errors")
    cfg.target_errors = parse_u64(value);
  else if (key == "max_frames")
    cfg.max_frames = parse_u64(value);
  else if (key == "seed")
    cfg.seed = parse_u64(value);
  else if (key == "budget")
    cfg.budget = parse_u64(value);
  else if (key == "model")
    cfg.model_path = value;
  else if (key == "out_prefix")
    cfg.out_prefix = value;
  else if (key == "threads")
    cfg.threads = static_cast<unsigned>(parse_u64(value));
  else if (key == "measure_time")
    cfg.measure_time = parse_bool(value);
  else if (key == "random_messages")
    cfg.random_messages = parse_bool(value);
  else if (key == "gnuplot")
    cfg.gnuplot = parse_bool(value);
  else
    throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig load_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    set_config(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  return load_config(f);
}

}  // namespace tepdec
