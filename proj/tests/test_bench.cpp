#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tepdec/bench.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/policy.hpp"

using namespace tepdec;

namespace {

LinearCode hamming74() {
  LinearCode code;
  code.n = 7;
  code.k = 4;
  code.name = "Hamming(7,4)";
  code.generator = BinaryMatrix(4, 7);
  const char* rows[4] = {"1000110", "0100101", "0010011", "0001111"};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 7; ++j) code.generator.set(i, j, rows[i][j] == '1');
  return code;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.code = "hamming74";
  cfg.decoders = {"osd"};
  cfg.orders = {1};
  cfg.snrs_db = {0.0, 4.0};
  cfg.target_errors = 1'000'000;  // never reached: fixed frame count
  cfg.max_frames = 40;
  cfg.seed = 3;
  return cfg;
}

const MetricRow& find_row(const BenchResult& result, double snr, const std::string& decoder,
                          unsigned order) {
  for (const auto& row : result.rows)
    if (row.snr_db == snr && row.decoder == decoder && row.order == order) return row;
  throw std::runtime_error("row not found");
}

}  // namespace

TEST_CASE("summary rows are exactly recomputable from the frame records") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"osd", "mld"};
  cfg.orders = {1, 2};
  BenchResult result = run_benchmark(cfg, code, nullptr);
  // mld collapses to a single order-0 cell
  CHECK(result.rows.size() == 2 * (2 + 1));
  for (const auto& row : result.rows) {
    std::uint64_t frames = 0, errors = 0, teps = 0;
    double time_us = 0.0;
    for (const auto& rec : result.frames) {
      if (rec.snr_db != row.snr_db || rec.decoder != row.decoder || rec.order != row.order)
        continue;
      frames++;
      if (!rec.correct) errors++;
      teps += rec.teps_visited;
      time_us += rec.wall_time_us;
    }
    CHECK(row.frames == frames);
    CHECK(row.frames == 40);
    CHECK(row.errors == errors);
    CHECK(row.bler == static_cast<double>(errors) / static_cast<double>(frames));
    CHECK(row.avg_teps == static_cast<double>(teps) / static_cast<double>(frames));
    CHECK(row.avg_time_s == (time_us / static_cast<double>(frames)) * 1e-6);
  }
}

TEST_CASE("frames are paired across decoders and mld is never farther") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"mld", "osd"};
  cfg.orders = {1};
  cfg.max_frames = 60;
  cfg.snrs_db = {0.0};
  BenchResult result = run_benchmark(cfg, code, nullptr);
  std::map<std::uint64_t, double> mld_distance;
  for (const auto& rec : result.frames)
    if (rec.decoder == "mld") mld_distance[rec.frame_id] = rec.distance;
  CHECK(mld_distance.size() == 60);
  std::size_t seen = 0;
  for (const auto& rec : result.frames) {
    if (rec.decoder != "osd") continue;
    seen++;
    REQUIRE(mld_distance.count(rec.frame_id) == 1);
    CHECK(mld_distance[rec.frame_id] <= rec.distance + 1e-12);
  }
  CHECK(seen == 60);
}

TEST_CASE("guided decoder rows under a full budget replicate ordered flipping") {
  LinearCode code = hamming74();
  PolicyModel model = init_policy(4, 7, 2, 8, 21);
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"nonge-osd", "mcts"};
  cfg.orders = {3};
  cfg.snrs_db = {2.0};
  cfg.max_frames = 30;
  BenchResult result = run_benchmark(cfg, code, &model);
  std::map<std::uint64_t, FrameRecord> base;
  for (const auto& rec : result.frames)
    if (rec.decoder == "nonge-osd") base[rec.frame_id] = rec;
  std::size_t seen = 0;
  for (const auto& rec : result.frames) {
    if (rec.decoder != "mcts") continue;
    seen++;
    const FrameRecord& ref = base.at(rec.frame_id);
    CHECK(rec.distance == ref.distance);
    CHECK(rec.teps_visited == ref.teps_visited);
    CHECK(rec.teps_visited == 15);  // full (4,3) pattern count
    CHECK(rec.correct == ref.correct);
  }
  CHECK(seen == 30);
}

TEST_CASE("identical configs produce byte-identical csv output") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  BenchResult a = run_benchmark(cfg, code, nullptr);
  BenchResult b = run_benchmark(cfg, code, nullptr);
  std::ostringstream fa, fb, sa, sb;
  write_frame_csv(a, fa);
  write_frame_csv(b, fb);
  write_summary_csv(a, sa);
  write_summary_csv(b, sb);
  CHECK(fa.str() == fb.str());
  CHECK(sa.str() == sb.str());
  CHECK(fa.str().rfind("# host: ", 0) == 0);
  CHECK(sa.str().rfind("# host: ", 0) == 0);
}

TEST_CASE("thread count does not change the results") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"osd", "mld"};
  cfg.max_frames = 70;
  cfg.target_errors = 25;  // exercise the early cutoff too
  cfg.snrs_db = {0.0, 3.0};
  BenchResult seq = run_benchmark(cfg, code, nullptr);
  cfg.threads = 2;
  BenchResult par = run_benchmark(cfg, code, nullptr);
  std::ostringstream a, b;
  write_frame_csv(seq, a);
  write_frame_csv(par, b);
  CHECK(a.str() == b.str());
  REQUIRE(seq.rows.size() == par.rows.size());
  for (std::size_t i = 0; i < seq.rows.size(); ++i) {
    CHECK(seq.rows[i].bler == par.rows[i].bler);
    CHECK(seq.rows[i].frames == par.rows[i].frames);
  }
}

TEST_CASE("csv headers match the documented schema") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.max_frames = 5;
  BenchResult result = run_benchmark(cfg, code, nullptr);
  std::ostringstream frame_out, summary_out;
  write_frame_csv(result, frame_out);
  write_summary_csv(result, summary_out);
  std::istringstream fin(frame_out.str());
  std::string line;
  std::getline(fin, line);  // host comment
  std::getline(fin, line);
  CHECK(line == "frame_id,snr_db,decoder,order,teps_visited,distance,stop_reason,correct,wall_time_us");
  std::size_t rows = 0;
  while (std::getline(fin, line))
    if (!line.empty()) rows++;
  CHECK(rows == result.frames.size());
  std::istringstream sin(summary_out.str());
  std::getline(sin, line);
  std::getline(sin, line);
  CHECK(line == "snr_db,decoder,order,bler,avg_teps,avg_time_s,frames,errors");
  rows = 0;
  while (std::getline(sin, line))
    if (!line.empty()) rows++;
  CHECK(rows == result.rows.size());
}

TEST_CASE("timing is zero by default and positive when measured") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.max_frames = 100;
  cfg.snrs_db = {2.0};
  BenchResult untimed = run_benchmark(cfg, code, nullptr);
  for (const auto& rec : untimed.frames) CHECK(rec.wall_time_us == 0.0);
  CHECK(find_row(untimed, 2.0, "osd", 1).avg_time_s == 0.0);
  cfg.measure_time = true;
  BenchResult timed = run_benchmark(cfg, code, nullptr);
  double total = 0.0;
  for (const auto& rec : timed.frames) total += rec.wall_time_us;
  CHECK(total > 0.0);
}

TEST_CASE("error target stops a cell early") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.snrs_db = {-2.0};  // errors are frequent here
  cfg.target_errors = 5;
  cfg.max_frames = 100'000;
  BenchResult result = run_benchmark(cfg, code, nullptr);
  const MetricRow& row = find_row(result, -2.0, "osd", 1);
  CHECK(row.errors == 5);
  CHECK(row.frames < 100'000);
  // the cell ends exactly at the frame carrying the fifth error
  std::uint64_t last_id = 0;
  bool last_correct = true;
  for (const auto& rec : result.frames)
    if (rec.frame_id >= last_id) {
      last_id = rec.frame_id;
      last_correct = rec.correct;
    }
  CHECK_FALSE(last_correct);
}

TEST_CASE("stopping rules shrink the visited pattern counts") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.orders = {3};
  cfg.snrs_db = {4.0};
  cfg.max_frames = 50;
  BenchResult none = run_benchmark(cfg, code, nullptr);
  cfg.stop = StopKind::probability;
  cfg.tau = 0.9;
  BenchResult prob = run_benchmark(cfg, code, nullptr);
  cfg.stop = StopKind::perfect;
  BenchResult perfect = run_benchmark(cfg, code, nullptr);
  const double full = find_row(none, 4.0, "osd", 3).avg_teps;
  CHECK(full == 15.0);  // exhaustive order-3 enumeration on k=4
  CHECK(find_row(prob, 4.0, "osd", 3).avg_teps <= full);
  CHECK(find_row(perfect, 4.0, "osd", 3).avg_teps <= full);
  CHECK(find_row(perfect, 4.0, "osd", 3).avg_teps < full);
}

TEST_CASE("bench presets") {
  const auto names = bench_preset_names();
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "ebch32-quick");
  CHECK(names[1] == "ebch32-paper-shape");
  ExperimentConfig quick = bench_preset("ebch32-quick");
  CHECK(quick.code == "ebch32");
  CHECK(quick.orders == (std::vector<unsigned>{1, 3}));
  CHECK(quick.snrs_db == (std::vector<double>{0.0, 2.0, 4.0}));
  CHECK(quick.target_errors == 50);
  CHECK(quick.max_frames == 10'000);
  ExperimentConfig shape = bench_preset("ebch32-paper-shape");
  CHECK(shape.decoders == (std::vector<std::string>{"osd", "nonge-osd"}));
  CHECK(shape.orders == (std::vector<unsigned>{1, 3, 5}));
  CHECK(shape.snrs_db.size() == 6);
  CHECK(shape.target_errors == 200);
  CHECK_THROWS_AS(bench_preset("nope"), std::invalid_argument);
}

TEST_CASE("set_config covers every key and rejects the rest") {
  ExperimentConfig cfg;
  set_config(cfg, "code", "qr48");
  CHECK(cfg.code == "qr48");
  set_config(cfg, "decoders", "osd, mld");
  CHECK(cfg.decoders == (std::vector<std::string>{"osd", "mld"}));
  set_config(cfg, "orders", "1,3,5");
  CHECK(cfg.orders == (std::vector<unsigned>{1, 3, 5}));
  set_config(cfg, "snrs_db", "0,2.5,4");
  CHECK(cfg.snrs_db == (std::vector<double>{0.0, 2.5, 4.0}));
  set_config(cfg, "stop", "probability");
  CHECK(cfg.stop == StopKind::probability);
  set_config(cfg, "stop", "perfect");
  CHECK(cfg.stop == StopKind::perfect);
  set_config(cfg, "stop", "none");
  CHECK(cfg.stop == StopKind::none);
  set_config(cfg, "tau", "0.85");
  CHECK(cfg.tau == 0.85);
  set_config(cfg, "target_errors", "123");
  CHECK(cfg.target_errors == 123);
  set_config(cfg, "max_frames", "4567");
  CHECK(cfg.max_frames == 4567);
  set_config(cfg, "seed", "99");
  CHECK(cfg.seed == 99);
  set_config(cfg, "budget", "37");
  CHECK(cfg.budget == 37);
  set_config(cfg, "model", "net.ckpt");
  CHECK(cfg.model_path == "net.ckpt");
  set_config(cfg, "out_prefix", "run-");
  CHECK(cfg.out_prefix == "run-");
  set_config(cfg, "threads", "4");
  CHECK(cfg.threads == 4);
  set_config(cfg, "measure_time", "true");
  CHECK(cfg.measure_time);
  set_config(cfg, "random_messages", "1");
  CHECK(cfg.random_messages);
  set_config(cfg, "gnuplot", "false");
  CHECK_FALSE(cfg.gnuplot);
  CHECK_THROWS_AS(set_config(cfg, "bogus", "1"), std::invalid_argument);
  CHECK_THROWS_AS(set_config(cfg, "orders", "a"), std::invalid_argument);
  CHECK_THROWS_AS(set_config(cfg, "tau", "much"), std::invalid_argument);
  CHECK_THROWS_AS(set_config(cfg, "stop", "sometimes"), std::invalid_argument);
  CHECK_THROWS_AS(set_config(cfg, "measure_time", "maybe"), std::invalid_argument);
}

TEST_CASE("config files parse comments and blank lines") {
  std::istringstream in(
      "# campaign description\n"
      "code = ebch32\n"
      "\n"
      "decoders = osd, nonge-osd\n"
      "orders = 1, 3\n"
      "snrs_db = 0, 2\n"
      "stop = probability\n"
      "tau = 0.75\n"
      "target_errors = 10\n"
      "max_frames = 500\n"
      "seed = 7\n"
      "threads = 2\n");
  ExperimentConfig cfg = load_config(in);
  CHECK(cfg.code == "ebch32");
  CHECK(cfg.decoders == (std::vector<std::string>{"osd", "nonge-osd"}));
  CHECK(cfg.orders == (std::vector<unsigned>{1, 3}));
  CHECK(cfg.snrs_db == (std::vector<double>{0.0, 2.0}));
  CHECK(cfg.stop == StopKind::probability);
  CHECK(cfg.tau == 0.75);
  CHECK(cfg.target_errors == 10);
  CHECK(cfg.max_frames == 500);
  CHECK(cfg.seed == 7);
  CHECK(cfg.threads == 2);
  std::istringstream bad("code ebch32\n");
  CHECK_THROWS_AS(load_config(bad), std::invalid_argument);
}

TEST_CASE("list parsers") {
  CHECK(parse_double_list(" 1.5, -2 ,3e1 ") == (std::vector<double>{1.5, -2.0, 30.0}));
  CHECK(parse_unsigned_list("0,1, 12") == (std::vector<unsigned>{0, 1, 12}));
  CHECK(parse_name_list(" osd , mld ") == (std::vector<std::string>{"osd", "mld"}));
  CHECK_THROWS_AS(parse_double_list("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_unsigned_list("-1"), std::invalid_argument);
}

TEST_CASE("gnuplot files hold one line per snr point") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"osd"};
  cfg.orders = {1, 2};
  cfg.max_frames = 20;
  BenchResult result = run_benchmark(cfg, code, nullptr);
  const auto dir = std::filesystem::temp_directory_path() / "tepdec_bench_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "camp-").string();
  write_gnuplot_files(result, prefix);
  for (unsigned order : {1u, 2u}) {
    const std::string path = prefix + "osd-o" + std::to_string(order) + ".dat";
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::size_t lines = 0;
    bool saw_comment = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        saw_comment = true;
        continue;
      }
      lines++;
      std::istringstream fields(line);
      double snr = 0.0, bler = 0.0, teps = 0.0;
      REQUIRE(static_cast<bool>(fields >> snr >> bler >> teps));
      CHECK(bler >= 0.0);
      CHECK(bler <= 1.0);
      CHECK(teps >= 1.0);
    }
    CHECK(lines == cfg.snrs_db.size());
    CHECK(saw_comment);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown decoder names are rejected up front") {
  LinearCode code = hamming74();
  ExperimentConfig cfg = small_config();
  cfg.decoders = {"turbo"};
  CHECK_THROWS_AS(run_benchmark(cfg, code, nullptr), std::invalid_argument);
  cfg.decoders = {"mcts"};
  CHECK_THROWS_AS(run_benchmark(cfg, code, nullptr), std::invalid_argument);  // needs a model
}
