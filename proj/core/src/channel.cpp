#include "tepdec/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tepdec {

double noise_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ReceivedFrame make_frame(const LinearCode& code, const BitVector& msg, double snr_db,
                         std::span<const double> noise) {
  if (noise.size() != code.n) throw std::invalid_argument("noise length != n");
  ReceivedFrame f;
  f.snr_db = snr_db;
  f.sigma = noise_sigma(snr_db);
  f.codeword = encode(code, msg);
  f.r.resize(code.n);
  f.llr.resize(code.n);
  const double inv_var = 2.0 / (f.sigma * f.sigma);
  for (std::size_t i = 0; i < code.n; ++i) {
    const double x = f.codeword.get(i) ? -1.0 : 1.0;
    f.r[i] = x + f.sigma * noise[i];
    f.llr[i] = inv_var * f.r[i];
  }
  return f;
}

ReceivedFrame simulate(const LinearCode& code, const BitVector& msg, double snr_db, Rng& rng) {
  std::vector<double> noise(code.n);
  for (auto& z : noise) z = rng.gaussian();
  return make_frame(code, msg, snr_db, noise);
}

BitVector hard_decision(std::span<const double> r) {
  BitVector b(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) b.set(i, r[i] < 0.0);
  return b;
}

BitVector hard_decision_prefix(std::span<const double> r, std::size_t count) {
  if (count > r.size()) throw std::invalid_argument("prefix longer than input");
  return hard_decision(r.first(count));
}

double euclidean_distance(const BitVector& codeword, std::span<const double> r) {
  if (codeword.size() != r.size()) throw std::invalid_argument("length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double diff = r[i] - (codeword.get(i) ? -1.0 : 1.0);
    d += diff * diff;
  }
  return d;
}

std::vector<double> normalize_llr(std::span<const double> llr) {
  if (llr.size() < 2) throw std::invalid_argument("need at least two values");
  double mean = 0.0;
  for (double v : llr) mean += v;
  mean /= static_cast<double>(llr.size());
  double ss = 0.0;
  for (double v : llr) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(llr.size() - 1));
  std::vector<double> out(llr.size(), 0.0);
  if (sd > 0.0)
    for (std::size_t i = 0; i < llr.size(); ++i) out[i] = (llr[i] - mean) / sd;
  return out;
}

void save_frame(const ReceivedFrame& frame, std::ostream& out) {
  out << format_double(frame.snr_db) << ' ' << format_double(frame.sigma) << '\n';
  for (std::size_t i = 0; i < frame.codeword.size(); ++i)
    out << (i ? " " : "") << frame.codeword.get(i);
  out << '\n';
  for (std::size_t i = 0; i < frame.r.size(); ++i)
    out << (i ? " " : "") << format_double(frame.r[i]);
  out << '\n';
  for (std::size_t i = 0; i < frame.llr.size(); ++i)
    out << (i ? " " : "") << format_double(frame.llr[i]);
  out << '\n';
}

void save_frame_file(const ReceivedFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_frame(frame, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ReceivedFrame load_frame(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing frame header line");
  ReceivedFrame f;
  {
    std::istringstream hs(line);
    if (!(hs >> f.snr_db >> f.sigma)) throw std::runtime_error("malformed frame header: " + line);
  }
  auto read_reals = [&](const char* what) {
    if (!std::getline(in, line)) throw std::runtime_error(std::string("missing ") + what);
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) throw std::runtime_error(std::string("empty ") + what);
    return vals;
  };
  const auto bits = read_reals("codeword line");
  f.codeword = BitVector(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0.0 && bits[i] != 1.0) throw std::runtime_error("codeword bits must be 0/1");
    f.codeword.set(i, bits[i] == 1.0);
  }
  f.r = read_reals("received line");
  f.llr = read_reals("llr line");
  if (f.r.size() != f.codeword.size() || f.llr.size() != f.codeword.size())
    throw std::runtime_error("frame line lengths disagree");
  return f;
}

ReceivedFrame load_frame_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_frame(in);
}

}  // namespace tepdec
