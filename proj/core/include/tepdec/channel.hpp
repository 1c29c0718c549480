#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tepdec/bits.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/rng.hpp"

namespace tepdec {

// One BPSK/AWGN transmission: bit c maps to symbol 1 - 2c, noise has
// standard deviation sigma with sigma^2 = 10^(-snr_db/10).
struct ReceivedFrame {
  double snr_db = 0.0;
  double sigma = 1.0;
  BitVector codeword;       // transmitted
  std::vector<double> r;    // received symbols
  std::vector<double> llr;  // 2 r_i / sigma^2
};

double noise_sigma(double snr_db);

// Deterministic variant taking the noise realization explicitly.
ReceivedFrame make_frame(const LinearCode& code, const BitVector& msg, double snr_db,
                         std::span<const double> noise);
ReceivedFrame simulate(const LinearCode& code, const BitVector& msg, double snr_db, Rng& rng);

// r_i > 0 -> 0, r_i < 0 -> 1, exact zero -> 0.
BitVector hard_decision(std::span<const double> r);
BitVector hard_decision_prefix(std::span<const double> r, std::size_t count);

// Squared Euclidean distance between r and the modulated codeword.
double euclidean_distance(const BitVector& codeword, std::span<const double> r);

// (x - mean) / sample standard deviation; all zeros when the input is
// constant. Throws on fewer than two values.
std::vector<double> normalize_llr(std::span<const double> llr);

// Text round trip: "snr_db sigma" line, codeword bits, r, llr (reals with 17
// significant digits).
void save_frame(const ReceivedFrame& frame, std::ostream& out);
void save_frame_file(const ReceivedFrame& frame, const std::string& path);
ReceivedFrame load_frame(std::istream& in);
ReceivedFrame load_frame_file(const std::string& path);

// 17-significant-digit decimal form; round-trips the double exactly
std::string format_double(double v);

}  // namespace tepdec
