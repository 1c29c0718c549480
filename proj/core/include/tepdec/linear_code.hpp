#pragma once

#include <iosfwd>
#include <string>

#include "tepdec/bits.hpp"
#include "tepdec/gf2poly.hpp"

namespace tepdec {

// Binary linear block code held in systematic form G = [I_k | P].
struct LinearCode {
  std::size_t n = 0;
  std::size_t k = 0;
  BinaryMatrix generator;  // k x n, systematic
  std::string name;
};

// Throws std::invalid_argument unless 1 <= k < n, the generator has the right
// shape, and its first k columns form the identity.
void validate(const LinearCode& code);

// msg has k bits; the first k bits of the result equal msg.
BitVector encode(const LinearCode& code, const BitVector& msg);

// H = [P^T | I_{n-k}] built from the systematic generator.
BinaryMatrix parity_check_matrix(const LinearCode& code);

// s = H * c^T; zero syndrome means c is a codeword.
BitVector syndrome(const LinearCode& code, const BitVector& word);
bool is_codeword(const LinearCode& code, const BitVector& word);

// Exhaustive over all 2^k - 1 nonzero codewords (Gray-code sweep). k <= 28.
std::size_t min_distance_bruteforce(const LinearCode& code);

// Generator polynomial of the (31,16) BCH code with designed distance 7,
// built over GF(2^5) with primitive polynomial x^5 + x^2 + 1. Degree 15.
gf2poly::Poly bch31_generator_poly();

// Generator polynomial of the (47,24) quadratic-residue code, built over
// GF(2^23) with primitive polynomial x^23 + x^5 + 1. Degree 23.
gf2poly::Poly qr47_generator_poly();

// Extended (32,16,8) BCH: cyclic (31,16) BCH plus an overall parity bit,
// then row-reduced to systematic form (no column permutation is needed).
LinearCode build_ebch32();

// Extended (48,24,12) quadratic-residue code, same construction route.
LinearCode build_qr48();

// "ebch32" or "qr48" build the named code; anything else is read as a path.
LinearCode resolve_code(const std::string& spec);

// Text format: one header line "n k name", then k lines of n space-separated
// bits (the generator rows).
void save_code(const LinearCode& code, std::ostream& out);
void save_code_file(const LinearCode& code, const std::string& path);
LinearCode load_code(std::istream& in);
LinearCode load_code_file(const std::string& path);

}  // namespace tepdec
