#include "tepdec/linear_code.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tepdec {

namespace {

// Arithmetic in GF(2^m), elements as m-bit polynomials over the class of x.
struct Gf2m {
  unsigned m;
  std::uint32_t red;  // reduction polynomial, including the x^m term

  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t r = 0;
    while (b) {
      if (b & 1) r ^= a;
      b >>= 1;
      a <<= 1;
      if (a >> m) a ^= red;
    }
    return r;
  }
  std::uint32_t pow(std::uint32_t a, std::uint64_t e) const {
    std::uint32_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
};

// prod (x + rho) over the given field elements; the result must collapse to
// binary coefficients (the root set is closed under Frobenius squaring).
gf2poly::Poly product_over_roots(const Gf2m& f, const std::vector<std::uint32_t>& roots) {
  std::vector<std::uint32_t> c{1};
  for (auto rho : roots) {
    c.push_back(0);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] ^ f.mul(rho, c[i]);
    c[0] = f.mul(rho, c[0]);
  }
  gf2poly::Poly p = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > 1) throw std::logic_error("root product has non-binary coefficients");
    if (c[i]) p |= gf2poly::Poly{1} << i;
  }
  return p;
}

std::vector<std::uint32_t> cyclotomic_coset_roots(const Gf2m& f, unsigned rep, unsigned n) {
  std::vector<std::uint32_t> roots;
  unsigned e = rep;
  do {
    roots.push_back(f.pow(2, e));
    e = (2 * e) % n;
  } while (e != rep);
  return roots;
}

// Cyclic code from its generator polynomial, extended by an overall parity
// bit, then row-reduced to [I_k | P]. Row i of the cyclic generator matrix is
// x^i * g(x); its trailing coefficient sits on the diagonal, so the reduction
// needs no column swaps and the code itself is untouched.
LinearCode from_cyclic_poly(gf2poly::Poly g, std::size_t n_cyclic, std::string name) {
  const auto deg = static_cast<std::size_t>(gf2poly::degree(g));
  const std::size_t k = n_cyclic - deg;
  BinaryMatrix m(k, n_cyclic + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const gf2poly::Poly row = g << i;
    for (std::size_t j = 0; j < n_cyclic; ++j)
      if ((row >> j) & 1) m.set(i, j, true);
    m.set(i, n_cyclic, std::popcount(row) & 1);
  }
  auto sys = gf2_systematize(m);
  for (std::size_t j = 0; j < sys.perm.size(); ++j)
    if (sys.perm[j] != j) throw std::logic_error("unexpected column swap in cyclic reduction");
  LinearCode code{n_cyclic + 1, k, std::move(sys.matrix), std::move(name)};
  validate(code);
  return code;
}

bool bit_dot(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc ^= a[i] & b[i];
  return std::popcount(acc) & 1;
}

}  // namespace

void validate(const LinearCode& code) {
  if (code.k < 1 || code.k >= code.n)
    throw std::invalid_argument("need 1 <= k < n");
  if (code.generator.rows() != code.k || code.generator.cols() != code.n)
    throw std::invalid_argument("generator shape does not match (k, n)");
  for (std::size_t i = 0; i < code.k; ++i)
    for (std::size_t j = 0; j < code.k; ++j)
      if (code.generator.get(i, j) != (i == j))
        throw std::invalid_argument("generator is not in systematic form");
}

BitVector encode(const LinearCode& code, const BitVector& msg) {
  if (msg.size() != code.k) throw std::invalid_argument("message length != k");
  return gf2_vecmat(msg, code.generator);
}

BinaryMatrix parity_check_matrix(const LinearCode& code) {
  const std::size_t r = code.n - code.k;
  BinaryMatrix h(r, code.n);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < code.k; ++j)
      h.set(i, j, code.generator.get(j, code.k + i));
    h.set(i, code.k + i, true);
  }
  return h;
}

BitVector syndrome(const LinearCode& code, const BitVector& word) {
  if (word.size() != code.n) throw std::invalid_argument("word length != n");
  const BinaryMatrix h = parity_check_matrix(code);
  BitVector s(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i)
    s.set(i, bit_dot(h.row_words(i), word.words()));
  return s;
}

bool is_codeword(const LinearCode& code, const BitVector& word) {
  return !syndrome(code, word).any();
}

std::size_t min_distance_bruteforce(const LinearCode& code) {
  validate(code);
  if (code.k > 28) throw std::invalid_argument("k > 28 is too large for an exhaustive sweep");
  if (code.n > 64) throw std::invalid_argument("n > 64 not supported");
  std::vector<std::uint64_t> rows(code.k);
  for (std::size_t i = 0; i < code.k; ++i) rows[i] = code.generator.row_words(i)[0];
  std::uint64_t cur = 0;
  int best = 65;
  const std::uint64_t total = std::uint64_t{1} << code.k;
  for (std::uint64_t i = 1; i < total; ++i) {
    cur ^= rows[std::countr_zero(i)];
    best = std::min(best, std::popcount(cur));
  }
  return static_cast<std::size_t>(best);
}

gf2poly::Poly bch31_generator_poly() {
  const Gf2m f{5, 0x25};  // x^5 + x^2 + 1
  gf2poly::Poly g = 1;
  for (unsigned rep : {1u, 3u, 5u})
    g = gf2poly::mul(g, product_over_roots(f, cyclotomic_coset_roots(f, rep, 31)));
  return g;
}

gf2poly::Poly qr47_generator_poly() {
  const Gf2m f{23, (1u << 23) | (1u << 5) | 1u};  // x^23 + x^5 + 1
  const std::uint32_t beta = f.pow(2, ((1u << 23) - 1) / 47);
  if (beta == 1 || f.pow(beta, 47) != 1)
    throw std::logic_error("failed to construct an element of order 47");
  std::set<unsigned> residues;
  for (unsigned i = 1; i < 47; ++i) residues.insert(i * i % 47);
  std::vector<std::uint32_t> roots;
  for (unsigned r : residues) roots.push_back(f.pow(beta, r));
  const gf2poly::Poly q = product_over_roots(f, roots);
  if (!gf2poly::divides(q, (gf2poly::Poly{1} << 47) | 1))
    throw std::logic_error("quadratic-residue polynomial does not divide x^47 + 1");
  return q;
}

LinearCode build_ebch32() { return from_cyclic_poly(bch31_generator_poly(), 31, "eBCH(32,16)"); }

LinearCode build_qr48() { return from_cyclic_poly(qr47_generator_poly(), 47, "QR(48,24)"); }

LinearCode resolve_code(const std::string& spec) {
  if (spec == "ebch32") return build_ebch32();
  if (spec == "qr48") return build_qr48();
  return load_code_file(spec);
}

void save_code(const LinearCode& code, std::ostream& out) {
  validate(code);
  out << code.n << ' ' << code.k << ' ' << code.name << '\n';
  for (std::size_t i = 0; i < code.k; ++i) {
    for (std::size_t j = 0; j < code.n; ++j) out << (j ? " " : "") << code.generator.get(i, j);
    out << '\n';
  }
}

void save_code_file(const LinearCode& code, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_code(code, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LinearCode load_code(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("missing code header line");
  std::istringstream hs(header);
  std::size_t n = 0, k = 0;
  std::string name;
  if (!(hs >> n >> k)) throw std::runtime_error("malformed code header: " + header);
  std::getline(hs, name);
  const auto first = name.find_first_not_of(" \t");
  name = first == std::string::npos ? std::string{} : name.substr(first);
  if (k < 1 || k >= n) throw std::runtime_error("invalid code dimensions in header");
  LinearCode code{n, k, BinaryMatrix(k, n), name};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      int bit = -1;
      if (!(in >> bit) || (bit != 0 && bit != 1))
        throw std::runtime_error("malformed generator row " + std::to_string(i));
      code.generator.set(i, j, bit == 1);
    }
  try {
    validate(code);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("invalid code file: ") + e.what());
  }
  return code;
}

LinearCode load_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_code(in);
}

}  // namespace tepdec
