#include "tepdec/bits.hpp"

#include <stdexcept>

namespace tepdec {

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      v.set(i, true);
    else if (bits[i] != '0')
      throw std::invalid_argument("bit string may contain only 0 and 1");
  }
  return v;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

BinaryMatrix BinaryMatrix::identity(std::size_t n) {
  BinaryMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitVector BinaryMatrix::row(std::size_t r) const {
  BitVector v(cols_);
  v.assign_words(row_words(r));
  return v;
}

void BinaryMatrix::set_row(std::size_t r, const BitVector& v) {
  if (v.size() != cols_) throw std::invalid_argument("row length mismatch");
  auto src = v.words();
  for (std::size_t w = 0; w < stride_; ++w) data_[r * stride_ + w] = src[w];
}

void BinaryMatrix::swap_rows(std::size_t a, std::size_t b) {
  assert(a < rows_ && b < rows_);
  if (a == b) return;
  for (std::size_t w = 0; w < stride_; ++w)
    std::swap(data_[a * stride_ + w], data_[b * stride_ + w]);
}

void BinaryMatrix::swap_cols(std::size_t a, std::size_t b) {
  assert(a < cols_ && b < cols_);
  if (a == b) return;
  for (std::size_t r = 0; r < rows_; ++r) {
    bool va = get(r, a), vb = get(r, b);
    set(r, a, vb);
    set(r, b, va);
  }
}

BinaryMatrix gf2_multiply(const BinaryMatrix& a, const BinaryMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch");
  BinaryMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a.get(i, j)) out.xor_row_from(b, j, i);
  return out;
}

BinaryMatrix gf2_transpose(const BinaryMatrix& m) {
  BinaryMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m.get(i, j)) out.set(j, i, true);
  return out;
}

std::size_t gf2_rank(BinaryMatrix m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && !m.get(pivot, c)) ++pivot;
    if (pivot == m.rows()) continue;
    m.swap_rows(rank, pivot);
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (r != rank && m.get(r, c)) m.xor_rows(rank, r);
    ++rank;
  }
  return rank;
}

BitVector gf2_vecmat(const BitVector& x, const BinaryMatrix& m) {
  if (x.size() != m.rows()) throw std::invalid_argument("dimension mismatch");
  BitVector y(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (x.get(i)) y.xor_words(m.row_words(i));
  return y;
}

SystematizeResult gf2_systematize(const BinaryMatrix& m) {
  const std::size_t k = m.rows(), n = m.cols();
  if (k == 0 || k > n) throw std::invalid_argument("need 1 <= rows <= cols");
  SystematizeResult res;
  res.matrix = m;
  res.perm.resize(n);
  for (std::size_t j = 0; j < n; ++j) res.perm[j] = j;
  BinaryMatrix& a = res.matrix;
  for (std::size_t d = 0; d < k; ++d) {
    // Find a pivot at or right of the diagonal, preferring column d.
    std::size_t pr = k, pc = n;
    for (std::size_t c = d; c < n && pr == k; ++c)
      for (std::size_t r = d; r < k; ++r)
        if (a.get(r, c)) {
          pr = r;
          pc = c;
          break;
        }
    if (pr == k) throw std::invalid_argument("matrix is not full row rank");
    if (pc != d) {
      a.swap_cols(d, pc);
      std::swap(res.perm[d], res.perm[pc]);
    }
    a.swap_rows(d, pr);
    for (std::size_t r = 0; r < k; ++r)
      if (r != d && a.get(r, d)) a.xor_rows(d, r);
  }
  return res;
}

BitVector permute_bits(const BitVector& in, std::span<const std::size_t> perm) {
  assert(in.size() == perm.size());
  BitVector out(in.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out.set(j, in.get(perm[j]));
  return out;
}

BitVector unpermute_bits(const BitVector& in, std::span<const std::size_t> perm) {
  assert(in.size() == perm.size());
  BitVector out(in.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out.set(perm[j], in.get(j));
  return out;
}

}  // namespace tepdec
