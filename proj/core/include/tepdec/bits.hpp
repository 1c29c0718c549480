#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tepdec {

// Fixed-length GF(2) vector packed into 64-bit words, LSB first.
class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_(word_count(size), 0) {}

  static BitVector from_string(std::string_view bits);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const {
    assert(i < size_);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool v) {
    assert(i < size_);
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void flip(std::size_t i) {
    assert(i < size_);
    words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
  }

  BitVector& operator^=(const BitVector& other) {
    assert(size_ == other.size_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) {
    a ^= b;
    return a;
  }

  void xor_words(std::span<const std::uint64_t> w) {
    assert(w.size() == words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= w[i];
  }
  void assign_words(std::span<const std::uint64_t> w) {
    assert(w.size() == words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = w[i];
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  // Overall parity: 1 if the weight is odd.
  bool parity() const { return popcount() & 1u; }

  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const BitVector&) const = default;

  std::string to_string() const;

  static std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Dense GF(2) matrix, rows packed like BitVector.
class BinaryMatrix {
public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(BitVector::word_count(cols)),
        data_(rows * stride_, 0) {}

  static BinaryMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool get(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return (data_[r * stride_ + (c >> 6)] >> (c & 63)) & 1u;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    assert(r < rows_ && c < cols_);
    const std::uint64_t mask = std::uint64_t{1} << (c & 63);
    if (v)
      data_[r * stride_ + (c >> 6)] |= mask;
    else
      data_[r * stride_ + (c >> 6)] &= ~mask;
  }

  std::span<const std::uint64_t> row_words(std::size_t r) const {
    assert(r < rows_);
    return {data_.data() + r * stride_, stride_};
  }
  BitVector row(std::size_t r) const;
  void set_row(std::size_t r, const BitVector& v);

  // dst_row ^= src_row
  void xor_rows(std::size_t src, std::size_t dst) {
    assert(src < rows_ && dst < rows_);
    const std::uint64_t* s = data_.data() + src * stride_;
    std::uint64_t* d = data_.data() + dst * stride_;
    for (std::size_t w = 0; w < stride_; ++w) d[w] ^= s[w];
  }
  // this[dst] ^= other[src]; the two matrices must have equal column counts.
  void xor_row_from(const BinaryMatrix& other, std::size_t src, std::size_t dst) {
    assert(dst < rows_ && src < other.rows_ && cols_ == other.cols_);
    const std::uint64_t* s = other.data_.data() + src * other.stride_;
    std::uint64_t* d = data_.data() + dst * stride_;
    for (std::size_t w = 0; w < stride_; ++w) d[w] ^= s[w];
  }
  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);

  bool operator==(const BinaryMatrix&) const = default;

private:
  std::size_t rows_ = 0, cols_ = 0, stride_ = 0;
  std::vector<std::uint64_t> data_;
};

BinaryMatrix gf2_multiply(const BinaryMatrix& a, const BinaryMatrix& b);
BinaryMatrix gf2_transpose(const BinaryMatrix& m);
std::size_t gf2_rank(BinaryMatrix m);

// y = x * M over GF(2), x has M.rows() entries.
BitVector gf2_vecmat(const BitVector& x, const BinaryMatrix& m);

struct SystematizeResult {
  BinaryMatrix matrix;             // [I_k | P], k = rows
  std::vector<std::size_t> perm;   // perm[j] = source column now at position j
};

// Gauss-Jordan to reduced form with column swaps when a pivot column is
// dependent. Throws std::invalid_argument if the matrix is not full row rank.
SystematizeResult gf2_systematize(const BinaryMatrix& m);

// out[j] = in[perm[j]]
template <typename T>
std::vector<T> permute(std::span<const T> in, std::span<const std::size_t> perm) {
  assert(in.size() == perm.size());
  std::vector<T> out(in.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out[j] = in[perm[j]];
  return out;
}
BitVector permute_bits(const BitVector& in, std::span<const std::size_t> perm);
// out[perm[j]] = in[j]
BitVector unpermute_bits(const BitVector& in, std::span<const std::size_t> perm);

}  // namespace tepdec
