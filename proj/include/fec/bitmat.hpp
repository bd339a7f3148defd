#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fec {

/// Unpacked binary word, one entry (0 or 1) per position.
using Bits = std::vector<std::uint8_t>;

/// Dense GF(2) matrix with bit-packed rows.
///
/// Each row occupies `words_per_row()` 64-bit words; bits past `cols()` in the
/// last word are always zero, so popcounts and equality work word-wise.
class BitMatrix {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  static BitMatrix identity(std::size_t n);
  static BitMatrix from_rows(const std::vector<Bits>& rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return words_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * words_ + c / kWordBits] >> (c % kWordBits)) & 1u;
  }
  void set(std::size_t r, std::size_t c, bool v);
  void flip(std::size_t r, std::size_t c) {
    data_[r * words_ + c / kWordBits] ^= Word{1} << (c % kWordBits);
  }

  std::span<const Word> row(std::size_t r) const { return {data_.data() + r * words_, words_}; }
  std::span<Word> row(std::size_t r) { return {data_.data() + r * words_, words_}; }
  Bits row_bits(std::size_t r) const;

  std::size_t row_weight(std::size_t r) const;
  std::size_t col_weight(std::size_t c) const;
  std::vector<std::size_t> row_weights() const;
  std::vector<std::size_t> col_weights() const;

  /// row[dst] ^= row[src]
  void xor_row(std::size_t dst, std::size_t src);
  void swap_rows(std::size_t a, std::size_t b);
  /// Appends a packed row; `words` must have `words_per_row()` entries.
  void append_row(std::span<const Word> words);
  void append_row(const Bits& bits);
  /// Keeps only the listed rows, in the listed order.
  BitMatrix select_rows(std::span<const std::size_t> indices) const;

  BitMatrix transpose() const;
  /// GF(2) product this * rhs.
  BitMatrix multiply(const BitMatrix& rhs) const;
  bool is_zero() const;

  friend bool operator==(const BitMatrix& a, const BitMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t words_ = 0;
  std::vector<Word> data_;
};

struct MatrixStats {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t four_cycles = 0;
  std::size_t col_weight_min = 0;
  std::size_t col_weight_max = 0;
  double col_weight_mean = 0.0;
  double col_weight_std = 0.0;
  std::size_t row_weight_min = 0;
  std::size_t row_weight_max = 0;
  double row_weight_mean = 0.0;
  double row_weight_std = 0.0;
  std::size_t rank = 0;
};

std::size_t rank(const BitMatrix& m);

/// Reduced row echelon form. Zero rows are dropped, so the result has
/// exactly rank(m) rows with strictly increasing pivot columns.
BitMatrix row_echelon(const BitMatrix& m);

/// Number of length-4 cycles in the Tanner graph: sum over unordered row
/// pairs of C(overlap, 2).
std::uint64_t count_4cycles(const BitMatrix& m);

/// Mean and population standard deviation of a weight list.
std::pair<double, double> mean_std(std::span<const std::size_t> weights);

MatrixStats stats(const BitMatrix& m);

/// Parse or I/O failure while reading an alist file. `line()` is 1-based; 0
/// means the failure is not tied to a specific line (e.g. missing section).
class AlistError : public std::runtime_error {
 public:
  AlistError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

BitMatrix read_alist(std::istream& in);
BitMatrix read_alist(const std::filesystem::path& path);
void write_alist(const BitMatrix& m, std::ostream& out);
void write_alist(const BitMatrix& m, const std::filesystem::path& path);

}  // namespace fec
