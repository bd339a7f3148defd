#include "fec/bitmat.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fec {

namespace {

std::size_t words_for(std::size_t cols) { return (cols + BitMatrix::kWordBits - 1) / BitMatrix::kWordBits; }

}  // namespace

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_(words_for(cols)), data_(rows * words_, 0) {}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<Bits>& rows, std::size_t cols) {
  BitMatrix m(0, cols);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
  Word& w = data_[r * words_ + c / kWordBits];
  const Word mask = Word{1} << (c % kWordBits);
  w = v ? (w | mask) : (w & ~mask);
}

Bits BitMatrix::row_bits(std::size_t r) const {
  Bits out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = get(r, c) ? 1 : 0;
  return out;
}

std::size_t BitMatrix::row_weight(std::size_t r) const {
  std::size_t w = 0;
  for (Word x : row(r)) w += static_cast<std::size_t>(std::popcount(x));
  return w;
}

std::size_t BitMatrix::col_weight(std::size_t c) const {
  std::size_t w = 0;
  for (std::size_t r = 0; r < rows_; ++r) w += get(r, c) ? 1 : 0;
  return w;
}

std::vector<std::size_t> BitMatrix::row_weights() const {
  std::vector<std::size_t> w(rows_);
  for (std::size_t r = 0; r < rows_; ++r) w[r] = row_weight(r);
  return w;
}

std::vector<std::size_t> BitMatrix::col_weights() const {
  std::vector<std::size_t> w(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) w[c] += get(r, c) ? 1 : 0;
  return w;
}

void BitMatrix::xor_row(std::size_t dst, std::size_t src) {
  Word* d = data_.data() + dst * words_;
  const Word* s = data_.data() + src * words_;
  for (std::size_t i = 0; i < words_; ++i) d[i] ^= s[i];
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(data_.begin() + static_cast<std::ptrdiff_t>(a * words_),
                   data_.begin() + static_cast<std::ptrdiff_t>((a + 1) * words_),
                   data_.begin() + static_cast<std::ptrdiff_t>(b * words_));
}

void BitMatrix::append_row(std::span<const Word> words) {
  if (words.size() != words_) throw std::invalid_argument("append_row: word count mismatch");
  data_.insert(data_.end(), words.begin(), words.end());
  ++rows_;
}

void BitMatrix::append_row(const Bits& bits) {
  if (bits.size() != cols_) throw std::invalid_argument("append_row: length mismatch");
  data_.resize(data_.size() + words_, 0);
  ++rows_;
  for (std::size_t c = 0; c < cols_; ++c)
    if (bits[c]) set(rows_ - 1, c, true);
}

BitMatrix BitMatrix::select_rows(std::span<const std::size_t> indices) const {
  BitMatrix out(0, cols_);
  out.data_.reserve(indices.size() * words_);
  for (std::size_t i : indices) out.append_row(row(i));
  return out;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      if (get(r, c)) t.set(c, r, true);
  return t;
}

BitMatrix BitMatrix::multiply(const BitMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("multiply: dimension mismatch");
  BitMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    Word* d = out.data_.data() + r * out.words_;
    for (std::size_t k = 0; k < cols_; ++k) {
      if (!get(r, k)) continue;
      const Word* s = rhs.data_.data() + k * rhs.words_;
      for (std::size_t i = 0; i < out.words_; ++i) d[i] ^= s[i];
    }
  }
  return out;
}

bool BitMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](Word w) { return w == 0; });
}

BitMatrix row_echelon(const BitMatrix& m) {
  BitMatrix a = m;
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < a.cols() && pivot_row < a.rows(); ++c) {
    std::size_t p = pivot_row;
    while (p < a.rows() && !a.get(p, c)) ++p;
    if (p == a.rows()) continue;
    a.swap_rows(p, pivot_row);
    for (std::size_t r = 0; r < a.rows(); ++r)
      if (r != pivot_row && a.get(r, c)) a.xor_row(r, pivot_row);
    ++pivot_row;
  }
  std::vector<std::size_t> keep(pivot_row);
  for (std::size_t i = 0; i < pivot_row; ++i) keep[i] = i;
  return a.select_rows(keep);
}

std::size_t rank(const BitMatrix& m) {
  BitMatrix a = m;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = r;
    while (p < a.rows() && !a.get(p, c)) ++p;
    if (p == a.rows()) continue;
    a.swap_rows(p, r);
    for (std::size_t i = r + 1; i < a.rows(); ++i)
      if (a.get(i, c)) a.xor_row(i, r);
    ++r;
  }
  return r;
}

std::uint64_t count_4cycles(const BitMatrix& m) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto ri = m.row(i);
    for (std::size_t j = i + 1; j < m.rows(); ++j) {
      const auto rj = m.row(j);
      std::uint64_t overlap = 0;
      for (std::size_t w = 0; w < ri.size(); ++w) overlap += static_cast<std::uint64_t>(std::popcount(ri[w] & rj[w]));
      total += overlap * (overlap - (overlap > 0 ? 1 : 0)) / 2;
    }
  }
  return total;
}

std::pair<double, double> mean_std(std::span<const std::size_t> weights) {
  if (weights.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (auto w : weights) sum += static_cast<double>(w);
  const double mean = sum / static_cast<double>(weights.size());
  double var = 0.0;
  for (auto w : weights) var += (static_cast<double>(w) - mean) * (static_cast<double>(w) - mean);
  return {mean, std::sqrt(var / static_cast<double>(weights.size()))};
}

MatrixStats stats(const BitMatrix& m) {
  MatrixStats s;
  s.rows = m.rows();
  s.cols = m.cols();
  s.four_cycles = count_4cycles(m);
  s.rank = rank(m);
  const auto cw = m.col_weights();
  const auto rw = m.row_weights();
  if (!cw.empty()) {
    const auto [lo, hi] = std::minmax_element(cw.begin(), cw.end());
    s.col_weight_min = *lo;
    s.col_weight_max = *hi;
    std::tie(s.col_weight_mean, s.col_weight_std) = mean_std(cw);
  }
  if (!rw.empty()) {
    const auto [lo, hi] = std::minmax_element(rw.begin(), rw.end());
    s.row_weight_min = *lo;
    s.row_weight_max = *hi;
    std::tie(s.row_weight_mean, s.row_weight_std) = mean_std(rw);
  }
  return s;
}

// ---------------------------------------------------------------------------
// alist

AlistError::AlistError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "alist line " + std::to_string(line) + ": " + what : "alist: " + what),
      line_(line) {}

namespace {

class AlistReader {
 public:
  explicit AlistReader(std::istream& in) : in_(in) {}

  std::vector<long> next_line(const char* section) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      std::istringstream ss(text);
      std::vector<long> values;
      std::string tok;
      while (ss >> tok) {
        std::size_t used = 0;
        long v = 0;
        try {
          v = std::stol(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size()) throw AlistError(line_, std::string("non-integer token '") + tok + "' in " + section);
        values.push_back(v);
      }
      if (!values.empty()) return values;
    }
    throw AlistError(0, std::string("unexpected end of file: missing ") + section);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

BitMatrix read_alist(std::istream& in) {
  AlistReader rd(in);
  auto header = rd.next_line("header (cols rows)");
  if (header.size() != 2 || header[0] <= 0 || header[1] <= 0)
    throw AlistError(rd.line(), "malformed header: expected two positive integers 'cols rows'");
  const auto n = static_cast<std::size_t>(header[0]);
  const auto m = static_cast<std::size_t>(header[1]);

  auto maxdeg = rd.next_line("max degree line");
  if (maxdeg.size() != 2 || maxdeg[0] < 0 || maxdeg[1] < 0)
    throw AlistError(rd.line(), "malformed max degree line");

  auto col_deg = rd.next_line("column degree list");
  if (col_deg.size() != n)
    throw AlistError(rd.line(), "column degree list has " + std::to_string(col_deg.size()) + " entries, expected " +
                                    std::to_string(n));
  for (long d : col_deg)
    if (d < 0 || d > maxdeg[0] || static_cast<std::size_t>(d) > m)
      throw AlistError(rd.line(), "column degree " + std::to_string(d) + " out of range");

  auto row_deg = rd.next_line("row degree list");
  if (row_deg.size() != m)
    throw AlistError(rd.line(), "row degree list has " + std::to_string(row_deg.size()) + " entries, expected " +
                                    std::to_string(m));
  for (long d : row_deg)
    if (d < 0 || d > maxdeg[1] || static_cast<std::size_t>(d) > n)
      throw AlistError(rd.line(), "row degree " + std::to_string(d) + " out of range");

  BitMatrix from_cols(m, n);
  for (std::size_t c = 0; c < n; ++c) {
    auto entries = rd.next_line("column index lists");
    std::size_t count = 0;
    for (long v : entries) {
      if (v == 0) continue;
      if (v < 0 || static_cast<std::size_t>(v) > m)
        throw AlistError(rd.line(), "row index " + std::to_string(v) + " out of range 1.." + std::to_string(m));
      if (from_cols.get(static_cast<std::size_t>(v - 1), c))
        throw AlistError(rd.line(), "duplicate row index " + std::to_string(v));
      from_cols.set(static_cast<std::size_t>(v - 1), c, true);
      ++count;
    }
    if (count != static_cast<std::size_t>(col_deg[c]))
      throw AlistError(rd.line(), "column " + std::to_string(c + 1) + " lists " + std::to_string(count) +
                                      " entries but degree is " + std::to_string(col_deg[c]));
  }

  BitMatrix from_rows(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    auto entries = rd.next_line("row index lists");
    std::size_t count = 0;
    for (long v : entries) {
      if (v == 0) continue;
      if (v < 0 || static_cast<std::size_t>(v) > n)
        throw AlistError(rd.line(), "column index " + std::to_string(v) + " out of range 1.." + std::to_string(n));
      if (from_rows.get(r, static_cast<std::size_t>(v - 1)))
        throw AlistError(rd.line(), "duplicate column index " + std::to_string(v));
      from_rows.set(r, static_cast<std::size_t>(v - 1), true);
      ++count;
    }
    if (count != static_cast<std::size_t>(row_deg[r]))
      throw AlistError(rd.line(), "row " + std::to_string(r + 1) + " lists " + std::to_string(count) +
                                      " entries but degree is " + std::to_string(row_deg[r]));
  }

  if (!(from_rows == from_cols)) throw AlistError(rd.line(), "row and column index lists disagree");
  return from_rows;
}

BitMatrix read_alist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AlistError(0, "cannot open " + path.string());
  return read_alist(in);
}

void write_alist(const BitMatrix& m, std::ostream& out) {
  const auto cw = m.col_weights();
  const auto rw = m.row_weights();
  const std::size_t max_c = cw.empty() ? 0 : *std::max_element(cw.begin(), cw.end());
  const std::size_t max_r = rw.empty() ? 0 : *std::max_element(rw.begin(), rw.end());

  auto write_list = [&out](const std::vector<std::size_t>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
  };

  out << m.cols() << ' ' << m.rows() << '\n' << max_c << ' ' << max_r << '\n';
  write_list(cw);
  write_list(rw);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (m.get(r, c)) idx.push_back(r + 1);
    idx.resize(std::max<std::size_t>(max_c, 1), 0);
    write_list(idx);
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.get(r, c)) idx.push_back(c + 1);
    idx.resize(std::max<std::size_t>(max_r, 1), 0);
    write_list(idx);
  }
}

void write_alist(const BitMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_alist(m, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace fec
