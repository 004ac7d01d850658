#include "cokfluct/padic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cokfluct/detail/elimination.hpp"
#include "cokfluct/errors.hpp"

namespace cokfluct {

PadicMatrix::PadicMatrix(std::size_t rows, std::size_t cols, std::uint64_t p, int precision)
    : rows_(rows), cols_(cols), p_(p), precision_(precision), entries_(rows * cols) {
  if (p < 2) throw std::invalid_argument("PadicMatrix prime must be >= 2");
  if (precision < 1) throw std::invalid_argument("PadicMatrix precision must be >= 1");
  mpz_ui_pow_ui(modulus_.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(precision));
}

PadicMatrix PadicMatrix::reduce(const IntMatrix& m, std::uint64_t p, int precision) {
  PadicMatrix out(m.rows(), m.cols(), p, precision);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out.set(r, c, m(r, c));
  return out;
}

PadicMatrix PadicMatrix::identity(std::size_t n, std::uint64_t p, int precision) {
  PadicMatrix out(n, n, p, precision);
  for (std::size_t i = 0; i < n; ++i) out.set(i, i, 1L);
  return out;
}

void PadicMatrix::set(std::size_t r, std::size_t c, const mpz_class& x) {
  mpz_fdiv_r(entries_[r * cols_ + c].get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t());
}

bool PadicMatrix::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const mpz_class& v) { return v == 0; });
}

PadicMatrix operator*(const PadicMatrix& a, const PadicMatrix& b) {
  if (a.cols() != b.rows()) throw StructuralError("PadicMatrix product shape mismatch");
  if (a.prime() != b.prime() || a.precision() != b.precision())
    throw StructuralError("PadicMatrix product over different rings");
  PadicMatrix out(a.rows(), b.cols(), a.prime(), a.precision());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      mpz_class acc = 0;
      for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      out.set(i, j, acc);
    }
  return out;
}

Partition DivisorValuations::partition() const {
  std::vector<int> positive;
  for (int v : valuations)
    if (v > 0) positive.push_back(v);
  return Partition::from_unsorted(std::move(positive));
}

namespace {

template <class Ring>
detail::Dense<typename Ring::value_type> to_ring(const Ring& R, const PadicMatrix& m) {
  detail::Dense<typename Ring::value_type> out(m.rows(), m.cols(), R.zero());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = R.from_mpz(m(r, c));
  return out;
}

DivisorValuations finish(detail::ValuationTally tally, int precision) {
  std::sort(tally.valuations.begin(), tally.valuations.end());
  return DivisorValuations{std::move(tally.valuations), tally.saturated, precision};
}

}  // namespace

DivisorValuations padic_valuations(const PadicMatrix& m) {
  if (m.rows() != m.cols()) throw StructuralError("padic_valuations expects a square matrix");
  detail::ValuationTally tally;
  detail::dispatch_ring(m.prime(), m.precision(), [&](const auto& R) {
    detail::eliminate_dense(R, to_ring(R, m), tally);
  });
  return finish(std::move(tally), m.precision());
}

BlockLowerMatrix::BlockLowerMatrix(std::vector<std::size_t> block_sizes, std::uint64_t p, int precision)
    : sizes_(std::move(block_sizes)), p_(p), precision_(precision) {
  if (sizes_.empty()) throw StructuralError("block layout needs at least one block");
  for (std::size_t n : sizes_)
    if (n == 0) throw StructuralError("block sizes must be positive");
  blocks_.resize(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) blocks_[i].resize(i + 1);
}

std::size_t BlockLowerMatrix::dimension() const {
  return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
}

void BlockLowerMatrix::set_block(std::size_t i, std::size_t j, PadicMatrix block) {
  const std::size_t k = sizes_.size();
  if (i >= k || j >= k) throw StructuralError("block index out of range");
  if (block.rows() != sizes_[i] || block.cols() != sizes_[j])
    throw StructuralError("block (" + std::to_string(i) + "," + std::to_string(j) + ") has the wrong shape");
  if (block.prime() != p_ || block.precision() != precision_)
    throw StructuralError("block ring differs from the layout ring");
  if (j > i) {
    if (!block.is_zero())
      throw StructuralError("nonzero block (" + std::to_string(i) + "," + std::to_string(j) +
                            ") above the block diagonal");
    return;
  }
  if (block.is_zero()) {
    blocks_[i][j].reset();
    return;
  }
  blocks_[i][j] = std::move(block);
}

const std::optional<PadicMatrix>& BlockLowerMatrix::block(std::size_t i, std::size_t j) const {
  static const std::optional<PadicMatrix> none;
  if (j > i) return none;
  return blocks_.at(i).at(j);
}

PadicMatrix BlockLowerMatrix::assemble() const {
  const std::size_t n = dimension();
  PadicMatrix out(n, n, p_, precision_);
  std::size_t r0 = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    std::size_t c0 = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (const auto& b = blocks_[i][j])
        for (std::size_t r = 0; r < sizes_[i]; ++r)
          for (std::size_t c = 0; c < sizes_[j]; ++c) out.set(r0 + r, c0 + c, (*b)(r, c));
      c0 += sizes_[j];
    }
    r0 += sizes_[i];
  }
  return out;
}

DivisorValuations streaming_block_eliminate(const BlockLowerMatrix& m) {
  detail::ValuationTally tally;
  detail::dispatch_ring(m.prime(), m.precision(), [&](const auto& R) {
    using V = typename std::decay_t<decltype(R)>::value_type;
    const std::size_t k = m.block_count();
    std::vector<std::vector<detail::Dense<V>>> storage(k);
    std::vector<std::vector<const detail::Dense<V>*>> grid(k);
    for (std::size_t i = 0; i < k; ++i) {
      storage[i].reserve(i + 1);
      grid[i].assign(i + 1, nullptr);
      for (std::size_t j = 0; j <= i; ++j)
        if (const auto& b = m.block(i, j)) {
          storage[i].push_back(to_ring(R, *b));
          grid[i][j] = &storage[i].back();
        }
    }
    detail::eliminate_streaming(R, m.block_sizes(), grid, tally);
  });
  return finish(std::move(tally), m.precision());
}

}  // namespace cokfluct
