#pragma once

// Elimination kernels over Z/p^N, templated on the residue ring (see
// residue_ring.hpp). These are the hot loops behind padic_valuations,
// streaming_block_eliminate and the experiment trial path.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cokfluct/residue_ring.hpp"

namespace cokfluct::detail {

template <class V>
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<V> a;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, const V& fill) : rows(r), cols(c), a(r * c, fill) {}

  V& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  const V& operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct ValuationTally {
  std::vector<int> valuations;
  std::size_t saturated = 0;
};

/// Square dense elimination, pivoting on an entry of minimal valuation.
template <class Ring>
void eliminate_dense(const Ring& R, Dense<typename Ring::value_type> m, ValuationTally& out) {
  assert(m.rows == m.cols);
  const std::size_t n = m.rows;
  const int cap = R.precision();
  for (std::size_t t = 0; t < n; ++t) {
    int best = cap;
    std::size_t br = n, bc = n;
    for (std::size_t r = t; r < n && best > 0; ++r)
      for (std::size_t c = t; c < n; ++c) {
        if (R.is_zero(m(r, c))) continue;
        const int v = R.valuation(m(r, c));
        if (v < best) {
          best = v;
          br = r;
          bc = c;
          if (v == 0) break;
        }
      }
    if (br == n) {
      out.saturated += n - t;
      return;
    }
    if (br != t)
      for (std::size_t c = 0; c < n; ++c) std::swap(m(t, c), m(br, c));
    if (bc != t)
      for (std::size_t r = 0; r < n; ++r) std::swap(m(r, t), m(r, bc));

    const auto inv = R.inverse_unit(R.shift_down(m(t, t), best));
    for (std::size_t r = t + 1; r < n; ++r) {
      if (R.is_zero(m(r, t))) continue;
      const auto f = R.mul(R.shift_down(m(r, t), best), inv);
      for (std::size_t c = t + 1; c < n; ++c) m(r, c) = R.sub_mul(m(r, c), f, m(t, c));
      m(r, t) = R.zero();
    }
    out.valuations.push_back(best);
  }
}

/// Block-lower-triangular elimination. `blocks[i][j]` (j <= i) points at the
/// n_i x n_j block or is null for a zero block.
template <class Ring>
void eliminate_streaming(const Ring& R, const std::vector<std::size_t>& sizes,
                         const std::vector<std::vector<const Dense<typename Ring::value_type>*>>& blocks,
                         ValuationTally& out) {
  using V = typename Ring::value_type;
  const std::size_t k = sizes.size();
  const V zero = R.zero();

  std::size_t s = 0;  // carried rows == carried columns
  Dense<V> leftover(0, 0, zero);
  std::vector<Dense<V>> carry(k);
  std::vector<bool> carry_live(k, false);

  std::vector<long> pivot_row;
  std::vector<bool> row_used;
  std::vector<std::size_t> rest, pivots;

  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t nj = sizes[j];
    const std::size_t w = s + nj;

    // Stage matrix: leftover rows on carried columns, then block row j.
    Dense<V> m(w, w, zero);
    for (std::size_t r = 0; r < s; ++r)
      for (std::size_t c = 0; c < s; ++c) m(r, c) = leftover(r, c);
    if (carry_live[j])
      for (std::size_t r = 0; r < nj; ++r)
        for (std::size_t c = 0; c < s; ++c) m(s + r, c) = carry[j](r, c);
    if (const auto* d = blocks[j][j])
      for (std::size_t r = 0; r < nj; ++r)
        for (std::size_t c = 0; c < nj; ++c) m(s + r, s + c) = (*d)(r, c);

    // Gauss-Jordan on unit pivots only.
    pivot_row.assign(w, -1);
    row_used.assign(w, false);
    for (std::size_t c = 0; c < w; ++c) {
      std::size_t r = w;
      for (std::size_t x = 0; x < w; ++x)
        if (!row_used[x] && R.is_unit(m(x, c))) {
          r = x;
          break;
        }
      if (r == w) continue;
      const V inv = R.inverse_unit(m(r, c));
      for (std::size_t cc = 0; cc < w; ++cc) m(r, cc) = R.mul(m(r, cc), inv);
      for (std::size_t x = 0; x < w; ++x) {
        if (x == r || R.is_zero(m(x, c))) continue;
        const V f = m(x, c);
        for (std::size_t cc = 0; cc < w; ++cc) m(x, cc) = R.sub_mul(m(x, cc), f, m(r, cc));
      }
      row_used[r] = true;
      pivot_row[c] = static_cast<long>(r);
      out.valuations.push_back(0);
    }

    rest.clear();
    pivots.clear();
    for (std::size_t c = 0; c < w; ++c) (pivot_row[c] < 0 ? rest : pivots).push_back(c);
    const std::size_t s_next = rest.size();

    Dense<V> next_leftover(s_next, s_next, zero);
    {
      std::size_t rr = 0;
      for (std::size_t x = 0; x < w; ++x) {
        if (row_used[x]) continue;
        for (std::size_t c = 0; c < s_next; ++c) next_leftover(rr, c) = m(x, rest[c]);
        ++rr;
      }
      assert(rr == s_next);
    }

    // Schur update of every later block row onto the surviving columns.
    for (std::size_t i = j + 1; i < k; ++i) {
      const auto* below = blocks[i][j];
      if (!carry_live[i] && below == nullptr) {
        carry[i] = Dense<V>(sizes[i], s_next, zero);
        continue;
      }
      const std::size_t ni = sizes[i];
      auto y_at = [&](std::size_t r, std::size_t c) -> const V& {
        if (c < s) return carry_live[i] ? carry[i](r, c) : zero;
        return below ? (*below)(r, c - s) : zero;
      };
      Dense<V> next(ni, s_next, zero);
      bool live = false;
      for (std::size_t r = 0; r < ni; ++r) {
        for (std::size_t c = 0; c < s_next; ++c) next(r, c) = y_at(r, rest[c]);
        for (std::size_t pc : pivots) {
          const V& f = y_at(r, pc);
          if (R.is_zero(f)) continue;
          const auto pr = static_cast<std::size_t>(pivot_row[pc]);
          for (std::size_t c = 0; c < s_next; ++c) next(r, c) = R.sub_mul(next(r, c), f, m(pr, rest[c]));
        }
        if (!live)
          for (std::size_t c = 0; c < s_next; ++c)
            if (!R.is_zero(next(r, c))) {
              live = true;
              break;
            }
      }
      carry[i] = std::move(next);
      carry_live[i] = live;
    }

    leftover = std::move(next_leftover);
    s = s_next;
  }

  eliminate_dense(R, std::move(leftover), out);
}

/// c = a * b over the ring; square n x n operands.
template <class Ring>
Dense<typename Ring::value_type> multiply(const Ring& R, const Dense<typename Ring::value_type>& a,
                                          const Dense<typename Ring::value_type>& b) {
  using V = typename Ring::value_type;
  Dense<V> c(a.rows, b.cols, R.zero());
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t t = 0; t < a.cols; ++t) {
      const V& f = a(i, t);
      if (R.is_zero(f)) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) = R.add(c(i, j), R.mul(f, b(t, j)));
    }
  return c;
}

}  // namespace cokfluct::detail
