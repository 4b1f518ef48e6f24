// Test-only oracles, independent of the library code paths they check.
#pragma once

#include <functional>
#include <map>
#include <vector>

#include "opmin/freeop.hpp"

namespace oracles {

using opmin::Matrix;
using opmin::Rat;
using opmin::Stage;

// Determinant by cofactor expansion; rank as the largest k with a
// nonvanishing k x k minor. Exponential, fine for desk-size matrices.
inline Rat det_recursive(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 0) return Rat(1);
    if (n == 1) return m.at(0, 0);
    Rat acc;
    int sign = 1;
    for (std::size_t c = 0; c < n; ++c) {
        if (!m.at(0, c).is_zero()) {
            Matrix sub(n - 1, n - 1);
            for (std::size_t r = 1; r < n; ++r) {
                std::size_t cc = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == c) continue;
                    sub.at(r - 1, cc++) = m.at(r, k);
                }
            }
            Rat term = m.at(0, c) * det_recursive(sub);
            acc += sign > 0 ? term : -term;
        }
        sign = -sign;
    }
    return acc;
}

inline std::size_t minor_rank_oracle(const Matrix& m) {
    const std::size_t maxk = std::min(m.rows(), m.cols());
    for (std::size_t k = maxk; k >= 1; --k) {
        std::vector<std::size_t> ridx(k), cidx(k);
        std::function<bool(std::size_t, std::size_t)> rows_loop = [&](std::size_t pos,
                                                                      std::size_t start) -> bool {
            if (pos == k) {
                std::function<bool(std::size_t, std::size_t)> cols_loop =
                    [&](std::size_t cpos, std::size_t cstart) -> bool {
                    if (cpos == k) {
                        Matrix sub(k, k);
                        for (std::size_t r = 0; r < k; ++r)
                            for (std::size_t c = 0; c < k; ++c) sub.at(r, c) = m.at(ridx[r], cidx[c]);
                        return !det_recursive(sub).is_zero();
                    }
                    for (std::size_t c = cstart; c < m.cols(); ++c) {
                        cidx[cpos] = c;
                        if (cols_loop(cpos + 1, c + 1)) return true;
                    }
                    return false;
                };
                return cols_loop(0, 0);
            }
            for (std::size_t r = start; r < m.rows(); ++r) {
                ridx[pos] = r;
                if (rows_loop(pos + 1, r + 1)) return true;
            }
            return false;
        };
        if (rows_loop(0, 0)) return k;
    }
    return 0;
}

using DegCount = std::map<int, long>;

inline DegCount convolve(const DegCount& a, const DegCount& b) {
    DegCount r;
    for (const auto& [da, ca] : a)
        for (const auto& [db, cb] : b) r[da + db] += ca * cb;
    return r;
}

inline long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
    return r;
}

// Number of decorated trees on m labeled leaves, by total degree, computed by
// a block-size recursion over ordered-by-minimum set partitions. This never
// builds a tree, so it is independent of the enumeration in the library.
struct TreeCounter {
    const Stage& st;
    std::map<int, DegCount> g_memo;
    std::map<std::pair<int, int>, DegCount> h_memo;

    explicit TreeCounter(const Stage& s) : st(s) {}

    DegCount gen_dims(int k) {
        DegCount d;
        if (st.has_arity(k))
            for (const auto& [deg, ls] : st.gen_basis(k).degrees) d[deg] += static_cast<long>(ls.size());
        return d;
    }

    // trees on a block of size m (a single leaf counts as a tree)
    DegCount g(int m) {
        auto it = g_memo.find(m);
        if (it != g_memo.end()) return it->second;
        DegCount r;
        if (m == 1) {
            r[0] = 1;
        } else {
            for (int k = 2; k <= m; ++k) {
                DegCount ek = gen_dims(k);
                if (ek.empty()) continue;
                r = merge(r, convolve(ek, h(m, k)));
            }
        }
        g_memo[m] = r;
        return r;
    }

    // ordered-by-min partitions of m labeled points into k blocks, a tree on each
    DegCount h(int m, int k) {
        auto key = std::make_pair(m, k);
        auto it = h_memo.find(key);
        if (it != h_memo.end()) return it->second;
        DegCount r;
        if (k == 0) {
            if (m == 0) r[0] = 1;
        } else if (m >= k) {
            // first block: contains the minimum, choose the rest of its s elements
            for (int s = 1; s <= m - k + 1; ++s) {
                DegCount term = convolve(g(s), h(m - s, k - 1));
                for (auto& [d, c] : term) r[d] += binom(m - 1, s - 1) * c;
            }
        }
        h_memo[key] = r;
        return r;
    }

    static DegCount merge(const DegCount& a, const DegCount& b) {
        DegCount r = a;
        for (const auto& [d, c] : b) r[d] += c;
        return r;
    }

    // counts only genuine trees (>= 1 internal vertex) for arity >= 2
    DegCount tree_dims(int n) {
        DegCount r = g(n);
        if (n == 1) return r;  // the bare leaf
        return r;
    }
};

}  // namespace oracles
