#include "opmin/perm.hpp"

#include <algorithm>

namespace opmin {

std::vector<int> Perm::adjacent_word() const {
    std::vector<int> word;
    std::vector<int> v = img_;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            if (v[i] > v[i + 1]) {
                std::swap(v[i], v[i + 1]);
                word.push_back(static_cast<int>(i) + 1);
                moved = true;
                break;
            }
        }
    }
    std::reverse(word.begin(), word.end());
    return word;
}

Perm Perm::delete_value(int i) const {
    std::vector<int> out;
    out.reserve(img_.size() - 1);
    for (int v : img_) {
        if (v == i) continue;
        out.push_back(v > i ? v - 1 : v);
    }
    return Perm(out);
}

std::vector<Perm> all_perms(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i) + 1;
    std::vector<Perm> out;
    do {
        out.push_back(Perm(v));
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

Perm block_insert_perm(const Perm& sigma, const Perm& tau, int i) {
    const int m = static_cast<int>(sigma.size());
    const int n = static_cast<int>(tau.size());
    const int big = m + n - 1;
    const int j = sigma.inverse()(i);  // slot of the plain operation receiving the block
    auto adj = [&](int v) { return v < i ? v : v + n - 1; };
    std::vector<int> img(big);
    for (int q = 1; q < j; ++q) img[q - 1] = adj(sigma(q));
    for (int s = 1; s <= n; ++s) img[j + s - 2] = i - 1 + tau(s);
    for (int q = j + 1; q <= m; ++q) img[q + n - 2] = adj(sigma(q));
    return Perm(img);
}

}  // namespace opmin
