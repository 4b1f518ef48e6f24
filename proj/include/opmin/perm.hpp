#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace opmin {

// Permutation of {1..n}. img_[i-1] = sigma(i). Composition is function
// composition: (a*b)(i) = a(b(i)).
class Perm {
  public:
    Perm() = default;
    explicit Perm(std::size_t n) : img_(n) {
        for (std::size_t i = 0; i < n; ++i) img_[i] = static_cast<int>(i) + 1;
    }
    explicit Perm(std::vector<int> one_line) : img_(std::move(one_line)) {
        std::vector<bool> seen(img_.size(), false);
        for (int v : img_) {
            if (v < 1 || v > static_cast<int>(img_.size()) || seen[v - 1])
                throw std::invalid_argument("Perm: not a bijection");
            seen[v - 1] = true;
        }
    }

    static Perm transposition(std::size_t n, int i) {  // (i, i+1)
        Perm p(n);
        std::swap(p.img_[i - 1], p.img_[i]);
        return p;
    }

    std::size_t size() const { return img_.size(); }
    int operator()(int i) const { return img_[i - 1]; }
    bool is_identity() const {
        for (std::size_t i = 0; i < img_.size(); ++i)
            if (img_[i] != static_cast<int>(i) + 1) return false;
        return true;
    }

    Perm operator*(const Perm& o) const {
        if (size() != o.size()) throw std::invalid_argument("Perm compose: size mismatch");
        Perm r(size());
        for (std::size_t i = 1; i <= size(); ++i) r.img_[i - 1] = (*this)(o(static_cast<int>(i)));
        return r;
    }

    Perm inverse() const {
        Perm r(size());
        for (std::size_t i = 1; i <= size(); ++i) r.img_[(*this)(static_cast<int>(i)) - 1] = static_cast<int>(i);
        return r;
    }

    bool operator==(const Perm& o) const { return img_ == o.img_; }
    bool operator<(const Perm& o) const { return img_ < o.img_; }

    // Word of adjacent transpositions with sigma = s[0] ∘ s[1] ∘ ... ∘ s[k-1].
    std::vector<int> adjacent_word() const;

    // Deletes value i: remove position sigma^{-1}(i), renumber values > i down.
    // The result acts on {1..n-1}. Matches plugging a point into slot i.
    Perm delete_value(int i) const;

    std::string one_line() const {
        std::string s;
        for (int v : img_) s += std::to_string(v);
        return s;
    }
    const std::vector<int>& images() const { return img_; }

  private:
    std::vector<int> img_;
};

std::vector<Perm> all_perms(std::size_t n);

// Permutation realizing operadic equivariance: with left actions,
//   (sigma·a) ∘_i (tau·b) = block_insert_perm(sigma, tau, i, n) · (a ∘_{sigma^{-1}(i)} b)
// for a of arity m, b of arity n, 1 <= i <= m.
Perm block_insert_perm(const Perm& sigma, const Perm& tau, int i);

}  // namespace opmin
