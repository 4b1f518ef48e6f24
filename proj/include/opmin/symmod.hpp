#pragma once

#include <map>
#include <string>
#include <vector>

#include "opmin/linalg.hpp"
#include "opmin/perm.hpp"

namespace opmin {

// Ordered basis of one arity component, graded by cohomological degree.
struct GradedBasis {
    int arity = 0;
    std::map<int, std::vector<std::string>> degrees;  // degree -> labels, in basis order

    std::size_t dim(int degree) const {
        auto it = degrees.find(degree);
        return it == degrees.end() ? 0 : it->second.size();
    }
    std::size_t total_dim() const {
        std::size_t n = 0;
        for (const auto& [d, ls] : degrees) n += ls.size();
        return n;
    }
    // Index of a label within its degree component; -1 if absent.
    int index_of(int degree, const std::string& label) const;
    bool labels_unique() const;
};

// Sigma_n action given on adjacent transpositions (i, i+1), one matrix per
// degree component. Arbitrary permutations act through adjacent_word().
struct SigmaAction {
    // transpositions[t-1][degree] for t = 1..arity-1; matrices are square of
    // size dim(degree) and act on coordinate columns.
    std::vector<std::map<int, Matrix>> transpositions;

    static SigmaAction trivial(const GradedBasis& basis);

    const Matrix& transposition(int t, int degree) const;
    Matrix matrix_of(const GradedBasis& basis, const Perm& sigma, int degree) const;
};

Vec act_permutation(const GradedBasis& basis, const SigmaAction& action, const Perm& sigma,
                    const Vec& v, int degree);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks involutions, commuting far transpositions and braid relations,
// degree preservation, per degree component.
ValidationReport validate_sigma_module(const GradedBasis& basis, const SigmaAction& action);

// Restriction maps delta_i : component(n) -> component(n-1), degree preserving.
struct LambdaMaps {
    // maps[{n, i}][degree]: matrix from basis of arity n, degree, to arity n-1, same degree.
    std::map<std::pair<int, int>, std::map<int, Matrix>> maps;

    const Matrix* find(int n, int i, int degree) const;
};

// Checks the coherence delta_i . delta_j = delta_{j-1} . delta_i for i < j on
// every arity and degree present.
ValidationReport validate_lambda_structure(const std::map<int, GradedBasis>& components,
                                           const LambdaMaps& maps);

}  // namespace opmin
