#include "opmin/symmod.hpp"

#include <set>
#include <stdexcept>

namespace opmin {

int GradedBasis::index_of(int degree, const std::string& label) const {
    auto it = degrees.find(degree);
    if (it == degrees.end()) return -1;
    for (std::size_t i = 0; i < it->second.size(); ++i)
        if (it->second[i] == label) return static_cast<int>(i);
    return -1;
}

bool GradedBasis::labels_unique() const {
    std::set<std::string> seen;
    for (const auto& [d, ls] : degrees)
        for (const auto& l : ls)
            if (!seen.insert(l).second) return false;
    return true;
}

SigmaAction SigmaAction::trivial(const GradedBasis& basis) {
    SigmaAction a;
    if (basis.arity < 2) return a;
    a.transpositions.resize(basis.arity - 1);
    for (int t = 1; t <= basis.arity - 1; ++t)
        for (const auto& [deg, ls] : basis.degrees)
            a.transpositions[t - 1][deg] = Matrix::identity(ls.size());
    return a;
}

const Matrix& SigmaAction::transposition(int t, int degree) const {
    if (t < 1 || t > static_cast<int>(transpositions.size()))
        throw std::invalid_argument("SigmaAction: transposition index out of range");
    auto it = transpositions[t - 1].find(degree);
    if (it == transpositions[t - 1].end())
        throw std::invalid_argument("SigmaAction: no matrix at requested degree");
    return it->second;
}

Matrix SigmaAction::matrix_of(const GradedBasis& basis, const Perm& sigma, int degree) const {
    const std::size_t d = basis.dim(degree);
    Matrix m = Matrix::identity(d);
    if (sigma.size() != static_cast<std::size_t>(basis.arity))
        throw std::invalid_argument("SigmaAction: permutation size != arity");
    for (int t : sigma.adjacent_word()) m = m * transposition(t, degree);
    return m;
}

Vec act_permutation(const GradedBasis& basis, const SigmaAction& action, const Perm& sigma,
                    const Vec& v, int degree) {
    if (v.size() != basis.dim(degree))
        throw std::invalid_argument("act_permutation: vector size != component dim");
    return action.matrix_of(basis, sigma, degree).apply(v);
}

ValidationReport validate_sigma_module(const GradedBasis& basis, const SigmaAction& action) {
    ValidationReport rep;
    const int n = basis.arity;
    if (n >= 2 && static_cast<int>(action.transpositions.size()) != n - 1) {
        rep.violations.push_back("arity " + std::to_string(n) + ": expected " +
                                 std::to_string(n - 1) + " transposition families");
        return rep;
    }
    for (const auto& [deg, labels] : basis.degrees) {
        const std::size_t d = labels.size();
        Matrix id = Matrix::identity(d);
        std::vector<Matrix> t;
        for (int i = 1; i <= n - 1; ++i) {
            const Matrix& m = action.transposition(i, deg);
            if (m.rows() != d || m.cols() != d) {
                rep.violations.push_back("degree " + std::to_string(deg) + ", s" + std::to_string(i) +
                                         ": wrong shape");
                return rep;
            }
            t.push_back(m);
        }
        for (int i = 0; i < n - 1; ++i) {
            if (!(t[i] * t[i] == id))
                rep.violations.push_back("degree " + std::to_string(deg) + ": s" + std::to_string(i + 1) +
                                         " not an involution");
            if (i + 1 < n - 1) {
                Matrix lhs = t[i] * t[i + 1] * t[i];
                Matrix rhs = t[i + 1] * t[i] * t[i + 1];
                if (!(lhs == rhs))
                    rep.violations.push_back("degree " + std::to_string(deg) + ": braid relation fails at s" +
                                             std::to_string(i + 1));
            }
            for (int j = i + 2; j < n - 1; ++j)
                if (!(t[i] * t[j] == t[j] * t[i]))
                    rep.violations.push_back("degree " + std::to_string(deg) + ": s" + std::to_string(i + 1) +
                                             " and s" + std::to_string(j + 1) + " do not commute");
        }
    }
    return rep;
}

const Matrix* LambdaMaps::find(int n, int i, int degree) const {
    auto it = maps.find({n, i});
    if (it == maps.end()) return nullptr;
    auto jt = it->second.find(degree);
    return jt == it->second.end() ? nullptr : &jt->second;
}

ValidationReport validate_lambda_structure(const std::map<int, GradedBasis>& components,
                                           const LambdaMaps& maps) {
    ValidationReport rep;
    for (const auto& [n, basis] : components) {
        if (n < 2) continue;
        if (components.find(n - 1) == components.end() || components.find(n - 2) == components.end())
            continue;
        for (const auto& [deg, labels] : basis.degrees) {
            for (int i = 1; i <= n; ++i) {
                for (int j = i + 1; j <= n; ++j) {
                    const Matrix* dj = maps.find(n, j, deg);
                    const Matrix* di_low = maps.find(n - 1, i, deg);
                    const Matrix* di = maps.find(n, i, deg);
                    const Matrix* djm1_low = maps.find(n - 1, j - 1, deg);
                    if (!dj || !di_low || !di || !djm1_low) continue;
                    Matrix lhs = (*di_low) * (*dj);
                    Matrix rhs = (*djm1_low) * (*di);
                    if (!(lhs == rhs))
                        rep.violations.push_back("arity " + std::to_string(n) + ", degree " +
                                                 std::to_string(deg) + ": delta_" + std::to_string(i) +
                                                 " delta_" + std::to_string(j) + " != delta_" +
                                                 std::to_string(j - 1) + " delta_" + std::to_string(i));
                }
            }
        }
    }
    return rep;
}

}  // namespace opmin
