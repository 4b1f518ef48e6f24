#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opmin/dgoperad.hpp"
#include "opmin/symmod.hpp"

using namespace opmin;

namespace {

// regular representation of Sigma_n in degree 0
std::pair<GradedBasis, SigmaAction> regular_rep(int n) {
    GradedBasis b;
    b.arity = n;
    auto perms = all_perms(static_cast<std::size_t>(n));
    std::vector<std::string> labels;
    for (const auto& s : perms) labels.push_back(s.one_line());
    b.degrees[0] = labels;
    SigmaAction a;
    a.transpositions.resize(n - 1);
    for (int t = 1; t <= n - 1; ++t) {
        Matrix m(labels.size(), labels.size());
        Perm tp = Perm::transposition(static_cast<std::size_t>(n), t);
        for (std::size_t j = 0; j < perms.size(); ++j) {
            std::string img = (tp * perms[j]).one_line();
            for (std::size_t r = 0; r < labels.size(); ++r)
                if (labels[r] == img) m.at(r, j) = Rat(1);
        }
        a.transpositions[t - 1][0] = m;
    }
    return {b, a};
}

}  // namespace

TEST_CASE("act_permutation: identity and the Sigma_2 regular swap") {
    auto [b, a] = regular_rep(2);
    Vec v = {Rat(3), Rat(5)};
    CHECK(act_permutation(b, a, Perm(2), v, 0) == v);
    Vec swapped = act_permutation(b, a, Perm::transposition(2, 1), v, 0);
    CHECK(swapped == Vec{Rat(5), Rat(3)});
}

TEST_CASE("two decompositions of the 3-cycle act identically") {
    auto [b, a] = regular_rep(3);
    // sigma = s1 . s2 = s2 . s1 . s2 . s1 (braid-rearranged word)
    const Matrix& t1 = a.transposition(1, 0);
    const Matrix& t2 = a.transposition(2, 0);
    Matrix short_word = t1 * t2;
    Matrix long_word = t2 * t1 * t2 * t1;
    CHECK(short_word == long_word);
    Perm cyc(std::vector<int>{2, 3, 1});
    CHECK(a.matrix_of(b, cyc, 0) == short_word);
}

TEST_CASE("validate_sigma_module accepts trivial and sign representations") {
    GradedBasis b;
    b.arity = 3;
    b.degrees[0] = {"x"};
    SigmaAction trivial = SigmaAction::trivial(b);
    CHECK(validate_sigma_module(b, trivial).ok());

    GradedBasis b2;
    b2.arity = 2;
    b2.degrees[0] = {"x"};
    SigmaAction sign;
    sign.transpositions.resize(1);
    Matrix neg(1, 1);
    neg.at(0, 0) = Rat(-1);
    sign.transpositions[0][0] = neg;
    CHECK(validate_sigma_module(b2, sign).ok());
}

TEST_CASE("validate_sigma_module reports a broken involution") {
    GradedBasis b;
    b.arity = 2;
    b.degrees[0] = {"x"};
    SigmaAction bad;
    bad.transpositions.resize(1);
    Matrix two(1, 1);
    two.at(0, 0) = Rat(2);
    bad.transpositions[0][0] = two;
    auto rep = validate_sigma_module(b, bad);
    REQUIRE(!rep.ok());
    CHECK(rep.violations.front().find("s1") != std::string::npos);
}

TEST_CASE("lambda structure: zero maps validate, ass_plus restrictions validate") {
    std::map<int, GradedBasis> comps;
    LambdaMaps zero;
    for (int n = 1; n <= 3; ++n) {
        GradedBasis b;
        b.arity = n;
        b.degrees[0] = {"x" + std::to_string(n)};
        comps[n] = b;
    }
    {
        GradedBasis b;
        b.arity = 0;
        b.degrees[0] = {"x0"};
        comps[0] = b;
    }
    for (int n = 1; n <= 3; ++n)
        for (int i = 1; i <= n; ++i) zero.maps[{n, i}][0] = Matrix(1, 1);
    CHECK(validate_lambda_structure(comps, zero).ok());

    // the real thing: restriction matrices of ass_plus up to arity 3
    auto p = make_builtin("ass_plus", 3);
    std::map<int, GradedBasis> ac;
    LambdaMaps lm;
    for (int n = 0; n <= 3; ++n) ac[n] = p.arity(n).basis;
    for (int n = 1; n <= 3; ++n)
        for (int i = 1; i <= n; ++i) lm.maps[{n, i}][0] = restriction_matrix(p, n, i, 0);
    CHECK(validate_lambda_structure(ac, lm).ok());

    // non-symmetric structure: delta_1(2), delta_2(2) project onto different
    // axes; swapping them breaks coherence at arity 3
    std::map<int, GradedBasis> comps2;
    for (int n = 0; n <= 3; ++n) {
        GradedBasis b;
        b.arity = n;
        if (n == 1 || n == 2)
            b.degrees[0] = {"y" + std::to_string(n) + "a", "y" + std::to_string(n) + "b"};
        else
            b.degrees[0] = {"y" + std::to_string(n)};
        comps2[n] = b;
    }
    auto mat = [](std::vector<std::vector<long>> rows) {
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < rows[0].size(); ++c) m.at(r, c) = Rat(rows[r][c]);
        return m;
    };
    LambdaMaps nonsym;
    nonsym.maps[{1, 1}][0] = mat({{0, 0}});
    nonsym.maps[{2, 1}][0] = mat({{1, 0}, {0, 0}});
    nonsym.maps[{2, 2}][0] = mat({{0, 0}, {0, 1}});
    nonsym.maps[{3, 1}][0] = mat({{1}, {0}});
    nonsym.maps[{3, 2}][0] = mat({{1}, {5}});
    nonsym.maps[{3, 3}][0] = mat({{0}, {5}});
    CHECK(validate_lambda_structure(comps2, nonsym).ok());
    LambdaMaps bad = nonsym;
    std::swap(bad.maps[{2, 1}], bad.maps[{2, 2}]);
    auto badrep = validate_lambda_structure(comps2, bad);
    REQUIRE(!badrep.ok());
    CHECK(badrep.violations.front().find("arity 3") != std::string::npos);
}
