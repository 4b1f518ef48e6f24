#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opmin/sullivan.hpp"

using namespace opmin;

namespace {

std::shared_ptr<const FiniteDgOperad> shared_builtin(const std::string& name, int max_arity) {
    return std::make_shared<FiniteDgOperad>(make_builtin(name, max_arity));
}

std::map<int, std::map<int, int>> dims_of(const Stage& st) {
    std::map<int, std::map<int, int>> out;
    for (const auto& [n, gs] : st.generators())
        for (const auto& [deg, ls] : gs.first.degrees) out[n][deg] = static_cast<int>(ls.size());
    return out;
}

}  // namespace

TEST_CASE("base step: ass non-unitary has a 2-dim E(2) with bijective rho_2") {
    auto model = base_step(shared_builtin("ass", 4), Mode::non_unitary);
    CHECK(model.completed_arity == 2);
    CHECK(model.stage.gen_basis(2).dim(0) == 2);
    CHECK(model.stage.gen_basis(2).total_dim() == 2);
    auto q = is_quasi_iso_upto(model.rho, 2);
    CHECK(q.ok);
}

TEST_CASE("base step: ass_plus unitary restricts the identity-labeled generator to id") {
    auto model = base_step(shared_builtin("ass_plus", 4), Mode::unitary);
    REQUIRE(model.stage.has_gen("e2[12]"));
    REQUIRE(model.stage.has_gen("e2[21]"));
    CHECK(model.stage.restriction_of("e2[12]", 1) == unit_tree_vector());
    CHECK(model.stage.restriction_of("e2[12]", 2) == unit_tree_vector());
    // delta_1 = delta_2 on all of E(2)
    CHECK(model.stage.restriction_of("e2[21]", 1) == model.stage.restriction_of("e2[21]", 2));
    // the value of the identity-labeled generator is the identity permutation
    CHECK(model.rho.values.at("e2[12]") == model.target->elem_of_label(2, "12"));
}

TEST_CASE("base step: com_plus has one generator with both restrictions id") {
    auto model = base_step(shared_builtin("com_plus", 4), Mode::unitary);
    CHECK(model.stage.gen_basis(2).total_dim() == 1);
    const auto& label = model.stage.gen_basis(2).degrees.at(0).front();
    CHECK(model.stage.restriction_of(label, 1) == unit_tree_vector());
    CHECK(model.stage.restriction_of(label, 2) == unit_tree_vector());
}

TEST_CASE("base step: hypothesis violations are reported") {
    CHECK_THROWS_AS(base_step(shared_builtin("com", 4), Mode::unitary), HypothesisError);
    CHECK_THROWS_AS(base_step(shared_builtin("ass_plus", 4), Mode::non_unitary), HypothesisError);
    auto broken = make_builtin("ass_plus", 4);
    broken.m2_label.reset();
    CHECK_THROWS_AS(base_step(std::make_shared<FiniteDgOperad>(broken), Mode::unitary),
                    HypothesisError);
}

TEST_CASE("unitary_section_correction: zero differences leave the section fixed") {
    auto p = make_builtin("ass_plus", 3);
    auto h2 = arity_cohomology(p, 2);
    auto h1 = arity_cohomology(p, 1);
    Matrix lower(p.arity(1).basis.dim(0), 1);
    lower.set_col(0, p.unit().coords);
    auto corrected =
        unitary_section_correction(p, 2, 0, h2.at(0), h1.at(0), lower, h2.at(0).class_reps);
    // for ass_plus the canonical section is already compatible and equivariant
    CHECK(corrected == h2.at(0).class_reps);
    // idempotence: correcting the corrected section returns it
    auto again = unitary_section_correction(p, 2, 0, h2.at(0), h1.at(0), lower, corrected);
    CHECK(again == corrected);
}

TEST_CASE("inductive step for ass: kernel killing at arity 3, nothing else") {
    auto model = base_step(shared_builtin("ass", 4), Mode::non_unitary);
    auto m3 = inductive_step(model, 3);
    CHECK(m3.completed_arity == 3);
    REQUIRE(m3.stage.has_arity(3));
    CHECK(m3.stage.gen_basis(3).dim(-1) == 6);
    CHECK(m3.stage.gen_basis(3).total_dim() == 6);

    // with default conventions one generator has d(e) = m2 o_1 m2 - m2 o_2 m2,
    // where m2 is the identity-labeled arity-2 generator
    Tree left = Tree::make_node(
        "e2[12]", {Tree::make_node("e2[12]", {Tree::make_leaf(1), Tree::make_leaf(2)}),
                   Tree::make_leaf(3)});
    Tree right = Tree::make_node(
        "e2[12]", {Tree::make_leaf(1),
                   Tree::make_node("e2[12]", {Tree::make_leaf(2), Tree::make_leaf(3)})});
    TreeVector assoc = TreeVector::zero(3, 0);
    assoc.terms[left] = Rat(1);
    assoc.terms[right] = Rat(-1);
    bool found = false;
    for (const auto& l : m3.stage.gen_basis(3).degrees.at(-1))
        if (m3.stage.diff_of(l) == assoc) found = true;
    CHECK(found);

    // every d(e) lies in the kernel of the evaluation
    for (const auto& l : m3.stage.gen_basis(3).degrees.at(-1)) {
        OpElem img = evaluate_morphism(model.rho, m3.stage.diff_of(l));
        CHECK(img.is_zero());
    }

    auto m4 = inductive_step(m3, 4);
    CHECK(m4.stage.gen_basis(4).dim(-2) == 24);
    CHECK(m4.stage.gen_basis(4).total_dim() == 24);
}

TEST_CASE("inductive step for com: E(3) is 2-dimensional in degree -1") {
    auto model = base_step(shared_builtin("com", 4), Mode::non_unitary);
    auto m3 = inductive_step(model, 3);
    CHECK(m3.stage.gen_basis(3).dim(-1) == 2);
    CHECK(m3.stage.gen_basis(3).total_dim() == 2);
}

TEST_CASE("minimal models: generator dimension tables") {
    auto ass = minimal_model(shared_builtin("ass", 4), 4, Mode::non_unitary);
    CHECK(ass.generator_dims ==
          std::map<int, std::map<int, int>>{{2, {{0, 2}}}, {3, {{-1, 6}}}, {4, {{-2, 24}}}});

    auto com = minimal_model(shared_builtin("com", 4), 4, Mode::non_unitary);
    CHECK(com.generator_dims ==
          std::map<int, std::map<int, int>>{{2, {{0, 1}}}, {3, {{-1, 2}}}, {4, {{-2, 6}}}});

    auto assp = minimal_model(shared_builtin("ass_plus", 4), 4, Mode::unitary);
    CHECK(assp.generator_dims == ass.generator_dims);

    auto comp = minimal_model(shared_builtin("com_plus", 4), 4, Mode::unitary);
    CHECK(comp.generator_dims == com.generator_dims);
}

TEST_CASE("strictly unital model: restrictions vanish above arity 2") {
    auto assp = minimal_model(shared_builtin("ass_plus", 4), 4, Mode::unitary);
    const Stage& st = assp.staged.stage;
    for (int n = 3; n <= 4; ++n) {
        for (const auto& [deg, ls] : st.gen_basis(n).degrees)
            for (const auto& l : ls)
                for (int i = 1; i <= n; ++i) CHECK(st.restriction_of(l, i).is_zero());
    }
    CHECK(st.restriction_of("e2[12]", 1) == unit_tree_vector());
    CHECK(st.restriction_of("e2[12]", 2) == unit_tree_vector());
}

TEST_CASE("unitary and non-unitary models agree on differentials arity-wise") {
    auto ass = minimal_model(shared_builtin("ass", 4), 4, Mode::non_unitary);
    auto assp = minimal_model(shared_builtin("ass_plus", 4), 4, Mode::unitary);
    for (const auto& [n, gs] : ass.staged.stage.generators()) {
        for (const auto& [deg, ls] : gs.first.degrees) {
            REQUIRE(assp.staged.stage.gen_basis(n).degrees.at(deg) == ls);
            for (const auto& l : ls)
                CHECK(ass.staged.stage.diff_of(l) == assp.staged.stage.diff_of(l));
        }
    }
}

TEST_CASE("stability: a deeper run reproduces the shallower model verbatim") {
    auto m3 = minimal_model(shared_builtin("ass", 4), 3, Mode::non_unitary);
    auto m4 = minimal_model(shared_builtin("ass", 4), 4, Mode::non_unitary);
    for (const auto& [n, gs] : m3.staged.stage.generators()) {
        for (const auto& [deg, ls] : gs.first.degrees) {
            REQUIRE(m4.staged.stage.gen_basis(n).degrees.at(deg) == ls);
            for (const auto& l : ls) {
                CHECK(m3.staged.stage.diff_of(l) == m4.staged.stage.diff_of(l));
                CHECK(m3.staged.rho.values.at(l) == m4.staged.rho.values.at(l));
            }
        }
    }
}

TEST_CASE("verify_minimal_model: clean run, then localized failures on corruption") {
    auto model = minimal_model(shared_builtin("ass_plus", 3), 3, Mode::unitary);
    auto rep = verify_minimal_model(model);
    CHECK(rep.ok());

    // corrupt one differential coefficient: d^2 check must name the failure
    {
        MinimalModel bad = model;
        std::map<int, std::pair<GradedBasis, SigmaAction>> gens(
            bad.staged.stage.generators().begin(), bad.staged.stage.generators().end());
        std::map<std::string, TreeVector> diff;
        std::map<std::string, std::vector<TreeVector>> restr;
        for (const auto& [n, gs] : gens)
            for (const auto& [deg, ls] : gs.first.degrees)
                for (const auto& l : ls) {
                    diff[l] = bad.staged.stage.diff_of(l);
                    std::vector<TreeVector> rv;
                    for (int i = 1; i <= n; ++i) rv.push_back(bad.staged.stage.restriction_of(l, i));
                    restr[l] = rv;
                }
        // kernel generators at arity 3 have nonzero d; flip one coefficient
        std::string victim = gens.at(3).first.degrees.at(-1).front();
        TreeVector& dv = diff.at(victim);
        dv.terms.begin()->second += Rat(1);
        Stage corrupted = Stage::from_raw_parts(true, gens, diff, restr);
        bad.staged.stage = corrupted;
        bad.staged.rho.source = corrupted;
        auto brep = verify_minimal_model(bad);
        CHECK(!brep.ok());
        bool dsq_failed = false;
        for (const auto& c : brep.checks)
            if (c.name == "d_squared" && !c.passed) dsq_failed = true;
        bool chain_failed = false;
        for (const auto& c : brep.checks)
            if (c.name == "chain_map" && !c.passed) chain_failed = true;
        CHECK((dsq_failed || chain_failed));
    }

    // zero out one arity-2 restriction: delta compatibility must fail
    {
        MinimalModel bad = model;
        std::map<int, std::pair<GradedBasis, SigmaAction>> gens(
            bad.staged.stage.generators().begin(), bad.staged.stage.generators().end());
        std::map<std::string, TreeVector> diff;
        std::map<std::string, std::vector<TreeVector>> restr;
        for (const auto& [n, gs] : gens)
            for (const auto& [deg, ls] : gs.first.degrees)
                for (const auto& l : ls) {
                    diff[l] = bad.staged.stage.diff_of(l);
                    std::vector<TreeVector> rv;
                    for (int i = 1; i <= n; ++i) rv.push_back(bad.staged.stage.restriction_of(l, i));
                    restr[l] = rv;
                }
        restr.at("e2[12]")[0] = TreeVector::zero(1, 0);
        Stage corrupted = Stage::from_raw_parts(true, gens, diff, restr);
        bad.staged.stage = corrupted;
        bad.staged.rho.source = corrupted;
        auto brep = verify_minimal_model(bad);
        CHECK(!brep.ok());
        bool delta_failed = false;
        for (const auto& c : brep.checks)
            if (c.name == "delta_compat" && !c.passed) delta_failed = true;
        CHECK(delta_failed);
    }
}

TEST_CASE("quasi-isomorphism holds at every arity and degree after each run") {
    for (const std::string name : {"ass", "com"}) {
        auto m = minimal_model(shared_builtin(name, 4), 4, Mode::non_unitary);
        auto q = is_quasi_iso_upto(m.staged.rho, 4);
        CHECK(q.ok);
        for (const auto& e : q.entries) {
            CHECK(e.iso);
            CHECK(e.dim_source_h == e.dim_target_h);
        }
    }
}
