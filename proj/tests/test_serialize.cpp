#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opmin/serialize.hpp"

using namespace opmin;

namespace {

std::shared_ptr<const FiniteDgOperad> shared_builtin(const std::string& name, int max_arity) {
    return std::make_shared<FiniteDgOperad>(make_builtin(name, max_arity));
}

}  // namespace

TEST_CASE("tree and tree-vector json round-trips bit-exactly") {
    Tree t = Tree::make_node(
        "e2[12]", {Tree::make_node("e2[21]", {Tree::make_leaf(1), Tree::make_leaf(3)}),
                   Tree::make_leaf(2)});
    Json tj = tree_to_json(t);
    CHECK(tree_equal(tree_from_json(tj), t));
    CHECK(dump_json(tree_to_json(tree_from_json(tj))) == dump_json(tj));

    TreeVector v = TreeVector::zero(3, 0);
    v.terms[t] = Rat(-7, 3);
    Json vj = tree_vector_to_json(v);
    TreeVector back = tree_vector_from_json(vj, 3, 0);
    CHECK(back == v);
    CHECK(dump_json(tree_vector_to_json(back)) == dump_json(vj));

    // zero vector is the empty list
    CHECK(tree_vector_to_json(TreeVector::zero(2, 0)).empty());
    CHECK(tree_vector_from_json(Json::array(), 2, 0).is_zero());

    // malformed inputs
    CHECK_THROWS_AS(tree_from_json(Json::parse("{\"g\":\"x\"}")), ParseError);
    CHECK_THROWS_AS(tree_from_json(Json::parse("0")), ParseError);
    CHECK_THROWS_AS(tree_vector_from_json(Json::parse("[{\"coef\":\"0\",\"tree\":1}]"), 1, 0),
                    ParseError);
}

TEST_CASE("operad json round-trips and rejects malformed input") {
    for (const std::string name : {"ass", "ass_plus", "com_plus"}) {
        auto p = make_builtin(name, 3);
        Json j = operad_to_json(p);
        FiniteDgOperad q = operad_from_json(j);
        CHECK(dump_json(operad_to_json(q)) == dump_json(j));
        CHECK(validate_operad_axioms(q).ok());
        CHECK(q.flat_dim(3) == p.flat_dim(3));
        // behavioral equality spot check
        if (q.point_label) {
            for (int i = 1; i <= 2; ++i)
                CHECK(restriction_target(q, i, q.multiplication()) == q.unit());
        }
    }
    Json bad = operad_to_json(make_builtin("ass", 3));
    bad.erase("unit1");
    CHECK_THROWS_AS(operad_from_json(bad), ParseError);
}

TEST_CASE("model json round-trips bit-exactly and re-verifies") {
    auto model = minimal_model(shared_builtin("ass_plus", 3), 3, Mode::unitary);
    auto report = verify_minimal_model(model);
    Json j = model_to_json(model, report);
    MinimalModel back = model_from_json(j);
    CHECK(back.generator_dims == model.generator_dims);
    auto report2 = verify_minimal_model(back);
    CHECK(report2.ok());
    Json j2 = model_to_json(back, report2);
    CHECK(dump_json(j2) == dump_json(j));

    // non-unitary flavor
    auto nu = minimal_model(shared_builtin("ass", 3), 3, Mode::non_unitary);
    auto nurep = verify_minimal_model(nu);
    Json nj = model_to_json(nu, nurep);
    MinimalModel nback = model_from_json(nj);
    CHECK(dump_json(model_to_json(nback, verify_minimal_model(nback))) == dump_json(nj));
}

TEST_CASE("model json: corrupted and truncated files are rejected or caught") {
    auto model = minimal_model(shared_builtin("ass_plus", 3), 3, Mode::unitary);
    auto report = verify_minimal_model(model);
    Json j = model_to_json(model, report);

    // drop a required key
    Json missing = j;
    missing.erase("differential");
    CHECK_THROWS_AS(model_from_json(missing), ParseError);

    // corrupt one differential coefficient: loads, then verification fails
    Json corrupt = j;
    for (auto& [label, dv] : corrupt.at("differential").items()) {
        if (!dv.empty()) {
            dv[0]["coef"] = "5/2";
            break;
        }
    }
    MinimalModel bad = model_from_json(corrupt);
    CHECK(!verify_minimal_model(bad).ok());
}
