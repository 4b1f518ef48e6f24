#pragma once

#include <nlohmann/json.hpp>

#include "opmin/sullivan.hpp"

namespace opmin {

using Json = nlohmann::ordered_json;

// Tree format: a leaf is its integer label, an internal vertex is
// {"g": label, "children": [...]}. A tree vector is a list of
// {"coef": "p/q", "tree": ...} entries in canonical tree order.
Json tree_to_json(const Tree& t);
Tree tree_from_json(const Json& j);
Json tree_vector_to_json(const TreeVector& v);
TreeVector tree_vector_from_json(const Json& j, int arity, int degree);

Json operad_to_json(const FiniteDgOperad& p);
FiniteDgOperad operad_from_json(const Json& j);

Json model_to_json(const MinimalModel& m, const VerifyReport& report);
// Rebuilds the model (including its target) from a model file. The stage is
// reconstructed structurally; mathematical invariants are re-checked by
// verify_minimal_model, not assumed.
MinimalModel model_from_json(const Json& j);

Json verify_report_to_json(const VerifyReport& r);

std::string dump_json(const Json& j);
Json parse_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace opmin
