#pragma once

#include <functional>
#include <optional>

#include "opmin/dgoperad.hpp"
#include "opmin/errors.hpp"

namespace opmin {

// Linear slice of an operad-like carrier around one arity and degree: enough
// data to state face conditions, validate families, and run fillers. Built
// from a target operad or from a unitary free stage.
struct KanCarrier {
    int arity = 0;   // n >= 1
    int degree = 0;
    std::size_t dim_n = 0, dim_nm1 = 0, dim_nm2 = 0;
    std::vector<Matrix> delta_n;    // n maps (n,deg) -> (n-1,deg)
    std::vector<Matrix> delta_nm1;  // n-1 maps (n-1,deg) -> (n-2,deg)
    Matrix d_in_n;                  // (n,deg-1) -> (n,deg)
    Matrix d_out_n;                 // (n,deg)   -> (n,deg+1)
    Matrix d_in_nm1;                // (n-1,deg-1) -> (n-1,deg)
    Matrix d_out_nm1;               // (n-1,deg)   -> (n-1,deg+1)
    // action of Sigma_n on the (n,deg) slice; required by the equivariant filler
    std::function<Vec(const Perm&, const Vec&)> act_n;
};

KanCarrier make_target_carrier(const FiniteDgOperad& p, int n, int degree);
KanCarrier make_stage_carrier(const Stage& stage, int n, int degree);

// Face family: candidates omega_1..omega_n in the arity-(n-1) slice.
struct FaceFamily {
    int n = 0;
    int degree = 0;
    std::vector<Vec> members;  // size n, each of dim_nm1
};

struct KanCheck {
    bool ok = true;
    std::string first_violation;
};

// delta_i omega_j = delta_{j-1} omega_i for all i < j, checked exactly.
KanCheck is_kan_family(const KanCarrier& carrier, const FaceFamily& family);

// Filling constraints. `coboundary` and `in_image` reparametrize the unknown;
// `cocycle` and `in_kernel` add linear conditions. coboundary and in_image
// cannot be combined.
struct FillConstraint {
    bool cocycle = false;
    bool coboundary = false;
    std::optional<Matrix> in_kernel;  // phi as a matrix on the (n,deg) slice
    std::optional<Matrix> in_image;   // phi into the (n,deg) slice
};

struct FillResult {
    Vec filler;                  // dim_n
    std::optional<Vec> witness;  // preimage under d (coboundary) or phi (in_image)
};

// Deterministic filler: exact linear solve with zeroed free variables,
// faces re-checked after construction. Throws InfeasibleError when the
// stacked system has no solution.
Vec fill(const KanCarrier& carrier, const FaceFamily& family);
FillResult fill_refined(const KanCarrier& carrier, const FaceFamily& family,
                        const FillConstraint& constraint);

// Family depending linearly on e in an e_dim-dimensional Sigma_n-module:
// faces[j] is the face family of the j-th basis vector.
struct LinearFamily {
    std::size_t e_dim = 0;
    std::vector<FaceFamily> faces;
};

// Solves per basis vector, then averages L(e) = (1/n!) sum sigma.L0(sigma^{-1}e)
// to a Sigma_n-equivariant solution. act_e is the action on e-coordinates.
// Face conditions and equivariance are asserted after averaging.
std::vector<Vec> fill_equivariant(const KanCarrier& carrier, const LinearFamily& family,
                                  const std::function<Vec(const Perm&, const Vec&)>& act_e,
                                  const FillConstraint* constraint = nullptr);

}  // namespace opmin
