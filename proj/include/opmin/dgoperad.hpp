#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "opmin/freeop.hpp"
#include "opmin/symmod.hpp"

namespace opmin {

// Element of one arity component, coordinates with respect to the basis of
// its (arity, degree) slice.
struct OpElem {
    int arity = 0;
    int degree = 0;
    Vec coords;

    bool is_zero() const { return opmin::is_zero(coords); }
    OpElem& operator+=(const OpElem& o);
    OpElem& operator-=(const OpElem& o);
    friend OpElem operator*(const Rat& c, OpElem e);
    bool operator==(const OpElem& o) const;
};

// A finite-dimensional dg operad presented by structure constants. Arity
// components carry graded bases, adjacent-transposition actions, differential
// matrices, and sparse composition tables on basis pairs.
class FiniteDgOperad {
  public:
    struct ArityComponent {
        GradedBasis basis;
        SigmaAction action;
        std::map<int, Matrix> differential;  // degree k -> matrix dim(k+1) x dim(k)
    };

    // flat index inside one arity: degrees ascending, labels in basis order
    struct FlatRef {
        int degree;
        int index;  // within the degree component
    };

    std::string name;
    int max_arity = 0;
    std::map<int, ArityComponent> arities;          // may include zero-dimensional entries
    std::string unit1_label;                        // arity-1 unit basis label
    std::optional<std::string> point_label;         // arity-0 unit, unitary operads
    std::optional<std::string> m2_label;            // unitary multiplication, arity 2 degree 0

    const ArityComponent& arity(int n) const;
    bool has_component(int n) const { return arities.count(n) > 0; }
    std::size_t flat_dim(int n) const;
    FlatRef flat_ref(int n, int flat) const;
    int flat_index(int n, int degree, int index_in_degree) const;  // -1 if absent
    int flat_of_label(int n, const std::string& label) const;      // -1 if absent

    // composition tables: key (m, i, n), entry (flat_a, flat_b) -> sparse result
    std::map<std::array<int, 3>, std::map<std::pair<int, int>, std::map<int, Rat>>> comp;

    OpElem zero(int n, int degree) const;
    OpElem basis_elem(int n, int degree, int index) const;
    OpElem elem_of_label(int n, const std::string& label) const;
    OpElem unit() const;        // arity-1 identity
    OpElem point() const;       // arity-0 unit; throws if absent
    OpElem multiplication() const;  // m2; throws if absent

    Matrix differential_matrix(int n, int degree) const;  // dim(deg+1) x dim(deg)
    GradedComplex complex_at(int n) const;
};

// name in {ass, ass_plus, com, com_plus}
FiniteDgOperad make_builtin(const std::string& name, int max_arity);

ValidationReport validate_operad_axioms(const FiniteDgOperad& p);

OpElem partial_compose_target(const FiniteDgOperad& p, const OpElem& a, int i, const OpElem& b);

// delta_i(v) = v o_i point, s_i(v) = v o_i m2.
OpElem restriction_target(const FiniteDgOperad& p, int i, const OpElem& v);
OpElem degeneracy_target(const FiniteDgOperad& p, int i, const OpElem& v);

// matrix of delta_i on the (n, degree) slice, mapping to (n-1, degree)
Matrix restriction_matrix(const FiniteDgOperad& p, int n, int i, int degree);

OpElem act_target(const FiniteDgOperad& p, const Perm& sigma, const OpElem& v);

std::map<int, CohomologyPresentation> arity_cohomology(const FiniteDgOperad& p, int n);

struct HypothesisReport {
    bool cohomologically_unitary = false;  // dim HP(0) = 1 in degree 0
    bool cohomologically_connected = false;  // dim HP(1) = 1 in degree 0, spanned by the unit
    bool has_unitary_multiplication = false;  // point and m2 with both unit laws
    std::vector<std::string> failures;
    bool ok(bool unitary_mode) const {
        return cohomologically_connected && (!unitary_mode || (cohomologically_unitary && has_unitary_multiplication));
    }
};
HypothesisReport check_theorem_hypotheses(const FiniteDgOperad& p);

// Morphism from a free stage into a target operad, determined by generator
// values. Chain-map and (in unitary mode) restriction compatibility are
// checked by validate().
struct StageMorphism {
    Stage source;
    std::shared_ptr<const FiniteDgOperad> target;
    std::map<std::string, OpElem> values;

    ValidationReport validate() const;
};

OpElem evaluate_morphism(const StageMorphism& rho, const TreeVector& v);

// Linear data of one arity slice of a stage: basis, differential matrices,
// and (optionally) evaluation and restriction matrices.
struct ArityData {
    int arity = 0;
    std::map<int, std::vector<Tree>> basis;
    GradedComplex complex;
    std::map<int, Matrix> rho;  // per degree: stage coords -> target coords

    std::size_t dim(int degree) const {
        auto it = basis.find(degree);
        return it == basis.end() ? 0 : it->second.size();
    }
    const std::vector<Tree>& basis_at(int degree) const;
    Vec coords(const TreeVector& v) const;
    TreeVector from_coords(int degree, const Vec& c) const;
};

ArityData build_arity_data(const Stage& stage, int n);
// Adds per-degree evaluation matrices of rho to `data` (target coordinates).
void add_evaluation_matrices(ArityData& data, const StageMorphism& rho);
// Matrix of apply_restriction(stage, i, .) from (n, degree) to (n-1, degree).
Matrix stage_restriction_matrix(const Stage& stage, const ArityData& from, const ArityData& to,
                                int i, int degree);

struct QuasiIsoEntry {
    int arity = 0;
    int degree = 0;
    std::size_t dim_source_h = 0;
    std::size_t dim_target_h = 0;
    std::size_t kernel_dim = 0;
    std::size_t cokernel_dim = 0;
    bool iso = false;
};
struct QuasiIsoReport {
    std::vector<QuasiIsoEntry> entries;
    bool ok = true;
};

QuasiIsoReport is_quasi_iso_upto(const StageMorphism& rho, int n);

}  // namespace opmin
