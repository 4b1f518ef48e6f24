#pragma once

#include "opmin/kan.hpp"

namespace opmin {

enum class Mode { non_unitary, unitary };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& s);

// The partially built model: stage P_n with its morphism to the target,
// quasi-isomorphism holding up to completed_arity.
struct StagedModel {
    Mode mode = Mode::non_unitary;
    std::shared_ptr<const FiniteDgOperad> target;
    Stage stage = Stage::empty(false);
    StageMorphism rho;
    int completed_arity = 0;
};

struct MinimalModel {
    StagedModel staged;
    std::string target_name;
    std::string conventions;
    std::map<int, std::map<int, int>> generator_dims;  // arity -> degree -> count
};

// Stage P_2 = Gamma(E(2)) with E(2) = HP(2) and rho_2 a section of the
// projection, corrected and averaged in unitary mode.
StagedModel base_step(std::shared_ptr<const FiniteDgOperad> target, Mode mode);

// Corrects candidate section values of H(target)(n) at one degree so that
// restrictions commute on the nose with the supplied lower section, then
// averages over Sigma_n. The differences are checked to be coboundaries
// forming a Kan family; the correction is the coboundary filler.
// lower_section maps H(n-1) class coordinates to (n-1)-slice coordinates.
std::vector<Vec> unitary_section_correction(const FiniteDgOperad& target, int n, int degree,
                                            const CohomologyPresentation& h_n,
                                            const CohomologyPresentation& h_lower,
                                            const Matrix& lower_section,
                                            const std::vector<Vec>& candidate);

// Solves, per generator, the joint linear system for all restriction slots
// plus a correction of the rho-value (a coboundary for cocycle generators, a
// cocycle for kernel-killing ones), then averages everything equivariantly.
struct RestrictionAssignment {
    std::map<std::string, std::vector<TreeVector>> restrictions;
    std::map<std::string, OpElem> corrected_values;
};
RestrictionAssignment assign_generator_restrictions(const StagedModel& model, int n,
                                                    const GradedBasis& e_basis,
                                                    const SigmaAction& e_action,
                                                    const std::map<std::string, TreeVector>& d,
                                                    const std::map<std::string, OpElem>& rho_values);

// One arity of the induction: attach cocycle generators against the cokernel
// of H(rho)(n) and kernel-killing generators against its kernel, with
// equivariant choices, then re-establish the quasi-isomorphism up to n.
StagedModel inductive_step(const StagedModel& model, int n);

MinimalModel minimal_model(std::shared_ptr<const FiniteDgOperad> target, int max_arity, Mode mode);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};
struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Re-runs every structural invariant of a finished model end to end.
VerifyReport verify_minimal_model(const MinimalModel& m);

}  // namespace opmin
