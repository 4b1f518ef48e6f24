#include "opmin/sullivan.hpp"

#include <random>
#include <set>
#include <sstream>

namespace opmin {

std::string mode_name(Mode m) { return m == Mode::unitary ? "unitary" : "non-unitary"; }

Mode mode_from_name(const std::string& s) {
    if (s == "unitary") return Mode::unitary;
    if (s == "non-unitary" || s == "non_unitary") return Mode::non_unitary;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

namespace {

Matrix stage_action_matrix(const Stage& st, const ArityData& data, const Perm& sigma, int deg) {
    const auto& basis = data.basis_at(deg);
    Matrix m(basis.size(), basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        TreeVector v = TreeVector::zero(data.arity, deg);
        v.terms[basis[j]] = Rat(1);
        m.set_col(j, data.coords(act_on_tree_vector(st, sigma, v)));
    }
    return m;
}

Matrix target_action_matrix(const FiniteDgOperad& p, int n, const Perm& sigma, int deg) {
    const std::size_t dim = p.has_component(n) ? p.arity(n).basis.dim(deg) : 0;
    Matrix m(dim, dim);
    for (std::size_t j = 0; j < dim; ++j)
        m.set_col(j, act_target(p, sigma, p.basis_elem(n, deg, static_cast<int>(j))).coords);
    return m;
}

// label for a cocycle generator: e{n}[target-label] when the representative
// is a plain basis vector, otherwise e{n}_c{counter}
std::string coker_label(int n, const Vec& rep, const GradedBasis& target_basis, int deg,
                        int counter) {
    int nonzero = -1;
    for (std::size_t i = 0; i < rep.size(); ++i) {
        if (rep[i].is_zero()) continue;
        if (nonzero >= 0 || rep[i] != Rat(1)) {
            nonzero = -2;
            break;
        }
        nonzero = static_cast<int>(i);
    }
    if (nonzero >= 0) {
        auto it = target_basis.degrees.find(deg);
        if (it != target_basis.degrees.end())
            return "e" + std::to_string(n) + "[" + it->second[nonzero] + "]";
    }
    return "e" + std::to_string(n) + "_c" + std::to_string(counter);
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw PostconditionError(msg);
}

struct DegreeSet {
    std::set<int> degs;
    void add_from(const std::map<int, CohomologyPresentation>& h) {
        for (const auto& [d, hp] : h)
            if (hp.dim() > 0) degs.insert(d);
    }
};

void check_hypotheses_or_throw(const FiniteDgOperad& p, Mode mode) {
    auto h0 = arity_cohomology(p, 0);
    std::size_t h0dim = 0;
    for (const auto& [d, hp] : h0) h0dim += hp.dim();
    auto hyp = check_theorem_hypotheses(p);
    if (mode == Mode::unitary) {
        if (!hyp.cohomologically_unitary)
            throw HypothesisError("target is not cohomologically unitary: HP(0) != k");
        if (!hyp.cohomologically_connected)
            throw HypothesisError("target is not cohomologically connected: HP(1) != k");
        if (!hyp.has_unitary_multiplication)
            throw HypothesisError("target has no strict unitary multiplication");
    } else {
        if (h0dim != 0)
            throw HypothesisError(
                "non-unitary mode requires HP(0) = 0; run in unitary mode instead");
        if (!hyp.cohomologically_connected)
            throw HypothesisError("target is not cohomologically connected: HP(1) != k");
    }
}

}  // namespace

std::vector<Vec> unitary_section_correction(const FiniteDgOperad& target, int n, int degree,
                                            const CohomologyPresentation& h_n,
                                            const CohomologyPresentation& h_lower,
                                            const Matrix& lower_section,
                                            const std::vector<Vec>& candidate) {
    const std::size_t hdim = h_n.dim();
    if (candidate.size() != hdim)
        throw std::invalid_argument("unitary_section_correction: one candidate per class expected");

    const auto group = all_perms(static_cast<std::size_t>(n));
    const Rat inv_order(1, static_cast<long>(group.size()));

    // induced action on H(n) classes
    std::map<std::string, Matrix> h_act;
    auto h_action = [&](const Perm& sigma) -> const Matrix& {
        auto key = sigma.one_line();
        auto it = h_act.find(key);
        if (it == h_act.end())
            it = h_act.emplace(key, induced_on_cohomology(target_action_matrix(target, n, sigma, degree), h_n, h_n)).first;
        return it->second;
    };

    // average the candidate section to an equivariant one
    std::vector<Vec> avg(hdim);
    const std::size_t amb = h_n.cocycles.ambient_dim;
    for (std::size_t j = 0; j < hdim; ++j) {
        Vec acc(amb);
        for (const auto& sigma : group) {
            Vec e(hdim);
            e[j] = Rat(1);
            Vec moved = h_action(sigma.inverse()).apply(e);
            Vec lifted(amb);
            for (std::size_t r = 0; r < hdim; ++r)
                if (!moved[r].is_zero()) lifted = lifted + moved[r] * candidate[r];
            acc = acc + target_action_matrix(target, n, sigma, degree).apply(lifted);
        }
        avg[j] = inv_order * acc;
    }

    // induced restriction maps on cohomology and the differences
    std::vector<Matrix> delta_h;
    for (int i = 1; i <= n; ++i)
        delta_h.push_back(
            induced_on_cohomology(restriction_matrix(target, n, i, degree), h_n, h_lower));

    KanCarrier carrier = make_target_carrier(target, n, degree);
    LinearFamily fam;
    fam.e_dim = hdim;
    auto coboundaries =
        kernel_and_image(target.has_component(n - 1) ? target.differential_matrix(n - 1, degree - 1)
                                                     : Matrix(0, 0))
            .second;
    for (std::size_t j = 0; j < hdim; ++j) {
        FaceFamily f;
        f.n = n;
        f.degree = degree;
        Vec ej(hdim);
        ej[j] = Rat(1);
        for (int i = 1; i <= n; ++i) {
            Vec diff = restriction_matrix(target, n, i, degree).apply(avg[j]) -
                       lower_section.apply(delta_h[i - 1].apply(ej));
            require(coboundaries.contains(diff),
                    "unitary section correction: difference is not a coboundary");
            f.members.push_back(diff);
        }
        require(is_kan_family(carrier, f).ok,
                "unitary section correction: differences fail the Kan condition");
        fam.faces.push_back(f);
    }

    FillConstraint cons;
    cons.coboundary = true;
    auto act_e = [&](const Perm& sigma, const Vec& v) { return h_action(sigma).apply(v); };
    std::vector<Vec> fillers = fill_equivariant(carrier, fam, act_e, &cons);

    std::vector<Vec> corrected(hdim);
    for (std::size_t j = 0; j < hdim; ++j) corrected[j] = avg[j] - fillers[j];

    // postconditions: exact compatibility, splitting, equivariance
    for (std::size_t j = 0; j < hdim; ++j) {
        Vec ej(hdim);
        ej[j] = Rat(1);
        for (int i = 1; i <= n; ++i) {
            Vec lhs = restriction_matrix(target, n, i, degree).apply(corrected[j]);
            Vec rhs = lower_section.apply(delta_h[i - 1].apply(ej));
            require(lhs == rhs, "unitary section correction: compatibility failed after fix");
        }
        require(h_n.project_ambient(corrected[j]) == ej,
                "unitary section correction: section no longer splits the projection");
    }
    for (const auto& sigma : group) {
        for (std::size_t j = 0; j < hdim; ++j) {
            Vec ej(hdim);
            ej[j] = Rat(1);
            Vec moved = h_action(sigma).apply(ej);
            Vec lhs(amb);
            for (std::size_t r = 0; r < hdim; ++r)
                if (!moved[r].is_zero()) lhs = lhs + moved[r] * corrected[r];
            Vec rhs = target_action_matrix(target, n, sigma, degree).apply(corrected[j]);
            require(lhs == rhs, "unitary section correction: averaged section not equivariant");
        }
    }
    return corrected;
}

StagedModel base_step(std::shared_ptr<const FiniteDgOperad> target, Mode mode) {
    const FiniteDgOperad& p = *target;
    check_hypotheses_or_throw(p, mode);

    auto h2 = arity_cohomology(p, 2);
    auto h1 = arity_cohomology(p, 1);

    GradedBasis e_basis;
    e_basis.arity = 2;
    SigmaAction e_action;
    e_action.transpositions.resize(1);
    std::map<std::string, TreeVector> dmap;
    std::map<std::string, std::vector<TreeVector>> restrictions;
    std::map<std::string, OpElem> values;

    int counter = 0;
    for (const auto& [deg, h] : h2) {
        if (h.dim() == 0) continue;

        std::vector<Vec> section;
        if (mode == Mode::unitary) {
            // lower section: the unique map sending the unit class to the unit
            const CohomologyPresentation* hl = h1.count(deg) ? &h1.at(deg) : nullptr;
            std::size_t ldim = hl ? hl->dim() : 0;
            Matrix lower(p.arity(1).basis.dim(deg), ldim);
            if (ldim > 0) {
                require(deg == 0 && ldim == 1, "HP(1) concentrated in degree 0 expected");
                Rat lambda = hl->project_ambient(p.unit().coords)[0];
                lower.set_col(0, lambda.inv() * p.unit().coords);
            }
            CohomologyPresentation hl_empty;
            hl_empty.cocycles = SubspaceBasis::from_spanning({}, p.arity(1).basis.dim(deg));
            hl_empty.coboundaries = hl_empty.cocycles;
            hl_empty.projection = Matrix(0, 0);
            hl_empty.section = Matrix(0, 0);
            section = unitary_section_correction(p, 2, deg, h, hl ? *hl : hl_empty, lower,
                                                 h.class_reps);
        } else {
            // plain equivariant averaging of the canonical section
            std::vector<Vec> cand = h.class_reps;
            const auto group = all_perms(2);
            const Rat half(1, 2);
            section.resize(h.dim());
            Matrix t_h = induced_on_cohomology(target_action_matrix(p, 2, group[1], deg), h, h);
            for (std::size_t j = 0; j < h.dim(); ++j) {
                Vec ej(h.dim());
                ej[j] = Rat(1);
                Vec acc = cand[j];
                Vec moved = t_h.apply(ej);  // transposition is an involution
                Vec lifted(h.cocycles.ambient_dim);
                for (std::size_t r = 0; r < h.dim(); ++r)
                    if (!moved[r].is_zero()) lifted = lifted + moved[r] * cand[r];
                acc = acc + target_action_matrix(p, 2, group[1], deg).apply(lifted);
                section[j] = half * acc;
                require(h.project_ambient(section[j]) == ej,
                        "base step: averaged section does not split the projection");
            }
        }

        // generators, labels, action
        std::vector<std::string> labels;
        for (std::size_t j = 0; j < h.dim(); ++j) {
            labels.push_back(coker_label(2, h.class_reps[j], p.arity(2).basis, deg, counter++));
        }
        e_basis.degrees[deg] = labels;
        e_action.transpositions[0][deg] =
            induced_on_cohomology(target_action_matrix(p, 2, Perm::transposition(2, 1), deg), h, h);

        for (std::size_t j = 0; j < labels.size(); ++j) {
            dmap[labels[j]] = TreeVector::zero(2, deg + 1);
            values[labels[j]] = OpElem{2, deg, section[j]};
            if (mode == Mode::unitary) {
                std::vector<TreeVector> rv;
                for (int i = 1; i <= 2; ++i) {
                    OpElem ri = restriction_target(p, i, values[labels[j]]);
                    if (deg != 0) {
                        require(ri.is_zero(), "base step: nonzero restriction outside degree 0");
                        rv.push_back(TreeVector::zero(1, deg));
                    } else {
                        // exact multiple of the unit after correction
                        int uidx = p.flat_of_label(1, p.unit1_label);
                        Rat mu = ri.coords[uidx];
                        require(ri == mu * p.unit(),
                                "base step: restriction is not a multiple of the unit");
                        rv.push_back(mu * unit_tree_vector());
                    }
                }
                restrictions[labels[j]] = rv;
            }
        }
    }

    Stage stage = (mode == Mode::unitary)
                      ? make_unitary_principal_extension(Stage::empty(true), 2, e_basis, e_action,
                                                         dmap, restrictions)
                      : make_principal_extension(Stage::empty(false), 2, e_basis, e_action, dmap);

    StagedModel model;
    model.mode = mode;
    model.target = target;
    model.stage = stage;
    model.rho = StageMorphism{stage, target, values};
    model.completed_arity = 2;

    auto vrep = model.rho.validate();
    require(vrep.ok(), "base step: morphism validation failed: " +
                           (vrep.violations.empty() ? "" : vrep.violations.front()));
    auto q = is_quasi_iso_upto(model.rho, 2);
    require(q.ok, "base step: rho_2 is not a quasi-isomorphism up to arity 2");
    return model;
}

RestrictionAssignment assign_generator_restrictions(const StagedModel& model, int n,
                                                    const GradedBasis& e_basis,
                                                    const SigmaAction& e_action,
                                                    const std::map<std::string, TreeVector>& d,
                                                    const std::map<std::string, OpElem>& rho_values) {
    const Stage& st = model.stage;
    const FiniteDgOperad& p = *model.target;
    ArityData data_nm1 = build_arity_data(st, n - 1);
    add_evaluation_matrices(data_nm1, model.rho);
    ArityData data_nm2 = build_arity_data(st, n - 2);

    RestrictionAssignment out;

    for (const auto& [deg, labels] : e_basis.degrees) {
        const std::size_t s = data_nm1.dim(deg);
        // per-label raw solutions before averaging
        std::vector<std::vector<Vec>> slots_raw(labels.size());
        std::vector<Vec> value_raw(labels.size());

        // shared matrices for this degree
        Matrix dd = data_nm1.complex.dmat(deg);  // (n-1,deg) -> (n-1,deg+1)
        Matrix rho_m = data_nm1.rho.count(deg)
                           ? data_nm1.rho.at(deg)
                           : Matrix(p.has_component(n - 1) ? p.arity(n - 1).basis.dim(deg) : 0, s);
        std::vector<Matrix> delta_stage;
        for (int i = 1; i <= n - 1; ++i)
            delta_stage.push_back(stage_restriction_matrix(st, data_nm1, data_nm2, i, deg));
        std::vector<Matrix> delta_t;
        for (int i = 1; i <= n; ++i) delta_t.push_back(restriction_matrix(p, n, i, deg));
        Matrix d_t_below = p.differential_matrix(n, deg - 1);  // (n,deg-1) -> (n,deg)
        Matrix d_t_here = p.differential_matrix(n, deg);       // (n,deg) -> (n,deg+1)

        for (std::size_t j = 0; j < labels.size(); ++j) {
            const std::string& l = labels[j];
            const TreeVector& de = d.at(l);
            const OpElem& cand = rho_values.at(l);
            const bool coker_mode = de.is_zero();
            const std::size_t cdim = coker_mode ? d_t_below.cols() : d_t_here.cols();
            const std::size_t nvars = static_cast<std::size_t>(n) * s + cdim;

            struct Block {
                Matrix rows;
                Vec rhs;
                int group;  // 0 chain, 1 rho-compat, 2 coherence, 3 correction-cocycle
            };
            std::vector<Block> blocks;

            // (a) chain compatibility per slot
            for (int i = 1; i <= n; ++i) {
                TreeVector ri = coker_mode ? TreeVector::zero(n - 1, deg + 1)
                                           : apply_restriction(st, i, de);
                Matrix rows(dd.rows(), nvars);
                for (std::size_t r = 0; r < dd.rows(); ++r)
                    for (std::size_t c = 0; c < s; ++c)
                        rows.at(r, static_cast<std::size_t>(i - 1) * s + c) = dd.at(r, c);
                Vec rhs = ri.is_zero() ? Vec(dd.rows()) : data_nm1.coords(ri);
                blocks.push_back({rows, rhs, 0});
            }
            // (b) rho compatibility per slot, with the correction term
            for (int i = 1; i <= n; ++i) {
                Matrix corr_block = coker_mode ? delta_t[i - 1] * d_t_below : delta_t[i - 1];
                Matrix rows(rho_m.rows(), nvars);
                for (std::size_t r = 0; r < rho_m.rows(); ++r) {
                    for (std::size_t c = 0; c < s; ++c)
                        rows.at(r, static_cast<std::size_t>(i - 1) * s + c) = rho_m.at(r, c);
                    for (std::size_t c = 0; c < cdim; ++c)
                        rows.at(r, static_cast<std::size_t>(n) * s + c) = corr_block.at(r, c);
                }
                Vec rhs = cand.is_zero() ? Vec(rho_m.rows()) : delta_t[i - 1].apply(cand.coords);
                blocks.push_back({rows, rhs, 1});
            }
            // (c) coherence between slots
            for (int i = 1; i <= n; ++i) {
                for (int jj = i + 1; jj <= n; ++jj) {
                    const Matrix& di = delta_stage[i - 1];
                    const Matrix& djm1 = delta_stage[jj - 2];
                    Matrix rows(di.rows(), nvars);
                    for (std::size_t r = 0; r < di.rows(); ++r) {
                        for (std::size_t c = 0; c < s; ++c) {
                            rows.at(r, static_cast<std::size_t>(jj - 1) * s + c) = di.at(r, c);
                            rows.at(r, static_cast<std::size_t>(i - 1) * s + c) -= djm1.at(r, c);
                        }
                    }
                    blocks.push_back({rows, Vec(di.rows()), 2});
                }
            }
            // (d) kernel-type correction must be a cocycle
            if (!coker_mode) {
                Matrix rows(d_t_here.rows(), nvars);
                for (std::size_t r = 0; r < d_t_here.rows(); ++r)
                    for (std::size_t c = 0; c < cdim; ++c)
                        rows.at(r, static_cast<std::size_t>(n) * s + c) = d_t_here.at(r, c);
                blocks.push_back({rows, Vec(d_t_here.rows()), 3});
            }

            auto solve_upto = [&](int max_group) -> std::optional<Vec> {
                Matrix a(0, nvars);
                Vec rhs;
                bool first = true;
                for (const auto& b : blocks) {
                    if (b.group > max_group) continue;
                    a = first ? b.rows : a.vstack(b.rows);
                    first = false;
                    rhs.insert(rhs.end(), b.rhs.begin(), b.rhs.end());
                }
                if (first) return Vec(nvars);
                return solve_linear(a, rhs);
            };

            auto sol = solve_upto(3);
            if (!sol) {
                const char* group = "coherence";
                if (!solve_upto(0)) group = "chain compatibility";
                else if (!solve_upto(1)) group = "rho compatibility";
                throw PostconditionError("restriction assignment infeasible for generator '" + l +
                                         "' (" + group + " equations)");
            }
            std::vector<Vec> slots(n);
            for (int i = 1; i <= n; ++i)
                slots[i - 1] = Vec(sol->begin() + static_cast<long>((i - 1) * s),
                                   sol->begin() + static_cast<long>(i * s));
            Vec corr(sol->begin() + static_cast<long>(n * s), sol->end());
            slots_raw[j] = slots;
            Vec v_final = cand.is_zero() ? Vec(p.has_component(n) ? p.arity(n).basis.dim(deg) : 0)
                                         : cand.coords;
            if (cdim > 0) {
                Vec corrv = coker_mode ? d_t_below.apply(corr) : corr;
                v_final = v_final - corrv;
            }
            value_raw[j] = v_final;
        }

        // equivariant averaging with the mixed action
        const auto group = all_perms(static_cast<std::size_t>(n));
        const Rat inv_order(1, static_cast<long>(group.size()));
        auto e_act = [&](const Perm& sigma) {
            return e_action.matrix_of(e_basis, sigma, deg);
        };
        for (std::size_t j = 0; j < labels.size(); ++j) {
            std::vector<Vec> slot_acc(n, Vec(s));
            Vec val_acc(value_raw[j].size());
            for (const auto& sigma : group) {
                Vec moved = e_act(sigma.inverse()).col(j);  // sigma^{-1} . e_j in E coords
                for (int i = 1; i <= n; ++i) {
                    int src_slot = sigma.inverse()(i);
                    Vec combo(s);
                    for (std::size_t r = 0; r < labels.size(); ++r)
                        if (!moved[r].is_zero())
                            combo = combo + moved[r] * slots_raw[r][src_slot - 1];
                    Perm del = sigma.delete_value(i);
                    TreeVector tv = data_nm1.from_coords(deg, combo);
                    slot_acc[i - 1] =
                        slot_acc[i - 1] + data_nm1.coords(act_on_tree_vector(st, del, tv));
                }
                Vec vcombo(val_acc.size());
                for (std::size_t r = 0; r < labels.size(); ++r)
                    if (!moved[r].is_zero()) vcombo = vcombo + moved[r] * value_raw[r];
                val_acc = val_acc + target_action_matrix(p, n, sigma, deg).apply(vcombo);
            }
            std::vector<TreeVector> rv;
            for (int i = 1; i <= n; ++i)
                rv.push_back(data_nm1.from_coords(deg, inv_order * slot_acc[i - 1]));
            out.restrictions[labels[j]] = rv;
            out.corrected_values[labels[j]] = OpElem{n, deg, inv_order * val_acc};
        }

        // post-averaging assertions: rho compatibility per generator and slot
        for (std::size_t j = 0; j < labels.size(); ++j) {
            const std::string& l = labels[j];
            const OpElem& v = out.corrected_values.at(l);
            for (int i = 1; i <= n; ++i) {
                OpElem lhs = evaluate_morphism(model.rho, out.restrictions.at(l)[i - 1]);
                OpElem rhs = restriction_target(p, i, v);
                require(lhs == rhs, "restriction assignment: rho compatibility lost for '" + l +
                                        "' after averaging");
            }
            const TreeVector& de = d.at(l);
            if (de.is_zero()) {
                // corrected value must still be a cocycle representing the same class
                require(is_zero(p.differential_matrix(n, deg).apply(v.coords)),
                        "restriction assignment: corrected value is not a cocycle for '" + l + "'");
            } else {
                OpElem rhs = evaluate_morphism(model.rho, de);
                require(p.differential_matrix(n, deg).apply(v.coords) == rhs.coords,
                        "restriction assignment: corrected value no longer lifts d for '" + l +
                            "'");
            }
        }
    }
    return out;
}

StagedModel inductive_step(const StagedModel& model, int n) {
    if (n != model.completed_arity + 1)
        throw std::invalid_argument("inductive_step: arities must be attached consecutively");
    const Stage& st = model.stage;
    const FiniteDgOperad& p = *model.target;

    ArityData data = build_arity_data(st, n);
    add_evaluation_matrices(data, model.rho);
    GradedComplex tgt = p.complex_at(n);
    auto hs = data.complex.cohomology();
    auto ht = tgt.cohomology();

    DegreeSet degset;
    degset.add_from(hs);
    degset.add_from(ht);

    GradedBasis e_basis;
    e_basis.arity = n;
    SigmaAction e_action;
    e_action.transpositions.resize(n - 1);
    std::map<std::string, TreeVector> dmap;
    std::map<std::string, OpElem> values;

    const auto group = all_perms(static_cast<std::size_t>(n));
    const Rat inv_order(1, static_cast<long>(group.size()));

    // per generator degree: blocks of (labels, per-transposition action)
    struct DegreeBlock {
        std::vector<std::string> labels;
        std::vector<Matrix> action;  // one per adjacent transposition
    };
    std::map<int, std::vector<DegreeBlock>> blocks;

    int coker_counter = 0, ker_counter = 0;
    for (int d : degset.degs) {
        const CohomologyPresentation* hsd = hs.count(d) && hs.at(d).dim() ? &hs.at(d) : nullptr;
        const CohomologyPresentation* htd = ht.count(d) && ht.at(d).dim() ? &ht.at(d) : nullptr;
        const std::size_t sdim = hsd ? hsd->dim() : 0;
        const std::size_t tdim = htd ? htd->dim() : 0;

        Matrix h_rho(tdim, sdim);
        if (hsd && htd) {
            Matrix chain = data.rho.count(d) ? data.rho.at(d) : Matrix(tgt.dim(d), data.dim(d));
            h_rho = induced_on_cohomology(chain, *hsd, *htd);
        } else if (hsd) {
            // target cohomology vanishes: every class is kernel
            h_rho = Matrix(0, sdim);
        }

        // ----- cokernel generators at degree d -----
        if (tdim > 0) {
            SubspaceBasis image = kernel_and_image(h_rho).second;
            std::vector<std::size_t> chosen;
            {
                std::vector<Vec> span = image.vectors;
                SubspaceBasis cur = SubspaceBasis::from_spanning(span, tdim);
                for (std::size_t jj = 0; jj < tdim; ++jj) {
                    Vec ej(tdim);
                    ej[jj] = Rat(1);
                    if (!cur.contains(ej)) {
                        chosen.push_back(jj);
                        span.push_back(ej);
                        cur = SubspaceBasis::from_spanning(span, tdim);
                    }
                }
            }
            if (!chosen.empty()) {
                const std::size_t c = chosen.size();
                // basis change: columns = image basis then chosen standard vectors
                Matrix bmat(tdim, tdim);
                std::size_t ci = 0;
                for (const auto& v : image.vectors) bmat.set_col(ci++, v);
                for (auto jj : chosen) {
                    Vec ej(tdim);
                    ej[jj] = Rat(1);
                    bmat.set_col(ci++, ej);
                }
                Matrix binv = inverse(bmat);
                auto quot_coords = [&](const Vec& class_coords) {
                    Vec full = binv.apply(class_coords);
                    return Vec(full.begin() + static_cast<long>(tdim - c), full.end());
                };
                auto incl_classes = [&](const Vec& quot) {
                    Vec out(tdim);
                    for (std::size_t r = 0; r < c; ++r)
                        if (!quot[r].is_zero()) out[chosen[r]] += quot[r];
                    return out;
                };

                // quotient action per transposition
                std::vector<Matrix> qact;
                for (int t = 1; t <= n - 1; ++t) {
                    Matrix th = induced_on_cohomology(
                        target_action_matrix(p, n, Perm::transposition(n, t), d), *htd, *htd);
                    Matrix q(c, c);
                    for (std::size_t jj = 0; jj < c; ++jj) {
                        Vec ej(c);
                        ej[jj] = Rat(1);
                        q.set_col(jj, quot_coords(th.apply(incl_classes(ej))));
                    }
                    qact.push_back(q);
                }
                auto quot_action = [&](const Perm& sigma) {
                    Matrix m = Matrix::identity(c);
                    for (int t : sigma.adjacent_word()) m = m * qact[t - 1];
                    return m;
                };

                // candidate section of the quotient, then equivariant average
                std::vector<Vec> cand(c);
                for (std::size_t jj = 0; jj < c; ++jj) cand[jj] = htd->class_reps[chosen[jj]];
                std::vector<Vec> avg(c);
                for (std::size_t jj = 0; jj < c; ++jj) {
                    Vec acc(htd->cocycles.ambient_dim);
                    for (const auto& sigma : group) {
                        Vec ej(c);
                        ej[jj] = Rat(1);
                        Vec moved = quot_action(sigma.inverse()).apply(ej);
                        Vec lifted(htd->cocycles.ambient_dim);
                        for (std::size_t r = 0; r < c; ++r)
                            if (!moved[r].is_zero()) lifted = lifted + moved[r] * cand[r];
                        acc = acc + target_action_matrix(p, n, sigma, d).apply(lifted);
                    }
                    avg[jj] = inv_order * acc;
                    require(quot_coords(htd->project_ambient(avg[jj])) ==
                                [&] {
                                    Vec ej(c);
                                    ej[jj] = Rat(1);
                                    return ej;
                                }(),
                            "inductive step: averaged section leaves its cokernel class");
                }

                DegreeBlock blk;
                for (std::size_t jj = 0; jj < c; ++jj) {
                    std::string l =
                        coker_label(n, htd->class_reps[chosen[jj]], p.arity(n).basis, d,
                                    coker_counter++);
                    blk.labels.push_back(l);
                    dmap[l] = TreeVector::zero(n, d + 1);
                    values[l] = OpElem{n, d, avg[jj]};
                }
                blk.action = qact;
                blocks[d].push_back(std::move(blk));
            }
        }

        // ----- kernel-killing generators in degree d - 1 -----
        if (sdim > 0) {
            SubspaceBasis kernel = kernel_and_image(h_rho).first;
            const std::size_t k = kernel.dim();
            if (k > 0) {
                Matrix kmat(sdim, k);
                for (std::size_t jj = 0; jj < k; ++jj) kmat.set_col(jj, kernel.vectors[jj]);

                // stage H action and its restriction to the kernel
                std::vector<Matrix> kact;
                std::vector<Matrix> h_act_t;
                for (int t = 1; t <= n - 1; ++t) {
                    Matrix th = induced_on_cohomology(
                        stage_action_matrix(st, data, Perm::transposition(n, t), d), *hsd, *hsd);
                    h_act_t.push_back(th);
                    Matrix x(k, k);
                    for (std::size_t jj = 0; jj < k; ++jj) {
                        Vec acted = th.apply(kernel.vectors[jj]);
                        auto sol = solve_linear(kmat, acted);
                        require(sol.has_value(),
                                "inductive step: kernel of H(rho) is not closed under the action");
                        x.set_col(jj, *sol);
                    }
                    kact.push_back(x);
                }
                auto ker_action = [&](const Perm& sigma) {
                    Matrix m = Matrix::identity(k);
                    for (int t : sigma.adjacent_word()) m = m * kact[t - 1];
                    return m;
                };

                // equivariant section: kernel classes -> stage cocycles
                std::vector<Vec> zvals(k);
                const bool unique_section = (hsd->coboundaries.dim() == 0);
                for (std::size_t jj = 0; jj < k; ++jj) {
                    Vec base = hsd->rep_ambient(kernel.vectors[jj]);
                    if (unique_section) {
                        zvals[jj] = base;
                        continue;
                    }
                    Vec acc(hsd->cocycles.ambient_dim);
                    for (const auto& sigma : group) {
                        Vec moved = ker_action(sigma.inverse()).col(static_cast<int>(jj));
                        Vec lifted(hsd->cocycles.ambient_dim);
                        for (std::size_t r = 0; r < k; ++r)
                            if (!moved[r].is_zero())
                                lifted = lifted + moved[r] * hsd->rep_ambient(kernel.vectors[r]);
                        acc = acc + stage_action_matrix(st, data, sigma, d).apply(lifted);
                    }
                    zvals[jj] = inv_order * acc;
                }
                for (std::size_t jj = 0; jj < k; ++jj)
                    require(hsd->project_ambient(zvals[jj]) == kernel.vectors[jj],
                            "inductive step: kernel section leaves its class");

                // rho-lift per class: d_target(w) = rho(z)
                Matrix d_below = p.differential_matrix(n, d - 1);
                std::vector<Vec> wvals(k);
                Matrix chain = data.rho.count(d) ? data.rho.at(d) : Matrix(tgt.dim(d), data.dim(d));
                for (std::size_t jj = 0; jj < k; ++jj) {
                    Vec rhs = chain.apply(zvals[jj]);
                    auto w = solve_linear(d_below, rhs);
                    require(w.has_value(),
                            "inductive step: internal inconsistency, kernel class has no lift");
                    wvals[jj] = *w;
                }
                // average the lift equivariantly
                {
                    std::vector<Vec> avg(k);
                    for (std::size_t jj = 0; jj < k; ++jj) {
                        Vec acc(wvals[jj].size());
                        for (const auto& sigma : group) {
                            Vec moved = ker_action(sigma.inverse()).col(static_cast<int>(jj));
                            Vec combo(wvals[jj].size());
                            for (std::size_t r = 0; r < k; ++r)
                                if (!moved[r].is_zero()) combo = combo + moved[r] * wvals[r];
                            acc = acc + target_action_matrix(p, n, sigma, d - 1).apply(combo);
                        }
                        avg[jj] = inv_order * acc;
                        require(d_below.apply(avg[jj]) == chain.apply(zvals[jj]),
                                "inductive step: averaged lift no longer solves d(w) = rho(z)");
                    }
                    wvals = avg;
                }

                DegreeBlock blk;
                for (std::size_t jj = 0; jj < k; ++jj) {
                    std::string l = "e" + std::to_string(n) + "_k" + std::to_string(ker_counter++);
                    blk.labels.push_back(l);
                    dmap[l] = data.from_coords(d, zvals[jj]);
                    values[l] = OpElem{n, d - 1, wvals[jj]};
                }
                blk.action = kact;
                blocks[d - 1].push_back(std::move(blk));
            }
        }
    }

    // assemble the generator module
    for (const auto& [deg, blks] : blocks) {
        std::vector<std::string> labels;
        std::size_t total = 0;
        for (const auto& b : blks) total += b.labels.size();
        for (const auto& b : blks) labels.insert(labels.end(), b.labels.begin(), b.labels.end());
        e_basis.degrees[deg] = labels;
        for (int t = 1; t <= n - 1; ++t) {
            Matrix m(total, total);
            std::size_t off = 0;
            for (const auto& b : blks) {
                const Matrix& bm = b.action[t - 1];
                for (std::size_t r = 0; r < bm.rows(); ++r)
                    for (std::size_t cc = 0; cc < bm.cols(); ++cc)
                        m.at(off + r, off + cc) = bm.at(r, cc);
                off += bm.rows();
            }
            e_action.transpositions[t - 1][deg] = m;
        }
    }

    Stage new_stage = st;
    std::map<std::string, OpElem> new_values = model.rho.values;
    if (!e_basis.degrees.empty() && e_basis.total_dim() > 0) {
        if (model.mode == Mode::unitary) {
            RestrictionAssignment ra =
                assign_generator_restrictions(model, n, e_basis, e_action, dmap, values);
            new_stage = make_unitary_principal_extension(st, n, e_basis, e_action, dmap,
                                                         ra.restrictions);
            for (const auto& [l, v] : ra.corrected_values) new_values[l] = v;
        } else {
            new_stage = make_principal_extension(st, n, e_basis, e_action, dmap);
            for (const auto& [l, v] : values) new_values[l] = v;
        }
    }

    StagedModel next;
    next.mode = model.mode;
    next.target = model.target;
    next.stage = new_stage;
    next.rho = StageMorphism{new_stage, model.target, new_values};
    next.completed_arity = n;

    auto vrep = next.rho.validate();
    require(vrep.ok(), "inductive step: morphism validation failed: " +
                           (vrep.violations.empty() ? "" : vrep.violations.front()));
    auto q = is_quasi_iso_upto(next.rho, n);
    require(q.ok, "inductive step: rho_" + std::to_string(n) +
                      " is not a quasi-isomorphism up to arity " + std::to_string(n));
    return next;
}

MinimalModel minimal_model(std::shared_ptr<const FiniteDgOperad> target, int max_arity, Mode mode) {
    if (max_arity < 2) throw std::invalid_argument("minimal_model: max_arity must be >= 2");
    if (target->max_arity < max_arity)
        throw HypothesisError("target operad is truncated below the requested arity");
    auto axioms = validate_operad_axioms(*target);
    if (!axioms.ok())
        throw HypothesisError("target fails the operad axioms: " + axioms.violations.front());

    StagedModel model = base_step(target, mode);
    for (int k = 3; k <= max_arity; ++k) model = inductive_step(model, k);

    MinimalModel out;
    out.staged = model;
    out.target_name = target->name;
    out.conventions = "minleaf-canonical-trees/dfs-word-koszul/v1";
    for (const auto& [k, gs] : model.stage.generators())
        for (const auto& [deg, ls] : gs.first.degrees)
            out.generator_dims[k][deg] = static_cast<int>(ls.size());

    auto rep = verify_minimal_model(out);
    if (!rep.ok()) {
        std::string first;
        for (const auto& c : rep.checks)
            if (!c.passed) {
                first = c.name + (c.detail.empty() ? "" : ": " + c.detail);
                break;
            }
        throw PostconditionError("minimal model failed verification: " + first);
    }
    return out;
}

VerifyReport verify_minimal_model(const MinimalModel& m) {
    VerifyReport rep;
    const StagedModel& model = m.staged;
    const Stage& st = model.stage;
    const FiniteDgOperad& p = *model.target;
    auto add = [&](const std::string& name, bool passed, const std::string& detail = "") {
        rep.checks.push_back({name, passed, detail});
    };

    // theorem hypotheses on the target
    {
        auto hyp = check_theorem_hypotheses(p);
        bool ok = model.mode == Mode::unitary
                      ? (hyp.cohomologically_unitary && hyp.cohomologically_connected &&
                         hyp.has_unitary_multiplication)
                      : hyp.cohomologically_connected;
        add("hypotheses", ok, ok ? "" : hyp.failures.empty() ? "failed" : hyp.failures.front());
    }

    // d^2 = 0 exhaustively on basis trees of every arity
    {
        bool ok = true;
        std::string detail;
        for (int k = 2; k <= model.completed_arity && ok; ++k) {
            auto basis = enumerate_basis(st, k);
            for (const auto& [deg, ts] : basis) {
                for (const auto& t : ts) {
                    TreeVector v = TreeVector::zero(k, deg);
                    v.terms[t] = Rat(1);
                    if (!apply_differential(st, apply_differential(st, v)).is_zero()) {
                        ok = false;
                        detail = "tree " + tree_to_string(t);
                        break;
                    }
                }
                if (!ok) break;
            }
        }
        add("d_squared", ok, detail);
    }

    // Leibniz on sampled composable pairs
    {
        bool ok = true;
        std::mt19937 rng(20240601);
        auto pick_vector = [&](int arity) {
            auto basis = enumerate_basis(st, arity);
            std::vector<std::pair<int, Tree>> all;
            for (const auto& [deg, ts] : basis)
                for (const auto& t : ts) all.emplace_back(deg, t);
            const auto& [deg, t] = all[rng() % all.size()];
            TreeVector v = TreeVector::zero(arity, deg);
            v.terms[t] = Rat(1 + static_cast<long>(rng() % 3));
            return v;
        };
        for (int trial = 0; trial < 40 && ok; ++trial) {
            int ma = 2 + static_cast<int>(rng() % 2);
            int na = 2 + static_cast<int>(rng() % 2);
            if (ma + na - 1 > model.completed_arity + 1) continue;
            TreeVector a = pick_vector(ma);
            TreeVector b = pick_vector(na);
            int i = 1 + static_cast<int>(rng() % ma);
            TreeVector lhs = apply_differential(st, partial_compose(st, a, i, b));
            TreeVector rhs = partial_compose(st, apply_differential(st, a), i, b);
            Rat sign((a.degree % 2 != 0) ? -1 : 1);
            rhs += sign * partial_compose(st, a, i, apply_differential(st, b));
            if (!(lhs == rhs)) ok = false;
        }
        add("leibniz", ok);
    }

    // minimality: every generator differential is decomposable
    {
        bool ok = true;
        std::string detail;
        for (const auto& [k, gs] : st.generators()) {
            for (const auto& [deg, ls] : gs.first.degrees) {
                for (const auto& l : ls) {
                    for (const auto& [t, c] : st.diff_of(l).terms) {
                        if (tree_vertex_count(t) < 2) {
                            ok = false;
                            detail = "generator " + l;
                        }
                    }
                }
            }
        }
        add("minimality", ok, detail);
    }

    // chain map on generators
    {
        bool ok = true;
        std::string detail;
        for (const auto& [k, gs] : st.generators()) {
            for (const auto& [deg, ls] : gs.first.degrees) {
                for (const auto& l : ls) {
                    OpElem lhs = evaluate_morphism(model.rho, st.diff_of(l));
                    const OpElem& v = model.rho.values.at(l);
                    OpElem rhs{k, deg + 1, p.differential_matrix(k, deg).apply(v.coords)};
                    if (!(lhs == rhs)) {
                        ok = false;
                        detail = "generator " + l;
                    }
                }
            }
        }
        add("chain_map", ok, detail);
    }

    if (model.mode == Mode::unitary) {
        // rho commutes with restrictions on generators
        bool ok = true;
        std::string detail;
        for (const auto& [k, gs] : st.generators()) {
            for (const auto& [deg, ls] : gs.first.degrees) {
                for (const auto& l : ls) {
                    for (int i = 1; i <= k; ++i) {
                        OpElem lhs = evaluate_morphism(model.rho, st.restriction_of(l, i));
                        OpElem rhs = restriction_target(p, i, model.rho.values.at(l));
                        if (!(lhs == rhs)) {
                            ok = false;
                            detail = "generator " + l + ", slot " + std::to_string(i);
                        }
                    }
                }
            }
        }
        add("delta_compat", ok, detail);

        // lambda coherence on all basis trees
        bool cok = true;
        std::string cdetail;
        for (int k = 2; k <= model.completed_arity && cok; ++k) {
            auto basis = enumerate_basis(st, k);
            for (const auto& [deg, ts] : basis) {
                for (const auto& t : ts) {
                    TreeVector v = TreeVector::zero(k, deg);
                    v.terms[t] = Rat(1);
                    for (int i = 1; i <= k && cok; ++i)
                        for (int j = i + 1; j <= k; ++j) {
                            TreeVector lhs = apply_restriction(st, i, apply_restriction(st, j, v));
                            TreeVector rhs =
                                apply_restriction(st, j - 1, apply_restriction(st, i, v));
                            if (!(lhs == rhs)) {
                                cok = false;
                                cdetail = "tree " + tree_to_string(t);
                                break;
                            }
                        }
                    if (!cok) break;
                }
                if (!cok) break;
            }
        }
        add("lambda_coherence", cok, cdetail);
    }

    // equivariance of the generator values
    {
        bool ok = true;
        for (const auto& [k, gs] : st.generators()) {
            const auto& [basis, action] = gs;
            for (const auto& [deg, ls] : basis.degrees) {
                for (int t = 1; t <= k - 1; ++t) {
                    const Matrix& mt = action.transposition(t, deg);
                    for (std::size_t j = 0; j < ls.size(); ++j) {
                        OpElem lhs = p.zero(k, deg);
                        for (std::size_t r = 0; r < ls.size(); ++r)
                            if (!mt.at(r, j).is_zero())
                                lhs += mt.at(r, j) * model.rho.values.at(ls[r]);
                        OpElem rhs = act_target(p, Perm::transposition(k, t),
                                                model.rho.values.at(ls[j]));
                        if (!(lhs == rhs)) ok = false;
                    }
                }
            }
        }
        add("equivariance", ok);
    }

    // quasi-isomorphism up to the completed arity
    {
        auto q = is_quasi_iso_upto(model.rho, model.completed_arity);
        std::string detail;
        for (const auto& e : q.entries)
            if (!e.iso)
                detail += "(arity " + std::to_string(e.arity) + ", degree " +
                          std::to_string(e.degree) + ") ";
        add("quasi_iso", q.ok, detail);
    }

    return rep;
}

}  // namespace opmin
