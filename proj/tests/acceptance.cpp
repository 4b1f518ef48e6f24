// Acceptance suite: one pass/fail line per criterion, exit code = #failures.

#include <chrono>
#include <iostream>
#include <random>

#include "opmin/serialize.hpp"
#include "oracles.hpp"

using namespace opmin;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool passed, const std::string& detail = "") {
    std::cout << (passed ? "PASS" : "FAIL") << "  criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!passed) ++failures;
}

template <typename F>
void criterion(int number, const std::string& what, F&& body) {
    try {
        body();
        report(number, what, true);
    } catch (const std::exception& e) {
        report(number, what, false, e.what());
    }
}

void expect(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

std::shared_ptr<const FiniteDgOperad> shared_builtin(const std::string& name, int max_arity) {
    return std::make_shared<FiniteDgOperad>(make_builtin(name, max_arity));
}

const std::map<int, std::map<int, int>> kAinfDims = {{2, {{0, 2}}}, {3, {{-1, 6}}}, {4, {{-2, 24}}}};
const std::map<int, std::map<int, int>> kCinfDims = {{2, {{0, 1}}}, {3, {{-1, 2}}}, {4, {{-2, 6}}}};

std::size_t kernel_dim_at(const QuasiIsoReport& q, int arity, int degree) {
    for (const auto& e : q.entries)
        if (e.arity == arity && e.degree == degree) return e.kernel_dim;
    return 0;
}

Json arity_slice_of_model(const Json& j, int arity) {
    // everything the model file says about one arity
    Json out = Json::object();
    const std::string key = std::to_string(arity);
    out["generators"] = j.at("generators").contains(key) ? j.at("generators").at(key) : Json::object();
    out["actions"] = j.at("actions").contains(key) ? j.at("actions").at(key) : Json::object();
    Json diff = Json::object(), restr = Json::object(), rho = Json::object();
    if (j.at("generators").contains(key)) {
        for (const auto& [deg, ls] : j.at("generators").at(key).items()) {
            (void)deg;
            for (const auto& l : ls) {
                std::string label = l.get<std::string>();
                diff[label] = j.at("differential").at(label);
                if (j.contains("restrictions")) restr[label] = j.at("restrictions").at(label);
                rho[label] = j.at("rho").at(label);
            }
        }
    }
    out["differential"] = diff;
    if (j.contains("restrictions")) out["restrictions"] = restr;
    out["rho"] = rho;
    return out;
}

}  // namespace

int main() {
    // ---- criterion 1: A-infinity reconstruction with independent rank oracle
    criterion(1, "A-infinity reconstruction (ass, non-unitary, max arity 4)", [] {
        auto t0 = std::chrono::steady_clock::now();
        auto target = shared_builtin("ass", 4);
        StagedModel m2 = base_step(target, Mode::non_unitary);

        // independent oracle at arity 3: the 6x12 evaluation matrix has rank 6
        ArityData data3 = build_arity_data(m2.stage, 3);
        add_evaluation_matrices(data3, m2.rho);
        const Matrix& ev = data3.rho.at(0);
        expect(ev.rows() == 6 && ev.cols() == 12, "evaluation matrix is not 6x12");
        expect(oracles::minor_rank_oracle(ev) == 6, "minor-rank oracle disagrees with rank 6");
        std::size_t ker3 = kernel_dim_at(is_quasi_iso_upto(m2.rho, 3), 3, 0);
        expect(ker3 == 6, "dim ker H(rho_2)(3) != 6");

        StagedModel m3 = inductive_step(m2, 3);
        expect(m3.stage.gen_basis(3).total_dim() == ker3, "dim E(3) != dim ker H(rho_2)(3)");
        std::size_t ker4 = kernel_dim_at(is_quasi_iso_upto(m3.rho, 4), 4, -1);
        StagedModel m4 = inductive_step(m3, 4);
        expect(m4.stage.gen_basis(4).total_dim() == ker4, "dim E(4) != dim ker H(rho_3)(4)");

        auto model = minimal_model(target, 4, Mode::non_unitary);
        expect(model.generator_dims == kAinfDims, "generator dimensions differ from 2/6/24");
        auto dt = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - t0);
        expect(dt.count() < 60, "runtime exceeded one minute");
    });

    // ---- criterion 2: strictly unital A-infinity
    criterion(2, "strictly-unital A-infinity (ass_plus, unitary, max arity 4)", [] {
        auto model = minimal_model(shared_builtin("ass_plus", 4), 4, Mode::unitary);
        expect(model.generator_dims == kAinfDims, "generator dimensions differ from 2/6/24");
        const Stage& st = model.staged.stage;
        expect(st.has_gen("e2[12]"), "identity-labeled arity-2 generator missing");
        expect(st.restriction_of("e2[12]", 1) == unit_tree_vector() &&
                   st.restriction_of("e2[12]", 2) == unit_tree_vector(),
               "identity-labeled generator does not restrict to id");
        for (int n = 3; n <= 4; ++n)
            for (const auto& [deg, ls] : st.gen_basis(n).degrees)
                for (const auto& l : ls)
                    for (int i = 1; i <= n; ++i)
                        expect(st.restriction_of(l, i).is_zero(),
                               "arity >= 3 generator has a nonzero restriction");
    });

    // ---- criterion 3: C-infinity desk check
    criterion(3, "C-infinity desk check (com, max arity 4)", [] {
        auto target = shared_builtin("com", 4);
        StagedModel m2 = base_step(target, Mode::non_unitary);
        auto basis3 = enumerate_basis(m2.stage, 3);
        std::size_t stage_dim = 0;
        for (const auto& [deg, ts] : basis3) stage_dim += ts.size();
        expect(stage_dim == 3, "dim Gamma(E(2))(3) != 3");
        expect(target->flat_dim(3) == 1, "dim Com(3) != 1");
        auto q = is_quasi_iso_upto(m2.rho, 3);
        expect(kernel_dim_at(q, 3, 0) == 2, "kernel dimension != 2 at arity 3");
        for (const auto& e : q.entries)
            if (e.arity == 3) expect(e.cokernel_dim == 0, "evaluation not surjective at arity 3");

        auto model = minimal_model(target, 4, Mode::non_unitary);
        expect(model.generator_dims == kCinfDims, "generator dimensions differ from 1/2/6");
    });

    // ---- criterion 4: quasi-isomorphism suite over all four builtins
    criterion(4, "quasi-isomorphism suite (all builtins, all arities and degrees)", [] {
        const std::vector<std::pair<std::string, Mode>> runs = {
            {"ass", Mode::non_unitary},
            {"com", Mode::non_unitary},
            {"ass_plus", Mode::unitary},
            {"com_plus", Mode::unitary},
        };
        for (const auto& [name, mode] : runs) {
            auto model = minimal_model(shared_builtin(name, 4), 4, mode);
            auto q = is_quasi_iso_upto(model.staged.rho, 4);
            expect(q.ok, name + ": H(rho) is not an isomorphism everywhere");
            for (const auto& e : q.entries)
                expect(e.dim_source_h == e.dim_target_h,
                       name + ": cohomology dimensions differ at arity " + std::to_string(e.arity));
        }
    });

    // ---- criterion 5: sign conventions
    criterion(5, "sign-convention suite (d^2 = 0 exhaustive, Leibniz on 200 pairs)", [] {
        auto model = minimal_model(shared_builtin("ass_plus", 4), 4, Mode::unitary);
        const Stage& st = model.staged.stage;
        long checked = 0;
        for (int n = 2; n <= 4; ++n) {
            auto basis = enumerate_basis(st, n);
            for (const auto& [deg, ts] : basis) {
                for (const auto& t : ts) {
                    TreeVector v = TreeVector::zero(n, deg);
                    v.terms[t] = Rat(1);
                    expect(apply_differential(st, apply_differential(st, v)).is_zero(),
                           "d^2 != 0 on " + tree_to_string(t));
                    ++checked;
                }
            }
        }
        expect(checked >= 284, "unexpectedly small basis enumeration");

        std::mt19937 rng(424242);
        auto pick = [&](int arity) {
            auto basis = enumerate_basis(st, arity);
            std::vector<std::pair<int, Tree>> all;
            for (const auto& [deg, ts] : basis)
                for (const auto& t : ts) all.emplace_back(deg, t);
            const auto& [deg, t] = all[rng() % all.size()];
            TreeVector v = TreeVector::zero(arity, deg);
            v.terms[t] = Rat(1 + static_cast<long>(rng() % 5));
            return v;
        };
        for (int trial = 0; trial < 200; ++trial) {
            int ma = 2 + static_cast<int>(rng() % 2);
            int na = 2 + static_cast<int>(rng() % 2);
            TreeVector a = pick(ma);
            TreeVector b = pick(na);
            int i = 1 + static_cast<int>(rng() % ma);
            TreeVector lhs = apply_differential(st, partial_compose(st, a, i, b));
            TreeVector rhs = partial_compose(st, apply_differential(st, a), i, b);
            Rat sign((a.degree % 2 != 0) ? -1 : 1);
            rhs += sign * partial_compose(st, a, i, apply_differential(st, b));
            expect(lhs == rhs, "Leibniz failed on a random pair");
        }
    });

    // ---- criterion 6: simplicial identities
    criterion(6, "simplicial identity suite (ass_plus basis elements up to arity 4)", [] {
        auto p = make_builtin("ass_plus", 5);
        expect(partial_compose_target(p, p.multiplication(), 1, p.point()) == p.unit() &&
                   partial_compose_target(p, p.multiplication(), 2, p.point()) == p.unit(),
               "m2 o 1 unit laws fail");
        for (int n = 1; n <= 4; ++n) {
            for (std::size_t b = 0; b < p.flat_dim(n); ++b) {
                OpElem w = p.basis_elem(n, 0, static_cast<int>(b));
                for (int j = 2; j <= n; ++j)
                    for (int i = 1; i < j; ++i)
                        expect(restriction_target(p, i, restriction_target(p, j, w)) ==
                                   restriction_target(p, j - 1, restriction_target(p, i, w)),
                               "delta delta identity fails");
                for (int i = 1; i <= n; ++i) {
                    expect(restriction_target(p, i, degeneracy_target(p, i, w)) == w,
                           "delta_i s_i != id");
                    expect(restriction_target(p, i + 1, degeneracy_target(p, i, w)) == w,
                           "delta_{i+1} s_i != id");
                }
                for (int j = 2; j <= n; ++j)
                    for (int i = 1; i < j; ++i)
                        expect(restriction_target(p, i, degeneracy_target(p, j, w)) ==
                                   degeneracy_target(p, j - 1, restriction_target(p, i, w)),
                               "delta_i s_j != s_{j-1} delta_i");
                for (int j = 1; j <= n; ++j)
                    for (int i = j + 2; i <= n + 1; ++i)
                        expect(restriction_target(p, i, degeneracy_target(p, j, w)) ==
                                   degeneracy_target(p, j, restriction_target(p, i - 1, w)),
                               "delta_i s_j != s_j delta_{i-1}");
            }
        }
    });

    // ---- criterion 7: Kan fillers
    criterion(7, "Kan filler suite (500 fuzzed families, refined and equivariant fillers)", [] {
        auto p = make_builtin("ass_plus", 5);
        std::mt19937 rng(77777);
        auto random_coords = [&](std::size_t dim) {
            std::uniform_int_distribution<long> d(-3, 3);
            Vec v(dim);
            for (auto& x : v) x = Rat(d(rng));
            return v;
        };
        int filled = 0;
        for (int round = 0; filled < 500; ++round) {
            int n = 2 + (round % 3);
            KanCarrier c = make_target_carrier(p, n, 0);
            Vec omega = random_coords(c.dim_n);
            FaceFamily f;
            f.n = n;
            f.degree = 0;
            for (int i = 1; i <= n; ++i) f.members.push_back(c.delta_n[i - 1].apply(omega));
            expect(is_kan_family(c, f).ok, "face-induced family fails the Kan condition");
            Vec w = fill(c, f);
            for (int i = 1; i <= n; ++i)
                expect(c.delta_n[i - 1].apply(w) == f.members[i - 1], "face recovery failed");
            ++filled;
        }

        // refined fillers preserve their flags
        KanCarrier c3 = make_target_carrier(p, 3, 0);
        Vec omega = random_coords(c3.dim_n);
        FaceFamily f3;
        f3.n = 3;
        f3.degree = 0;
        for (int i = 1; i <= 3; ++i) f3.members.push_back(c3.delta_n[i - 1].apply(omega));
        FillConstraint cc;
        cc.cocycle = true;
        expect(is_zero(c3.d_out_n.apply(fill_refined(c3, f3, cc).filler)),
               "cocycle flag not preserved");
        FillConstraint cb;
        cb.coboundary = true;
        FaceFamily zero{3, 0, {Vec(c3.dim_nm1), Vec(c3.dim_nm1), Vec(c3.dim_nm1)}};
        auto rb = fill_refined(c3, zero, cb);
        expect(is_zero(rb.filler) && rb.witness && is_zero(*rb.witness),
               "coboundary flag not preserved on the zero family");
        FillConstraint ck;
        ck.in_kernel = c3.delta_n[0];
        OpElem oe{3, 0, omega};
        OpElem adj = oe;
        adj -= degeneracy_target(p, 1, restriction_target(p, 1, oe));
        FaceFamily fk;
        fk.n = 3;
        fk.degree = 0;
        for (int i = 1; i <= 3; ++i) fk.members.push_back(c3.delta_n[i - 1].apply(adj.coords));
        expect(is_zero(c3.delta_n[0].apply(fill_refined(c3, fk, ck).filler)),
               "kernel flag not preserved");
        Matrix s1(c3.dim_n, p.arity(2).basis.dim(0));
        for (std::size_t j = 0; j < p.arity(2).basis.dim(0); ++j)
            s1.set_col(j, degeneracy_target(p, 1, p.basis_elem(2, 0, static_cast<int>(j))).coords);
        FillConstraint ci;
        ci.in_image = s1;
        Vec im = s1.apply(random_coords(p.arity(2).basis.dim(0)));
        FaceFamily fi;
        fi.n = 3;
        fi.degree = 0;
        for (int i = 1; i <= 3; ++i) fi.members.push_back(c3.delta_n[i - 1].apply(im));
        auto ri = fill_refined(c3, fi, ci);
        expect(ri.witness && ri.filler == s1.apply(*ri.witness), "image flag not preserved");

        // equivariant filler with exhaustive group checks (inside fill_equivariant)
        for (int n = 2; n <= 3; ++n) {
            KanCarrier c = make_target_carrier(p, n, 0);
            LinearFamily fam;
            fam.e_dim = c.dim_n;
            for (std::size_t j = 0; j < c.dim_n; ++j) {
                Vec e(c.dim_n);
                e[j] = Rat(1);
                FaceFamily ff;
                ff.n = n;
                ff.degree = 0;
                for (int i = 1; i <= n; ++i) ff.members.push_back(c.delta_n[i - 1].apply(e));
                fam.faces.push_back(ff);
            }
            auto act_e = [&](const Perm& sigma, const Vec& v) { return c.act_n(sigma, v); };
            auto sol = fill_equivariant(c, fam, act_e);
            expect(sol.size() == c.dim_n, "equivariant filler returned the wrong shape");
        }
    });

    // ---- criterion 8: determinism and stability
    criterion(8, "determinism and stability of model files", [] {
        auto run = [](int max_arity) {
            auto model = minimal_model(shared_builtin("ass_plus", max_arity), max_arity, Mode::unitary);
            auto report = verify_minimal_model(model);
            return dump_json(model_to_json(model, report));
        };
        std::string a = run(4);
        std::string b = run(4);
        expect(a == b, "two identical runs produced different files");

        std::string c = run(3);
        Json j3 = Json::parse(c);
        Json j4 = Json::parse(a);
        for (int n = 2; n <= 3; ++n) {
            Json s3 = arity_slice_of_model(j3, n);
            Json s4 = arity_slice_of_model(j4, n);
            expect(dump_json(s3) == dump_json(s4),
                   "shared arity " + std::to_string(n) + " differs between runs");
        }
    });

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << std::endl;
    return failures;
}
