#include "opmin/dgoperad.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace opmin {

OpElem& OpElem::operator+=(const OpElem& o) {
    if (o.is_zero()) return *this;
    if (is_zero() && coords.empty()) {
        *this = o;
        return *this;
    }
    if (arity != o.arity || degree != o.degree || coords.size() != o.coords.size())
        throw std::invalid_argument("OpElem add: shape mismatch");
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += o.coords[i];
    return *this;
}

OpElem& OpElem::operator-=(const OpElem& o) {
    *this += Rat(-1) * o;
    return *this;
}

OpElem operator*(const Rat& c, OpElem e) {
    for (auto& x : e.coords) x *= c;
    return e;
}

bool OpElem::operator==(const OpElem& o) const {
    if (is_zero() && o.is_zero()) return true;
    return arity == o.arity && degree == o.degree && coords == o.coords;
}

const FiniteDgOperad::ArityComponent& FiniteDgOperad::arity(int n) const {
    auto it = arities.find(n);
    if (it == arities.end())
        throw std::invalid_argument("operad: no arity " + std::to_string(n) + " component");
    return it->second;
}

std::size_t FiniteDgOperad::flat_dim(int n) const {
    auto it = arities.find(n);
    return it == arities.end() ? 0 : it->second.basis.total_dim();
}

FiniteDgOperad::FlatRef FiniteDgOperad::flat_ref(int n, int flat) const {
    const auto& comp = arity(n);
    int acc = 0;
    for (const auto& [deg, ls] : comp.basis.degrees) {
        if (flat < acc + static_cast<int>(ls.size())) return FlatRef{deg, flat - acc};
        acc += static_cast<int>(ls.size());
    }
    throw std::out_of_range("operad: flat index out of range");
}

int FiniteDgOperad::flat_index(int n, int degree, int index_in_degree) const {
    auto it = arities.find(n);
    if (it == arities.end()) return -1;
    int acc = 0;
    for (const auto& [deg, ls] : it->second.basis.degrees) {
        if (deg == degree) {
            if (index_in_degree < 0 || index_in_degree >= static_cast<int>(ls.size())) return -1;
            return acc + index_in_degree;
        }
        acc += static_cast<int>(ls.size());
    }
    return -1;
}

int FiniteDgOperad::flat_of_label(int n, const std::string& label) const {
    auto it = arities.find(n);
    if (it == arities.end()) return -1;
    int acc = 0;
    for (const auto& [deg, ls] : it->second.basis.degrees) {
        for (std::size_t i = 0; i < ls.size(); ++i)
            if (ls[i] == label) return acc + static_cast<int>(i);
        acc += static_cast<int>(ls.size());
    }
    return -1;
}

OpElem FiniteDgOperad::zero(int n, int degree) const {
    std::size_t d = 0;
    auto it = arities.find(n);
    if (it != arities.end()) d = it->second.basis.dim(degree);
    return OpElem{n, degree, Vec(d)};
}

OpElem FiniteDgOperad::basis_elem(int n, int degree, int index) const {
    OpElem e = zero(n, degree);
    if (index < 0 || index >= static_cast<int>(e.coords.size()))
        throw std::out_of_range("operad: basis index out of range");
    e.coords[index] = Rat(1);
    return e;
}

OpElem FiniteDgOperad::elem_of_label(int n, const std::string& label) const {
    const auto& comp = arity(n);
    for (const auto& [deg, ls] : comp.basis.degrees)
        for (std::size_t i = 0; i < ls.size(); ++i)
            if (ls[i] == label) return basis_elem(n, deg, static_cast<int>(i));
    throw std::invalid_argument("operad: unknown label '" + label + "'");
}

OpElem FiniteDgOperad::unit() const { return elem_of_label(1, unit1_label); }

OpElem FiniteDgOperad::point() const {
    if (!point_label) throw std::logic_error("operad: no arity-0 unit");
    return elem_of_label(0, *point_label);
}

OpElem FiniteDgOperad::multiplication() const {
    if (!m2_label) throw std::logic_error("operad: no unitary multiplication");
    return elem_of_label(2, *m2_label);
}

Matrix FiniteDgOperad::differential_matrix(int n, int degree) const {
    const auto& comp = arity(n);
    auto it = comp.differential.find(degree);
    if (it != comp.differential.end()) return it->second;
    return Matrix(comp.basis.dim(degree + 1), comp.basis.dim(degree));
}

GradedComplex FiniteDgOperad::complex_at(int n) const {
    GradedComplex c;
    auto it = arities.find(n);
    if (it == arities.end()) return c;
    for (const auto& [deg, ls] : it->second.basis.degrees) c.dims[deg] = ls.size();
    for (const auto& [deg, ls] : it->second.basis.degrees) c.d[deg] = differential_matrix(n, deg);
    return c;
}

namespace {

void add_comp_entry(FiniteDgOperad& p, int m, int i, int n, int fa, int fb, int fc, const Rat& c) {
    p.comp[{m, i, n}][{fa, fb}][fc] += c;
}

FiniteDgOperad make_ass(bool plus, int max_arity) {
    FiniteDgOperad p;
    p.name = plus ? "ass_plus" : "ass";
    p.max_arity = max_arity;
    for (int n = 0; n <= max_arity; ++n) {
        FiniteDgOperad::ArityComponent comp;
        comp.basis.arity = n;
        if (n == 0) {
            if (plus) comp.basis.degrees[0] = {"u"};
        } else {
            std::vector<std::string> labels;
            for (const auto& s : all_perms(static_cast<std::size_t>(n))) labels.push_back(s.one_line());
            comp.basis.degrees[0] = labels;
        }
        if (n >= 2) {
            comp.action.transpositions.resize(n - 1);
            const auto& labels = comp.basis.degrees.at(0);
            for (int t = 1; t <= n - 1; ++t) {
                Matrix mt(labels.size(), labels.size());
                Perm tp = Perm::transposition(static_cast<std::size_t>(n), t);
                const auto perms = all_perms(static_cast<std::size_t>(n));
                for (std::size_t j = 0; j < perms.size(); ++j) {
                    Perm img = tp * perms[j];
                    auto pos = std::find(labels.begin(), labels.end(), img.one_line());
                    mt.at(static_cast<std::size_t>(pos - labels.begin()), j) = Rat(1);
                }
                comp.action.transpositions[t - 1][0] = mt;
            }
        }
        p.arities[n] = std::move(comp);
    }
    p.unit1_label = "1";
    if (plus) p.point_label = "u";
    p.m2_label = Perm(2).one_line();  // identity permutation of Sigma_2

    for (int m = 1; m <= max_arity; ++m) {
        if (p.flat_dim(m) == 0) continue;
        const auto perms_m = all_perms(static_cast<std::size_t>(m));
        for (int n = plus ? 0 : 1; m + n - 1 <= max_arity && n <= max_arity; ++n) {
            if (p.flat_dim(n) == 0) continue;
            for (int i = 1; i <= m; ++i) {
                for (std::size_t ia = 0; ia < perms_m.size(); ++ia) {
                    if (n == 0) {
                        Perm res = perms_m[ia].delete_value(i);
                        int fc = (m - 1 == 0) ? 0 : p.flat_of_label(m - 1, res.one_line());
                        add_comp_entry(p, m, i, 0, static_cast<int>(ia), 0, fc, Rat(1));
                    } else {
                        const auto perms_n = all_perms(static_cast<std::size_t>(n));
                        for (std::size_t ib = 0; ib < perms_n.size(); ++ib) {
                            Perm res = block_insert_perm(perms_m[ia], perms_n[ib], i);
                            int fc = p.flat_of_label(m + n - 1, res.one_line());
                            add_comp_entry(p, m, i, n, static_cast<int>(ia), static_cast<int>(ib),
                                           fc, Rat(1));
                        }
                    }
                }
            }
        }
    }
    return p;
}

FiniteDgOperad make_com(bool plus, int max_arity) {
    FiniteDgOperad p;
    p.name = plus ? "com_plus" : "com";
    p.max_arity = max_arity;
    for (int n = 0; n <= max_arity; ++n) {
        FiniteDgOperad::ArityComponent comp;
        comp.basis.arity = n;
        if (n > 0 || plus) comp.basis.degrees[0] = {"c" + std::to_string(n)};
        if (n >= 2) comp.action = SigmaAction::trivial(comp.basis);
        p.arities[n] = std::move(comp);
    }
    p.unit1_label = "c1";
    if (plus) p.point_label = "c0";
    p.m2_label = "c2";
    for (int m = 1; m <= max_arity; ++m) {
        for (int n = plus ? 0 : 1; m + n - 1 <= max_arity && n <= max_arity; ++n) {
            for (int i = 1; i <= m; ++i) add_comp_entry(p, m, i, n, 0, 0, 0, Rat(1));
        }
    }
    return p;
}

}  // namespace

FiniteDgOperad make_builtin(const std::string& name, int max_arity) {
    if (max_arity < 2) throw std::invalid_argument("make_builtin: max_arity must be >= 2");
    if (name == "ass") return make_ass(false, max_arity);
    if (name == "ass_plus") return make_ass(true, max_arity);
    if (name == "com") return make_com(false, max_arity);
    if (name == "com_plus") return make_com(true, max_arity);
    throw std::invalid_argument("make_builtin: unknown operad '" + name + "'");
}

OpElem partial_compose_target(const FiniteDgOperad& p, const OpElem& a, int i, const OpElem& b) {
    if (i < 1 || i > a.arity) throw std::invalid_argument("partial_compose_target: slot out of range");
    const int rn = a.arity + b.arity - 1;
    if (rn > p.max_arity)
        throw std::invalid_argument("partial_compose_target: result arity exceeds max_arity");
    OpElem out = p.zero(rn, a.degree + b.degree);
    if (a.is_zero() || b.is_zero()) return out;
    auto key = std::array<int, 3>{a.arity, i, b.arity};
    auto table = p.comp.find(key);
    if (table == p.comp.end())
        throw std::invalid_argument("partial_compose_target: missing composition table");
    for (std::size_t ja = 0; ja < a.coords.size(); ++ja) {
        if (a.coords[ja].is_zero()) continue;
        int fa = p.flat_index(a.arity, a.degree, static_cast<int>(ja));
        for (std::size_t jb = 0; jb < b.coords.size(); ++jb) {
            if (b.coords[jb].is_zero()) continue;
            int fb = p.flat_index(b.arity, b.degree, static_cast<int>(jb));
            auto row = table->second.find({fa, fb});
            if (row == table->second.end()) continue;
            Rat c = a.coords[ja] * b.coords[jb];
            for (const auto& [fc, coeff] : row->second) {
                auto ref = p.flat_ref(rn, fc);
                if (ref.degree != a.degree + b.degree)
                    throw std::logic_error("partial_compose_target: tensor degree mismatch");
                out.coords[ref.index] += c * coeff;
            }
        }
    }
    return out;
}

OpElem restriction_target(const FiniteDgOperad& p, int i, const OpElem& v) {
    if (!p.point_label) throw std::logic_error("restriction_target: operad has no arity-0 unit");
    return partial_compose_target(p, v, i, p.point());
}

OpElem degeneracy_target(const FiniteDgOperad& p, int i, const OpElem& v) {
    if (!p.m2_label) throw std::logic_error("degeneracy_target: operad has no multiplication");
    return partial_compose_target(p, v, i, p.multiplication());
}

Matrix restriction_matrix(const FiniteDgOperad& p, int n, int i, int degree) {
    const std::size_t dn = p.has_component(n) ? p.arity(n).basis.dim(degree) : 0;
    const std::size_t dm = p.has_component(n - 1) ? p.arity(n - 1).basis.dim(degree) : 0;
    Matrix m(dm, dn);
    for (std::size_t j = 0; j < dn; ++j) {
        OpElem img = restriction_target(p, i, p.basis_elem(n, degree, static_cast<int>(j)));
        m.set_col(j, img.coords);
    }
    return m;
}

OpElem act_target(const FiniteDgOperad& p, const Perm& sigma, const OpElem& v) {
    if (static_cast<int>(sigma.size()) != v.arity)
        throw std::invalid_argument("act_target: permutation size mismatch");
    if (v.arity < 2 || sigma.is_identity() || v.is_zero()) return v;
    const auto& comp = p.arity(v.arity);
    OpElem out = v;
    out.coords = comp.action.matrix_of(comp.basis, sigma, v.degree).apply(v.coords);
    return out;
}

std::map<int, CohomologyPresentation> arity_cohomology(const FiniteDgOperad& p, int n) {
    if (n > p.max_arity) throw std::invalid_argument("arity_cohomology: arity above max_arity");
    return p.complex_at(n).cohomology();
}

HypothesisReport check_theorem_hypotheses(const FiniteDgOperad& p) {
    HypothesisReport rep;
    // HP(0) = k concentrated in degree 0
    {
        auto h = arity_cohomology(p, 0);
        std::size_t total = 0, at0 = 0;
        for (const auto& [deg, hp] : h) {
            total += hp.dim();
            if (deg == 0) at0 = hp.dim();
        }
        rep.cohomologically_unitary = (total == 1 && at0 == 1);
        if (rep.cohomologically_unitary && p.point_label) {
            if (is_zero(h.at(0).project_ambient(p.point().coords)))
                rep.cohomologically_unitary = false;
        }
        if (!rep.cohomologically_unitary)
            rep.failures.push_back("HP(0) is not one-dimensional in degree 0 (dim " +
                                   std::to_string(total) + ")");
    }
    // HP(1) = k concentrated in degree 0, spanned by the unit
    {
        auto h = arity_cohomology(p, 1);
        std::size_t total = 0, at0 = 0;
        for (const auto& [deg, hp] : h) {
            total += hp.dim();
            if (deg == 0) at0 = hp.dim();
        }
        rep.cohomologically_connected = (total == 1 && at0 == 1);
        if (rep.cohomologically_connected) {
            if (is_zero(h.at(0).project_ambient(p.unit().coords)))
                rep.cohomologically_connected = false;
        }
        if (!rep.cohomologically_connected)
            rep.failures.push_back("HP(1) is not spanned by the identity in degree 0");
    }
    // strict unitary multiplication
    if (p.point_label && p.m2_label) {
        OpElem m2 = p.multiplication();
        bool laws = partial_compose_target(p, m2, 1, p.point()) == p.unit() &&
                    partial_compose_target(p, m2, 2, p.point()) == p.unit();
        rep.has_unitary_multiplication = laws;
        if (!laws) rep.failures.push_back("m2 does not satisfy m2 o_1 1 = id = m2 o_2 1");
    } else {
        rep.failures.push_back("no unitary multiplication (missing arity-0 unit or m2)");
    }
    return rep;
}

namespace {

std::vector<OpElem> all_basis_elems(const FiniteDgOperad& p, int n) {
    std::vector<OpElem> out;
    if (!p.has_component(n)) return out;
    for (const auto& [deg, ls] : p.arity(n).basis.degrees)
        for (std::size_t i = 0; i < ls.size(); ++i)
            out.push_back(p.basis_elem(n, deg, static_cast<int>(i)));
    return out;
}

}  // namespace

ValidationReport validate_operad_axioms(const FiniteDgOperad& p) {
    ValidationReport rep;
    auto fail = [&](const std::string& s) { rep.violations.push_back(s); };

    for (const auto& [n, comp] : p.arities) {
        if (!comp.basis.labels_unique()) fail("arity " + std::to_string(n) + ": duplicate labels");
        if (n >= 2 && comp.basis.total_dim() > 0) {
            auto srep = validate_sigma_module(comp.basis, comp.action);
            for (const auto& v : srep.violations) fail("arity " + std::to_string(n) + ": " + v);
        }
        // d^2 = 0 and shape checks
        for (const auto& [deg, ls] : comp.basis.degrees) {
            Matrix d0 = p.differential_matrix(n, deg);
            Matrix d1 = p.differential_matrix(n, deg + 1);
            if (d0.rows() != comp.basis.dim(deg + 1) || d0.cols() != comp.basis.dim(deg))
                fail("arity " + std::to_string(n) + ": differential shape at degree " +
                     std::to_string(deg));
            else if (!(d1 * d0).is_zero())
                fail("arity " + std::to_string(n) + ": d^2 != 0 at degree " + std::to_string(deg));
        }
    }

    if (p.flat_dim(1) == 0 || p.flat_of_label(1, p.unit1_label) < 0) {
        fail("missing arity-1 unit");
        return rep;
    }
    OpElem unit = p.unit();

    // unit laws
    for (int n = 0; n <= p.max_arity; ++n) {
        for (const auto& b : all_basis_elems(p, n)) {
            if (n >= 1 && !(partial_compose_target(p, unit, 1, b) == b))
                fail("unit law 1 o_1 b fails in arity " + std::to_string(n));
            for (int i = 1; i <= n; ++i)
                if (!(partial_compose_target(p, b, i, unit) == b))
                    fail("unit law b o_" + std::to_string(i) + " 1 fails in arity " +
                         std::to_string(n));
        }
    }

    // Leibniz on composition tensors
    for (const auto& [key, table] : p.comp) {
        const int m = key[0], i = key[1], n = key[2];
        (void)table;
        for (const auto& a : all_basis_elems(p, m)) {
            for (const auto& b : all_basis_elems(p, n)) {
                OpElem lhs{0, 0, {}};
                {
                    OpElem ab = partial_compose_target(p, a, i, b);
                    lhs = OpElem{ab.arity, ab.degree + 1,
                                 p.differential_matrix(ab.arity, ab.degree).apply(ab.coords)};
                }
                OpElem da{a.arity, a.degree + 1,
                          p.differential_matrix(a.arity, a.degree).apply(a.coords)};
                OpElem db{b.arity, b.degree + 1,
                          p.differential_matrix(b.arity, b.degree).apply(b.coords)};
                OpElem rhs = partial_compose_target(p, da, i, b);
                Rat sign((a.degree % 2 != 0) ? -1 : 1);
                rhs += sign * partial_compose_target(p, a, i, db);
                if (!(lhs == rhs))
                    fail("Leibniz fails for composite (" + std::to_string(m) + "," +
                         std::to_string(i) + "," + std::to_string(n) + ")");
            }
        }
    }

    // sequential and parallel associativity on basis triples within max_arity
    for (int m = 1; m <= p.max_arity; ++m) {
        for (int n = 1; n <= p.max_arity; ++n) {
            for (int q = 0; q <= p.max_arity; ++q) {
                // intermediate composites must stay representable
                if (m + n + q - 2 > p.max_arity || m + n - 1 > p.max_arity) continue;
                if (p.flat_dim(m) == 0 || p.flat_dim(n) == 0 || p.flat_dim(q) == 0) continue;
                if (q == 0 && !p.point_label) continue;
                for (const auto& a : all_basis_elems(p, m)) {
                    for (const auto& b : all_basis_elems(p, n)) {
                        for (const auto& c : all_basis_elems(p, q)) {
                            for (int i = 1; i <= m; ++i) {
                                for (int j = 1; j <= n; ++j) {
                                    OpElem lhs = partial_compose_target(
                                        p, partial_compose_target(p, a, i, b), i + j - 1, c);
                                    OpElem rhs = partial_compose_target(
                                        p, a, i, partial_compose_target(p, b, j, c));
                                    if (!(lhs == rhs))
                                        fail("sequential associativity fails at (" +
                                             std::to_string(m) + "," + std::to_string(n) + "," +
                                             std::to_string(q) + ")");
                                }
                                for (int j = i + 1; j <= m; ++j) {
                                    OpElem lhs = partial_compose_target(
                                        p, partial_compose_target(p, a, i, b), j + n - 1, c);
                                    OpElem rhs = partial_compose_target(
                                        p, partial_compose_target(p, a, j, c), i, b);
                                    Rat sign(((b.degree * c.degree) % 2 != 0) ? -1 : 1);
                                    if (!(lhs == sign * rhs))
                                        fail("parallel associativity fails at (" +
                                             std::to_string(m) + "," + std::to_string(n) + "," +
                                             std::to_string(q) + ")");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // equivariance against the block-insertion rule, on generating transpositions
    for (int m = 2; m <= p.max_arity; ++m) {
        for (int n = 0; m + n - 1 <= p.max_arity; ++n) {
            if (p.flat_dim(m) == 0 || p.flat_dim(n) == 0) continue;
            std::vector<Perm> sigmas{Perm(static_cast<std::size_t>(m))};
            for (int t = 1; t <= m - 1; ++t)
                sigmas.push_back(Perm::transposition(static_cast<std::size_t>(m), t));
            std::vector<Perm> taus{Perm(static_cast<std::size_t>(n))};
            for (int t = 1; t <= n - 1; ++t)
                taus.push_back(Perm::transposition(static_cast<std::size_t>(n), t));
            for (const auto& a : all_basis_elems(p, m)) {
                for (const auto& b : all_basis_elems(p, n)) {
                    for (const auto& sigma : sigmas) {
                        for (const auto& tau : taus) {
                            for (int i = 1; i <= m; ++i) {
                                OpElem lhs = partial_compose_target(
                                    p, act_target(p, sigma, a), i, act_target(p, tau, b));
                                Perm rho = block_insert_perm(sigma, tau, i);
                                OpElem rhs = act_target(
                                    p, rho,
                                    partial_compose_target(p, a, sigma.inverse()(i), b));
                                if (!(lhs == rhs))
                                    fail("equivariance fails at arities (" + std::to_string(m) +
                                         "," + std::to_string(n) + ")");
                            }
                        }
                    }
                }
            }
        }
    }

    // strict unitary multiplication, when declared
    if (p.m2_label && p.point_label) {
        OpElem m2 = p.multiplication();
        if (!(partial_compose_target(p, m2, 1, p.point()) == unit) ||
            !(partial_compose_target(p, m2, 2, p.point()) == unit))
            fail("unitary multiplication laws fail");
    }
    return rep;
}

ValidationReport StageMorphism::validate() const {
    ValidationReport rep;
    for (const auto& [n, gs] : source.generators()) {
        const auto& [basis, action] = gs;
        for (const auto& [deg, ls] : basis.degrees) {
            for (std::size_t j = 0; j < ls.size(); ++j) {
                const std::string& l = ls[j];
                auto it = values.find(l);
                if (it == values.end()) {
                    rep.violations.push_back("no value for generator '" + l + "'");
                    continue;
                }
                if (it->second.arity != n || (!it->second.is_zero() && it->second.degree != deg)) {
                    rep.violations.push_back("value shape mismatch for '" + l + "'");
                    continue;
                }
                // chain map on the generator
                OpElem lhs = evaluate_morphism(*this, source.diff_of(l));
                OpElem rhs{n, deg + 1, target->differential_matrix(n, deg).apply(it->second.coords)};
                if (!(lhs == rhs))
                    rep.violations.push_back("chain map fails on generator '" + l + "'");
                // restriction compatibility
                if (source.unitary()) {
                    for (int i = 1; i <= n; ++i) {
                        OpElem lr = evaluate_morphism(*this, source.restriction_of(l, i));
                        OpElem rr = restriction_target(*target, i, it->second);
                        if (!(lr == rr))
                            rep.violations.push_back("restriction compatibility fails on ('" + l +
                                                     "', " + std::to_string(i) + ")");
                    }
                }
                // equivariance on generating transpositions
                for (int t = 1; t <= n - 1; ++t) {
                    const Matrix& mt = action.transposition(t, deg);
                    OpElem lhs2 = target->zero(n, deg);
                    for (std::size_t r = 0; r < ls.size(); ++r)
                        if (!mt.at(r, j).is_zero()) lhs2 += mt.at(r, j) * values.at(ls[r]);
                    OpElem rhs2 =
                        act_target(*target, Perm::transposition(static_cast<std::size_t>(n), t),
                                   it->second);
                    if (!(lhs2 == rhs2))
                        rep.violations.push_back("equivariance fails on generator '" + l + "'");
                }
            }
        }
    }
    return rep;
}

namespace {

// Evaluation ignoring leaf labels: input p feeds the p-th leaf in planar
// order. Left-to-right folding keeps the decoration word in order, so no
// Koszul sign appears here.
OpElem evaluate_tree_planar(const StageMorphism& rho, const Tree& t) {
    const FiniteDgOperad& p = *rho.target;
    if (t.is_point()) return p.point();
    if (t.is_leaf()) return p.unit();
    auto it = rho.values.find(t.gen);
    if (it == rho.values.end())
        throw std::invalid_argument("evaluate_morphism: no value for generator '" + t.gen + "'");
    OpElem acc = it->second;
    int slot = 1;
    for (const auto& kid : t.kids) {
        OpElem ke = evaluate_tree_planar(rho, kid);
        acc = partial_compose_target(p, acc, slot, ke);
        slot += ke.arity;
    }
    return acc;
}

OpElem evaluate_tree(const StageMorphism& rho, const Tree& t) {
    OpElem acc = evaluate_tree_planar(rho, t);
    if (!t.is_internal()) return acc;
    // re-index planar positions to the actual leaf labels
    std::vector<int> leaves;
    std::function<void(const Tree&)> walk = [&](const Tree& n) {
        if (n.is_leaf()) {
            leaves.push_back(n.leaf);
            return;
        }
        for (const auto& k : n.kids) walk(k);
    };
    walk(t);
    return act_target(*rho.target, Perm(leaves), acc);
}

}  // namespace

OpElem evaluate_morphism(const StageMorphism& rho, const TreeVector& v) {
    OpElem out = rho.target->zero(v.arity, v.degree);
    for (const auto& [t, c] : v.terms) out += c * evaluate_tree(rho, t);
    return out;
}

const std::vector<Tree>& ArityData::basis_at(int degree) const {
    static const std::vector<Tree> kEmpty;
    auto it = basis.find(degree);
    return it == basis.end() ? kEmpty : it->second;
}

Vec ArityData::coords(const TreeVector& v) const {
    return tree_vector_coords(v, basis_at(v.degree));
}

TreeVector ArityData::from_coords(int degree, const Vec& c) const {
    return tree_vector_from_coords(c, basis_at(degree), arity, degree);
}

ArityData build_arity_data(const Stage& stage, int n) {
    ArityData data;
    data.arity = n;
    data.basis = enumerate_basis(stage, n);
    for (const auto& [deg, ts] : data.basis) data.complex.dims[deg] = ts.size();
    for (const auto& [deg, ts] : data.basis) {
        const std::size_t dnext = data.dim(deg + 1);
        Matrix d(dnext, ts.size());
        for (std::size_t j = 0; j < ts.size(); ++j) {
            TreeVector tv = TreeVector::zero(n, deg);
            tv.terms[ts[j]] = Rat(1);
            TreeVector dv = apply_differential(stage, tv);
            if (!dv.is_zero()) d.set_col(j, tree_vector_coords(dv, data.basis_at(deg + 1)));
        }
        data.complex.d[deg] = d;
    }
    return data;
}

void add_evaluation_matrices(ArityData& data, const StageMorphism& rho) {
    const FiniteDgOperad& p = *rho.target;
    for (const auto& [deg, ts] : data.basis) {
        const std::size_t dt = p.has_component(data.arity) ? p.arity(data.arity).basis.dim(deg) : 0;
        Matrix m(dt, ts.size());
        for (std::size_t j = 0; j < ts.size(); ++j) {
            TreeVector tv = TreeVector::zero(data.arity, deg);
            tv.terms[ts[j]] = Rat(1);
            OpElem e = evaluate_morphism(rho, tv);
            if (e.coords.size() != dt) throw std::logic_error("evaluation matrix shape mismatch");
            m.set_col(j, e.coords);
        }
        data.rho[deg] = m;
    }
}

Matrix stage_restriction_matrix(const Stage& stage, const ArityData& from, const ArityData& to,
                                int i, int degree) {
    const auto& bs = from.basis_at(degree);
    Matrix m(to.dim(degree), bs.size());
    for (std::size_t j = 0; j < bs.size(); ++j) {
        TreeVector tv = TreeVector::zero(from.arity, degree);
        tv.terms[bs[j]] = Rat(1);
        TreeVector rv = apply_restriction(stage, i, tv);
        if (!rv.is_zero()) m.set_col(j, tree_vector_coords(rv, to.basis_at(degree)));
    }
    return m;
}

QuasiIsoReport is_quasi_iso_upto(const StageMorphism& rho, int n) {
    QuasiIsoReport rep;
    const FiniteDgOperad& p = *rho.target;
    for (int k = 0; k <= n; ++k) {
        ArityData data = build_arity_data(rho.source, k);
        add_evaluation_matrices(data, rho);
        GradedComplex tgt = p.complex_at(k);
        auto hs = data.complex.cohomology();
        auto ht = tgt.cohomology();
        std::set<int> degs;
        for (const auto& [d, h] : hs)
            if (h.dim() > 0) degs.insert(d);
        for (const auto& [d, h] : ht)
            if (h.dim() > 0) degs.insert(d);
        for (int d : degs) {
            QuasiIsoEntry e;
            e.arity = k;
            e.degree = d;
            const CohomologyPresentation* src = hs.count(d) ? &hs.at(d) : nullptr;
            const CohomologyPresentation* dst = ht.count(d) ? &ht.at(d) : nullptr;
            e.dim_source_h = src ? src->dim() : 0;
            e.dim_target_h = dst ? dst->dim() : 0;
            std::size_t rk = 0;
            if (src && dst && src->dim() > 0 && dst->dim() > 0) {
                Matrix chain = data.rho.count(d) ? data.rho.at(d) : Matrix(tgt.dim(d), data.dim(d));
                Matrix ind = induced_on_cohomology(chain, *src, *dst);
                rk = rank(ind);
            }
            e.kernel_dim = e.dim_source_h - rk;
            e.cokernel_dim = e.dim_target_h - rk;
            e.iso = (e.kernel_dim == 0 && e.cokernel_dim == 0);
            if (!e.iso) rep.ok = false;
            rep.entries.push_back(e);
        }
    }
    return rep;
}

}  // namespace opmin
