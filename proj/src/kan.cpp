#include "opmin/kan.hpp"

namespace opmin {

namespace {

Matrix slice_dim_matrix(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

}  // namespace

KanCarrier make_target_carrier(const FiniteDgOperad& p, int n, int degree) {
    if (n < 1) throw std::invalid_argument("make_target_carrier: arity must be >= 1");
    KanCarrier c;
    c.arity = n;
    c.degree = degree;
    auto dim = [&](int k, int deg) -> std::size_t {
        return p.has_component(k) ? p.arity(k).basis.dim(deg) : 0;
    };
    c.dim_n = dim(n, degree);
    c.dim_nm1 = dim(n - 1, degree);
    c.dim_nm2 = n >= 2 ? dim(n - 2, degree) : 0;
    for (int i = 1; i <= n; ++i) c.delta_n.push_back(restriction_matrix(p, n, i, degree));
    for (int i = 1; i <= n - 1; ++i) c.delta_nm1.push_back(restriction_matrix(p, n - 1, i, degree));
    c.d_in_n = Matrix(c.dim_n, dim(n, degree - 1));
    if (p.has_component(n)) c.d_in_n = p.differential_matrix(n, degree - 1);
    c.d_out_n = p.has_component(n) ? p.differential_matrix(n, degree)
                                   : slice_dim_matrix(dim(n, degree + 1), c.dim_n);
    c.d_in_nm1 = p.has_component(n - 1) ? p.differential_matrix(n - 1, degree - 1)
                                        : slice_dim_matrix(c.dim_nm1, 0);
    c.d_out_nm1 = p.has_component(n - 1) ? p.differential_matrix(n - 1, degree)
                                         : slice_dim_matrix(0, c.dim_nm1);
    c.act_n = [&p, n, degree](const Perm& sigma, const Vec& v) {
        OpElem e{n, degree, v};
        return act_target(p, sigma, e).coords;
    };
    return c;
}

KanCarrier make_stage_carrier(const Stage& stage, int n, int degree) {
    if (!stage.unitary()) throw std::logic_error("make_stage_carrier: stage must be unitary");
    if (n < 1) throw std::invalid_argument("make_stage_carrier: arity must be >= 1");
    KanCarrier c;
    c.arity = n;
    c.degree = degree;
    // shared_ptr so the lambda keeps the slice bases alive
    auto d_n = std::make_shared<ArityData>(build_arity_data(stage, n));
    auto d_nm1 = std::make_shared<ArityData>(build_arity_data(stage, n - 1));
    auto d_nm2 = n >= 2 ? std::make_shared<ArityData>(build_arity_data(stage, n - 2)) : nullptr;
    c.dim_n = d_n->dim(degree);
    c.dim_nm1 = d_nm1->dim(degree);
    c.dim_nm2 = d_nm2 ? d_nm2->dim(degree) : 0;
    for (int i = 1; i <= n; ++i)
        c.delta_n.push_back(stage_restriction_matrix(stage, *d_n, *d_nm1, i, degree));
    if (d_nm2)
        for (int i = 1; i <= n - 1; ++i)
            c.delta_nm1.push_back(stage_restriction_matrix(stage, *d_nm1, *d_nm2, i, degree));
    auto cmat = [](const GradedComplex& g, int deg) { return g.dmat(deg); };
    c.d_in_n = cmat(d_n->complex, degree - 1);
    c.d_out_n = cmat(d_n->complex, degree);
    c.d_in_nm1 = cmat(d_nm1->complex, degree - 1);
    c.d_out_nm1 = cmat(d_nm1->complex, degree);
    const Stage* st = &stage;
    c.act_n = [st, d_n, n, degree](const Perm& sigma, const Vec& v) {
        TreeVector tv = d_n->from_coords(degree, v);
        return d_n->coords(act_on_tree_vector(*st, sigma, tv));
    };
    return c;
}

KanCheck is_kan_family(const KanCarrier& carrier, const FaceFamily& family) {
    KanCheck res;
    if (family.n != carrier.arity)
        throw std::invalid_argument("is_kan_family: family arity does not match the carrier");
    if (static_cast<int>(family.members.size()) != family.n)
        throw std::invalid_argument("is_kan_family: expected one face per slot");
    for (const auto& m : family.members)
        if (m.size() != carrier.dim_nm1)
            throw std::invalid_argument("is_kan_family: face dimension mismatch");
    for (int i = 1; i <= family.n; ++i) {
        for (int j = i + 1; j <= family.n; ++j) {
            Vec lhs = carrier.delta_nm1.empty() ? Vec{} : carrier.delta_nm1[i - 1].apply(family.members[j - 1]);
            Vec rhs = carrier.delta_nm1.empty() ? Vec{} : carrier.delta_nm1[j - 2].apply(family.members[i - 1]);
            if (!(lhs == rhs)) {
                res.ok = false;
                res.first_violation = "delta_" + std::to_string(i) + " omega_" + std::to_string(j) +
                                      " != delta_" + std::to_string(j - 1) + " omega_" +
                                      std::to_string(i);
                return res;
            }
        }
    }
    return res;
}

namespace {

// Builds the stacked face system delta_i(x) = omega_i over a reparametrized
// unknown x = base * y (base = identity when no substitution applies), plus
// optional annihilation rows. Returns the solved x and the parameter y.
FillResult solve_fill(const KanCarrier& c, const FaceFamily& family, const FillConstraint& cons) {
    if (cons.coboundary && cons.in_image)
        throw std::invalid_argument("fill: coboundary and in_image cannot be combined");
    Matrix base = Matrix::identity(c.dim_n);
    bool substituted = false;
    if (cons.coboundary) {
        base = c.d_in_n;
        substituted = true;
    } else if (cons.in_image) {
        base = *cons.in_image;
        if (base.rows() != c.dim_n) throw std::invalid_argument("fill: in_image shape mismatch");
        substituted = true;
    }
    std::vector<Matrix> lhs_blocks;
    std::vector<Vec> rhs_blocks;
    for (int i = 1; i <= family.n; ++i) {
        lhs_blocks.push_back(c.delta_n[i - 1] * base);
        rhs_blocks.push_back(family.members[i - 1]);
    }
    if (cons.cocycle) {
        lhs_blocks.push_back(c.d_out_n * base);
        rhs_blocks.push_back(Vec(c.d_out_n.rows()));
    }
    if (cons.in_kernel) {
        if (cons.in_kernel->cols() != c.dim_n)
            throw std::invalid_argument("fill: in_kernel shape mismatch");
        lhs_blocks.push_back(*cons.in_kernel * base);
        rhs_blocks.push_back(Vec(cons.in_kernel->rows()));
    }
    Matrix a = lhs_blocks.front();
    for (std::size_t b = 1; b < lhs_blocks.size(); ++b) a = a.vstack(lhs_blocks[b]);
    Vec rhs;
    for (const auto& r : rhs_blocks) rhs.insert(rhs.end(), r.begin(), r.end());
    auto y = solve_linear(a, rhs);
    if (!y) throw InfeasibleError("Kan fill: no exact solution (arity " + std::to_string(family.n) +
                                  ", degree " + std::to_string(family.degree) + ")");
    FillResult res;
    res.filler = base.apply(*y);
    if (substituted) res.witness = *y;
    // soundness: faces recovered exactly
    for (int i = 1; i <= family.n; ++i)
        if (!(c.delta_n[i - 1].apply(res.filler) == family.members[i - 1]))
            throw PostconditionError("Kan fill: face recovery failed after solve");
    return res;
}

}  // namespace

Vec fill(const KanCarrier& carrier, const FaceFamily& family) {
    auto chk = is_kan_family(carrier, family);
    if (!chk.ok) throw std::invalid_argument("fill: not a Kan family: " + chk.first_violation);
    return solve_fill(carrier, family, FillConstraint{}).filler;
}

FillResult fill_refined(const KanCarrier& carrier, const FaceFamily& family,
                        const FillConstraint& constraint) {
    auto chk = is_kan_family(carrier, family);
    if (!chk.ok) throw std::invalid_argument("fill: not a Kan family: " + chk.first_violation);
    return solve_fill(carrier, family, constraint);
}

std::vector<Vec> fill_equivariant(const KanCarrier& carrier, const LinearFamily& family,
                                  const std::function<Vec(const Perm&, const Vec&)>& act_e,
                                  const FillConstraint* constraint) {
    if (!carrier.act_n) throw std::logic_error("fill_equivariant: carrier carries no action");
    if (family.faces.size() != family.e_dim)
        throw std::invalid_argument("fill_equivariant: one face family per basis vector expected");
    const int n = carrier.arity;
    std::vector<Vec> base_solutions;
    base_solutions.reserve(family.e_dim);
    for (const auto& fam : family.faces) {
        if (constraint)
            base_solutions.push_back(fill_refined(carrier, fam, *constraint).filler);
        else
            base_solutions.push_back(fill(carrier, fam));
    }
    // L0 extended linearly; average over the group
    auto l0 = [&](const Vec& e) {
        Vec out(carrier.dim_n);
        for (std::size_t j = 0; j < family.e_dim; ++j)
            if (!e[j].is_zero()) out = out + e[j] * base_solutions[j];
        return out;
    };
    const auto group = all_perms(static_cast<std::size_t>(n));
    const Rat inv_order(1, static_cast<long>(group.size()));
    std::vector<Vec> averaged(family.e_dim, Vec(carrier.dim_n));
    for (std::size_t j = 0; j < family.e_dim; ++j) {
        Vec e(family.e_dim);
        e[j] = Rat(1);
        Vec acc(carrier.dim_n);
        for (const auto& sigma : group) {
            Vec moved = act_e(sigma.inverse(), e);
            acc = acc + carrier.act_n(sigma, l0(moved));
        }
        averaged[j] = inv_order * acc;
    }
    // postconditions: faces still match, equivariance holds
    for (std::size_t j = 0; j < family.e_dim; ++j)
        for (int i = 1; i <= n; ++i)
            if (!(carrier.delta_n[i - 1].apply(averaged[j]) == family.faces[j].members[i - 1]))
                throw PostconditionError("fill_equivariant: averaging broke a face condition");
    auto l = [&](const Vec& e) {
        Vec out(carrier.dim_n);
        for (std::size_t j = 0; j < family.e_dim; ++j)
            if (!e[j].is_zero()) out = out + e[j] * averaged[j];
        return out;
    };
    for (const auto& sigma : group) {
        for (std::size_t j = 0; j < family.e_dim; ++j) {
            Vec e(family.e_dim);
            e[j] = Rat(1);
            Vec lhs = l(act_e(sigma, e));
            Vec rhs = carrier.act_n(sigma, averaged[j]);
            if (!(lhs == rhs))
                throw PostconditionError("fill_equivariant: equivariance assertion failed");
        }
    }
    return averaged;
}

}  // namespace opmin
