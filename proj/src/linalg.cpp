#include "opmin/linalg.hpp"

#include <set>
#include <stdexcept>

namespace opmin {

Vec operator+(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec add: size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec operator-(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec sub: size mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec operator*(const Rat& c, const Vec& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = c * v[i];
    return r;
}

bool is_zero(const Vec& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

Vec zero_vec(std::size_t n) { return Vec(n); }

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Rat(1);
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw std::invalid_argument("from_rows: ragged input");
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

Vec Matrix::row(std::size_t r) const {
    Vec v(cols_);
    for (std::size_t c = 0; c < cols_; ++c) v[c] = at(r, c);
    return v;
}

Vec Matrix::col(std::size_t c) const {
    Vec v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = at(r, c);
    return v;
}

void Matrix::set_row(std::size_t r, const Vec& v) {
    if (v.size() != cols_) throw std::invalid_argument("set_row: size mismatch");
    for (std::size_t c = 0; c < cols_; ++c) at(r, c) = v[c];
}

void Matrix::set_col(std::size_t c, const Vec& v) {
    if (v.size() != rows_) throw std::invalid_argument("set_col: size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) at(r, c) = v[r];
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
    return t;
}

Vec Matrix::apply(const Vec& v) const {
    if (v.size() != cols_) throw std::invalid_argument("Matrix::apply: size mismatch");
    Vec out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        Rat s;
        for (std::size_t c = 0; c < cols_; ++c) {
            if (!at(r, c).is_zero() && !v[c].is_zero()) s += at(r, c) * v[c];
        }
        out[r] = s;
    }
    return out;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("Matrix mul: dim mismatch");
    Matrix out(rows_, o.cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = 0; k < cols_; ++k) {
            if (at(r, k).is_zero()) continue;
            for (std::size_t c = 0; c < o.cols_; ++c) {
                if (o.at(k, c).is_zero()) continue;
                out.at(r, c) += at(r, k) * o.at(k, c);
            }
        }
    return out;
}

Matrix Matrix::operator+(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix add: dim mismatch");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_ * cols_; ++i) out.a_[i] = a_[i] + o.a_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix sub: dim mismatch");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_ * cols_; ++i) out.a_[i] = a_[i] - o.a_[i];
    return out;
}

Matrix Matrix::operator-() const {
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_ * cols_; ++i) out.a_[i] = -a_[i];
    return out;
}

bool Matrix::is_zero() const {
    for (const auto& x : a_)
        if (!x.is_zero()) return false;
    return true;
}

Matrix Matrix::vstack(const Matrix& b) const {
    if (cols_ != b.cols_) throw std::invalid_argument("vstack: column mismatch");
    Matrix out(rows_ + b.rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out.at(r, c) = at(r, c);
    for (std::size_t r = 0; r < b.rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out.at(rows_ + r, c) = b.at(r, c);
    return out;
}

Matrix Matrix::hstack(const Matrix& b) const {
    if (rows_ != b.rows_) throw std::invalid_argument("hstack: row mismatch");
    Matrix out(rows_, cols_ + b.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) out.at(r, c) = at(r, c);
        for (std::size_t c = 0; c < b.cols_; ++c) out.at(r, cols_ + c) = b.at(r, c);
    }
    return out;
}

RrefResult rref(const Matrix& m) {
    RrefResult res;
    res.r = m;
    res.transform = Matrix::identity(m.rows());
    Matrix& r = res.r;
    Matrix& t = res.transform;
    std::size_t lead = 0;
    for (std::size_t col = 0; col < m.cols() && lead < m.rows(); ++col) {
        // first nonzero entry at or below `lead` in this column
        std::size_t piv = lead;
        while (piv < m.rows() && r.at(piv, col).is_zero()) ++piv;
        if (piv == m.rows()) continue;
        if (piv != lead) {
            for (std::size_t c = 0; c < m.cols(); ++c) std::swap(r.at(piv, c), r.at(lead, c));
            for (std::size_t c = 0; c < m.rows(); ++c) std::swap(t.at(piv, c), t.at(lead, c));
        }
        Rat inv = r.at(lead, col).inv();
        for (std::size_t c = 0; c < m.cols(); ++c) r.at(lead, c) *= inv;
        for (std::size_t c = 0; c < m.rows(); ++c) t.at(lead, c) *= inv;
        for (std::size_t row = 0; row < m.rows(); ++row) {
            if (row == lead || r.at(row, col).is_zero()) continue;
            Rat f = r.at(row, col);
            for (std::size_t c = 0; c < m.cols(); ++c) r.at(row, c) -= f * r.at(lead, c);
            for (std::size_t c = 0; c < m.rows(); ++c) t.at(row, c) -= f * t.at(lead, c);
        }
        res.pivots.push_back(col);
        ++lead;
    }
    return res;
}

std::size_t rank(const Matrix& m) { return rref(m).pivots.size(); }

std::optional<Vec> solve_linear(const Matrix& a, const Vec& b) {
    if (b.size() != a.rows()) throw std::invalid_argument("solve_linear: rhs size mismatch");
    Matrix aug = a.hstack(Matrix(a.rows(), 1));
    for (std::size_t r = 0; r < a.rows(); ++r) aug.at(r, a.cols()) = b[r];
    RrefResult rr = rref(aug);
    // inconsistent iff a pivot lands in the rhs column
    for (std::size_t p : rr.pivots)
        if (p == a.cols()) return std::nullopt;
    Vec x(a.cols());
    for (std::size_t i = 0; i < rr.pivots.size(); ++i) x[rr.pivots[i]] = rr.r.at(i, a.cols());
    return x;
}

Matrix inverse(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::domain_error("inverse: not square");
    RrefResult rr = rref(m);
    if (rr.pivots.size() != m.rows()) throw std::domain_error("inverse: singular matrix");
    return rr.transform;
}

SubspaceBasis SubspaceBasis::from_spanning(const std::vector<Vec>& span, std::size_t ambient_dim) {
    Matrix m = Matrix::from_rows(span, ambient_dim);
    RrefResult rr = rref(m);
    SubspaceBasis s;
    s.ambient_dim = ambient_dim;
    for (std::size_t i = 0; i < rr.pivots.size(); ++i) s.vectors.push_back(rr.r.row(i));
    return s;
}

SubspaceBasis SubspaceBasis::full(std::size_t ambient_dim) {
    SubspaceBasis s;
    s.ambient_dim = ambient_dim;
    for (std::size_t i = 0; i < ambient_dim; ++i) {
        Vec v(ambient_dim);
        v[i] = Rat(1);
        s.vectors.push_back(v);
    }
    return s;
}

std::optional<Vec> SubspaceBasis::coords(const Vec& v) const {
    if (v.size() != ambient_dim) throw std::invalid_argument("SubspaceBasis::coords: size mismatch");
    // Rows are in RREF, so coordinates read off at the pivot positions.
    Vec rem = v;
    Vec c(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        // pivot column of row i = first nonzero entry
        std::size_t p = 0;
        while (p < ambient_dim && vectors[i][p].is_zero()) ++p;
        if (p == ambient_dim) continue;
        Rat f = rem[p];  // row has 1 at its pivot
        if (!f.is_zero()) {
            c[i] = f;
            rem = rem - f * vectors[i];
        }
    }
    if (!opmin::is_zero(rem)) return std::nullopt;
    return c;
}

bool SubspaceBasis::contains(const Vec& v) const { return coords(v).has_value(); }

Vec SubspaceBasis::from_coords(const Vec& c) const {
    if (c.size() != vectors.size()) throw std::invalid_argument("SubspaceBasis::from_coords: size mismatch");
    Vec v(ambient_dim);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        if (!c[i].is_zero()) v = v + c[i] * vectors[i];
    return v;
}

bool SubspaceBasis::contains_subspace(const SubspaceBasis& other) const {
    if (other.ambient_dim != ambient_dim) return false;
    for (const auto& v : other.vectors)
        if (!contains(v)) return false;
    return true;
}

std::pair<SubspaceBasis, SubspaceBasis> kernel_and_image(const Matrix& m) {
    RrefResult rr = rref(m);
    // kernel: one generator per free column
    std::vector<Vec> kgens;
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t p : rr.pivots) is_pivot[p] = true;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (is_pivot[c]) continue;
        Vec v(m.cols());
        v[c] = Rat(1);
        for (std::size_t i = 0; i < rr.pivots.size(); ++i) v[rr.pivots[i]] = -rr.r.at(i, c);
        kgens.push_back(v);
    }
    SubspaceBasis kernel = SubspaceBasis::from_spanning(kgens, m.cols());
    // image: row space of the transpose
    std::vector<Vec> cols;
    for (std::size_t c = 0; c < m.cols(); ++c) cols.push_back(m.col(c));
    SubspaceBasis image = SubspaceBasis::from_spanning(cols, m.rows());
    return {kernel, image};
}

Vec CohomologyPresentation::project_ambient(const Vec& v) const {
    auto zc = cocycles.coords(v);
    if (!zc) throw std::invalid_argument("project_ambient: not a cocycle");
    return projection.apply(*zc);
}

Vec CohomologyPresentation::rep_ambient(const Vec& class_coords) const {
    Vec v(cocycles.ambient_dim);
    for (std::size_t i = 0; i < class_reps.size(); ++i)
        if (!class_coords[i].is_zero()) v = v + class_coords[i] * class_reps[i];
    return v;
}

CohomologyPresentation cohomology_at_degree(const Matrix& d_in, const Matrix& d_out) {
    const std::size_t n = d_out.cols();
    if (d_in.rows() != n) throw std::invalid_argument("cohomology_at_degree: chained dims mismatch");
    if (d_in.cols() > 0 && !(d_out * d_in).is_zero())
        throw std::invalid_argument("cohomology_at_degree: d_out * d_in != 0");

    CohomologyPresentation h;
    h.cocycles = kernel_and_image(d_out).first;
    h.coboundaries = kernel_and_image(d_in).second;
    if (!h.cocycles.contains_subspace(h.coboundaries))
        throw std::invalid_argument("cohomology_at_degree: coboundaries not inside cocycles");

    // Representatives: cocycle basis rows that extend the coboundary span,
    // taken in RREF order. Deterministic by construction.
    std::vector<Vec> reps;
    {
        std::vector<Vec> acc = h.coboundaries.vectors;
        SubspaceBasis cur = SubspaceBasis::from_spanning(acc, n);
        for (const auto& z : h.cocycles.vectors) {
            if (!cur.contains(z)) {
                reps.push_back(z);
                acc.push_back(z);
                cur = SubspaceBasis::from_spanning(acc, n);
            }
        }
    }
    h.class_reps = reps;

    // projection: cocycle coords -> class coords.
    // Basis change inside Z: columns are (B basis | reps) expressed in Z coords.
    const std::size_t zdim = h.cocycles.dim();
    const std::size_t hdim = reps.size();
    Matrix basis(zdim, zdim);
    std::size_t cidx = 0;
    for (const auto& b : h.coboundaries.vectors) {
        auto c = h.cocycles.coords(b);
        basis.set_col(cidx++, *c);
    }
    for (const auto& r : reps) {
        auto c = h.cocycles.coords(r);
        basis.set_col(cidx++, *c);
    }
    if (cidx != zdim) throw std::logic_error("cohomology_at_degree: B+reps do not span Z");
    Matrix binv = inverse(basis);
    // last hdim rows of binv give the class coordinates
    h.projection = Matrix(hdim, zdim);
    for (std::size_t i = 0; i < hdim; ++i)
        for (std::size_t j = 0; j < zdim; ++j) h.projection.at(i, j) = binv.at(zdim - hdim + i, j);
    h.section = Matrix(zdim, hdim);
    for (std::size_t i = 0; i < hdim; ++i) h.section.set_col(i, *h.cocycles.coords(reps[i]));
    return h;
}

std::vector<int> GradedComplex::degrees() const {
    std::set<int> degs;
    for (const auto& [k, n] : dims)
        if (n > 0) degs.insert(k);
    return std::vector<int>(degs.begin(), degs.end());
}

std::map<int, CohomologyPresentation> GradedComplex::cohomology() const {
    std::map<int, CohomologyPresentation> h;
    for (int k : degrees()) h.emplace(k, cohomology_at_degree(dmat(k - 1), dmat(k)));
    return h;
}

Matrix induced_on_cohomology(const Matrix& chain_map, const CohomologyPresentation& hsrc,
                             const CohomologyPresentation& htgt) {
    Matrix m(htgt.dim(), hsrc.dim());
    for (std::size_t j = 0; j < hsrc.dim(); ++j) {
        Vec mapped = chain_map.apply(hsrc.class_reps[j]);
        m.set_col(j, htgt.project_ambient(mapped));
    }
    return m;
}

}  // namespace opmin
