#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "opmin/rational.hpp"

namespace opmin {

using Vec = std::vector<Rat>;

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(const Rat& c, const Vec& v);
bool is_zero(const Vec& v);
Vec zero_vec(std::size_t n);

// Dense matrix over Q, row major.
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<Vec>& rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rat& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const Rat& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    Vec row(std::size_t r) const;
    Vec col(std::size_t c) const;
    void set_row(std::size_t r, const Vec& v);
    void set_col(std::size_t c, const Vec& v);

    Matrix transpose() const;
    Vec apply(const Vec& v) const;  // matrix * column vector
    Matrix operator*(const Matrix& o) const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix operator-() const;
    bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }
    bool is_zero() const;

    // Stacks b below this matrix (same column count).
    Matrix vstack(const Matrix& b) const;
    // Puts b to the right of this matrix (same row count).
    Matrix hstack(const Matrix& b) const;

  private:
    std::size_t rows_, cols_;
    std::vector<Rat> a_;
};

struct RrefResult {
    Matrix r;                    // reduced row echelon form
    std::vector<std::size_t> pivots;  // pivot columns, strictly increasing
    Matrix transform;            // transform * input == r
};

RrefResult rref(const Matrix& m);

std::size_t rank(const Matrix& m);

// Solves a*x = b exactly. Free variables are set to zero after RREF pivoting,
// so the solution is canonical. Returns nullopt when b is not in the image.
std::optional<Vec> solve_linear(const Matrix& a, const Vec& b);

// Inverse of a square invertible matrix; throws std::domain_error otherwise.
Matrix inverse(const Matrix& m);

// A linear subspace of Q^ambient_dim, stored as RREF rows so equal subspaces
// have identical representations.
struct SubspaceBasis {
    std::size_t ambient_dim = 0;
    std::vector<Vec> vectors;  // each of length ambient_dim, jointly in RREF

    std::size_t dim() const { return vectors.size(); }
    static SubspaceBasis from_spanning(const std::vector<Vec>& span, std::size_t ambient_dim);
    static SubspaceBasis full(std::size_t ambient_dim);

    bool contains(const Vec& v) const;
    // Coordinates of v in this basis; nullopt if v is outside the subspace.
    std::optional<Vec> coords(const Vec& v) const;
    Vec from_coords(const Vec& c) const;
    bool contains_subspace(const SubspaceBasis& other) const;
};

// One cohomology group ker(d_out)/im(d_in) with a pinned presentation.
struct CohomologyPresentation {
    SubspaceBasis cocycles;      // Z, subspace of the ambient degree component
    SubspaceBasis coboundaries;  // B, contained in Z
    std::vector<Vec> class_reps; // chosen cocycles, one per class basis element (ambient coords)
    Matrix projection;           // cocycle coords -> class coords
    Matrix section;              // class coords -> cocycle coords

    std::size_t dim() const { return class_reps.size(); }
    // Class coordinates of an ambient cocycle; throws if v is not a cocycle.
    Vec project_ambient(const Vec& v) const;
    // Ambient representative of a class coordinate vector.
    Vec rep_ambient(const Vec& class_coords) const;
};

// d_in: C^{k-1} -> C^k (rows = dim C^k), d_out: C^k -> C^{k+1}.
// Requires d_out * d_in = 0.
CohomologyPresentation cohomology_at_degree(const Matrix& d_in, const Matrix& d_out);

std::pair<SubspaceBasis, SubspaceBasis> kernel_and_image(const Matrix& m);

// A cochain complex in coordinates: finitely many nonzero degrees, absent
// entries are zero.
struct GradedComplex {
    std::map<int, std::size_t> dims;
    std::map<int, Matrix> d;  // d[k] : dims[k] -> dims[k+1]

    std::size_t dim(int k) const {
        auto it = dims.find(k);
        return it == dims.end() ? 0 : it->second;
    }
    Matrix dmat(int k) const {  // zero-filled when absent
        auto it = d.find(k);
        if (it != d.end()) return it->second;
        return Matrix(dim(k + 1), dim(k));
    }
    // Degrees where either the component or a neighbor is nonzero.
    std::vector<int> degrees() const;
    std::map<int, CohomologyPresentation> cohomology() const;
};

// H of a chain map at one degree: columns are the target class coordinates of
// the mapped source representatives. Throws if a representative fails to map
// to a cocycle.
Matrix induced_on_cohomology(const Matrix& chain_map, const CohomologyPresentation& hsrc,
                             const CohomologyPresentation& htgt);

}  // namespace opmin
