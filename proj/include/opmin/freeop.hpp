#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opmin/symmod.hpp"

namespace opmin {

// Decorated rooted tree in canonical form: children of every vertex sorted by
// the minimal leaf label beneath them, leaves labeled bijectively by 1..n.
// A bare leaf (leaf == 1, no kids) is the operad unit; `point` marks the
// formal arity-zero element available in unitary stages.
struct Tree {
    int leaf = 0;            // >0: leaf with this label; 0: internal vertex; -1: point
    std::string gen;         // decoration label, internal vertices only
    std::vector<Tree> kids;  // internal vertices only, size >= 2

    bool is_leaf() const { return leaf > 0; }
    bool is_point() const { return leaf < 0; }
    bool is_internal() const { return leaf == 0; }

    static Tree make_leaf(int label) { return Tree{label, {}, {}}; }
    static Tree make_point() { return Tree{-1, {}, {}}; }
    static Tree make_node(std::string gen, std::vector<Tree> kids) {
        return Tree{0, std::move(gen), std::move(kids)};
    }
};

// Total order: point < internal < leaf; internal vertices by decoration label,
// then children lexicographically; leaves by label.
bool tree_less(const Tree& a, const Tree& b);
bool tree_equal(const Tree& a, const Tree& b);
struct TreeLess {
    bool operator()(const Tree& a, const Tree& b) const { return tree_less(a, b); }
};

int tree_arity(const Tree& t);          // number of leaves
std::size_t tree_vertex_count(const Tree& t);

// Formal Q-linear combination of canonical trees of one arity and degree.
// The zero vector is the empty map.
struct TreeVector {
    int arity = 0;
    int degree = 0;
    std::map<Tree, Rat, TreeLess> terms;

    bool is_zero() const { return terms.empty(); }
    static TreeVector zero(int arity, int degree) { return TreeVector{arity, degree, {}}; }

    TreeVector& operator+=(const TreeVector& o);
    TreeVector& operator-=(const TreeVector& o);
    friend TreeVector operator+(TreeVector a, const TreeVector& b) { a += b; return a; }
    friend TreeVector operator-(TreeVector a, const TreeVector& b) { a -= b; return a; }
    friend TreeVector operator*(const Rat& c, TreeVector v);
    bool operator==(const TreeVector& o) const;
};

TreeVector unit_tree_vector();   // the bare leaf, arity 1, degree 0
TreeVector point_tree_vector();  // the formal point, arity 0, degree 0

struct GenInfo {
    int arity = 0;
    int degree = 0;
};

// A free stage: the free graded operad on generators in arities >= 2 with a
// differential assignment per generator and, in unitary mode, restriction
// assignments per generator and slot. Stages are immutable; extensions build
// new values.
class Stage {
  public:
    static Stage empty(bool unitary);

    // Rebuilds a stage from serialized data. Performs structural checks only
    // (label uniqueness, arity and slot counts); the mathematical invariants
    // are re-established by verification, not assumed.
    static Stage from_raw_parts(bool unitary,
                                std::map<int, std::pair<GradedBasis, SigmaAction>> gens,
                                std::map<std::string, TreeVector> diff,
                                std::map<std::string, std::vector<TreeVector>> restr);

    bool unitary() const { return unitary_; }
    int max_gen_arity() const { return gens_.empty() ? 1 : gens_.rbegin()->first; }

    bool has_arity(int n) const { return gens_.count(n) > 0; }
    const GradedBasis& gen_basis(int n) const;
    const SigmaAction& gen_action(int n) const;
    const std::map<int, std::pair<GradedBasis, SigmaAction>>& generators() const { return gens_; }

    bool has_gen(const std::string& label) const { return table_.count(label) > 0; }
    const GenInfo& info(const std::string& label) const;
    const TreeVector& diff_of(const std::string& label) const;
    // delta_i of a generator, i in 1..arity; unitary stages only.
    const TreeVector& restriction_of(const std::string& label, int i) const;

    // For use by the extension constructors below.
    friend Stage make_principal_extension(const Stage& stage, int n, const GradedBasis& e_basis,
                                          const SigmaAction& e_action,
                                          const std::map<std::string, TreeVector>& d);
    friend Stage make_unitary_principal_extension(
        const Stage& stage, int n, const GradedBasis& e_basis, const SigmaAction& e_action,
        const std::map<std::string, TreeVector>& d,
        const std::map<std::string, std::vector<TreeVector>>& restrictions);

  private:
    bool unitary_ = false;
    std::map<int, std::pair<GradedBasis, SigmaAction>> gens_;
    std::map<std::string, GenInfo> table_;
    std::map<std::string, TreeVector> diff_;
    std::map<std::string, std::vector<TreeVector>> restr_;
};

int tree_degree(const Tree& t, const Stage& stage);

// Rewrites a structurally valid tree (children in arbitrary order) into the
// canonical basis: sorts children by minimal leaf, acts on decorations by the
// induced slot permutations, and applies the Koszul sign of the induced
// reordering of the decoration word (DFS order of the input is the reference
// word). The result is a combination because slot actions mix generators.
TreeVector canonicalize_raw(const Tree& raw, const Stage& stage);

// Grafts b into leaf slot i of a (1-based), relabels leaves, canonicalizes.
// The reference decoration word of a single graft is (word of a, word of b).
TreeVector partial_compose(const Stage& stage, const TreeVector& a, int i, const TreeVector& b);

// Leaf relabeling l -> sigma(l) followed by canonicalization.
TreeVector act_on_tree_vector(const Stage& stage, const Perm& sigma, const TreeVector& v);

// Leibniz extension of the generator differentials: at each vertex, the
// decoration is replaced in place by its differential value, with prefix sign
// (-1)^(sum of degrees of decorations standing earlier in the word).
TreeVector apply_differential(const Stage& stage, const TreeVector& v);

// delta_i, realized by absorbing the unit at leaf i into the parent vertex:
// the parent decoration g with leaf i in its slot j is replaced by the
// assigned restriction value delta_j(g) and substituted through.
TreeVector apply_restriction(const Stage& stage, int i, const TreeVector& v);

// All canonical basis trees of the stage at one arity, grouped by degree
// (sorted within each degree). Arity 0 holds the point in unitary stages,
// arity 1 the bare leaf.
std::map<int, std::vector<Tree>> enumerate_basis(const Stage& stage, int n);

Stage make_principal_extension(const Stage& stage, int n, const GradedBasis& e_basis,
                               const SigmaAction& e_action,
                               const std::map<std::string, TreeVector>& d);

Stage make_unitary_principal_extension(
    const Stage& stage, int n, const GradedBasis& e_basis, const SigmaAction& e_action,
    const std::map<std::string, TreeVector>& d,
    const std::map<std::string, std::vector<TreeVector>>& restrictions);

// Coordinates with respect to an enumerated basis slice.
Vec tree_vector_coords(const TreeVector& v, const std::vector<Tree>& basis);
TreeVector tree_vector_from_coords(const Vec& coords, const std::vector<Tree>& basis, int arity,
                                   int degree);

std::string tree_to_string(const Tree& t);
std::string tree_vector_to_string(const TreeVector& v);

}  // namespace opmin
