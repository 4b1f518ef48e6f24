#include "opmin/freeop.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace opmin {

namespace {

int cmp_tree(const Tree& a, const Tree& b) {
    auto rank = [](const Tree& t) { return t.is_point() ? 0 : (t.is_internal() ? 1 : 2); };
    if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
    if (a.is_point()) return 0;
    if (a.is_leaf()) return a.leaf < b.leaf ? -1 : (a.leaf > b.leaf ? 1 : 0);
    if (a.gen != b.gen) return a.gen < b.gen ? -1 : 1;
    if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.kids.size(); ++i) {
        int c = cmp_tree(a.kids[i], b.kids[i]);
        if (c != 0) return c;
    }
    return 0;
}

}  // namespace

bool tree_less(const Tree& a, const Tree& b) { return cmp_tree(a, b) < 0; }
bool tree_equal(const Tree& a, const Tree& b) { return cmp_tree(a, b) == 0; }

int tree_arity(const Tree& t) {
    if (t.is_point()) return 0;
    if (t.is_leaf()) return 1;
    int n = 0;
    for (const auto& k : t.kids) n += tree_arity(k);
    return n;
}

std::size_t tree_vertex_count(const Tree& t) {
    if (!t.is_internal()) return 0;
    std::size_t n = 1;
    for (const auto& k : t.kids) n += tree_vertex_count(k);
    return n;
}

int tree_degree(const Tree& t, const Stage& stage) {
    if (!t.is_internal()) return 0;
    int d = stage.info(t.gen).degree;
    for (const auto& k : t.kids) d += tree_degree(k, stage);
    return d;
}

TreeVector& TreeVector::operator+=(const TreeVector& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) {
        *this = o;
        return *this;
    }
    if (arity != o.arity) throw std::invalid_argument("TreeVector add: arity mismatch");
    if (degree != o.degree) throw std::invalid_argument("TreeVector add: degree mismatch");
    for (const auto& [t, c] : o.terms) {
        auto it = terms.find(t);
        if (it == terms.end()) {
            terms.emplace(t, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) terms.erase(it);
        }
    }
    return *this;
}

TreeVector& TreeVector::operator-=(const TreeVector& o) {
    *this += Rat(-1) * o;
    return *this;
}

TreeVector operator*(const Rat& c, TreeVector v) {
    if (c.is_zero()) {
        v.terms.clear();
        return v;
    }
    for (auto& [t, x] : v.terms) x *= c;
    return v;
}

bool TreeVector::operator==(const TreeVector& o) const {
    if (is_zero() && o.is_zero()) return true;
    if (is_zero() != o.is_zero()) return false;
    if (arity != o.arity || degree != o.degree) return false;
    if (terms.size() != o.terms.size()) return false;
    auto it = terms.begin();
    auto jt = o.terms.begin();
    for (; it != terms.end(); ++it, ++jt) {
        if (!tree_equal(it->first, jt->first) || it->second != jt->second) return false;
    }
    return true;
}

TreeVector unit_tree_vector() {
    TreeVector v{1, 0, {}};
    v.terms.emplace(Tree::make_leaf(1), Rat(1));
    return v;
}

TreeVector point_tree_vector() {
    TreeVector v{0, 0, {}};
    v.terms.emplace(Tree::make_point(), Rat(1));
    return v;
}

Stage Stage::empty(bool unitary) {
    Stage s;
    s.unitary_ = unitary;
    return s;
}

Stage Stage::from_raw_parts(bool unitary,
                            std::map<int, std::pair<GradedBasis, SigmaAction>> gens,
                            std::map<std::string, TreeVector> diff,
                            std::map<std::string, std::vector<TreeVector>> restr) {
    Stage s;
    s.unitary_ = unitary;
    for (const auto& [n, gs] : gens) {
        if (n < 2) throw std::invalid_argument("Stage: generators must have arity >= 2");
        if (gs.first.arity != n) throw std::invalid_argument("Stage: basis arity mismatch");
        for (const auto& [deg, ls] : gs.first.degrees) {
            for (const auto& l : ls) {
                if (s.table_.count(l))
                    throw std::invalid_argument("Stage: duplicate generator label '" + l + "'");
                s.table_[l] = GenInfo{n, deg};
                if (!diff.count(l))
                    throw std::invalid_argument("Stage: missing differential for '" + l + "'");
                if (unitary &&
                    (!restr.count(l) || static_cast<int>(restr.at(l).size()) != n))
                    throw std::invalid_argument("Stage: missing restrictions for '" + l + "'");
            }
        }
    }
    s.gens_ = std::move(gens);
    s.diff_ = std::move(diff);
    if (unitary) s.restr_ = std::move(restr);
    return s;
}

const GradedBasis& Stage::gen_basis(int n) const {
    auto it = gens_.find(n);
    if (it == gens_.end()) throw std::invalid_argument("Stage: no generators in arity " + std::to_string(n));
    return it->second.first;
}

const SigmaAction& Stage::gen_action(int n) const {
    auto it = gens_.find(n);
    if (it == gens_.end()) throw std::invalid_argument("Stage: no generators in arity " + std::to_string(n));
    return it->second.second;
}

const GenInfo& Stage::info(const std::string& label) const {
    auto it = table_.find(label);
    if (it == table_.end()) throw std::invalid_argument("Stage: unknown generator '" + label + "'");
    return it->second;
}

const TreeVector& Stage::diff_of(const std::string& label) const {
    auto it = diff_.find(label);
    if (it == diff_.end()) throw std::invalid_argument("Stage: no differential for '" + label + "'");
    return it->second;
}

const TreeVector& Stage::restriction_of(const std::string& label, int i) const {
    if (!unitary_) throw std::logic_error("Stage: restrictions only exist on unitary stages");
    auto it = restr_.find(label);
    if (it == restr_.end()) throw std::invalid_argument("Stage: no restrictions for '" + label + "'");
    if (i < 1 || i > static_cast<int>(it->second.size()))
        throw std::invalid_argument("Stage: restriction slot out of range");
    return it->second[i - 1];
}

namespace {

// Working representation during canonicalization: every internal vertex hangs
// on to its word tag (position of its decoration in the reference word).
struct WorkNode {
    int leaf = 0;  // >0 leaf label, 0 internal
    std::string gen;
    int deg = 0;
    int tag = 0;
    std::vector<WorkNode> kids;
    int minleaf = 0;
    std::vector<int> slot_perm;  // identity when empty; slot_perm[j-1] = sigma(j) to act on decoration
};

WorkNode build_work(const Tree& t, const Stage& stage, int& next_tag) {
    WorkNode w;
    if (t.is_point()) throw std::invalid_argument("freeop: point cannot occur inside a tree expression");
    if (t.is_leaf()) {
        w.leaf = t.leaf;
        return w;
    }
    const GenInfo& gi = stage.info(t.gen);
    if (gi.arity != static_cast<int>(t.kids.size()))
        throw std::invalid_argument("freeop: decoration arity mismatch for '" + t.gen + "'");
    if (gi.arity < 2) throw std::invalid_argument("freeop: generators must have arity >= 2");
    w.gen = t.gen;
    w.deg = gi.degree;
    w.tag = next_tag++;
    w.kids.reserve(t.kids.size());
    for (const auto& k : t.kids) w.kids.push_back(build_work(k, stage, next_tag));
    return w;
}

void sort_work(WorkNode& n) {
    if (n.leaf > 0) {
        n.minleaf = n.leaf;
        return;
    }
    for (auto& k : n.kids) sort_work(k);
    const std::size_t kk = n.kids.size();
    std::vector<std::size_t> idx(kk);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return n.kids[a].minleaf < n.kids[b].minleaf; });
    bool trivial = true;
    for (std::size_t j = 0; j < kk; ++j)
        if (idx[j] != j) trivial = false;
    if (!trivial) {
        std::vector<WorkNode> sorted;
        sorted.reserve(kk);
        for (std::size_t j = 0; j < kk; ++j) sorted.push_back(std::move(n.kids[idx[j]]));
        n.kids = std::move(sorted);
        // new position j holds old slot idx[j]+1; decoration is acted by the inverse
        std::vector<int> p(kk), sigma(kk);
        for (std::size_t j = 0; j < kk; ++j) p[j] = static_cast<int>(idx[j]) + 1;
        for (std::size_t j = 0; j < kk; ++j) sigma[p[j] - 1] = static_cast<int>(j) + 1;
        n.slot_perm = sigma;
    }
    n.minleaf = n.kids.front().minleaf;
}

void collect_word(const WorkNode& n, std::vector<std::pair<int, int>>& word) {
    if (n.leaf > 0) return;
    word.emplace_back(n.tag, n.deg);
    for (const auto& k : n.kids) collect_word(k, word);
}

std::vector<std::pair<Tree, Rat>> expand_work(const WorkNode& n, const Stage& stage) {
    if (n.leaf > 0) return {{Tree::make_leaf(n.leaf), Rat(1)}};
    std::vector<std::vector<std::pair<Tree, Rat>>> kid_exp;
    kid_exp.reserve(n.kids.size());
    for (const auto& k : n.kids) kid_exp.push_back(expand_work(k, stage));

    std::vector<std::pair<std::string, Rat>> dec_options;
    if (n.slot_perm.empty()) {
        dec_options.emplace_back(n.gen, Rat(1));
    } else {
        const int k = static_cast<int>(n.kids.size());
        const GradedBasis& basis = stage.gen_basis(k);
        const SigmaAction& action = stage.gen_action(k);
        Matrix m = action.matrix_of(basis, Perm(n.slot_perm), n.deg);
        int idx = basis.index_of(n.deg, n.gen);
        if (idx < 0) throw std::logic_error("freeop: generator missing from its own basis");
        const auto& labels = basis.degrees.at(n.deg);
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (!m.at(r, idx).is_zero()) dec_options.emplace_back(labels[r], m.at(r, idx));
    }

    std::vector<std::pair<Tree, Rat>> out;
    std::vector<std::size_t> pick(kid_exp.size(), 0);
    while (true) {
        Rat c(1);
        std::vector<Tree> kids;
        kids.reserve(kid_exp.size());
        for (std::size_t j = 0; j < kid_exp.size(); ++j) {
            kids.push_back(kid_exp[j][pick[j]].first);
            c *= kid_exp[j][pick[j]].second;
        }
        for (const auto& [label, dc] : dec_options)
            out.emplace_back(Tree::make_node(label, kids), c * dc);
        // odometer
        std::size_t j = 0;
        for (; j < pick.size(); ++j) {
            if (++pick[j] < kid_exp[j].size()) break;
            pick[j] = 0;
        }
        if (j == pick.size()) break;
    }
    return out;
}

TreeVector canonicalize_work(WorkNode root, const Stage& stage, int arity, int degree, const Rat& coeff) {
    sort_work(root);
    std::vector<std::pair<int, int>> word;
    collect_word(root, word);
    int flips = 0;
    for (std::size_t u = 0; u < word.size(); ++u)
        for (std::size_t w = u + 1; w < word.size(); ++w)
            if (word[u].first > word[w].first && (word[u].second & 1) && (word[w].second & 1)) ++flips;
    Rat sign((flips & 1) ? -1 : 1);

    TreeVector out = TreeVector::zero(arity, degree);
    if (coeff.is_zero()) return out;
    for (auto& [t, c] : expand_work(root, stage)) {
        Rat total = coeff * sign * c;
        if (total.is_zero()) continue;
        auto it = out.terms.find(t);
        if (it == out.terms.end()) {
            out.terms.emplace(std::move(t), total);
        } else {
            it->second += total;
            if (it->second.is_zero()) out.terms.erase(it);
        }
    }
    return out;
}

void check_leaf_bijection(const Tree& t, int arity) {
    std::set<int> leaves;
    std::function<void(const Tree&)> walk = [&](const Tree& n) {
        if (n.is_leaf()) {
            if (!leaves.insert(n.leaf).second)
                throw std::invalid_argument("freeop: duplicate leaf label " + std::to_string(n.leaf));
            return;
        }
        for (const auto& k : n.kids) walk(k);
    };
    walk(t);
    if (static_cast<int>(leaves.size()) != arity)
        throw std::invalid_argument("freeop: leaf count mismatch");
    for (int i = 1; i <= arity; ++i)
        if (!leaves.count(i)) throw std::invalid_argument("freeop: leaf labels not 1..n");
}

void relabel_leaves(Tree& t, const std::function<int(int)>& f) {
    if (t.is_leaf()) {
        t.leaf = f(t.leaf);
        return;
    }
    for (auto& k : t.kids) relabel_leaves(k, f);
}

void relabel_work_leaves(WorkNode& n, const std::function<int(int)>& f) {
    if (n.leaf > 0) {
        n.leaf = f(n.leaf);
        return;
    }
    for (auto& k : n.kids) relabel_work_leaves(k, f);
}

// Replaces the unique leaf labeled `slot` by `graft` (already tagged/shifted).
bool graft_at_leaf(WorkNode& n, int slot, WorkNode&& graft) {
    if (n.leaf == slot) {
        n = std::move(graft);
        return true;
    }
    if (n.leaf > 0) return false;
    for (auto& k : n.kids)
        if (graft_at_leaf(k, slot, std::move(graft))) return true;
    return false;
}

int count_work_vertices(const WorkNode& n) {
    if (n.leaf > 0) return 0;
    int c = 1;
    for (const auto& k : n.kids) c += count_work_vertices(k);
    return c;
}

// Instantiates a canonical replacement tree S at word position q: S's own
// vertices receive tags q, q+1, ... in S's DFS order, S's leaf j is replaced
// by kid_map[j-1].
WorkNode instantiate(const Tree& s, const Stage& stage, int& next_tag,
                     const std::vector<WorkNode>& kid_map) {
    if (s.is_point()) throw std::invalid_argument("freeop: point in substitution value");
    if (s.is_leaf()) {
        if (s.leaf < 1 || s.leaf > static_cast<int>(kid_map.size()))
            throw std::logic_error("freeop: substitution leaf out of range");
        return kid_map[s.leaf - 1];
    }
    WorkNode w;
    w.gen = s.gen;
    w.deg = stage.info(s.gen).degree;
    w.tag = next_tag++;
    w.kids.reserve(s.kids.size());
    for (const auto& k : s.kids) w.kids.push_back(instantiate(k, stage, next_tag, kid_map));
    return w;
}

void shift_tags_above(WorkNode& n, int threshold, int delta) {
    if (n.leaf > 0) return;
    if (n.tag > threshold) n.tag += delta;
    for (auto& k : n.kids) shift_tags_above(k, threshold, delta);
}

// Replaces the internal vertex with tag `target` by S; S's vertices take the
// word positions target..target+|S|-1 and every later tag shifts up. With
// drop_slot > 0 the child in that slot is removed first (restriction case).
void substitute_vertex_global(WorkNode& root, int target, const Tree& s, const Stage& stage,
                              int drop_slot) {
    // First shift all tags > target (the subtree being replaced carries only
    // tags >= target for itself; its kids keep their shifted tags through
    // kid_map), then instantiate at the target with tags target..target+|s|-1.
    const int svc = static_cast<int>(tree_vertex_count(s));
    std::function<bool(WorkNode&)> walk = [&](WorkNode& n) -> bool {
        if (n.leaf > 0) return false;
        if (n.tag == target) {
            std::vector<WorkNode> kid_map;
            kid_map.reserve(n.kids.size());
            for (std::size_t j = 0; j < n.kids.size(); ++j) {
                if (static_cast<int>(j) + 1 == drop_slot) continue;
                kid_map.push_back(std::move(n.kids[j]));
            }
            int next_tag = target;
            n = instantiate(s, stage, next_tag, kid_map);
            return true;
        }
        for (auto& k : n.kids)
            if (walk(k)) return true;
        return false;
    };
    shift_tags_above(root, target, svc - 1);
    if (!walk(root)) throw std::logic_error("freeop: substitution target vertex not found");
}

WorkNode build_tagged(const Tree& t, const Stage& stage, int first_tag) {
    int next = first_tag;
    return build_work(t, stage, next);
}

}  // namespace

TreeVector canonicalize_raw(const Tree& raw, const Stage& stage) {
    if (raw.is_point()) return point_tree_vector();
    const int n = tree_arity(raw);
    check_leaf_bijection(raw, n);
    WorkNode w = build_tagged(raw, stage, 1);
    return canonicalize_work(std::move(w), stage, n, tree_degree(raw, stage), Rat(1));
}

TreeVector partial_compose(const Stage& stage, const TreeVector& a, int i, const TreeVector& b) {
    if (a.is_zero() || b.is_zero())
        return TreeVector::zero(a.arity + b.arity - 1, a.degree + b.degree);
    if (i < 1 || i > a.arity) throw std::invalid_argument("partial_compose: slot out of range");
    if (b.arity < 1) throw std::invalid_argument("partial_compose: cannot graft an arity-0 argument");
    const int na = a.arity, nb = b.arity;
    TreeVector out = TreeVector::zero(na + nb - 1, a.degree + b.degree);
    for (const auto& [ta, ca] : a.terms) {
        for (const auto& [tb, cb] : b.terms) {
            Tree sa = ta;
            relabel_leaves(sa, [&](int l) { return l > i ? l + nb - 1 : l; });
            Tree sb = tb;
            relabel_leaves(sb, [&](int l) { return l + i - 1; });
            WorkNode wa = build_tagged(sa, stage, 1);
            const int ra = count_work_vertices(wa);
            WorkNode wb = build_tagged(sb, stage, ra + 1);
            if (!graft_at_leaf(wa, i, std::move(wb)))
                throw std::logic_error("partial_compose: graft leaf not found");
            out += canonicalize_work(std::move(wa), stage, na + nb - 1, a.degree + b.degree, ca * cb);
        }
    }
    return out;
}

TreeVector act_on_tree_vector(const Stage& stage, const Perm& sigma, const TreeVector& v) {
    if (v.is_zero()) return v;
    if (static_cast<int>(sigma.size()) != v.arity)
        throw std::invalid_argument("act_on_tree_vector: arity mismatch");
    if (sigma.is_identity()) return v;
    TreeVector out = TreeVector::zero(v.arity, v.degree);
    for (const auto& [t, c] : v.terms) {
        if (!t.is_internal()) {  // bare leaf or point: invariant
            TreeVector single = TreeVector::zero(v.arity, v.degree);
            single.terms.emplace(t, c);
            out += single;
            continue;
        }
        Tree s = t;
        relabel_leaves(s, [&](int l) { return sigma(l); });
        WorkNode w = build_tagged(s, stage, 1);
        out += canonicalize_work(std::move(w), stage, v.arity, v.degree, c);
    }
    return out;
}

TreeVector apply_differential(const Stage& stage, const TreeVector& v) {
    TreeVector out = TreeVector::zero(v.arity, v.degree + 1);
    for (const auto& [t, c] : v.terms) {
        if (!t.is_internal()) continue;  // unit and point are cocycles
        // decorations in word order
        std::vector<std::pair<std::string, int>> word;  // (gen, degree)
        std::function<void(const Tree&)> walk = [&](const Tree& n) {
            if (n.is_leaf()) return;
            word.emplace_back(n.gen, stage.info(n.gen).degree);
            for (const auto& k : n.kids) walk(k);
        };
        walk(t);
        int prefix = 0;
        for (std::size_t q = 0; q < word.size(); ++q) {
            const TreeVector& dval = stage.diff_of(word[q].first);
            if (!dval.is_zero()) {
                Rat sign((prefix & 1) ? -1 : 1);
                for (const auto& [s, cs] : dval.terms) {
                    WorkNode w = build_tagged(t, stage, 1);
                    substitute_vertex_global(w, static_cast<int>(q) + 1, s, stage, 0);
                    out += canonicalize_work(std::move(w), stage, v.arity, v.degree + 1,
                                             c * cs * sign);
                }
            }
            prefix += word[q].second;
        }
    }
    return out;
}

TreeVector apply_restriction(const Stage& stage, int i, const TreeVector& v) {
    if (!stage.unitary()) throw std::logic_error("apply_restriction: stage is not unitary");
    if (v.arity < 1) throw std::invalid_argument("apply_restriction: arity-0 input");
    if (i < 1 || i > v.arity) throw std::invalid_argument("apply_restriction: slot out of range");
    TreeVector out = TreeVector::zero(v.arity - 1, v.degree);
    for (const auto& [t, c] : v.terms) {
        if (t.is_leaf()) {  // bare leaf: unit absorbs into the point
            TreeVector p = point_tree_vector();
            out += c * p;
            continue;
        }
        // locate the parent vertex of leaf i and the slot holding it
        int target_tag = 0, slot = 0, k_arity = 0;
        std::string parent_gen;
        int tagc = 0;
        std::function<bool(const Tree&)> find = [&](const Tree& n) -> bool {
            if (n.is_leaf()) return false;
            int mytag = ++tagc;
            for (std::size_t j = 0; j < n.kids.size(); ++j) {
                if (n.kids[j].is_leaf() && n.kids[j].leaf == i) {
                    target_tag = mytag;
                    slot = static_cast<int>(j) + 1;
                    k_arity = static_cast<int>(n.kids.size());
                    parent_gen = n.gen;
                    return true;
                }
            }
            for (const auto& kid : n.kids)
                if (find(kid)) return true;
            return false;
        };
        if (!find(t)) throw std::logic_error("apply_restriction: leaf not found");
        const TreeVector& rv = stage.restriction_of(parent_gen, slot);
        if (rv.is_zero()) continue;
        for (const auto& [s, cs] : rv.terms) {
            if (s.is_point()) throw std::logic_error("apply_restriction: arity-0 restriction value");
            WorkNode w = build_tagged(t, stage, 1);
            substitute_vertex_global(w, target_tag, s, stage, slot);
            relabel_work_leaves(w, [&](int l) { return l > i ? l - 1 : l; });
            if (w.leaf != 0) {
                // tree collapsed to the bare unit: binary root absorbed
                TreeVector single = TreeVector::zero(v.arity - 1, v.degree);
                single.terms.emplace(Tree::make_leaf(w.leaf), c * cs);
                out += single;
                continue;
            }
            out += canonicalize_work(std::move(w), stage, v.arity - 1, v.degree, c * cs);
        }
    }
    return out;
}

namespace {

// ordered-by-minimum set partitions of `labels` (ascending) into exactly k blocks
void partitions_rec(const std::vector<int>& labels, std::size_t idx, std::size_t k,
                    std::vector<std::vector<int>>& blocks,
                    std::vector<std::vector<std::vector<int>>>& out) {
    if (idx == labels.size()) {
        if (blocks.size() == k) out.push_back(blocks);
        return;
    }
    // prune: remaining elements must be able to fill up to k blocks
    if (blocks.size() > k) return;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        blocks[bi].push_back(labels[idx]);
        partitions_rec(labels, idx + 1, k, blocks, out);
        blocks[bi].pop_back();
    }
    if (blocks.size() < k) {
        blocks.push_back({labels[idx]});
        partitions_rec(labels, idx + 1, k, blocks, out);
        blocks.pop_back();
    }
}

std::vector<std::vector<std::vector<int>>> set_partitions(const std::vector<int>& labels,
                                                          std::size_t k) {
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<std::vector<int>> blocks;
    partitions_rec(labels, 0, k, blocks, out);
    return out;
}

void trees_on(const std::vector<int>& labels, const Stage& stage,
              std::map<std::vector<int>, std::vector<Tree>>& memo);

const std::vector<Tree>& trees_on_memo(const std::vector<int>& labels, const Stage& stage,
                                       std::map<std::vector<int>, std::vector<Tree>>& memo) {
    auto it = memo.find(labels);
    if (it == memo.end()) {
        trees_on(labels, stage, memo);
        it = memo.find(labels);
    }
    return it->second;
}

void trees_on(const std::vector<int>& labels, const Stage& stage,
              std::map<std::vector<int>, std::vector<Tree>>& memo) {
    std::vector<Tree> out;
    if (labels.size() == 1) {
        out.push_back(Tree::make_leaf(labels[0]));
        memo[labels] = std::move(out);
        return;
    }
    for (int k = 2; k <= static_cast<int>(labels.size()); ++k) {
        if (!stage.has_arity(k)) continue;
        const GradedBasis& basis = stage.gen_basis(k);
        for (const auto& part : set_partitions(labels, static_cast<std::size_t>(k))) {
            // cartesian product over block subtree choices
            std::vector<const std::vector<Tree>*> choices;
            bool any_empty = false;
            for (const auto& block : part) {
                const auto& sub = trees_on_memo(block, stage, memo);
                if (sub.empty()) {
                    any_empty = true;
                    break;
                }
                choices.push_back(&sub);
            }
            if (any_empty) continue;
            std::vector<std::size_t> pick(choices.size(), 0);
            while (true) {
                std::vector<Tree> kids;
                kids.reserve(choices.size());
                for (std::size_t j = 0; j < choices.size(); ++j) kids.push_back((*choices[j])[pick[j]]);
                for (const auto& [deg, gl] : basis.degrees)
                    for (const auto& g : gl) out.push_back(Tree::make_node(g, kids));
                std::size_t j = 0;
                for (; j < pick.size(); ++j) {
                    if (++pick[j] < choices[j]->size()) break;
                    pick[j] = 0;
                }
                if (j == pick.size()) break;
            }
        }
    }
    memo[labels] = std::move(out);
}

}  // namespace

std::map<int, std::vector<Tree>> enumerate_basis(const Stage& stage, int n) {
    std::map<int, std::vector<Tree>> out;
    if (n == 0) {
        if (stage.unitary()) out[0].push_back(Tree::make_point());
        return out;
    }
    if (n == 1) {
        out[0].push_back(Tree::make_leaf(1));
        return out;
    }
    std::vector<int> labels(n);
    std::iota(labels.begin(), labels.end(), 1);
    std::map<std::vector<int>, std::vector<Tree>> memo;
    for (const auto& t : trees_on_memo(labels, stage, memo)) {
        if (!t.is_internal()) continue;  // skip the bare leaf at n == 1 (not reached)
        out[tree_degree(t, stage)].push_back(t);
    }
    for (auto& [deg, v] : out) std::sort(v.begin(), v.end(), tree_less);
    return out;
}

namespace {

void validate_extension_inputs(const Stage& stage, int n, const GradedBasis& e_basis,
                               const SigmaAction& e_action,
                               const std::map<std::string, TreeVector>& d) {
    if (n < 2) throw std::invalid_argument("principal extension: arity must be >= 2");
    if (stage.has_arity(n))
        throw std::invalid_argument("principal extension: arity " + std::to_string(n) +
                                    " already attached");
    if (e_basis.arity != n) throw std::invalid_argument("principal extension: basis arity mismatch");
    if (!e_basis.labels_unique())
        throw std::invalid_argument("principal extension: duplicate generator labels");
    for (const auto& [deg, ls] : e_basis.degrees)
        for (const auto& l : ls)
            if (stage.has_gen(l))
                throw std::invalid_argument("principal extension: label '" + l + "' already in use");
    auto rep = validate_sigma_module(e_basis, e_action);
    if (!rep.ok())
        throw std::invalid_argument("principal extension: invalid sigma action: " +
                                    rep.violations.front());
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (const auto& l : ls) {
            auto it = d.find(l);
            if (it == d.end())
                throw std::invalid_argument("principal extension: no differential for '" + l + "'");
            const TreeVector& dv = it->second;
            if (dv.is_zero()) continue;
            if (dv.arity != n)
                throw std::invalid_argument("principal extension: d(" + l + ") has wrong arity");
            if (dv.degree != deg + 1)
                throw std::invalid_argument("principal extension: d(" + l + ") must raise degree by 1");
            for (const auto& [t, c] : dv.terms) {
                if (tree_vertex_count(t) < 2)
                    throw std::invalid_argument("principal extension: d(" + l +
                                                ") is not decomposable");
                std::function<void(const Tree&)> walk = [&](const Tree& node) {
                    if (node.is_leaf()) return;
                    if (!stage.has_gen(node.gen))
                        throw std::invalid_argument("principal extension: d(" + l +
                                                    ") uses unknown generator '" + node.gen + "'");
                    for (const auto& kd : node.kids) walk(kd);
                };
                walk(t);
            }
            if (!apply_differential(stage, dv).is_zero())
                throw std::invalid_argument("principal extension: d(" + l + ") is not a cocycle");
        }
    }
}

void check_d_equivariance(const Stage& extended, int n, const GradedBasis& e_basis,
                          const SigmaAction& e_action) {
    // d(sigma . e) == sigma . d(e) for adjacent transpositions
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (int t = 1; t <= n - 1; ++t) {
            Perm s = Perm::transposition(static_cast<std::size_t>(n), t);
            const Matrix& m = e_action.transposition(t, deg);
            for (std::size_t j = 0; j < ls.size(); ++j) {
                TreeVector lhs = TreeVector::zero(n, deg + 1);
                for (std::size_t r = 0; r < ls.size(); ++r)
                    if (!m.at(r, j).is_zero()) lhs += m.at(r, j) * extended.diff_of(ls[r]);
                TreeVector rhs = act_on_tree_vector(extended, s, extended.diff_of(ls[j]));
                if (!(lhs == rhs))
                    throw std::invalid_argument(
                        "principal extension: differential is not equivariant at '" + ls[j] + "'");
            }
        }
    }
}

}  // namespace

Stage make_principal_extension(const Stage& stage, int n, const GradedBasis& e_basis,
                               const SigmaAction& e_action,
                               const std::map<std::string, TreeVector>& d) {
    validate_extension_inputs(stage, n, e_basis, e_action, d);
    Stage out = stage;
    if (e_basis.total_dim() == 0) return out;
    out.gens_[n] = {e_basis, e_action};
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (const auto& l : ls) {
            out.table_[l] = GenInfo{n, deg};
            TreeVector dv = d.at(l);
            if (dv.is_zero()) dv = TreeVector::zero(n, deg + 1);
            out.diff_[l] = dv;
            if (out.unitary_) out.restr_[l] = std::vector<TreeVector>(n, TreeVector::zero(n - 1, deg));
        }
    }
    check_d_equivariance(out, n, e_basis, e_action);
    return out;
}

Stage make_unitary_principal_extension(
    const Stage& stage, int n, const GradedBasis& e_basis, const SigmaAction& e_action,
    const std::map<std::string, TreeVector>& d,
    const std::map<std::string, std::vector<TreeVector>>& restrictions) {
    if (!stage.unitary())
        throw std::logic_error("unitary principal extension over a non-unitary stage");
    validate_extension_inputs(stage, n, e_basis, e_action, d);
    Stage out = stage;
    if (e_basis.total_dim() == 0) return out;
    out.gens_[n] = {e_basis, e_action};
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (const auto& l : ls) {
            out.table_[l] = GenInfo{n, deg};
            TreeVector dv = d.at(l);
            if (dv.is_zero()) dv = TreeVector::zero(n, deg + 1);
            out.diff_[l] = dv;
            auto it = restrictions.find(l);
            if (it == restrictions.end() || static_cast<int>(it->second.size()) != n)
                throw std::invalid_argument("unitary extension: need " + std::to_string(n) +
                                            " restriction values for '" + l + "'");
            out.restr_[l] = it->second;
        }
    }

    // compatibility equations, checked against the previous stage
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (const auto& l : ls) {
            const auto& rv = out.restr_.at(l);
            for (int i = 1; i <= n; ++i) {
                const TreeVector& ri = rv[i - 1];
                if (!ri.is_zero() && (ri.arity != n - 1 || ri.degree != deg))
                    throw std::invalid_argument("unitary extension: delta_" + std::to_string(i) +
                                                "(" + l + ") has wrong arity or degree");
                TreeVector lhs = apply_differential(stage, ri);
                TreeVector rhs = apply_restriction(stage, i, out.diff_.at(l));
                if (!(lhs == rhs))
                    throw std::invalid_argument("unitary extension: chain compatibility fails at (" +
                                                l + ", " + std::to_string(i) + ")");
            }
            for (int i = 1; i <= n; ++i)
                for (int j = i + 1; j <= n; ++j) {
                    TreeVector lhs = apply_restriction(stage, i, rv[j - 1]);
                    TreeVector rhs = apply_restriction(stage, j - 1, rv[i - 1]);
                    if (!(lhs == rhs))
                        throw std::invalid_argument(
                            "unitary extension: lambda coherence fails at (" + l + ", " +
                            std::to_string(i) + "," + std::to_string(j) + ")");
                }
        }
    }
    // mixed equivariance: delta_i(sigma.e) = (sigma \ i) . delta_{sigma^{-1}(i)}(e)
    for (const auto& [deg, ls] : e_basis.degrees) {
        for (int t = 1; t <= n - 1; ++t) {
            Perm s = Perm::transposition(static_cast<std::size_t>(n), t);
            const Matrix& m = e_action.transposition(t, deg);
            for (std::size_t j = 0; j < ls.size(); ++j) {
                for (int i = 1; i <= n; ++i) {
                    TreeVector lhs = TreeVector::zero(n - 1, deg);
                    for (std::size_t r = 0; r < ls.size(); ++r)
                        if (!m.at(r, j).is_zero())
                            lhs += m.at(r, j) * out.restr_.at(ls[r])[i - 1];
                    Perm del = s.delete_value(i);
                    TreeVector rhs =
                        act_on_tree_vector(stage, del, out.restr_.at(ls[j])[s.inverse()(i) - 1]);
                    if (!(lhs == rhs))
                        throw std::invalid_argument(
                            "unitary extension: restriction equivariance fails at (" + ls[j] +
                            ", " + std::to_string(i) + ")");
                }
            }
        }
    }
    check_d_equivariance(out, n, e_basis, e_action);
    return out;
}

Vec tree_vector_coords(const TreeVector& v, const std::vector<Tree>& basis) {
    Vec c(basis.size());
    std::size_t found = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto it = v.terms.find(basis[i]);
        if (it != v.terms.end()) {
            c[i] = it->second;
            ++found;
        }
    }
    if (found != v.terms.size())
        throw std::invalid_argument("tree_vector_coords: vector has terms outside the basis");
    return c;
}

TreeVector tree_vector_from_coords(const Vec& coords, const std::vector<Tree>& basis, int arity,
                                   int degree) {
    if (coords.size() != basis.size())
        throw std::invalid_argument("tree_vector_from_coords: size mismatch");
    TreeVector v = TreeVector::zero(arity, degree);
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (!coords[i].is_zero()) v.terms.emplace(basis[i], coords[i]);
    return v;
}

std::string tree_to_string(const Tree& t) {
    if (t.is_point()) return "()";
    if (t.is_leaf()) return std::to_string(t.leaf);
    std::string s = t.gen + "(";
    for (std::size_t i = 0; i < t.kids.size(); ++i) {
        if (i) s += ",";
        s += tree_to_string(t.kids[i]);
    }
    return s + ")";
}

std::string tree_vector_to_string(const TreeVector& v) {
    if (v.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [t, c] : v.terms) {
        Rat a = c;
        if (first) {
            if (a == Rat(-1))
                os << "-";
            else if (a != Rat(1))
                os << a.str() << "*";
        } else {
            if (a.sign() < 0) {
                os << " - ";
                a = -a;
            } else {
                os << " + ";
            }
            if (a != Rat(1)) os << a.str() << "*";
        }
        os << tree_to_string(t);
        first = false;
    }
    return os.str();
}

}  // namespace opmin
