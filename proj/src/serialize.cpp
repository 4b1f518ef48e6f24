#include "opmin/serialize.hpp"

#include <fstream>

#include "opmin/errors.hpp"

namespace opmin {

namespace {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c).str());
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols) {
    if (!j.is_array() || j.size() != rows)
        throw ParseError("matrix: expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const Json& row = j[r];
        if (!row.is_array() || row.size() != cols) throw ParseError("matrix: ragged row");
        for (std::size_t c = 0; c < cols; ++c)
            m.at(r, c) = Rat::parse(row[c].get<std::string>());
    }
    return m;
}

std::string deg_key(int deg) { return std::to_string(deg); }

int parse_int_key(const std::string& s) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ParseError("expected integer key, got '" + s + "'");
    }
}

Json basis_to_json(const GradedBasis& b) {
    Json degrees = Json::object();
    for (const auto& [deg, ls] : b.degrees) degrees[deg_key(deg)] = ls;
    return degrees;
}

GradedBasis basis_from_json(const Json& j, int arity) {
    GradedBasis b;
    b.arity = arity;
    for (const auto& [k, v] : j.items()) {
        std::vector<std::string> labels;
        for (const auto& l : v) labels.push_back(l.get<std::string>());
        b.degrees[parse_int_key(k)] = labels;
    }
    if (!b.labels_unique()) throw ParseError("duplicate basis labels in one arity");
    return b;
}

Json action_to_json(const SigmaAction& a) {
    Json out = Json::object();
    for (std::size_t t = 0; t < a.transpositions.size(); ++t) {
        Json per_deg = Json::object();
        for (const auto& [deg, m] : a.transpositions[t]) per_deg[deg_key(deg)] = matrix_to_json(m);
        out[std::to_string(t + 1)] = per_deg;
    }
    return out;
}

SigmaAction action_from_json(const Json& j, const GradedBasis& basis) {
    SigmaAction a;
    if (basis.arity < 2) return a;
    a.transpositions.resize(basis.arity - 1);
    for (int t = 1; t <= basis.arity - 1; ++t) {
        auto key = std::to_string(t);
        if (!j.contains(key)) throw ParseError("missing transposition " + key);
        for (const auto& [dk, mj] : j.at(key).items()) {
            int deg = parse_int_key(dk);
            std::size_t dim = basis.dim(deg);
            a.transpositions[t - 1][deg] = matrix_from_json(mj, dim, dim);
        }
        // every populated degree needs a matrix
        for (const auto& [deg, ls] : basis.degrees)
            if (!ls.empty() && !a.transpositions[t - 1].count(deg))
                throw ParseError("missing action matrix at degree " + std::to_string(deg));
    }
    return a;
}

}  // namespace

Json tree_to_json(const Tree& t) {
    if (t.is_leaf()) return t.leaf;
    if (t.is_point()) throw std::logic_error("tree_to_json: the point is never serialized");
    Json j = Json::object();
    j["g"] = t.gen;
    Json kids = Json::array();
    for (const auto& k : t.kids) kids.push_back(tree_to_json(k));
    j["children"] = kids;
    return j;
}

Tree tree_from_json(const Json& j) {
    if (j.is_number_integer()) {
        int leaf = j.get<int>();
        if (leaf < 1) throw ParseError("leaf labels are positive integers");
        return Tree::make_leaf(leaf);
    }
    if (!j.is_object() || !j.contains("g") || !j.contains("children"))
        throw ParseError("tree: expected integer leaf or {g, children}");
    std::vector<Tree> kids;
    for (const auto& k : j.at("children")) kids.push_back(tree_from_json(k));
    if (kids.size() < 2) throw ParseError("tree: internal vertices need >= 2 children");
    return Tree::make_node(j.at("g").get<std::string>(), std::move(kids));
}

Json tree_vector_to_json(const TreeVector& v) {
    Json out = Json::array();
    for (const auto& [t, c] : v.terms) {
        Json e = Json::object();
        e["coef"] = c.str();
        e["tree"] = tree_to_json(t);
        out.push_back(e);
    }
    return out;
}

TreeVector tree_vector_from_json(const Json& j, int arity, int degree) {
    if (!j.is_array()) throw ParseError("tree vector: expected a list");
    TreeVector v = TreeVector::zero(arity, degree);
    for (const auto& e : j) {
        Rat c = Rat::parse(e.at("coef").get<std::string>());
        if (c.is_zero()) throw ParseError("tree vector: zero coefficient stored explicitly");
        Tree t = tree_from_json(e.at("tree"));
        if (tree_arity(t) != arity) throw ParseError("tree vector: arity mismatch");
        if (!v.terms.emplace(t, c).second) throw ParseError("tree vector: duplicate tree");
    }
    return v;
}

Json operad_to_json(const FiniteDgOperad& p) {
    Json j = Json::object();
    j["name"] = p.name;
    j["max_arity"] = p.max_arity;
    Json arities = Json::array();
    for (const auto& [n, comp] : p.arities) {
        Json a = Json::object();
        a["n"] = n;
        a["degrees"] = basis_to_json(comp.basis);
        a["transpositions"] = action_to_json(comp.action);
        Json diff = Json::object();
        for (const auto& [deg, m] : comp.differential)
            if (!m.is_zero()) diff[deg_key(deg)] = matrix_to_json(m);
        a["differential"] = diff;
        arities.push_back(a);
    }
    j["arities"] = arities;
    Json comps = Json::object();
    for (const auto& [key, table] : p.comp) {
        std::string k =
            std::to_string(key[0]) + "," + std::to_string(key[1]) + "," + std::to_string(key[2]);
        // dense matrix: rows = result flat dim, cols = flat(a) * dim(b) + flat(b)
        const std::size_t da = p.flat_dim(key[0]);
        const std::size_t db = p.flat_dim(key[2]);
        const std::size_t dc = p.flat_dim(key[0] + key[2] - 1);
        Matrix m(dc, da * db);
        for (const auto& [pair, row] : table)
            for (const auto& [fc, coeff] : row)
                m.at(fc, static_cast<std::size_t>(pair.first) * db + pair.second) = coeff;
        comps[k] = matrix_to_json(m);
    }
    j["compositions"] = comps;
    j["unit1"] = p.unit1_label;
    if (p.point_label) j["point"] = *p.point_label;
    if (p.m2_label) j["m2"] = *p.m2_label;
    return j;
}

FiniteDgOperad operad_from_json(const Json& j) {
    FiniteDgOperad p;
    try {
        p.name = j.value("name", std::string("custom"));
        p.max_arity = j.at("max_arity").get<int>();
        if (p.max_arity < 1) throw ParseError("max_arity must be >= 1");
        for (const auto& a : j.at("arities")) {
            int n = a.at("n").get<int>();
            if (n < 0 || n > p.max_arity) throw ParseError("arity out of range");
            FiniteDgOperad::ArityComponent comp;
            comp.basis = basis_from_json(a.at("degrees"), n);
            if (n >= 2) comp.action = action_from_json(a.at("transpositions"), comp.basis);
            if (a.contains("differential")) {
                for (const auto& [dk, mj] : a.at("differential").items()) {
                    int deg = parse_int_key(dk);
                    comp.differential[deg] =
                        matrix_from_json(mj, comp.basis.dim(deg + 1), comp.basis.dim(deg));
                }
            }
            if (p.arities.count(n)) throw ParseError("duplicate arity block");
            p.arities[n] = std::move(comp);
        }
        for (int n = 0; n <= p.max_arity; ++n)
            if (!p.arities.count(n)) p.arities[n] = FiniteDgOperad::ArityComponent{GradedBasis{n, {}}, {}, {}};
        for (const auto& [k, mj] : j.at("compositions").items()) {
            int m = 0, i = 0, n = 0;
            if (sscanf(k.c_str(), "%d,%d,%d", &m, &i, &n) != 3)
                throw ParseError("composition key '" + k + "'");
            if (m < 1 || i < 1 || i > m || n < 0 || m + n - 1 > p.max_arity)
                throw ParseError("composition key out of range: " + k);
            const std::size_t da = p.flat_dim(m);
            const std::size_t db = p.flat_dim(n);
            const std::size_t dc = p.flat_dim(m + n - 1);
            Matrix mat = matrix_from_json(mj, dc, da * db);
            for (std::size_t fa = 0; fa < da; ++fa)
                for (std::size_t fb = 0; fb < db; ++fb)
                    for (std::size_t fc = 0; fc < dc; ++fc)
                        if (!mat.at(fc, fa * db + fb).is_zero())
                            p.comp[{m, i, n}][{static_cast<int>(fa), static_cast<int>(fb)}]
                                  [static_cast<int>(fc)] = mat.at(fc, fa * db + fb);
        }
        p.unit1_label = j.at("unit1").get<std::string>();
        if (p.flat_of_label(1, p.unit1_label) < 0) throw ParseError("unknown unit1 label");
        if (j.contains("point")) {
            p.point_label = j.at("point").get<std::string>();
            if (p.flat_of_label(0, *p.point_label) < 0) throw ParseError("unknown point label");
        }
        if (j.contains("m2")) {
            p.m2_label = j.at("m2").get<std::string>();
            if (p.flat_of_label(2, *p.m2_label) < 0) throw ParseError("unknown m2 label");
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("operad json: ") + e.what());
    }
    return p;
}

Json verify_report_to_json(const VerifyReport& r) {
    Json out = Json::array();
    for (const auto& c : r.checks) {
        Json e = Json::object();
        e["check"] = c.name;
        e["passed"] = c.passed;
        if (!c.detail.empty()) e["detail"] = c.detail;
        out.push_back(e);
    }
    return out;
}

Json model_to_json(const MinimalModel& m, const VerifyReport& report) {
    const StagedModel& sm = m.staged;
    Json j = Json::object();
    j["mode"] = mode_name(sm.mode);
    Json target = Json::object();
    if (sm.target->name == "ass" || sm.target->name == "ass_plus" || sm.target->name == "com" ||
        sm.target->name == "com_plus") {
        target["builtin"] = sm.target->name;
        target["max_arity"] = sm.target->max_arity;
    } else {
        target["operad"] = operad_to_json(*sm.target);
    }
    j["target"] = target;
    j["max_arity"] = sm.completed_arity;
    j["conventions"] = m.conventions;

    Json gens = Json::object();
    Json actions = Json::object();
    for (const auto& [n, gs] : sm.stage.generators()) {
        gens[std::to_string(n)] = basis_to_json(gs.first);
        actions[std::to_string(n)] = action_to_json(gs.second);
    }
    j["generators"] = gens;
    j["actions"] = actions;

    Json diff = Json::object();
    Json restr = Json::object();
    Json rho = Json::object();
    for (const auto& [n, gs] : sm.stage.generators()) {
        for (const auto& [deg, ls] : gs.first.degrees) {
            for (const auto& l : ls) {
                diff[l] = tree_vector_to_json(sm.stage.diff_of(l));
                if (sm.mode == Mode::unitary) {
                    Json slots = Json::object();
                    for (int i = 1; i <= n; ++i)
                        slots[std::to_string(i)] = tree_vector_to_json(sm.stage.restriction_of(l, i));
                    restr[l] = slots;
                }
                const OpElem& v = sm.rho.values.at(l);
                Json val = Json::object();
                const auto& tb = sm.target->arity(n).basis;
                auto it = tb.degrees.find(deg);
                if (it != tb.degrees.end()) {
                    for (std::size_t c = 0; c < v.coords.size(); ++c)
                        if (!v.coords[c].is_zero()) val[it->second[c]] = v.coords[c].str();
                }
                rho[l] = val;
            }
        }
    }
    j["differential"] = diff;
    if (sm.mode == Mode::unitary) j["restrictions"] = restr;
    j["rho"] = rho;
    j["report"] = verify_report_to_json(report);
    return j;
}

MinimalModel model_from_json(const Json& j) {
    MinimalModel m;
    try {
        StagedModel& sm = m.staged;
        sm.mode = mode_from_name(j.at("mode").get<std::string>());
        const Json& tj = j.at("target");
        if (tj.contains("builtin")) {
            sm.target = std::make_shared<FiniteDgOperad>(
                make_builtin(tj.at("builtin").get<std::string>(), tj.at("max_arity").get<int>()));
        } else {
            sm.target = std::make_shared<FiniteDgOperad>(operad_from_json(tj.at("operad")));
        }
        sm.completed_arity = j.at("max_arity").get<int>();
        m.conventions = j.value("conventions", std::string());
        m.target_name = sm.target->name;

        std::map<int, std::pair<GradedBasis, SigmaAction>> gens;
        for (const auto& [nk, bj] : j.at("generators").items()) {
            int n = parse_int_key(nk);
            GradedBasis basis = basis_from_json(bj, n);
            SigmaAction action = action_from_json(j.at("actions").at(nk), basis);
            gens[n] = {basis, action};
        }
        std::map<std::string, TreeVector> diff;
        std::map<std::string, std::vector<TreeVector>> restr;
        std::map<std::string, OpElem> values;
        for (const auto& [n, gs] : gens) {
            for (const auto& [deg, ls] : gs.first.degrees) {
                for (const auto& l : ls) {
                    diff[l] =
                        tree_vector_from_json(j.at("differential").at(l), n, deg + 1);
                    if (sm.mode == Mode::unitary) {
                        std::vector<TreeVector> slots;
                        for (int i = 1; i <= n; ++i)
                            slots.push_back(tree_vector_from_json(
                                j.at("restrictions").at(l).at(std::to_string(i)), n - 1, deg));
                        restr[l] = slots;
                    }
                    OpElem v = sm.target->zero(n, deg);
                    for (const auto& [lbl, cs] : j.at("rho").at(l).items()) {
                        int flat = sm.target->flat_of_label(n, lbl);
                        if (flat < 0) throw ParseError("rho: unknown target label " + lbl);
                        auto ref = sm.target->flat_ref(n, flat);
                        if (ref.degree != deg) throw ParseError("rho: degree mismatch at " + l);
                        v.coords[ref.index] = Rat::parse(cs.get<std::string>());
                    }
                    values[l] = v;
                }
            }
        }
        sm.stage = Stage::from_raw_parts(sm.mode == Mode::unitary, gens, diff, restr);
        sm.rho = StageMorphism{sm.stage, sm.target, values};

        // canonical-form guard: serialized trees must already be canonical
        for (const auto& [l, dv] : diff) {
            for (const auto& [t, c] : dv.terms) {
                TreeVector canon = canonicalize_raw(t, sm.stage);
                if (canon.terms.size() != 1 || !tree_equal(canon.terms.begin()->first, t) ||
                    canon.terms.begin()->second != Rat(1))
                    throw ParseError("non-canonical tree in differential of " + l);
            }
        }
        for (const auto& [n, gs] : gens)
            for (const auto& [deg, ls] : gs.first.degrees)
                m.generator_dims[n][deg] = static_cast<int>(ls.size());
        m.target_name = sm.target->name;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("model json: ") + e.what());
    }
    return m;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("json parse: ") + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << dump_json(j);
}

}  // namespace opmin
