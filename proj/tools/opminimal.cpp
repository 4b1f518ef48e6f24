// opminimal: Sullivan minimal models of dg operads over Q, with strict units.
//
// Exit codes: 0 ok, 1 parse error, 2 hypothesis violation, 3 failed
// postcondition or verification, 64 usage error.

#include <CLI11.hpp>
#include <iostream>

#include "opmin/serialize.hpp"

using namespace opmin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitPostcondition = 3;
constexpr int kExitUsage = 64;

struct OperadSource {
    std::string builtin;
    std::string file;
};

std::shared_ptr<const FiniteDgOperad> load_operad(const OperadSource& src, int max_arity) {
    if (!src.builtin.empty() && !src.file.empty())
        throw CLI::ValidationError("--operad and --file are mutually exclusive");
    if (!src.builtin.empty())
        return std::make_shared<FiniteDgOperad>(make_builtin(src.builtin, max_arity));
    if (!src.file.empty())
        return std::make_shared<FiniteDgOperad>(operad_from_json(parse_json_file(src.file)));
    throw CLI::ValidationError("one of --operad or --file is required");
}

void print_model_summary(const MinimalModel& m, const VerifyReport& report, std::ostream& os) {
    const StagedModel& sm = m.staged;
    os << "minimal model of '" << m.target_name << "' (" << mode_name(sm.mode)
       << "), arities 2.." << sm.completed_arity << "\n\n";
    os << "generators per arity and degree:\n";
    for (const auto& [n, degs] : m.generator_dims) {
        os << "  arity " << n << ":";
        for (const auto& [deg, cnt] : degs) os << "  dim " << cnt << " @ degree " << deg;
        os << "\n";
    }
    os << "\ndifferentials:\n";
    for (const auto& [n, gs] : sm.stage.generators()) {
        for (const auto& [deg, ls] : gs.first.degrees) {
            for (const auto& l : ls)
                os << "  d(" << l << ") = " << tree_vector_to_string(sm.stage.diff_of(l)) << "\n";
        }
    }
    if (sm.mode == Mode::unitary) {
        os << "\nrestrictions:\n";
        for (const auto& [n, gs] : sm.stage.generators()) {
            for (const auto& [deg, ls] : gs.first.degrees) {
                for (const auto& l : ls) {
                    os << "  " << l << ":";
                    for (int i = 1; i <= n; ++i)
                        os << "  delta_" << i << " = "
                           << tree_vector_to_string(sm.stage.restriction_of(l, i));
                    os << "\n";
                }
            }
        }
    }
    os << "\nverification:\n";
    for (const auto& c : report.checks)
        os << "  " << (c.passed ? "pass" : "FAIL") << "  " << c.name
           << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
}

int run_model(const OperadSource& src, int max_arity, const std::string& mode_str,
              const std::string& out_path, const std::string& format) {
    auto target = load_operad(src, max_arity);
    Mode mode = mode_from_name(mode_str);
    MinimalModel model = minimal_model(target, max_arity, mode);
    VerifyReport report = verify_minimal_model(model);
    Json j = model_to_json(model, report);
    write_json_file(out_path, j);
    if (format == "json") {
        Json summary = Json::object();
        summary["target"] = model.target_name;
        summary["mode"] = mode_name(mode);
        Json dims = Json::object();
        for (const auto& [n, degs] : model.generator_dims) {
            Json d = Json::object();
            for (const auto& [deg, cnt] : degs) d[std::to_string(deg)] = cnt;
            dims[std::to_string(n)] = d;
        }
        summary["generator_dims"] = dims;
        summary["model_file"] = out_path;
        summary["verified"] = report.ok();
        std::cout << dump_json(summary);
    } else {
        print_model_summary(model, report, std::cout);
        std::cout << "\nmodel written to " << out_path << "\n";
    }
    return kExitOk;
}

int run_verify(const std::string& path) {
    MinimalModel model = model_from_json(parse_json_file(path));
    VerifyReport report = verify_minimal_model(model);
    for (const auto& c : report.checks)
        std::cout << (c.passed ? "pass" : "FAIL") << "  " << c.name
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    if (!report.ok()) {
        for (const auto& c : report.checks)
            if (!c.passed) {
                std::cerr << "verification failed: " << c.name << "\n";
                return kExitPostcondition;
            }
    }
    std::cout << "model verifies against target '" << model.target_name << "'\n";
    return kExitOk;
}

int run_cohomology(const OperadSource& src, int max_arity, const std::string& format) {
    auto target = load_operad(src, max_arity);
    auto hyp = check_theorem_hypotheses(*target);
    Json out = Json::object();
    Json per_arity = Json::object();
    for (int n = 0; n <= target->max_arity; ++n) {
        auto h = arity_cohomology(*target, n);
        Json degs = Json::object();
        for (const auto& [deg, hp] : h)
            if (hp.dim() > 0) degs[std::to_string(deg)] = hp.dim();
        per_arity[std::to_string(n)] = degs;
    }
    out["cohomology_dims"] = per_arity;
    out["cohomologically_unitary"] = hyp.cohomologically_unitary;
    out["cohomologically_connected"] = hyp.cohomologically_connected;
    out["unitary_multiplication"] = hyp.has_unitary_multiplication;
    if (format == "json") {
        std::cout << dump_json(out);
    } else {
        std::cout << "cohomology of '" << target->name << "' per arity and degree:\n";
        for (int n = 0; n <= target->max_arity; ++n) {
            std::cout << "  H(" << n << "):";
            auto h = arity_cohomology(*target, n);
            bool any = false;
            for (const auto& [deg, hp] : h)
                if (hp.dim() > 0) {
                    std::cout << "  dim " << hp.dim() << " @ degree " << deg;
                    any = true;
                }
            if (!any) std::cout << "  0";
            std::cout << "\n";
        }
        std::cout << "cohomologically unitary (HP(0) = k):   " << (hyp.cohomologically_unitary ? "yes" : "no") << "\n";
        std::cout << "cohomologically connected (HP(1) = k): " << (hyp.cohomologically_connected ? "yes" : "no") << "\n";
        std::cout << "strict unitary multiplication:         " << (hyp.has_unitary_multiplication ? "yes" : "no") << "\n";
    }
    if (!hyp.cohomologically_connected ||
        (!hyp.cohomologically_unitary && target->point_label.has_value()))
        return kExitHypothesis;
    return kExitOk;
}

int run_builtins(const std::string& format) {
    const std::vector<std::pair<std::string, std::string>> builtins = {
        {"ass", "associative operad, regular representations, zero differential"},
        {"ass_plus", "unitary associative operad with the arity-0 unit"},
        {"com", "commutative operad, one-dimensional arities"},
        {"com_plus", "unitary commutative operad with the arity-0 unit"},
    };
    if (format == "json") {
        Json out = Json::array();
        for (const auto& [name, desc] : builtins) {
            Json e = Json::object();
            e["name"] = name;
            e["description"] = desc;
            out.push_back(e);
        }
        std::cout << dump_json(out);
    } else {
        for (const auto& [name, desc] : builtins)
            std::cout << name << "\t" << desc << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sullivan minimal models of dg operads over Q"};
    app.require_subcommand(1);

    OperadSource model_src, coh_src;
    int model_max = 4, coh_max = 4;
    std::string model_mode = "non-unitary";
    std::string model_out = "model.json";
    std::string model_format = "text", coh_format = "text", builtins_format = "text";
    std::string verify_path;

    auto* model = app.add_subcommand("model", "compute a Sullivan minimal model");
    model->add_option("--operad", model_src.builtin, "builtin operad name");
    model->add_option("--file", model_src.file, "operad json file");
    model->add_option("--max-arity", model_max, "truncation arity (>= 2)")->check(CLI::Range(2, 9));
    model->add_option("--mode", model_mode, "unitary | non-unitary")
        ->check(CLI::IsMember({"unitary", "non-unitary"}));
    model->add_option("--out", model_out, "output path for the model json");
    model->add_option("--format", model_format, "summary format")
        ->check(CLI::IsMember({"text", "json"}));

    auto* verify = app.add_subcommand("verify", "re-verify a model file");
    verify->add_option("file", verify_path, "model json file")->required();

    auto* coh = app.add_subcommand("cohomology", "per-arity cohomology and hypothesis checks");
    coh->add_option("--operad", coh_src.builtin, "builtin operad name");
    coh->add_option("--file", coh_src.file, "operad json file");
    coh->add_option("--max-arity", coh_max, "arity bound")->check(CLI::Range(2, 9));
    coh->add_option("--format", coh_format, "text | json")->check(CLI::IsMember({"text", "json"}));

    auto* builtins = app.add_subcommand("builtins", "list builtin operads");
    builtins->add_option("--format", builtins_format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*model) return run_model(model_src, model_max, model_mode, model_out, model_format);
        if (*verify) return run_verify(verify_path);
        if (*coh) return run_cohomology(coh_src, coh_max, coh_format);
        if (*builtins) return run_builtins(builtins_format);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const PostconditionError& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitPostcondition;
    } catch (const InfeasibleError& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitPostcondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
