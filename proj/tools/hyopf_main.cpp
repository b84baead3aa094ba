#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyopf/case_io.hpp"
#include "hyopf/errors.hpp"
#include "hyopf/ipm.hpp"
#include "hyopf/oracle.hpp"
#include "hyopf/recovery.hpp"
#include "hyopf/relaxation.hpp"
#include "hyopf/report.hpp"
#include "hyopf/verifier.hpp"

namespace {

// Exit codes: 0 ok, 2 parse/input, 3 solver not optimal, 4 rank/recovery, 5
// verification failure.
constexpr int kExitParse = 2;
constexpr int kExitSolve = 3;
constexpr int kExitRank = 4;
constexpr int kExitVerify = 5;

struct CommonOpts {
    double gap_tol = 1e-8;
    double feas_tol = 1e-8;
    double rank_threshold = 1e5;
    int max_iter = 200;
    std::string format = "text";
    unsigned seed = 0;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--gap-tol", o.gap_tol, "relative duality gap tolerance");
    cmd->add_option("--feas-tol", o.feas_tol, "primal/dual feasibility tolerance");
    cmd->add_option("--rank-threshold", o.rank_threshold, "spectral ratio for rank certification");
    cmd->add_option("--max-iter", o.max_iter, "iteration cap");
    cmd->add_option("--format", o.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--seed", o.seed, "oracle grid jitter seed (0 = none)");
    cmd->add_flag("-v,--verbose", o.verbose, "iteration log on stderr");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hyopf::ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

hyopf::NetworkCase load_case(const std::string& path) {
    std::string text = read_file(path);
    if (text.find("\"baseMVA\"") != std::string::npos &&
        text.find("\"gencost\"") != std::string::npos)
        return hyopf::import_matpower(text);
    return hyopf::parse_case(text);
}

struct SolveOutcome {
    hyopf::SolveReport report;
    int exit_code = 0;
};

SolveOutcome run_solve(const hyopf::NetworkCase& cs, const CommonOpts& o) {
    hyopf::SolverOptions opts;
    opts.gap_tol = o.gap_tol;
    opts.feas_tol = o.feas_tol;
    opts.max_iter = o.max_iter;
    opts.verbosity = o.verbose ? 1 : 0;

    auto t0 = std::chrono::steady_clock::now();
    hyopf::Relaxation rel = hyopf::assemble(cs);
    hyopf::ConicSolution sol = hyopf::solve_relaxation(rel, opts);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (sol.status != hyopf::SolveStatus::Optimal) {
        std::cerr << "solver finished with status " << hyopf::to_string(sol.status) << " after "
                  << sol.iterations << " iterations\n";
        for (const auto& tag : sol.raw.suspect_tags) std::cerr << "  active: " << tag << "\n";
        return {{}, kExitSolve};
    }

    hyopf::RecoveredState st;
    try {
        st = hyopf::recover(cs, sol, o.rank_threshold);
    } catch (const hyopf::RecoveryError& e) {
        std::cerr << "recovery failed: " << e.what() << "\n";
        return {{}, kExitRank};
    }
    hyopf::VerifyReport ver = hyopf::verify(cs, st);
    double slack = hyopf::loss_epigraph_slack(cs, sol);
    if (slack > 1e-6)
        std::cerr << "warning: DC/DC loss inequality slack " << slack << " above 1e-6\n";

    SolveOutcome out{hyopf::make_report(cs, sol, st, ver, secs), 0};
    if (!ver.passed) out.exit_code = kExitVerify;
    return out;
}

int cmd_solve(const std::string& path, const CommonOpts& o, bool check_oracle) {
    hyopf::NetworkCase cs = load_case(path);
    SolveOutcome out = run_solve(cs, o);
    if (out.exit_code == kExitSolve || out.exit_code == kExitRank) return out.exit_code;
    std::cout << (o.format == "json" ? hyopf::render_json(out.report)
                                     : hyopf::render_text(out.report));
    if (check_oracle) {
        hyopf::OracleResult oracle = hyopf::brute_force_opf(cs, 7, o.seed);
        std::printf("oracle objective: %.9f  (sdp %.9f, rel diff %.3e)\n", oracle.objective,
                    out.report.objective,
                    std::abs(oracle.objective - out.report.objective) /
                        std::max(1.0, std::abs(oracle.objective)));
    }
    return out.exit_code;
}

int cmd_compare(const std::string& path_ac, const std::string& path_hybrid, const CommonOpts& o) {
    hyopf::NetworkCase cs_ac = load_case(path_ac);
    hyopf::NetworkCase cs_hy = load_case(path_hybrid);
    SolveOutcome a = run_solve(cs_ac, o);
    if (a.exit_code != 0 && a.exit_code != kExitVerify) return a.exit_code;
    SolveOutcome h = run_solve(cs_hy, o);
    if (h.exit_code != 0 && h.exit_code != kExitVerify) return h.exit_code;

    std::printf("%-24s %16s %16s %12s\n", "", path_ac.c_str(), path_hybrid.c_str(), "delta");
    std::printf("%-24s %16.2f %16.2f %12.2f\n", "generation cost ($/h)", a.report.total_cost,
                h.report.total_cost, h.report.total_cost - a.report.total_cost);
    std::printf("%-24s %16.4f %16.4f %12.4f\n", "AC loss (MW)", a.report.ac_loss_mw,
                h.report.ac_loss_mw, h.report.ac_loss_mw - a.report.ac_loss_mw);
    std::printf("%-24s %16.4f %16.4f %12.4f\n", "DC loss (MW)", a.report.dc_loss_mw,
                h.report.dc_loss_mw, h.report.dc_loss_mw - a.report.dc_loss_mw);
    return a.exit_code != 0 ? a.exit_code : h.exit_code;
}

int cmd_dump(const std::string& path, const std::string& what) {
    hyopf::NetworkCase cs = load_case(path);
    if (what == "problem") {
        std::cout << hyopf::assemble(cs).problem.dump();
        return 0;
    }
    // matrices
    hyopf::CoefficientSet c = hyopf::build_coefficients(cs);
    Eigen::IOFormat fmt(9, 0, " ", "\n", "  ", "");
    auto show = [&](const std::string& name, const hyopf::Mat& m) {
        std::cout << name << "\n" << m.format(fmt) << "\n";
    };
    for (size_t k = 0; k < cs.ac_buses.size(); ++k) {
        std::string id = std::to_string(cs.ac_buses[k].id);
        show("Y_ac_p bus " + id, c.bus_p[k]);
        show("Y_ac_q bus " + id, c.bus_q[k]);
        show("M_v bus " + id, c.bus_v[k]);
    }
    for (size_t li = 0; li < cs.ac_lines.size(); ++li) {
        std::string id = std::to_string(cs.ac_lines[li].from) + "-" +
                         std::to_string(cs.ac_lines[li].to) + "#" + std::to_string(li);
        show("Y_line_p fwd " + id, c.line_p_fwd[li]);
        show("Y_line_q fwd " + id, c.line_q_fwd[li]);
        show("Y_line_p rev " + id, c.line_p_rev[li]);
        show("Y_line_q rev " + id, c.line_q_rev[li]);
    }
    for (size_t k = 0; k < cs.dc_buses.size(); ++k) {
        std::string id = std::to_string(cs.dc_buses[k].id);
        show("Y_dc_p bus " + id, c.dc_bus_p[k]);
        show("M_dc_v bus " + id, c.dc_bus_v[k]);
    }
    for (size_t li = 0; li < cs.dc_lines.size(); ++li) {
        std::string id = std::to_string(cs.dc_lines[li].from) + "-" +
                         std::to_string(cs.dc_lines[li].to) + "#" + std::to_string(li);
        show("Y_dc_line fwd " + id, c.dc_line_fwd[li]);
        show("Y_dc_line rev " + id, c.dc_line_rev[li]);
    }
    return 0;
}

int cmd_verify(const std::string& case_path, const std::string& state_path, double tol) {
    hyopf::NetworkCase cs = load_case(case_path);
    nlohmann::json j = nlohmann::json::parse(read_file(state_path));
    if (j.contains("state")) j = j["state"];
    auto vec = [&](const char* key) {
        std::vector<double> v = j.value(key, std::vector<double>{});
        return Eigen::Map<hyopf::Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    hyopf::Vec re = vec("ac_voltage_re"), im = vec("ac_voltage_im");
    hyopf::CVec ac(re.size());
    ac.real() = re;
    ac.imag() = im;
    hyopf::RecoveredState st =
        hyopf::state_from_voltages(cs, ac, vec("dc_voltage"), vec("dcdc_q"));
    hyopf::VerifyReport rep = hyopf::verify(cs, st, tol);
    std::printf("verification: %s  (max residual %.3e, tol %.1e)\n",
                rep.passed ? "pass" : "FAIL", rep.max_residual, rep.tol);
    for (const auto& v : rep.violations) std::printf("  violated: %s\n", v.c_str());
    return rep.passed ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"globally optimal power flow for hybrid AC / multi-terminal HVDC networks"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string case_path, second_path, what = "problem", state_path;
    bool check_oracle = false;
    double verify_tol = 1e-5;

    CLI::App* solve = app.add_subcommand("solve", "solve a case and report the operating point");
    solve->add_option("case", case_path, "case file")->required();
    solve->add_flag("--check-oracle", check_oracle, "compare against the brute-force oracle");
    add_common(solve, o);

    CLI::App* compare = app.add_subcommand("compare", "solve two cases and diff cost/losses");
    compare->add_option("case_a", case_path, "first case")->required();
    compare->add_option("case_b", second_path, "second case")->required();
    add_common(compare, o);

    CLI::App* dump = app.add_subcommand("dump", "deterministic export of the assembled problem");
    dump->add_option("case", case_path, "case file")->required();
    dump->add_option("--what", what, "problem or matrices")
        ->check(CLI::IsMember({"problem", "matrices"}));

    CLI::App* verify = app.add_subcommand("verify", "re-check a saved state against a case");
    verify->add_option("case", case_path, "case file")->required();
    verify->add_option("state", state_path, "state or report JSON")->required();
    verify->add_option("--tol", verify_tol, "residual tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(case_path, o, check_oracle);
        if (compare->parsed()) return cmd_compare(case_path, second_path, o);
        if (dump->parsed()) return cmd_dump(case_path, what);
        if (verify->parsed()) return cmd_verify(case_path, state_path, verify_tol);
    } catch (const hyopf::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const hyopf::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
