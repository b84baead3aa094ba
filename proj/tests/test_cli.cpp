#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() { return HYOPF_CLI_PATH; }

std::string case_dir() { return HYOPF_CASE_DIR; }

int run(const std::string& args, const std::string& out_file = "") {
    std::string cmd = cli_path() + " " + args;
    if (!out_file.empty()) cmd += " > " + out_file;
    cmd += " 2> /dev/null";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = std::string("/tmp/hyopf_cli_") + name;
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("solve succeeds on every bundled case") {
    for (const char* name : {"dc2.json", "dc3.json", "ac2.json", "ac3.json", "hybrid4.json",
                             "dc8.json"}) {
        INFO("case ", name);
        CHECK(run("solve " + case_dir() + "/" + name) == 0);
    }
}

TEST_CASE("malformed input exits with code 2") {
    CHECK(run("solve " + write_temp("bad.json", "{broken")) == 2);
    CHECK(run("solve /nonexistent/missing.json") == 2);
    // structurally invalid: two slack buses
    const char* twoslack = R"({
      "base_mva": 100,
      "ac_buses": [{"id": 1, "is_slack": true}, {"id": 2, "is_slack": true}],
      "generators": [{"bus": 1, "p_min": 0, "p_max": 100, "q_min": -50, "q_max": 50}],
      "ac_lines": [{"from": 1, "to": 2, "r": 0.01, "x": 0.05, "s_max": 100}]
    })";
    CHECK(run("solve " + write_temp("twoslack.json", twoslack)) == 2);
}

TEST_CASE("unsolvable case exits with code 3") {
    // fixed demand far above the line transfer capability
    const char* hopeless = R"({
      "base_mva": 100,
      "dc_buses": [
        {"id": 1, "v_min": 0.9, "v_max": 1.1, "p_min": -900, "p_max": 900,
         "is_master": true, "v_master": 1.0},
        {"id": 2, "v_min": 0.9, "v_max": 1.1, "p_min": -800, "p_max": -800}
      ],
      "dc_lines": [{"from": 1, "to": 2, "conductance": 4, "p_max": 900}],
      "acdc_converters": [{"ac_bus": null, "dc_bus": 1, "efficiency": 1.0, "s_conv": 900}]
    })";
    CHECK(run("solve " + write_temp("hopeless.json", hopeless)) == 3);
}

TEST_CASE("an unreachable rank certificate exits with code 4") {
    // an absurd spectral-ratio demand makes certification fail on a good case
    CHECK(run("solve " + case_dir() + "/ac2.json --rank-threshold 1e15") == 4);
}

TEST_CASE("verify subcommand checks a saved report and exits 5 on mismatch") {
    std::string report = "/tmp/hyopf_cli_report.json";
    REQUIRE(run("solve " + case_dir() + "/hybrid4.json --format json", report) == 0);
    CHECK(run("verify " + case_dir() + "/hybrid4.json " + report) == 0);

    // the same state against a perturbed case must fail
    std::string text = slurp(std::string(case_dir()) + "/hybrid4.json");
    size_t pos = text.find("\"p_load\": 10");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"p_load\": 30");
    std::string tampered = write_temp("tampered.json", text);
    CHECK(run("verify " + tampered + " " + report) == 5);
}

TEST_CASE("dump is deterministic") {
    std::string a = "/tmp/hyopf_cli_dump_a.txt";
    std::string b = "/tmp/hyopf_cli_dump_b.txt";
    REQUIRE(run("dump " + case_dir() + "/hybrid4.json --what problem", a) == 0);
    REQUIRE(run("dump " + case_dir() + "/hybrid4.json --what problem", b) == 0);
    std::string da = slurp(a);
    CHECK(da == slurp(b));
    CHECK(!da.empty());
    CHECK(run("dump " + case_dir() + "/dc3.json --what matrices", a) == 0);
    CHECK(!slurp(a).empty());
}

TEST_CASE("compare runs two cases") {
    std::string out = "/tmp/hyopf_cli_compare.txt";
    CHECK(run("compare " + case_dir() + "/ac2.json " + case_dir() + "/ac3.json", out) == 0);
    CHECK(slurp(out).find("generation cost") != std::string::npos);
}

TEST_CASE("json output embeds a re-verifiable state") {
    std::string out = "/tmp/hyopf_cli_json.txt";
    REQUIRE(run("solve " + case_dir() + "/ac3.json --format json", out) == 0);
    std::string text = slurp(out);
    CHECK(text.find("ac_voltage_re") != std::string::npos);
    CHECK(text.find("\"status\"") != std::string::npos);
}

TEST_CASE("oracle cross-check flag reports agreement") {
    std::string out = "/tmp/hyopf_cli_oracle.txt";
    CHECK(run("solve " + case_dir() + "/dc2.json --check-oracle", out) == 0);
    CHECK(slurp(out).find("oracle objective") != std::string::npos);
}
