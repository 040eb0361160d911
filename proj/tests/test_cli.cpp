// End-to-end checks of the installed command-line binary. The binary path
// arrives via the MAXTAIL_CLI_PATH compile definition.
#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MAXTAIL_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
    // keeps trailing empty fields, unlike getline-based splitting
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

} // namespace

TEST_CASE("cli eval prints one data row") {
    const auto r = run_cli("eval --copula gaussian:rho=0.5 --u 0.5 --v 0.5");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "family,params,u,v,C");
    const auto f = fields_of(lines[1]);
    REQUIRE(f.size() == 5);
    CHECK(f[0] == "gaussian");
    CHECK_THAT(std::stod(f[4]), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("cli indices emits the grid and a summary row") {
    const auto r = run_cli("indices --copula gaussian:rho=0.5 --points 6");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 1 + 6 + 1); // header, grid rows, summary
    CHECK(lines[0] ==
          "u,C_diag,Pi_star,lambda_diag,lambda_star,chi_diag,chi_star,"
          "kappa_secant_diag,kappa_secant_star");
    const auto first = fields_of(lines[1]);
    REQUIRE(first.size() == 9);
    CHECK(first[7].empty()); // no secant before the second grid point
    const auto summary = fields_of(lines.back());
    REQUIRE(summary.size() == 9);
    CHECK(summary[0] == "summary");
    const double kappa = std::stod(summary[7]);
    CHECK_THAT(kappa, Catch::Matchers::WithinAbs(2.0 / 1.5, 0.1));
}

TEST_CASE("cli path reports admissibility") {
    const auto ok = run_cli("path --copula mo:a=0.3,b=0.6 --umin 1e-4 --points 4");
    REQUIRE(ok.exit_code == 0);
    const auto ok_lines = lines_of(ok.out);
    REQUIRE(ok_lines.size() == 1 + 4 + 1);
    CHECK(ok_lines[0] == "u,x_star,psi_star,pi_star,boundary,multimodal");
    CHECK(ok_lines.back().find("# admissibility: PASS") == 0);

    const auto bad = run_cli("path --copula gaussian:rho=-0.4 --umin 1e-4 --points 4");
    REQUIRE(bad.exit_code == 0);
    const auto bad_lines = lines_of(bad.out);
    CHECK(bad_lines.back().find("# admissibility: FAIL") == 0);
    for (std::size_t i = 1; i + 1 < bad_lines.size(); ++i) {
        const auto f = fields_of(bad_lines[i]);
        REQUIRE(f.size() == 6);
        CHECK(f[4] == "1"); // every level pinned to the section boundary
    }
}

TEST_CASE("cli geometry probes and radii") {
    const auto probe = run_cli("geometry --alpha 0.35 --beta 0.5235987755982988");
    REQUIRE(probe.exit_code == 0);
    const auto probe_lines = lines_of(probe.out);
    REQUIRE(probe_lines.size() == 2);
    CHECK(probe_lines[0] == "alpha,beta,n_intersections,w,z");
    CHECK(fields_of(probe_lines[1])[2] == "1");

    const auto radius = run_cli("geometry --alpha 0.5 --theta 0.7853981633974483");
    REQUIRE(radius.exit_code == 0);
    const auto radius_lines = lines_of(radius.out);
    REQUIRE(radius_lines.size() == 2);
    const double r = std::stod(fields_of(radius_lines[1])[2]);
    CHECK_THAT(r, Catch::Matchers::WithinRel(0.77067870103428504, 1e-10));
}

TEST_CASE("cli verify subcommand passes its battery") {
    const auto r = run_cli("verify-gaussian --rho 0.5 --rho -0.3 --u 0.01 --u 0.001 --alpha 0.35");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    CHECK(lines[0] == "check,params,observed,status");
    int data_rows = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        ++data_rows;
        CAPTURE(lines[i]);
        CHECK(lines[i].find("FAIL") == std::string::npos);
    }
    // mills + 2x(argmax, sign scan) + 1 intersection + 1 negative-rho row
    CHECK(data_rows == 1 + 2 + 2 + 1 + 1);
}

TEST_CASE("cli writes --out files identical to stdout") {
    const std::string path = "/tmp/maxtail_cli_out_test.csv";
    std::remove(path.c_str());
    const auto direct = run_cli("eval --copula indep --u 0.25 --v 0.5");
    const auto to_file = run_cli("eval --copula indep --u 0.25 --v 0.5 --out " + path);
    REQUIRE(to_file.exit_code == 0);
    CHECK(to_file.out.empty());
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == direct.out);
    std::remove(path.c_str());
}

TEST_CASE("cli exit codes distinguish usage and domain errors") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("bogus-subcommand").exit_code == 2);
    CHECK(run_cli("eval --copula indep").exit_code == 2);               // missing args
    CHECK(run_cli("eval --copula gaussian:rho=2 --u 0.1 --v 0.1").exit_code == 1);
    CHECK(run_cli("eval --copula indep --u 1.5 --v 0.5").exit_code == 1);
    CHECK(run_cli("geometry --alpha 0.3").exit_code == 1);              // no mode picked
}
