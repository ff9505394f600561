#include "support.hpp"

#include "cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "srkweak");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = srkw::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("tree enumeration") {
    const auto r = run({"trees", "enumerate", "--set", "delta", "--max-order", "2.5"});
    CHECK(r.code == 0);
    CHECK(lines(r.out) == 88);
    CHECK(r.out.rfind("tree,rho,alpha_delta,gamma\n", 0) == 0);
    const auto star = run({"trees", "enumerate", "--set", "star", "--max-order", "2"});
    CHECK(star.code == 0);
    CHECK(star.out.find("\"(s_j1,{s_j2}_j1,s_j2)\",2,4,4") != std::string::npos);
    CHECK(run({"trees", "enumerate", "--set", "delta", "--max-order", "2.25"}).code == 2);
    CHECK(run({"trees", "enumerate", "--set", "forest"}).code == 2);
}

TEST_CASE("verification exit codes") {
    const auto ok = run({"conditions", "verify", "--scheme", "ri1wm", "--order", "2", "--m", "2"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("0 violated, max order passed 2") != std::string::npos);

    const auto bad = run({"conditions", "verify", "--scheme", "euler", "--order", "2", "--m", "1", "--format", "csv",
                          "--failures-only"});
    CHECK(bad.code == 1);
    CHECK(bad.out == testsupport::read_file(testsupport::golden("euler_p2_m1_violations.csv")));

    const auto file = run({"conditions", "verify", "--scheme", testsupport::scheme_file("rs1wm.json"), "--order", "2",
                           "--m", "1"});
    CHECK(file.code == 0);
    CHECK(file.out.find("RS1WM (strat") != std::string::npos);

    CHECK(run({"conditions", "verify", "--scheme", "/nonexistent.json", "--order", "2"}).code == 2);
    CHECK(run({"conditions", "verify", "--scheme", "ri1wm", "--order", "9"}).code == 2);
    CHECK(run({"conditions", "verify"}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("condition generation") {
    const auto r = run({"conditions", "generate", "--calculus", "strat", "--order", "1", "--m", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("tree,pattern,correlated,rho,alpha_star", 0) == 0);
    CHECK(r.out.find("({s_j2}_j1),\"{j1,j2}\",({s_j1}_j1),1,1,1,1,2,1/2,1,1/2,no") != std::string::npos);
}

TEST_CASE("convergence output is identical across thread counts") {
    const std::vector<std::string> base{"simulate", "convergence", "--scheme", "ri1wm", "--problem", "gbm", "--f",
                                        "x", "--steps", "1,2,4", "--samples", "20000", "--chunk", "3000", "--seed", "7"};
    auto one = base;
    one.insert(one.end(), {"--threads", "1"});
    auto two = base;
    two.insert(two.end(), {"--threads", "2"});
    const auto a = run(one);
    const auto b = run(two);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("h,estimate,stderr,bias,slope-so-far\n", 0) == 0);
    CHECK(lines(a.out) == 4);
    CHECK_FALSE(a.err.empty());
}

TEST_CASE("Stratonovich problems are converted for Ito schemes") {
    const auto r = run({"simulate", "convergence", "--scheme", "euler", "--problem", "gbm-strat", "--steps", "2,4",
                        "--samples", "2000"});
    CHECK((r.code == 0 || r.code == 1));
    CHECK(r.err.find("Ito") != std::string::npos);
    CHECK(run({"simulate", "convergence", "--scheme", "rs1wm", "--problem", "gbm", "--samples", "100"}).code == 2);
}

TEST_CASE("expansion table") {
    const auto r = run({"expand", "exact", "--problem", "ou", "--f", "x2", "--order", "2", "--dt-grid", "0.5,0.25"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("dt,truncated,exact,error\n0.5,", 0) == 0);
    CHECK(lines(r.out) == 3);
}

TEST_CASE("scheme show") {
    const auto json = run({"scheme", "show", "--scheme", "ri1wm", "--format", "json"});
    CHECK(json.code == 0);
    CHECK(json.out == testsupport::read_file(testsupport::scheme_file("ri1wm.json")));
    const auto text = run({"scheme", "show", "--scheme", "rs1wm"});
    CHECK(text.out.find("4-stage explicit SRK") != std::string::npos);
}

TEST_CASE("output files") {
    const auto path = std::filesystem::temp_directory_path() / "srkweak_cli_test.csv";
    std::filesystem::remove(path);
    const auto r = run({"trees", "enumerate", "--set", "ito", "--max-order", "1", "--out", path.string()});
    CHECK(r.code == 0);
    const auto text = testsupport::read_file(path.string());
    CHECK(text.rfind("tree,rho,alpha\n", 0) == 0);
    std::filesystem::remove(path);
    CHECK(run({"trees", "enumerate", "--set", "ito", "--out", "/nonexistent/dir/x.csv"}).code == 3);
}
