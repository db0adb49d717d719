#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace {

struct Result {
    int code;
    std::string out;
};

/// Runs the CLI with stdout captured and stderr discarded.
Result run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + "'" FDWFM_CLI_PATH "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string stderr_of(const std::string& args) {
    std::string cmd = "'" FDWFM_CLI_PATH "' " + args + " 2>&1 1>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    pclose(pipe);
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    auto p = std::filesystem::temp_directory_path() / ("fdwfm_cli_test_" + name);
    std::ofstream(p) << content;
    return p;
}

}  // namespace

TEST(CliSolve, CosMinusX) {
    auto r = run("solve --method fdwfm --expr 'cos(x)-x' --x0 0 --x1 1");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0.73908513"), std::string::npos);
    EXPECT_NE(r.out.find("iterations  3"), std::string::npos);
}

TEST(CliSolve, Complex) {
    auto r = run("solve --method fdwfm --complex --expr 'z^2+1' --x0 0+0.5i --x1 0.1+0.8i");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Converged"), std::string::npos);
}

TEST(CliSolve, System) {
    auto r = run("solve -m broyden -e 'x+y-3' -e 'x^2+y^2-9' --x0 1,3");
    EXPECT_EQ(r.code, 0);
    auto n = run("solve -m newton -e 'x+y-3' -e 'x^2+y^2-9' --x0 1,3 -j '1,1' -j '2*x,2*y' --trace");
    EXPECT_EQ(n.code, 0);
    EXPECT_NE(n.out.find("trace"), std::string::npos);
}

TEST(CliSolve, ExitCodes) {
    EXPECT_EQ(run("solve --method newton --expr 'x^2-4' --x0 3").code, 1);                      // no derivative
    EXPECT_EQ(run("solve --method newton --expr 'x^2-4' -d '2*x' --x0 3").code, 0);
    EXPECT_EQ(run("solve --method fdwfm --expr 'x^2+1' --x0 0 --x1 1 --max-iter 5").code, 2);  // no real root
    EXPECT_EQ(run("solve --method fdwfm --expr 'x^2+' --x0 0 --x1 1").code, 1);                // parse error
    EXPECT_EQ(run("solve --method fdwfm --expr 'x-1' --x0 0").code, 1);                        // no x1
    EXPECT_EQ(run("solve --method bogus --expr 'x-1' --x0 0 --x1 2").code, 1);
    EXPECT_EQ(run("solve --method fdwfm --expr 'x-1' --x0 a --x1 2").code, 1);
    EXPECT_EQ(run("solve --method fdwfm --expr 'x-1' --x0 0 --x1 2 --tol -1").code, 1);
    EXPECT_EQ(run("solve --method fdwfm --expr '3' --x0 0 --x1 2").code, 1);                   // no variable
    EXPECT_EQ(run("solve --method secant -e 'x+y-3' -e 'x-y' --x0 1,3").code, 1);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(CliSolve, DegenerateIsNotConverged) {
    EXPECT_EQ(run("solve --method secant --expr 'x-x+1' --x0 0 --x1 1").code, 2);
}

TEST(CliBench, TableOneMarkdown) {
    auto r = run("bench --tables 1 --methods secant,newton,fdwfm --format markdown");
    EXPECT_EQ(r.code, 0);
    std::size_t rows = 0;
    for (std::size_t p = r.out.find("\n| table1/"); p != std::string::npos; p = r.out.find("\n| table1/", p + 1)) ++rows;
    EXPECT_EQ(rows, 10u);
}

TEST(CliBench, TableThreeJson) {
    auto r = run("bench --tables 3 --methods broyden,fdwfm --format json");
    ASSERT_EQ(r.code, 0);
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["rows"].size(), 7u);
    for (const auto& row : doc["rows"])
        EXPECT_LE(row["results"][1]["iterations"].get<int>(), row["results"][0]["iterations"].get<int>());
}

TEST(CliBench, EmptyProblemFile) {
    auto path = temp_file("empty.fdp", "");
    auto r = run("bench --problems '" + path.string() + "' --format csv");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.find("\r\n"), r.out.size() - 2);  // header only
    EXPECT_EQ(r.out.rfind("id,kind,function", 0), 0u);
}

TEST(CliBench, Errors) {
    EXPECT_EQ(run("bench --problems /nonexistent/x.fdp").code, 1);
    auto bad = temp_file("bad.fdp", "fdwfm-problems 1\nproblem p\n  kind real\n");
    EXPECT_EQ(run("bench --problems '" + bad.string() + "'").code, 1);
    EXPECT_EQ(run("bench --tables 9").code, 1);
    EXPECT_EQ(run("bench --methods").code, 1);
    EXPECT_EQ(run("bench --methods nope").code, 1);
    EXPECT_EQ(run("bench --format xml").code, 1);
    EXPECT_EQ(run("bench --tables 1 --out /nonexistent/dir/out.md").code, 1);
    EXPECT_EQ(run("bench --tables 1", "FDWFM_JOBS=abc").code, 1);
}

TEST(CliBench, Strict) {
    EXPECT_EQ(run("bench --tables 1 --methods fdwfm --strict").code, 0);
    EXPECT_EQ(run("bench --tables 3 --methods fdwfm --strict").code, 3);  // row 6 hits the cap
}

TEST(CliBench, JobsFlagAndEnvironmentAgree) {
    auto a = run("bench --tables 1,2,3 --format json --jobs 1");
    auto b = run("bench --tables 1,2,3 --format json", "FDWFM_JOBS=4");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(CliBench, ReportBodyOnlyOnStdout) {
    auto err = stderr_of("bench --tables 1 --format csv");
    EXPECT_EQ(err.find("id,kind"), std::string::npos);
    auto out = run("bench --tables 1 --format csv").out;
    EXPECT_EQ(out.find("running"), std::string::npos);
}

TEST(CliBench, OutFileAndReport) {
    auto json = std::filesystem::temp_directory_path() / "fdwfm_cli_test_report.json";
    auto r = run("bench --tables 1 --format json --out '" + json.string() + "'");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    auto md = run("report --in '" + json.string() + "' --format markdown");
    EXPECT_EQ(md.code, 0);
    EXPECT_EQ(md.out, run("bench --tables 1 --format markdown").out);
    EXPECT_EQ(run("report --in /nonexistent.json").code, 1);
}
