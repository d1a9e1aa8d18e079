#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MFLAB_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path temp_prefix(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("distance subcommand prints the lambda-vs-one value") {
    const auto r = run_cli("distance --f liouville --g one --N 20");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("2.910955504") != std::string::npos);
    CHECK(r.out.find("q,chi_index,N,t_star,M_value") != std::string::npos);
}

TEST_CASE("validation failures exit 2 with machine-readable JSON") {
    const auto r = run_cli("patterns --mode sign --functions liouville --eps ++ --family n "
                           "--box 5:4 --M 1000");
    CHECK(r.exit_code == 2);
    const auto brace = r.out.find('{');
    REQUIRE(brace != std::string::npos);
    const json err = json::parse(r.out.substr(brace), nullptr, false);
    REQUIRE_FALSE(err.is_discarded());
    CHECK(err["error"]["type"] == "validation");
}

TEST_CASE("dependent family is refused; override admits it") {
    const auto refused =
        run_cli("correlate --functions liouville --family \"n,2*n\" --box 1:4 --M 1000");
    CHECK(refused.exit_code == 2);
    CHECK(refused.out.find("witness") != std::string::npos);

    const auto allowed = run_cli(
        "correlate --functions liouville --family \"n,2*n\" --box 1:4 --M 1000 --override-dependent");
    CHECK(allowed.exit_code == 0);
}

TEST_CASE("bad arguments are rejected with the right exit codes") {
    const auto bad = run_cli("katai --a liouville --p 4 --q 3 --N 100");
    CHECK(bad.exit_code == 2);
    const auto overflow = run_cli("correlate --functions liouville --family n^9 --box 1:200 --M 1e3");
    CHECK(overflow.exit_code == 3); // 200^9 overflows 64-bit shift evaluation
}

TEST_CASE("correlate artifact: CSV + JSON, reproducible from its own metadata") {
    const auto prefix = temp_prefix("mflab_cli_corr");
    const std::string base = "correlate --functions liouville --family n,n^2 --box 1:6 --M 1e3,1e4";
    const auto first = run_cli(base + " --out " + prefix.string());
    REQUIRE(first.exit_code == 0);
    const auto csv1 = slurp(prefix.string() + ".csv");
    const auto summary = json::parse(slurp(prefix.string() + ".json"));
    CHECK(summary["kind"] == "correlate");
    CHECK(summary["ud_statistic"].size() == 2);
    CHECK(summary["independence"] == "certified");

    // round-trip: the artifact's own JSON reproduces the run
    const auto prefix2 = temp_prefix("mflab_cli_corr2");
    const auto second = run_cli("correlate --config " + prefix.string() + ".json --out " +
                                prefix2.string());
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(prefix2.string() + ".csv") == csv1);

    // thread count must not change numeric output
    const auto prefix4 = temp_prefix("mflab_cli_corr4");
    const auto threaded = run_cli(base + " --threads 4 --out " + prefix4.string());
    REQUIRE(threaded.exit_code == 0);
    CHECK(slurp(prefix4.string() + ".csv") == csv1);

    for (const auto& p : {prefix, prefix2, prefix4}) {
        std::filesystem::remove(p.string() + ".csv");
        std::filesystem::remove(p.string() + ".json");
    }
}

TEST_CASE("patterns subcommand emits per-pattern rows and UD summary") {
    const auto prefix = temp_prefix("mflab_cli_pat");
    const auto r = run_cli("patterns --mode residue --b 2,3 --family n --box 1:4 --M 2e4 --out " +
                           prefix.string());
    REQUIRE(r.exit_code == 0);
    const auto csv = slurp(prefix.string() + ".csv");
    CHECK(csv.find("M,pattern,density,expansion_density,target") != std::string::npos);
    const auto summary = json::parse(slurp(prefix.string() + ".json"));
    CHECK(summary["labels"].size() == 6);
    CHECK(summary["zeta_convention"] == "e(1/b)");

    // report consumes the artifact
    const auto rep = run_cli("report " + prefix.string() + ".json");
    CHECK(rep.exit_code == 0);
    CHECK(rep.out.find("patterns") != std::string::npos);

    std::filesystem::remove(prefix.string() + ".csv");
    std::filesystem::remove(prefix.string() + ".json");
}

TEST_CASE("shortint / mrt / fourier / eval / sieve basic runs") {
    CHECK(run_cli("shortint --f liouville --M 2e4 --N 10,40").exit_code == 0);
    CHECK(run_cli("mrt --f chi:3:1 --M 3e4 --N 9").exit_code == 0);
    CHECK(run_cli("fourier --f liouville --M 500 --N 16 --oversample 4").exit_code == 0);
    CHECK(run_cli("eval --function rou:3 --hi 50").exit_code == 0);
    const auto s = run_cli("sieve --lo 1 --hi 20");
    CHECK(s.exit_code == 0);
    CHECK(s.out.find("n,lambda,mu,omega,big_omega,squarefree") != std::string::npos);

    const auto katai = run_cli("katai --alpha 0.4142135623730951 --p 2 --q 3 --N 1e4");
    CHECK(katai.exit_code == 0);

    const auto empty_report = run_cli("report");
    CHECK(empty_report.exit_code == 0);
}

TEST_CASE("aperiodicity verdicts through the CLI") {
    const auto prefix = temp_prefix("mflab_cli_aper");
    const auto r = run_cli("aperiodicity --f chi:4:1 --qmax 4 --cutoffs 1e3,1e4 --out " +
                           prefix.string());
    REQUIRE(r.exit_code == 0);
    const auto summary = json::parse(slurp(prefix.string() + ".json"));
    CHECK(summary["verdict"] == "evidence-not");
    const auto csv = slurp(prefix.string() + ".csv");
    CHECK(csv.find("q,chi_index,N,t_star,M_value") != std::string::npos);
    std::filesystem::remove(prefix.string() + ".csv");
    std::filesystem::remove(prefix.string() + ".json");
}
