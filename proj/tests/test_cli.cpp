#include "ngca/cli.hpp"
#include "ngca/report.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace ngca;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "ngca_lab");
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "ngca_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> out;
    for (const auto& line : split(csv, '\n'))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("construct then verify round-trips through the instance file", "[cli]") {
    const auto dir = scratch_dir();
    const auto inst = (dir / "inst.json").string();
    const auto rep = (dir / "rep.json").string();
    REQUIRE(run({"construct", "--kind", "appendix-d", "--n", "64", "--d", "2", "--out", inst, "--report", rep}).code == 0);
    const auto law = dist::read_instance(inst);
    CHECK(law.atoms.size() == 2);
    CHECK(law.atoms[1].loc == 8.0);
    CHECK(law.atoms[1].mass == std::pow(64.0, -2.0));
    const auto report = nlohmann::json::parse(slurp(rep));
    CHECK(report["nu"].get<double>() <= 1e-7);
    CHECK(report["header"]["params"]["n"] == 64);

    const auto v = run({"verify", "--in", inst, "--d", "2"});
    REQUIRE(v.code == 0);
    const auto j = nlohmann::json::parse(v.out);
    CHECK(j["nu"].get<double>() <= 1e-7);
    CHECK(j["pass"] == true);
    CHECK(j["valid_law"] == true);

    // the written instance is the exact law
    const auto direct = momentmatch::appendix_d_instance(64, 2).law;
    REQUIRE(law.patches.size() == direct.patches.size());
    const auto a = law.patches[0].poly.coeffs(), b = direct.patches[0].poly.coeffs();
    CHECK(std::vector<double>(a.begin(), a.end()) == std::vector<double>(b.begin(), b.end()));

    for (const char* kind : {"ac", "decodable"}) {
        std::vector<std::string> args{"construct", "--kind", kind, "--d", "4", "--out", inst};
        if (std::string(kind) == "decodable") args.insert(args.end(), {"--alpha", "0.001", "--C", "2"});
        const auto r = run(args);
        INFO(kind << ": " << r.err);
        REQUIRE(r.code == 0);
        CHECK(nlohmann::json::parse(run({"verify", "--in", inst, "--d", "4"}).out)["nu"].get<double>() <= 1e-7);
    }
}

TEST_CASE("beta-moments Monte Carlo row agrees with the exact value", "[cli]") {
    const auto r = run({"beta-moments", "--n", "50", "--m", "3", "--k", "4", "--reps", "100000", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "n,m,k,exact,mc_mean,mc_stderr,reps");
    const auto f = split(lines[1], ',');
    const double exact = std::stod(f[3]), mean = std::stod(f[4]), se = std::stod(f[5]);
    CHECK(exact == subspace::correlation_moment_exact(50, 3, 4));
    CHECK(std::abs(mean - exact) <= 3.0 * se);
    CHECK(f[6] == "100000");
}

TEST_CASE("usage and infeasibility exit codes", "[cli]") {
    {
        const auto r = run({"decay", "--bogus", "1"});
        CHECK(r.code == 2);
        CHECK(r.err.find("--n-grid") != std::string::npos);
    }
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    {
        const auto r = run({"--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("distinguish") != std::string::npos);
    }
    CHECK(run({"construct", "--kind", "appendix-d", "--n", "64", "--d", "3"}).code == 2);
    {
        const auto r = run({"construct", "--kind", "appendix-d", "--n", "2", "--d", "2"});
        CHECK(r.code == 1);
        CHECK(r.err.find("smallest feasible n") != std::string::npos);
    }
    CHECK(run({"concentrate", "--reps", "2"}).code == 1);
    CHECK(run({"distinguish", "--mode", "honest-mc", "--trials", "1"}).code == 1);
    CHECK(run({"distinguish", "--clip", "5", "--trials", "1"}).code == 1);
    CHECK(run({"cap", "--out", "/nonexistent-dir/x.csv"}).code == 1);
    CHECK(run({"verify", "--in", "/nonexistent-dir/x.json"}).code == 1);
}

TEST_CASE("emit_report", "[cli][report]") {
    report::Header h{{"ngca_lab", "cap"}, 11, {{"phi", 0.5}}};
    SECTION("empty record set gives a header-only CSV") {
        const auto csv = report::to_csv({"cap", {}}, h);
        const auto lines = data_lines(csv);
        REQUIRE(lines.size() == 1);
        CHECK(lines[0] == "n,phi,ratio,log_ratio");
        CHECK(csv.back() == '\n');
        CHECK(csv.find("# tool: ngca_lab 0.1.0\n") == 0);
        CHECK(csv.find("# seed: 11\n") != std::string::npos);
        CHECK(csv.find("# argv: [\"ngca_lab\",\"cap\"]\n") != std::string::npos);
    }
    SECTION("identical records give identical bytes in both formats") {
        report::Table t{"cap", {{std::int64_t{20}, 0.1, 1.0 / 3.0, std::log(1.0 / 3.0)}, {std::int64_t{30}, 0.1, 1e-300, -690.77552789821368}}};
        const auto dir = scratch_dir();
        for (auto f : {report::Format::csv, report::Format::json}) {
            std::ostringstream sink;
            report::emit_report(t, h, (dir / "a").string(), f, sink);
            report::emit_report(t, h, (dir / "b").string(), f, sink);
            CHECK(slurp(dir / "a") == slurp(dir / "b"));
        }
    }
    SECTION("CSV and JSON carry the same numbers") {
        report::Table t{"cap", {}};
        Rng rng = make_rng(3, 0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 50; ++i) t.rows.push_back({std::int64_t{i}, u(rng), std::exp(40.0 * u(rng)), u(rng) * 1e-200});
        const auto lines = data_lines(report::to_csv(t, h));
        const auto j = nlohmann::json::parse(report::to_json(t, h));
        REQUIRE(j["records"].size() == 50);
        CHECK(j["header"]["seed"] == 11);
        for (int i = 0; i < 50; ++i) {
            const auto f = split(lines[i + 1], ',');
            const auto& rec = j["records"][i];
            CHECK(std::stoll(f[0]) == rec["n"].get<long long>());
            CHECK(std::strtod(f[1].c_str(), nullptr) == rec["phi"].get<double>());
            CHECK(std::strtod(f[2].c_str(), nullptr) == rec["ratio"].get<double>());
            CHECK(std::strtod(f[3].c_str(), nullptr) == rec["log_ratio"].get<double>());
            CHECK(std::strtod(f[1].c_str(), nullptr) == std::get<double>(t.rows[i][1]));
        }
    }
    SECTION("17 significant digits") {
        CHECK(report::format_double(0.1) == "0.10000000000000001");
        CHECK(report::format_double(1.0) == "1");
        CHECK(report::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    }
    SECTION("schema mismatches are rejected") {
        CHECK_THROWS_AS(report::to_csv({"cap", {{std::int64_t{1}}}}, h), ContractViolation);
        CHECK_THROWS_AS(report::to_csv({"nope", {}}, h), ContractViolation);
        std::ostringstream sink;
        CHECK_THROWS_AS(report::write_artifact("x", "/nonexistent-dir/x", sink), report::IoError);
    }
}

TEST_CASE("artifacts are byte-identical across runs and worker counts", "[cli][determinism]") {
    const std::vector<std::vector<std::string>> commands = {
        {"decay", "--reps", "60", "--seed", "3"},
        {"decay", "--reps", "60", "--seed", "3", "--format", "json"},
        {"beta-moments", "--n", "20,50", "--m", "1,3", "--reps", "2000", "--seed", "5"},
        {"distinguish", "--mode", "honest-mc", "--samples", "200000", "--allow-underbudget", "--trials", "2", "--seed", "9"},
        {"concentrate", "--n-grid", "200", "--reps", "8", "--seed", "4"},
        {"game", "--mode", "honest-mc", "--allow-underbudget", "--samples", "100000", "--seed", "2"},
        {"cap"},
        {"discrete-gauss"},
        {"chi2-avg", "--n", "8"},
    };
    for (const auto& c : commands) {
        std::string first;
        for (const char* threads : {"1", "3", "1"}) {
            ::setenv("NGCA_LAB_THREADS", threads, 1);
            const auto r = run(c);
            INFO(c[0] << " threads=" << threads << " err=" << r.err);
            REQUIRE(r.code == 0);
            if (first.empty())
                first = r.out;
            else
                CHECK(r.out == first);
        }
        ::unsetenv("NGCA_LAB_THREADS");
        CHECK(first.find(c[0]) != std::string::npos);  // argv echoed
    }
}

TEST_CASE("subcommand outputs", "[cli]") {
    SECTION("distinguish schema") {
        const auto r = run({"distinguish", "--trials", "3"});
        REQUIRE(r.code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines.size() == 7);
        CHECK(lines[0] == "trial,hypothesis,n,d,query_value,null_center,threshold,decision,correct");
        for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split(lines[i], ',').back() == "true");
        CHECK(r.out.find("# param clip=") != std::string::npos);
    }
    SECTION("concentrate with a Gaussian hidden law") {
        const auto r = run({"concentrate", "--n-grid", "30", "--reps", "4", "--law", "gaussian"});
        REQUIRE(r.code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines.size() == 1 + 4 * 50);
        CHECK(lines[0] == "n,d,query_id,replicate,gap,tau,exceeded");
        for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::stod(split(lines[i], ',')[4]) <= 1e-12);
    }
    SECTION("decay summary") {
        const auto dir = scratch_dir();
        const auto r = run({"decay", "--reps", "100", "--summary", (dir / "summary.csv").string()});
        REQUIRE(r.code == 0);
        CHECK(data_lines(r.out).size() == 1 + 3 * 4 * 100);
        const auto s = data_lines(slurp(dir / "summary.csv"));
        REQUIRE(s.size() == 13);
        CHECK(s[0] == "k,n,median,q1,q3,slope");
    }
    SECTION("chi2-avg") {
        const auto r = run({"chi2-avg", "--n", "8", "--law", "delta0"});
        REQUIRE(r.code == 0);
        const auto f = split(data_lines(r.out)[1], ',');
        const double closed = std::exp(std::lgamma(4.0) + std::lgamma(3.0) - 2.0 * std::lgamma(3.5));
        CHECK(std::abs(std::stod(f[3]) - closed) <= 1e-6 * closed);
        CHECK(f[7] == "true");
        const auto g = split(data_lines(run({"chi2-avg", "--n", "8", "--law", "normal", "--var", "1"}).out)[1], ',');
        CHECK(std::abs(std::stod(g[4])) <= 1e-9);
    }
    SECTION("discrete-gauss") {
        const auto r = run({"discrete-gauss", "--s", "0.1", "--theta", "0", "--k-max", "4"});
        REQUIRE(r.code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines.size() == 6);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split(lines[i], ',');
            CHECK(std::abs(std::stod(f[4]) - std::stod(f[5])) <= 1e-3);
        }
    }
    SECTION("game transcript") {
        const auto r = run({"game", "--truth", "H0", "--policy", "constant", "--seed", "5"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["header"]["seed"] == 5);
        CHECK(j["transcript"]["correct"] == true);
        CHECK(j["transcript"]["entries"].size() == 1);
        CHECK(j["transcript"]["entries"][0].contains("stream_seed"));
        CHECK(j["replay_matches"] == true);
        CHECK(run({"game", "--policy", "constant", "--max-queries", "0"}).code == 1);
    }
}
