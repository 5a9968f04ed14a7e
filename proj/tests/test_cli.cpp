#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string bin() { return TREEPARK_BIN; }

int run(const std::string& args) {
    int rc = std::system((bin() + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("treepark_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("bound-upper writes a certificate and exits 0") {
    fs::path dir = fresh_dir("bu");
    CHECK(run("bound-upper --d 2 --arrival two:0.09 --depth 50 --scale 200 --out " +
              dir.string()) == 0);
    CHECK(fs::exists(dir / "certificate.json"));
    CHECK(fs::exists(dir / "bound-upper.manifest.json"));
    std::string cert = slurp(dir / "certificate.json");
    CHECK(cert.find("\"alpha\": \"0.09\"") != std::string::npos);
    CHECK(cert.find("\"kind\": \"upper\"") != std::string::npos);
}

TEST_CASE("bound-upper refusal exits 3") {
    fs::path dir = fresh_dir("ref");
    CHECK(run("bound-upper --d 2 --arrival two:0.03 --depth 30 --scale 120 --out " +
              dir.string()) == 3);
    CHECK(fs::exists(dir / "refusal.json"));
}

TEST_CASE("config errors exit 2") {
    fs::path dir = fresh_dir("cfg");
    CHECK(run("bound-upper --d 2 --arrival nope:1 --out " + dir.string()) == 2);
    CHECK(run("bound-upper --d 2 --out " + dir.string()) == 2);  // missing arrival
    CHECK(run("qn-table --arrival two:0.1 --backend complex --out " + dir.string()) == 2);
    CHECK(run("definitely-not-a-command") == 2);
}

TEST_CASE("resource guards exit 5") {
    fs::path dir = fresh_dir("guard");
    CHECK(run("qn-table --arrival two:0.1 --depth 25 --backend fixed --scale 200 "
              "--support-guard 4 --out " +
              dir.string()) == 5);
}

TEST_CASE("icx-check exit codes and location report") {
    fs::path dir = fresh_dir("icx");
    CHECK(run("icx-check --d 2 --arrival-a two:0.05 --arrival-b three:0.05 --depth 3 --out " +
              dir.string()) == 0);
    std::string csv = slurp(dir / "icx_check.csv");
    CHECK(csv.rfind("depth,t,margin\n", 0) == 0);
    CHECK(run("icx-check --d 2 --arrival-a three:0.05 --arrival-b two:0.05 --depth 2 --out " +
              dir.string()) == 4);
}

TEST_CASE("qn-table over a grid, with replay byte-for-byte") {
    fs::path dir1 = fresh_dir("qn1");
    fs::path dir2 = fresh_dir("qn2");
    CHECK(run("qn-table --d 2 --arrival-kind two --alpha-start 0 --alpha-stop 0.02 "
              "--alpha-step 0.01 --depth 6 --scale 40 --out " +
              dir1.string()) == 0);
    std::string csv = slurp(dir1 / "qn_table.csv");
    CHECK(csv.rfind("alpha,n,q_n\n", 0) == 0);
    // alpha = 0 rows are identically one
    CHECK(csv.find("0,0,1.0000000000000000000000000000000000000000\n") != std::string::npos);
    CHECK(run("replay " + (dir1 / "qn-table.manifest.json").string() + " --out " +
              dir2.string()) == 0);
    CHECK(slurp(dir2 / "qn_table.csv") == csv);
}

TEST_CASE("ex-table emits the growth-rate ratio") {
    fs::path dir = fresh_dir("ex");
    CHECK(run("ex-table --d 2 --arrival two:0.1 --depth 5 --scale 40 --out " + dir.string()) ==
          0);
    std::string csv = slurp(dir / "ex_table.csv");
    CHECK(csv.rfind("alpha,n,ex_n,ratio_lambda_n\n", 0) == 0);
    CHECK(csv.find("0.1,1,0.2") != std::string::npos);  // EX_1 = 2 alpha
}

TEST_CASE("simulate is reproducible across worker counts") {
    fs::path dir1 = fresh_dir("sim1");
    fs::path dir2 = fresh_dir("sim2");
    CHECK(run("simulate --offspring det:2 --arrival two:0.05 --depth 6 --trials 2000 --seed 9 "
              "--workers 1 --out " +
              dir1.string()) == 0);
    CHECK(run("simulate --offspring det:2 --arrival two:0.05 --depth 6 --trials 2000 --seed 9 "
              "--workers 2 --out " +
              dir2.string()) == 0);
    CHECK(slurp(dir1 / "simulate.csv") == slurp(dir2 / "simulate.csv"));
    CHECK(slurp(dir1 / "tau_hist.csv") == slurp(dir2 / "tau_hist.csv"));

    fs::path dir3 = fresh_dir("sim3");
    CHECK(run("replay " + (dir1 / "simulate.manifest.json").string() + " --out " +
              dir3.string()) == 0);
    CHECK(slurp(dir3 / "simulate.csv") == slurp(dir1 / "simulate.csv"));
    CHECK(slurp(dir3 / "tau_hist.csv") == slurp(dir1 / "tau_hist.csv"));
    CHECK(slurp(dir3 / "tau_transform.json") == slurp(dir1 / "tau_transform.json"));
}

TEST_CASE("oracle-check passes and writes its report") {
    fs::path dir = fresh_dir("oracle");
    CHECK(run("oracle-check --instances 60 --seed 4 --out " + dir.string()) == 0);
    CHECK(slurp(dir / "oracle_check.csv") == "instances,mismatches\n60,0\n");
}

TEST_CASE("verify-identities holds on a short exact run") {
    fs::path dir = fresh_dir("vi");
    CHECK(run("verify-identities --d 2 --arrival two:0.08 --depth 7 --out " + dir.string()) == 0);
    std::string csv = slurp(dir / "identities.csv");
    CHECK(csv.find("one-step-recursion,7,0,1") != std::string::npos);
    CHECK(csv.find("closed-form,7,0,1") != std::string::npos);
    CHECK(csv.find("g-tau-identity,7,0,1") != std::string::npos);
}

TEST_CASE("bound-lower and bound-percolation write certificates") {
    fs::path dir = fresh_dir("bl");
    CHECK(run("bound-lower --d 2 --out " + dir.string()) == 0);
    std::string lower = slurp(dir / "bound_lower.json");
    CHECK(lower.find("\"method\": \"catalan-count\"") != std::string::npos);
    CHECK(lower.find("0.0317541") != std::string::npos);
    CHECK(run("bound-percolation --d 3 --k 3 --out " + dir.string()) == 0);
    std::string perc = slurp(dir / "bound_percolation.json");
    CHECK(perc.find("\"alpha\": \"1/9\"") != std::string::npos);
}

TEST_CASE("the environment variable picks the default output directory") {
    fs::path dir = fresh_dir("envout");
    int rc = std::system(("TREEPARK_OUT=" + dir.string() + " " + bin() +
                          " bound-lower --d 2 >/dev/null 2>&1")
                             .c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir / "bound_lower.json"));
}

TEST_CASE("config file mirrors the flags") {
    fs::path dir = fresh_dir("cfgfile");
    std::ofstream cfg(dir / "run.cfg");
    cfg << "d = 2\narrival = \"two:0.12\"\ndepth = 30\nscale = 120\n";
    cfg.close();
    CHECK(run("bound-upper --config " + (dir / "run.cfg").string() + " --out " + dir.string()) ==
          0);
    std::string cert = slurp(dir / "certificate.json");
    CHECK(cert.find("\"n\": 30") != std::string::npos);
}

TEST_SUITE_END();
