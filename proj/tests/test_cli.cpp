#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace std;

namespace {

string bin_path() {
    const char* p = getenv("BIGJUMP_BIN");
    return p ? p : "./tools/bigjump";
}

int run(const string& args, const string& out_file) {
    string cmd = bin_path() + " " + args + " > " + out_file + " 2>&1";
    int rc = system(cmd.c_str());
    return WEXITSTATUS(rc);
}

string slurp(const string& path) {
    ifstream in(path);
    stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// drop comment lines that legitimately differ between runs
string strip_generated(const string& csv) {
    stringstream in(csv), out;
    string line;
    while (getline(in, line))
        if (line.rfind("# generated=", 0) != 0) out << line << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("ratio-scan emits the frozen csv schema") {
    int rc = run("ratio-scan --dist zeta:alpha=3 --n 2 --x 50,100,200 --method exact --out /tmp/bj_r.csv",
                 "/tmp/bj_r.out");
    REQUIRE(rc == 0);
    string csv = slurp("/tmp/bj_r.csv");
    CHECK(csv.find("n,x,prob_sum,n_times_tail,ratio,abs_err,stderr,exact") != string::npos);
    CHECK(csv.find("# dist=zeta:alpha=3") != string::npos);
    // three data rows
    int rows = 0;
    stringstream ss(csv);
    string line;
    while (getline(ss, line))
        if (!line.empty() && line[0] == '2') ++rows;
    CHECK(rows == 3);
}

TEST_CASE("oracle-check exits zero when the identity holds") {
    int rc = run("oracle-check --dist zeta:alpha=3 --n 3 --x 30 --delta 5", "/tmp/bj_o.out");
    CHECK(rc == 0);
    string out = slurp("/tmp/bj_o.out");
    CHECK(out.find("enumeration") != string::npos);
    CHECK(out.find("decomposition") != string::npos);
}

TEST_CASE("fluct reports the residual regime as json") {
    int rc = run("fluct --dist pareto:alpha=3 --n 10 --x 10d --delta inf --samples 300 --seed 7 "
                 "--max-attempts 40000000 --workers 2 --format json --out /tmp/bj_f.json",
                 "/tmp/bj_f.out");
    REQUIRE(rc == 0);
    string js = slurp("/tmp/bj_f.json");
    CHECK(js.find("\"regime\": \"residual-lambda\"") != string::npos);
    CHECK(js.find("\"ks_stat\"") != string::npos);
    CHECK(js.find("\"seed\": 7") != string::npos);
}

TEST_CASE("fluct draws an svg overlay") {
    int rc = run("fluct --dist pareto:alpha=3 --n 5 --x 30 --delta inf --samples 300 --seed 3 "
                 "--max-attempts 40000000 --workers 2 --svg /tmp/bj_f.svg",
                 "/tmp/bj_f2.out");
    REQUIRE(rc == 0);
    string svg = slurp("/tmp/bj_f.svg");
    CHECK(svg.find("<svg") != string::npos);
    CHECK(svg.find("empirical") != string::npos);
    CHECK(svg.find("reference") != string::npos);
}

TEST_CASE("tv-scan replays byte-identically") {
    string args = "tv-scan --dist zeta:alpha=3 --n 3 --x 12 --delta inf --samples 400 --proposals 2000 "
                  "--seed 99 --workers 2 --max-attempts 100000000 --out ";
    REQUIRE(run(args + "/tmp/bj_t1.csv", "/tmp/bj_t1.out") == 0);
    REQUIRE(run(args + "/tmp/bj_t2.csv", "/tmp/bj_t2.out") == 0);
    CHECK(strip_generated(slurp("/tmp/bj_t1.csv")) == strip_generated(slurp("/tmp/bj_t2.csv")));
    CHECK(slurp("/tmp/bj_t1.csv").find("term_ratio,term_collective,tv_l1,tv_sup") != string::npos);
}

TEST_CASE("counterexample subcommand shows the vanishing window") {
    int rc = run("counterexample --dist counterexample:alpha=3,eps=0.5 --n 10,20 --out /tmp/bj_c.csv",
                 "/tmp/bj_c.out");
    REQUIRE(rc == 0);
    string out = slurp("/tmp/bj_c.out");
    CHECK(out.find("window=[0.5,1) ratio=0 ") != string::npos);
}

TEST_CASE("config file values are overridden by flags") {
    {
        ofstream cfg("/tmp/bj_cfg.ini");
        cfg << "dist=zeta:alpha=3\nn=2\nx=40\nmethod=exact\n";
    }
    int rc = run("ratio-scan --config /tmp/bj_cfg.ini --x 60 --out /tmp/bj_cfg.csv", "/tmp/bj_cfg.out");
    REQUIRE(rc == 0);
    string csv = slurp("/tmp/bj_cfg.csv");
    CHECK(csv.find("2,60,") != string::npos);   // x came from the flag
    CHECK(csv.find("2,40,") == string::npos);   // not from the file
}

TEST_CASE("fluct regime override reaches between-band windows") {
    int rc = run("fluct --dist pareto:alpha=3 --n 100 --x 1200 --delta 1 --sampler planted --regime stable "
                 "--samples 500 --seed 9 --workers 2 --format json --out /tmp/bj_reg.json",
                 "/tmp/bj_reg.out");
    REQUIRE(rc == 0);
    string js = slurp("/tmp/bj_reg.json");
    CHECK(js.find("\"regime\": \"stable-neg-h\"") != string::npos);
    CHECK(js.find("\"sampler\": \"planted\"") != string::npos);
    // without the override this window is refused as between bands
    CHECK(run("fluct --dist pareto:alpha=3 --n 100 --x 1200 --delta 1 --sampler planted --samples 100",
              "/tmp/bj_reg2.out") == 1);
}

TEST_CASE("error exit codes") {
    CHECK(run("ratio-scan --dist pareto:alpha=3,bogus=1 --n 2 --x 10", "/tmp/bj_e1.out") == 2);
    CHECK(slurp("/tmp/bj_e1.out").find("bogus") != string::npos);
    CHECK(run("tv-scan --dist pareto:alpha=3 --n 2 --x 1e6 --samples 50 --max-attempts 10000", "/tmp/bj_e2.out") ==
          3);
    CHECK(run("nonsense --dist pareto:alpha=3 --n 2", "/tmp/bj_e3.out") == 2);
    CHECK(run("ratio-scan --dist zeta:alpha=3 --n 2 --x 10 --delta 0.25 --method exact", "/tmp/bj_e4.out") == 1);
}
