#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "farmsim/backend.hpp"
#include "farmsim/cli.hpp"

using namespace farmsim;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir() {
    std::string tmpl = (fs::temp_directory_path() / "farmsim-cli-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    REQUIRE(mkdtemp(buf.data()) != nullptr);
    return fs::path(buf.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

struct CliResult {
    int rc = 0;
    std::string out;
    std::string err;
};

CliResult run_args(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"farmsim"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.rc = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

int spawn(const std::string& args, const fs::path& dir) {
    std::string cmd = std::string("\"") + FARMSIM_CLI_PATH + "\" " + args + " > \"" +
                      (dir / "stdout.txt").string() + "\" 2> \"" +
                      (dir / "stderr.txt").string() + "\"";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

const char* kTwoHopFixture = R"({
  "seed": 5,
  "durations": {"run_s": 86400},
  "intervals": {"sample_s": 600, "flush_s": 60},
  "nodes": [
    {"id": 1, "label": "barn plot", "pos": [120, 0]},
    {"id": 2, "pos": [500, 500], "connectivity": "disconnected"}
  ],
  "gateways": [
    {"id": 10, "pos": [0, 0], "internet": false},
    {"id": 20, "pos": [800, 0], "kind": "lorawan"}
  ],
  "links": [
    {"node": 1, "to_gateway": 10, "distance_m": 120, "probs": [0.7, 0.1, 0.2]},
    {"from_gateway": 10, "to_gateway": 20, "distance_m": 800, "sf": 9,
     "probs": [0.9, 0.05, 0.05]}
  ],
  "ferry": {"drone": 1, "interval_s": 43200, "route": [2], "speed_mps": 10}
})";

const char* kSweepFixture = R"({
  "seed": 1,
  "durations": {"run_s": 4000},
  "intervals": {"sample_s": 1, "flush_s": 1},
  "nodes": [{"id": 1, "pos": [120, 0]}],
  "gateways": [
    {"id": 10, "pos": [0, 0], "internet": false},
    {"id": 20, "pos": [800, 0], "kind": "lorawan"}
  ],
  "links": [
    {"node": 1, "to_gateway": 10, "distance_m": 120,
     "probs": [0.6215, 0.0764, 0.3021]},
    {"from_gateway": 10, "to_gateway": 20, "distance_m": 800, "sf": 9,
     "probs": [0.8827, 0.0894, 0.0279]}
  ]
})";

} // namespace

TEST_CASE("the installed binary distinguishes I/O errors from bad input") {
    fs::path dir = make_temp_dir();

    int rc = spawn("simulate \"" + (dir / "missing.json").string() + "\" -o \"" +
                       (dir / "out").string() + "\"",
                   dir);
    CHECK(rc == cli::kExitIoError);
    CHECK(slurp(dir / "stderr.txt").find("cannot open") != std::string::npos);

    spit(dir / "bad.json", R"({
      "nodes": [{"id": 1, "pos": [10, 0]}],
      "gateways": [{"id": 10, "pos": [0, 0]}],
      "links": [{"node": 1, "to_gateway": 10, "distance_m": 10, "sf": 13}],
      "filters": {"humidity_pct": [80, 20]}
    })");
    rc = spawn("simulate \"" + (dir / "bad.json").string() + "\" -o \"" +
                   (dir / "out").string() + "\"",
               dir);
    CHECK(rc == cli::kExitUsage);
    std::string errors = slurp(dir / "stderr.txt");
    CHECK(errors.find("spreading factor") != std::string::npos);
    CHECK(errors.find("humidity_pct range is inverted") != std::string::npos);

    spit(dir / "broken.json", "{ this is not json");
    rc = spawn("simulate \"" + (dir / "broken.json").string() + "\"", dir);
    CHECK(rc == cli::kExitUsage);

    fs::remove_all(dir);
}

TEST_CASE("usage errors and help behave like a normal unix tool") {
    CliResult help = run_args({"--help"});
    CHECK(help.rc == cli::kExitOk);
    CHECK(help.out.find("simulate") != std::string::npos);
    CHECK(help.out.find("sweep") != std::string::npos);
    CHECK(help.out.find("report") != std::string::npos);

    CHECK(run_args({}).rc == cli::kExitUsage);
    CHECK(run_args({"explode"}).rc == cli::kExitUsage);
    CHECK(run_args({"simulate"}).rc == cli::kExitUsage);
    CHECK(run_args({"sweep", "x.json", "-n", "0"}).rc == cli::kExitUsage);
}

TEST_CASE("simulate writes its outputs and reruns are byte-identical") {
    fs::path dir = make_temp_dir();
    spit(dir / "scenario.json", kTwoHopFixture);

    auto simulate = [&dir](const char* sub) {
        return run_args({"simulate", (dir / "scenario.json").string(), "-o",
                         (dir / sub).string(), "--persist", "--trace"});
    };
    CliResult a = simulate("a");
    REQUIRE_MESSAGE(a.rc == cli::kExitOk, a.err);
    CHECK(a.out.find("run: 86400 s, 2 nodes, seed 5") != std::string::npos);
    CHECK(a.out.find("wrote: readings.csv") != std::string::npos);

    CliResult b = simulate("b");
    REQUIRE(b.rc == cli::kExitOk);
    // stdout matches apart from the trailing "wrote: ... in <dir>" line
    CHECK(a.out.substr(0, a.out.find("wrote:")) ==
          b.out.substr(0, b.out.find("wrote:")));

    for (const char* name :
         {"readings.csv", "stability.csv", "nmad_report.json", "records.ndjson",
          "trace.ndjson"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / "a" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }

    std::string readings = slurp(dir / "a" / "readings.csv");
    CHECK(readings.rfind(backend::kCsvHeader, 0) == 0);
    std::string stability = slurp(dir / "a" / "stability.csv");
    CHECK(stability.rfind("scope,node,expected,normal,error,missing,pdr,per,pmr\n", 0) ==
          0);
    CHECK(stability.find("hop1,1,144,") != std::string::npos);
    CHECK(stability.find("end_to_end,2,144,0,0,144,0.0000,0.0000,1.0000") !=
          std::string::npos);

    // --seed beats the scenario seed and changes the outcome files
    CliResult c = run_args({"simulate", (dir / "scenario.json").string(), "-o",
                            (dir / "c").string(), "--seed", "99"});
    REQUIRE(c.rc == cli::kExitOk);
    CHECK(c.out.find("seed 99") != std::string::npos);
    CHECK(slurp(dir / "c" / "readings.csv") != readings);

    fs::remove_all(dir);
}

TEST_CASE("report rebuilds the simulate-time report from the record log") {
    fs::path dir = make_temp_dir();
    spit(dir / "scenario.json", kTwoHopFixture);

    CliResult sim = run_args({"simulate", (dir / "scenario.json").string(), "-o",
                              (dir / "a").string(), "--persist"});
    REQUIRE(sim.rc == cli::kExitOk);

    CliResult rep = run_args({"report", (dir / "a" / "records.ndjson").string(), "-o",
                              (dir / "r").string()});
    REQUIRE_MESSAGE(rep.rc == cli::kExitOk, rep.err);
    CHECK(slurp(dir / "r" / "nmad_report.json") == slurp(dir / "a" / "nmad_report.json"));
    CHECK(rep.out.find("barn plot") != std::string::npos);

    // a mid-run window sees only that window's traffic
    CliResult mid = run_args({"report", (dir / "a" / "records.ndjson").string(), "-o",
                              (dir / "m").string(), "--at", "7200", "--window", "3600"});
    REQUIRE(mid.rc == cli::kExitOk);
    CHECK(slurp(dir / "m" / "nmad_report.json") != slurp(dir / "r" / "nmad_report.json"));

    CHECK(run_args({"report", (dir / "a" / "readings.csv").string()}).rc ==
          cli::kExitUsage);
    CHECK(run_args({"report", (dir / "nope.ndjson").string()}).rc == cli::kExitIoError);

    fs::remove_all(dir);
}

TEST_CASE("a seed sweep reproduces the configured hop arithmetic on average") {
    fs::path dir = make_temp_dir();
    spit(dir / "scenario.json", kSweepFixture);

    auto sweep = [&dir](const char* sub) {
        return run_args({"sweep", (dir / "scenario.json").string(), "-o",
                         (dir / sub).string(), "--first-seed", "100", "-n", "8"});
    };
    CliResult a = sweep("a");
    REQUIRE_MESSAGE(a.rc == cli::kExitOk, a.err);
    CliResult b = sweep("b");
    REQUIRE(b.rc == cli::kExitOk);
    CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));

    std::istringstream csv(slurp(dir / "a" / "sweep.csv"));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == "seed,scope,node,expected,normal,error,missing,pdr,per,pmr");

    int seed_rows = 0;
    std::vector<std::string> mean_e2e;
    while (std::getline(csv, line)) {
        std::vector<std::string> cols;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        REQUIRE(cols.size() == 10);
        if (cols[0] != "mean" && cols[0] != "std") {
            ++seed_rows;
            long seed = std::stol(cols[0]);
            CHECK(seed >= 100);
            CHECK(seed < 108);
        } else if (cols[0] == "mean" && cols[1] == "end_to_end") {
            mean_e2e = cols;
        }
    }
    CHECK(seed_rows == 8 * 3); // three scopes per node per seed

    REQUIRE_FALSE(mean_e2e.empty());
    double pdr = std::stod(mean_e2e[7]);
    double per = std::stod(mean_e2e[8]);
    double pmr = std::stod(mean_e2e[9]);
    CHECK(pdr == doctest::Approx(0.6215 * 0.8827).epsilon(0.02));
    CHECK(per == doctest::Approx(0.6215 * 0.0894).epsilon(0.10));
    CHECK(pmr == doctest::Approx(1.0 - 0.6215 * 0.8827 - 0.6215 * 0.0894).epsilon(0.03));

    fs::remove_all(dir);
}
