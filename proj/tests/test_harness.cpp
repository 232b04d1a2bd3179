#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "navlab/harness.hpp"
#include "navlab/parallel.hpp"

using namespace navlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("navlab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            }
            else if (ch == '"') {
                quoted = false;
            }
            else {
                cur += ch;
            }
        }
        else if (ch == '"') {
            quoted = true;
        }
        else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        }
        else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::map<std::string, std::string>> rows;
    std::string body;
};

Csv load_csv(const fs::path& p) {
    Csv csv;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            csv.comments.push_back(line);
            continue;
        }
        csv.body += line + "\n";
        auto fields = split_csv_line(line);
        if (csv.header.empty()) {
            csv.header = fields;
            continue;
        }
        REQUIRE(fields.size() == csv.header.size());
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            row[csv.header[i]] = fields[i];
        }
        csv.rows.push_back(row);
    }
    return csv;
}

}

TEST_CASE("geometry specs") {
    CHECK(parse_geometry("cycle:n=1024").size() == 1024);
    CHECK(parse_geometry("cycle:n=100,gamma=3").gamma() == 3.0);
    auto t = parse_geometry("torus:side=8,dims=3");
    CHECK(t.size() == 512);
    CHECK(t.dims() == 3);
    CHECK(parse_geometry("torus:side=8").dims() == 2);
    auto s = parse_geometry("setsystem:branch=2,depth=6");
    CHECK(s.kind() == GeometryKind::SetSystem);
    CHECK(s.size() == 64);
    for (const char* bad : {"cycle", "cycle:", "cycle:n=", "cycle:n=abc", "cycle:n=10,m=3", "ring:n=10",
                            "cycle:n=1", "torus:dims=2", "cycle:n=10,n=12", "setsystem:branch=2",
                            "setsystem:file=/nonexistent/file.txt", "cycle:n=10,gamma=1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_geometry(bad), UsageError);
    }
}

TEST_CASE("config round trip and hash") {
    auto c = ExperimentConfig::from_json(json::parse(
        R"({"geometry":"torus:side=16,dims=2","budgets":["Ba",2.5,"Bminus*0.5"],"seeds":[4,5],"sampler":"rba"})"));
    CHECK(c.geometry == "torus:side=16,dims=2");
    CHECK(c.sampler == SamplerKind::Rba);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
    auto again = ExperimentConfig::from_json(c.to_json());
    CHECK(again.to_json().dump() == c.to_json().dump());
    CHECK(again.hash() == c.hash());
    CHECK(c.hash().size() == 16);
    CHECK(ExperimentConfig{}.hash() != c.hash());
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");

    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"geometri":"cycle:n=4"})")), UsageError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"theta":"one"})")), UsageError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"seeds":[]})")), UsageError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"sweep":{"points":0}})")), UsageError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"sampler":"mcmc"})")), UsageError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse("[1,2]")), UsageError);
}

TEST_CASE("budget names") {
    auto cg = CostGeometry::build(Geometry::cycle(4096), CostSpec::parse("logdensity:alpha=1"));
    auto t = thresholds(cg, 1.0);
    CHECK(resolve_budget("Ba", cg, 1.0) == *t.Ba);
    CHECK(resolve_budget("Bminus", cg, 1.0) == t.Bminus);
    CHECK(resolve_budget("Bplus", cg, 1.0) == t.Bplus);
    CHECK(resolve_budget("B0", cg, 1.0) == t.B0);
    CHECK(resolve_budget("Bbar", cg, 1.0) == cg.unconstrained_budget());
    CHECK(resolve_budget("Ba*0.5", cg, 1.0) == doctest::Approx(0.5 * *t.Ba));
    CHECK(resolve_budget(3.5, cg, 1.0) == 3.5);
    CHECK_THROWS_AS(resolve_budget("Bz", cg, 1.0), UsageError);
    CHECK_THROWS_AS(resolve_budget(-1.0, cg, 1.0), UsageError);
    CHECK_THROWS_AS(resolve_budget(true, cg, 1.0), UsageError);
    auto ex = CostGeometry::build(Geometry::cycle(64), CostSpec::parse("explicit:1,1,1,1,1"));
    CHECK_THROWS_AS(resolve_budget("Ba", ex, 1.0), UsageError);
}

TEST_CASE("csv numbers") {
    CHECK(csv_number(0.1) == "0.1");
    CHECK(csv_number(2.0) == "2");
    CHECK(csv_number(1e-300) == "1e-300");
    CHECK(csv_number(NAN).empty());
    CHECK(csv_number(INFINITY).empty());
    double x = 0.1 + 0.2;
    CHECK(std::stod(csv_number(x)) == x);
}

TEST_CASE("sandwich check") {
    auto tiny = CostGeometry::build(Geometry::cycle(3), CostSpec::parse("explicit:1"));
    auto check = sandwich_check(tiny, 2.0 / 3.0, 20000, 1.0, 1);
    CHECK(check.method == "enumerate");
    REQUIRE(check.exact_vs_law);
    CHECK(check.exact_vs_law->p_value > 0.001);
    REQUIRE(check.scales.size() == 1);
    CHECK(*check.scales[0].mean_law == doctest::Approx(9.0 / 7.0));
    // B = 2/3 lies above Bbar = 1/2, so the product law is unconstrained
    // (q = 1/2, mean 3/2) and the count comparison separates the two laws
    CHECK(check.scales[0].mean_product == doctest::Approx(1.5).epsilon(0.02));
    CHECK_FALSE(check.consistent);
    CHECK(check.product_vs_law->p_value < 1e-6);

    auto cg = CostGeometry::build(Geometry::cycle(64), CostSpec::parse("logdensity:alpha=1"));
    double Ba = *thresholds(cg, 1.0).Ba;
    auto doubled = sandwich_check(cg, Ba, 1000, 2.0, 3);
    CHECK(doubled.method == "rejection");
    CHECK_FALSE(doubled.consistent);
    for (const auto& s : doubled.scales) {
        CHECK(s.z < -3.0);
    }
    CHECK(doubled.acceptance_rate > 0.0);
    CHECK(doubled.acceptance_rate < 1.0);
    CHECK_THROWS_WITH_AS(sandwich_check(cg, Ba, 0, 1.0, 1), "no samples", std::invalid_argument);

    auto j = to_json(doubled);
    CHECK(j["verdict"] == "inconsistent");
    CHECK(j["scales"].size() == cg.K());
}

TEST_CASE("cli usage errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"coherence", "--geometry", "cycle:n=abc"}).code == 2);
    auto r = cli({"coherence", "--geometry", "cycle:n="});
    CHECK(r.code == 2);
    CHECK(r.err.find("navlab:") != std::string::npos);
    CHECK(cli({"optimize", "--cost", "quadratic"}).code == 2);
    CHECK(cli({"optimize", "--geometry", "cycle:n=1024", "--cost", "explicit:1,2"}).code == 2);
    CHECK(cli({"optimize", "--config", "/nonexistent/config.json"}).code == 2);
    auto dir = scratch("usage");
    {
        std::ofstream(dir / "bad.json") << "{ not json";
        std::ofstream(dir / "typo.json") << R"({"pairz": 3})";
    }
    CHECK(cli({"optimize", "--config", (dir / "bad.json").string()}).code == 2);
    CHECK(cli({"optimize", "--config", (dir / "typo.json").string()}).code == 2);
    auto nos = cli({"sandwich-check", "--geometry", "cycle:n=3", "--cost", "explicit:1", "--samples", "0", "--out",
                    dir.string()});
    CHECK(nos.code == 2);
    CHECK(nos.err.find("no samples") != std::string::npos);
    CHECK(cli({"exponent-sweep", "--cost", "indexing:alpha=1", "--out", dir.string()}).code == 2);
    auto version = cli({"--version"});
    CHECK(version.code == 0);
    CHECK(version.out.find(kVersion) != std::string::npos);
    auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("sandwich-check") != std::string::npos);
}

TEST_CASE("cli coherence") {
    auto dir = scratch("coherence");
    auto torus = cli({"coherence", "--geometry", "torus:side=64,dims=2", "--out", dir.string()});
    // the default 10^5 sampled pairs take a few seconds; the verdict is what matters
    CHECK(torus.code == 0);
    auto j = json::parse(torus.out);
    CHECK(j["coherence"]["passH1"] == true);
    CHECK(j["coherence"]["passH2"] == true);
    CHECK(fs::exists(dir / "coherence.json"));

    auto ss = cli({"coherence", "--geometry", "setsystem:branch=2,depth=10", "--out", dir.string()});
    CHECK(ss.code == 0);
    auto js = json::parse(ss.out);
    CHECK(js["axioms"]["pass"] == true);
    CHECK(js["shrinkage"]["violationCount"] == 0);
    CHECK(js["scaleSets"]["missingCount"] == 0);
    CHECK(js["growthWithinConstants"] == true);
    CHECK(js["pass"] == true);
}

TEST_CASE("cli optimize") {
    auto dir = scratch("optimize");
    auto r = cli({"optimize", "--geometry", "cycle:n=4096", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["window"]["BminusLeBa"] == true);
    CHECK(j["window"]["BaLeBplus"] == true);
    for (const auto& s : j["solutions"]) {
        CHECK(s["roundtripResidual"].get<double>() <= 1e-9);
        CHECK(s["stationarityResidual"].get<double>() <= 1e-9);
    }
    auto free = cli({"optimize", "--geometry", "cycle:n=256", "--budget", "Bbar*2", "--out", dir.string()});
    REQUIRE(free.code == 0);
    CHECK(json::parse(free.out)["solutions"][0]["solution"]["lambda"] == 0.0);
    CHECK(fs::exists(dir / "optimize.json"));
}

TEST_CASE("cli sweep output") {
    auto dir = scratch("sweep");
    {
        std::ofstream(dir / "one.json") << R"({"geometry":"cycle:n=1024","cost":"explicit:1,2,3,4,5,6,7,8,9",
            "budgets":[1.5],"seeds":[3,1,2],"pairs":200,"out":")"
                                         << (dir / "one").string() << R"("})";
    }
    auto r = cli({"sweep", "--config", (dir / "one.json").string()});
    REQUIRE(r.code == 0);
    auto csv = load_csv(dir / "one" / "sweep.csv");
    REQUIRE(csv.rows.size() == 3);
    std::set<std::string> hashes;
    for (const auto& row : csv.rows) {
        hashes.insert(row.at("config_hash"));
        CHECK(row.at("status") == "ok");
        CHECK(row.at("cost_spec") == "explicit:1,2,3,4,5,6,7,8,9");
        CHECK(row.at("Ba").empty());
    }
    CHECK(hashes.size() == 1);
    CHECK(csv.rows[0].at("seed") == "1");
    CHECK(csv.rows[2].at("seed") == "3");

    // provenance: the stored config rehashes to the row hash
    std::string stored;
    for (const auto& line : csv.comments) {
        if (line.rfind("# config {", 0) == 0) {
            stored = line.substr(std::string("# config ").size());
        }
    }
    REQUIRE_FALSE(stored.empty());
    CHECK(ExperimentConfig::from_json(json::parse(stored)).hash() == *hashes.begin());

    // reproducibility: identical bodies on rerun
    std::string first = csv.body;
    REQUIRE(cli({"sweep", "--config", (dir / "one.json").string()}).code == 0);
    CHECK(load_csv(dir / "one" / "sweep.csv").body == first);

    // plot script columns exist in the csv
    std::string plot = read_text(dir / "one" / "sweep.gp");
    std::regex column(R"re(column\("([^"]+)"\))re");
    std::set<std::string> header(csv.header.begin(), csv.header.end());
    int refs = 0;
    for (auto it = std::sregex_iterator(plot.begin(), plot.end(), column); it != std::sregex_iterator(); ++it) {
        CHECK(header.count((*it)[1].str()) == 1);
        ++refs;
    }
    CHECK(refs >= 4);
}

TEST_CASE("cli sweep trends") {
    auto dir = scratch("trend");
    auto r = cli({"sweep", "--geometry", "cycle:n=4096", "--budget", "Bminus*0.001", "--budget", "Ba", "--seed", "1",
                  "--pairs", "500", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto csv = load_csv(dir / "sweep.csv");
    REQUIRE(csv.rows.size() == 2);
    double starved = std::stod(csv.rows[0].at("success_rate"));
    double rich = std::stod(csv.rows[1].at("success_rate"));
    CHECK(rich >= 0.99);
    // substrate-only routing reaches only pairs within the step budget
    CHECK(starved < 0.6);
    CHECK(std::stod(csv.rows[0].at("edges")) < std::stod(csv.rows[1].at("edges")));

    auto grid = cli({"sweep", "--geometry", "cycle:n=1024", "--pairs", "100", "--seed", "2", "--out",
                     (dir / "grid").string()});
    REQUIRE(grid.code == 0);
    auto gcsv = load_csv(dir / "grid" / "sweep.csv");
    CHECK(gcsv.rows.size() == 7);
    for (std::size_t i = 1; i < gcsv.rows.size(); ++i) {
        CHECK(std::stod(gcsv.rows[i].at("B")) > std::stod(gcsv.rows[i - 1].at("B")));
    }

    auto rba = cli({"sweep", "--geometry", "torus:side=16,dims=2", "--sampler", "rba", "--pairs", "100", "--out",
                    (dir / "rba").string()});
    REQUIRE(rba.code == 0);
    CHECK(load_csv(dir / "rba" / "sweep.csv").rows.size() == 5);

    auto ex = cli({"sweep", "--geometry", "cycle:n=16", "--sampler", "exact", "--budget", "0.5", "--pairs", "50",
                   "--out", (dir / "exact").string()});
    REQUIRE(ex.code == 0);
    for (const auto& row : load_csv(dir / "exact" / "sweep.csv").rows) {
        CHECK(row.at("status") == "ok");
    }
}

TEST_CASE("cli exponent sweep") {
    auto dir = scratch("exponent");
    {
        std::ofstream(dir / "cfg.json") << R"({"geometry":"cycle:n=4096","cost":"logdensity:alpha=1",
            "exponents":[0.8,1.0,1.4],"seeds":[1],"pairs":400,"route_budget":15})";
    }
    auto r = cli({"exponent-sweep", "--config", (dir / "cfg.json").string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto csv = load_csv(dir / "exponent.csv");
    REQUIRE(csv.rows.size() == 3);
    std::map<std::string, std::map<std::string, std::string>> by;
    for (const auto& row : csv.rows) {
        by[row.at("exponent")] = row;
    }
    double K = 11;
    double per_vertex = std::stod(by["1"].at("edges_per_vertex"));
    CHECK(per_vertex >= 0.5 * K);
    CHECK(per_vertex <= 2 * K);
    CHECK(std::stod(by["0.8"].at("mean_degree")) > std::stod(by["1"].at("mean_degree")));
    CHECK(std::stod(by["1.4"].at("success_rate")) < std::stod(by["1"].at("success_rate")));
    CHECK(fs::exists(dir / "exponent.gp"));
}

TEST_CASE("cli binary exit codes") {
    CHECK(std::system((std::string(NAVLAB_CLI) + " coherence --geometry bogus > /dev/null 2>&1").c_str()) != 0);
    int status = std::system((std::string(NAVLAB_CLI) + " optimize --geometry cycle:n=bad > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(status) == 2);
    auto dir = scratch("binary");
    status = std::system((std::string(NAVLAB_CLI) + " optimize --geometry cycle:n=64 --out " + dir.string() +
                          " > /dev/null 2>&1")
                             .c_str());
    CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("thread cap from the environment") {
    setenv("NAVLAB_THREADS", "1", 1);
    configure_threads_from_env();
    CHECK(thread_count() == 1);
    unsetenv("NAVLAB_THREADS");
}
