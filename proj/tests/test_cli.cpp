#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "qrep/instance.hpp"
#include "support.hpp"

using namespace qrep;
using nlohmann::json;

namespace {

const std::string bin = QREP_BIN;
const std::string src = QREP_SOURCE_DIR;
const std::string tmp = QREP_TMP_DIR;

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string log = tmp + "/cli_out.txt";
    const std::string cmd = env + " " + bin + " " + args + " > " + log + " 2> " + tmp + "/cli_err.txt";
    const int st = std::system(cmd.c_str());
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, ss.str()};
}

std::string write(const std::string& name, const std::string& text) {
    const std::string p = tmp + "/" + name;
    std::ofstream(p) << text;
    return p;
}

json solve_json(const std::string& args, int* code = nullptr) {
    const std::string out = tmp + "/solve.json";
    std::remove(out.c_str());
    Run r = run("solve " + args + " --out " + out);
    if (code) *code = r.code;
    std::ifstream f(out);
    if (!f) return json();
    return json::parse(f);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("instance schema") {
    const std::string lp = R"({"version": 1, "seed": 1, "problem": {"c": [1], "A": [[1]], "b": [1],
                                "cones": [{"type": "nonneg", "dim": 1}]}})";
    instance::Instance inst = instance::parse(lp);
    CHECK(inst.application.empty());
    CHECK(inst.seed == 1);
    ipm::ConicProblem p = instance::build(inst);
    CHECK(p.num_vars() == 1);

    CHECK_THROWS_AS(instance::parse("{\"version\": 1, \"seed\": 1"), instance::ParseError);
    CHECK_THROWS_AS(instance::parse(R"({"version": 1, "problem": {}})"), instance::ParseError);
    CHECK_THROWS_AS(instance::parse(R"({"version": 2, "seed": 1, "problem": {}})"), instance::ParseError);
    CHECK_THROWS_AS(instance::parse(R"({"version": 1, "seed": 1, "extra": 0, "problem": {}})"), instance::ParseError);
    CHECK_THROWS_AS(instance::parse(R"({"version": 1, "seed": 1})"), instance::ParseError);
    CHECK_THROWS_AS(instance::build(instance::parse(
                        R"({"version": 1, "seed": 1, "problem": {"c": [1, 2], "A": [[1]], "b": [1],
                            "cones": [{"type": "nonneg", "dim": 1}]}})")),
                    std::exception);

    // Complex entries as [re, im] pairs.
    const std::string cplx = R"({"version": 1, "seed": 1, "problem": {"c": [1, 0, 0, 0, 0], "A": [[0, 1, 0, 0, 1]],
        "b": [1], "cones": [{"type": "composed", "G": {"congruence": [[1, [0, 1]], [0, 1]]}, "H": {"identity": 2}}]}})";
    instance::Instance ci = instance::parse(cplx);
    auto maps = instance::declared_maps(ci);
    REQUIRE(maps.size() == 2u);
    CMat I2 = CMat::Identity(2, 2);
    CHECK(std::abs(maps[0].map.apply(I2)(0, 1) - Complex(0, 1)) < 1e-15);

    instance::Instance app = instance::parse(R"({"version": 1, "seed": 3,
        "application": {"name": "gse", "formulation": "qce", "params": {"l": 2}}})");
    instance::Overrides o;
    o.formulation = "qre-lift";
    o.max_iter = 77;
    instance::apply(app, o);
    CHECK(app.formulation == "qre-lift");
    CHECK(app.settings.max_iter == 77);
    CHECK(instance::build(app).name == "gse/qre-lift");
}

TEST_CASE("cli solve") {
    int code = -1;
    json r = solve_json(src + "/instances/lp.json", &code);
    CHECK(code == 0);
    CHECK(r.at("status") == "optimal");
    CHECK(std::abs(r.at("objective").get<double>() - 1.0) < 1e-7);

    Run log = run("solve " + src + "/instances/lp.json");
    CHECK(log.code == 0);
    CHECK(log.out.find(ipm::iter_header()) != std::string::npos);
    CHECK(log.out.find("\"objective\"") != std::string::npos);

    CHECK(run("solve " + write("bad.json", "{\"version\": 1, \"seed\": ")).code == 1);
    CHECK(run("solve " + tmp + "/does-not-exist.json").code == 1);
    CHECK(run("frobnicate").code == 1);

    const std::string infeasible = write("infeasible.json", R"({"version": 1, "seed": 1, "problem": {
        "c": [1, 1], "A": [[1, 1]], "b": [-1], "cones": [{"type": "nonneg", "dim": 2}]}})");
    CHECK(run("solve " + infeasible).code == 2);
    CHECK(run("solve " + src + "/instances/gse_l3.json --max-iter 2").code == 3);

    std::vector<double> v;
    for (const char* f : {"qce", "qre-lift", "ef-subspace-qrd"}) {
        json q = solve_json(src + "/instances/qrd_n2.json --formulation " + f, &code);
        CHECK(code == 0);
        v.push_back(q.at("objective").get<double>());
        CHECK(q.at("formulation") == f);
    }
    CHECK(std::abs(v[0] - v[1]) < 1e-6);
    CHECK(std::abs(v[0] - v[2]) < 1e-6);

    // Memory guard turns an oversized build into an explicit skip.
    Run skip = run("solve " + src + "/instances/gse_l3.json", "QREP_MEMORY_GUARD_DIM=8");
    CHECK(skip.code == 3);
    CHECK(skip.out.find("skipped") != std::string::npos);
}

TEST_CASE("cli bench") {
    Run r = run("bench gse --sizes 2,3 --stable");
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 5u);
    CHECK(rows[0] == std::vector<std::string>{"suite", "param", "m", "formulation", "iter", "solve_time_s",
                                              "time_per_iter_s", "status", "objective"});
    for (int k = 1; k < 5; ++k) {
        CHECK(rows[k][7] == "optimal");
        CHECK(rows[k][5].empty());
    }
    CHECK(std::abs(std::stod(rows[1][8]) - std::stod(rows[2][8])) < 1e-6);
    CHECK(std::abs(std::stod(rows[3][8]) - std::stod(rows[4][8])) < 1e-6);
    CHECK(rows[3][2] == "8");

    // Byte-stable with identical seed and settings.
    CHECK(run("bench gse --sizes 2,3 --stable").out == r.out);
    CHECK(run("bench qqcc --sizes 2 --stable --seed 5").out == run("bench qqcc --sizes 2 --stable --seed 5").out);

    Run empty = run("bench gse --sizes \"\"");
    CHECK(empty.code == 0);
    CHECK(csv_rows(empty.out).size() == 1u);
    CHECK(run("bench chess").code == 1);

    Run ef = run("bench qrd-ef --sizes 4 --formulations ef-subspace-qrd,qre-lift");
    auto er = csv_rows(ef.out);
    REQUIRE(er.size() == 3u);
    CHECK(er[1][7] == "optimal");
    CHECK(er[2][7] == "optimal");
    CHECK(std::stod(er[1][6]) < std::stod(er[2][6]));
    CHECK(std::abs(std::stod(er[1][8]) - std::stod(er[2][8])) < 1e-6);

    // qce stays under a guard of 4, the lifted qre cone does not.
    auto guard = csv_rows(run("bench gse --sizes 2", "QREP_MEMORY_GUARD_DIM=4").out);
    REQUIRE(guard.size() == 3u);
    CHECK(guard[1][7] == "optimal");
    CHECK(guard[2][7] == "skipped");
}

TEST_CASE("cli check") {
    Run psd = run("check " + src + "/instances/psd.json");
    CHECK(psd.code == 0);
    CHECK(psd.out.find("FAIL") == std::string::npos);
    CHECK(psd.out.find("structured-vs-dense") != std::string::npos);

    Run qkd = run("check " + src + "/instances/qkd_dpr_c1.json");
    CHECK(qkd.code == 0);
    CHECK(qkd.out.find("qkd point 3 structured-vs-dense") != std::string::npos);
    CHECK(qkd.out.find("FAIL") == std::string::npos);

    Run neg = run("check " + src + "/instances/nonpositive_map.json");
    CHECK(neg.code == 4);
    CHECK(neg.out.find("FAIL cones[0].G positivity") != std::string::npos);
}
