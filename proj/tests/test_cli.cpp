#include "report.hpp"

#include <doctest.h>

#include <sstream>

using namespace kkf;
using namespace kkf::cli;

namespace {

std::string roundtrip(const std::string& line) { return parse_input(line).canonical_text(); }

int column_of(const std::string& line) {
    try {
        parse_input(line);
    } catch (const CliError& e) {
        return e.column;
    }
    return -1;
}

int run(const std::string& line, std::string* payload = nullptr, std::string* err = nullptr) {
    std::ostringstream out, errs;
    int code = execute(parse_input(line), out, errs);
    if (payload) *payload = out.str();
    if (err) *err = errs.str();
    return code;
}

}  // namespace

TEST_CASE("canonical job lines parse and print back unchanged") {
    const std::string cases[] = {
        "fg-hom --source Z/12 --target Z/18 --window 12",
        "fg-ext --source Z/4 --target InfSum(3; n) --window 12",
        "fg-ext --source Sum(Z^2,Z/6) --target Prufer(3) --window 12",
        "tower-analyze --tower prufer(2) --target Z --window 12",
        "tower-analyze --tower elementary(2,3) --window 16 --truncation 24 --strict",
        "tower-analyze --tower affine(3; 2*n+1) --window 12",
        "tower-analyze --tower free(2) --window 12 --summary",
        "tower-analyze --tower explicit(Z/2; [2]; Z/4) --window 12",
        "tower-analyze --tower stable(Sum(Z,Z/6)) --window 12",
        "pext --tower prufer(3) --target InfSum(3; n) --window 12",
        "uct-report K0A=prufer(2) K1A=stable(0) K0B=0 K1B=InfSum(2; n) --window 12",
        "diagram-check K0A=stable(Z/4) K1A=stable(0) K0B=Z/4 K1B=0 --window 12",
        "catalog-run --window 12",
        "catalog-run example53 --window 20 --out /tmp/x.json",
    };
    for (const std::string& line : cases) {
        CAPTURE(line);
        CHECK(roundtrip(line) == line);
    }
    // every catalog entry round-trips
    for (const std::string name :
         {"remark24", "remark46", "example53", "thm52-suite", "finite-models"}) {
        std::string line = "catalog-run " + name + " --window 12";
        CHECK(roundtrip(line) == line);
    }
}

TEST_CASE("sugared input normalizes to the canonical form") {
    // positional groups, named tower arguments, bare-group tower shorthand
    CHECK(roundtrip("fg-ext Z/4 Z/6") == "fg-ext --source Z/4 --target Z/6 --window 12");
    CHECK(roundtrip("uct-report K0A=prufer(p=3) K1A=0 K0B=0 K1B=InfSum(3; n)") ==
          "uct-report K0A=prufer(3) K1A=stable(0) K0B=0 K1B=InfSum(3; n) --window 12");
    CHECK(roundtrip("pext elementary(2,1) Z") ==
          "pext --tower elementary(2,1) --target Z --window 12");
    CHECK(roundtrip("tower-analyze Z/6") == "tower-analyze --tower stable(Z/6) --window 12");
    CHECK(roundtrip("tower-analyze --tower affine(2; n) --window 12") ==
          "tower-analyze --tower affine(2; 1*n+0) --window 12");

    // normalization is idempotent
    std::string canon = roundtrip("fg-ext Z/4 Z/6");
    CHECK(roundtrip(canon) == canon);
}

TEST_CASE("parse diagnostics carry the offending column") {
    CHECK(column_of("frobnicate Z Z") == 1);
    CHECK(column_of("fg-hom --source Zz --target Z") == 17);          // bad expression
    CHECK(column_of("fg-hom --source Z --target Sum(Z") > 0);        // unbalanced paren
    CHECK(column_of("fg-hom --source Prufer(2) --target Z") == 17);  // source not f.g.
    CHECK(column_of("fg-hom Z") > 0);                                // missing target
    CHECK(column_of("tower-analyze --tower prufer(6)") == 30);       // composite prime
    CHECK(column_of("tower-analyze --tower explicit(Z/2; [2]; Z/2)") == 32);  // non-injective
    CHECK(column_of("pext --tower prufer(2)") > 0);                  // missing target
    CHECK(column_of("fg-hom Z Z --window 3") > 0);                   // window too small
    CHECK(column_of("fg-hom Z Z --bogus") > 0);                      // unknown option
    CHECK(column_of("fg-hom Z Z extra") == 12);                      // leftover argument
    CHECK(column_of("catalog-run nosuch") == 13);                    // unknown entry
    CHECK(column_of("uct-report K0A=prufer(2) K1A=0 K0B=0") > 0);    // missing K1B
}

TEST_CASE("execute maps outcomes to the documented exit codes") {
    std::string payload;
    CHECK(run("fg-ext Z/4 Z/6", &payload) == 0);
    CHECK(payload.find("\"Z/2\"") != std::string::npos);

    // strict turns an honest inconclusive into exit 2, lenient stays 0
    const std::string inconclusive =
        "tower-analyze --tower free(1) --target InfProduct(Z/2) --window 12";
    CHECK(run(inconclusive) == 0);
    CHECK(run(inconclusive + " --strict") == 2);
    // rule-decided jobs are unaffected by strict
    CHECK(run("pext --tower elementary(2,1) --target Z --strict") == 0);

    // unwritable output path
    JobSpec spec = parse_input("fg-hom Z Z");
    spec.out = "/nonexistent-dir/report.json";
    std::ostringstream out, err;
    CHECK(execute(spec, out, err) == 4);
}

TEST_CASE("identical jobs serialize byte-identically") {
    const std::string line = "uct-report K0A=prufer(2) K1A=stable(0) K0B=0 K1B=InfSum(2; n)";
    std::string a, b;
    run(line, &a);
    run(line, &b);
    CHECK(a == b);
    CHECK(!a.empty());
    CHECK(a.find("\"schema\": 1") != std::string::npos);
    CHECK(a.find("timestamp") == std::string::npos);

    // emission flags do not leak into the payload
    std::string c;
    run(line + " --summary", &c);
    CHECK(a == c);
}

TEST_CASE("option echo covers window and truncation") {
    std::string payload;
    run("tower-analyze --tower prufer(2) --target InfSum(2; n) --truncation 8 --window 6",
        &payload);
    ordered_json j = ordered_json::parse(payload);
    CHECK(j["options"]["window"] == 6);
    CHECK(j["options"]["truncation"] == 8);
    CHECK(j["result"]["ext-tower"]["truncated"] == true);
    CHECK(j["result"]["ext-tower"]["stage1-image-orders"].size() == 7);  // k = 0..window

    run("fg-hom Z Z", &payload);
    j = ordered_json::parse(payload);
    CHECK(j["options"]["truncation"] == 16);  // window + 4 default
}

TEST_CASE("pext command reports the closure cross-check when Ext is identified") {
    std::string payload;
    CHECK(run("pext --tower elementary(2,1) --target Z", &payload) == 0);
    ordered_json j = ordered_json::parse(payload);
    CHECK(j["result"]["pext"]["verdict"] == "Zero");
    CHECK(j["result"]["multiples-closure"]["trivial"] == true);
    CHECK(j["result"]["multiples-closure"]["consistent"] == true);
    CHECK(j["result"]["kernel-profile"].size() == 12);
    for (const auto& k : j["result"]["kernel-profile"]) CHECK(k["trivial"] == "no");

    // f.g. colimit: Ext computed directly, closure trivial by boundedness
    CHECK(run("pext --tower stable(Z/6) --target Z/4", &payload) == 0);
    j = ordered_json::parse(payload);
    CHECK(j["result"]["multiples-closure"]["ext-value"] == "Z/2");

    // certified-nonzero pure part: no closed Ext form, so no closure block
    CHECK(run("pext --tower prufer(2) --target InfSum(2; n)", &payload) == 0);
    j = ordered_json::parse(payload);
    CHECK(j["result"]["pext"]["verdict"] == "NonzeroCertified");
    CHECK(j["result"]["pext"]["certificate"]["kind"] == "self-similar-strict-descent");
    CHECK(!j["result"].contains("multiples-closure"));
}

TEST_CASE("uct-report payload carries values, certificates, and citations") {
    std::string payload;
    CHECK(run("uct-report K0A=prufer(3) K1A=0 K0B=0 K1B=InfSum(3; n)", &payload) == 0);
    ordered_json j = ordered_json::parse(payload);
    const ordered_json& deg0 = j["result"]["degrees"][0];
    CHECK(deg0["kk"]["shape"] == "extension");
    CHECK(deg0["kk"]["extension"]["split"] == "no");
    std::string cite = deg0["kk"]["extension"]["citation"];
    CHECK(cite.find("Christensen") != std::string::npos);
    CHECK(deg0["hausdorff-quotient"]["value"] == "Padic(3; InfSum(3; n))");
    CHECK(deg0["fine-structure"]["verdict"] == "NonzeroCertified");
    CHECK(deg0["fine-structure"]["parts"][0]["component"] == "Pext(K_0(A), K_1(B))");
    CHECK(j["result"]["obstructions"]["milnor"]["verdict"] == "nonzero (cited)");
    CHECK(j["result"]["obstructions"]["jensen"]["order-note"] == "the class has infinite order");
    CHECK(j["result"]["lim1-comparison"]["all-match"] == true);
}

TEST_CASE("diagram-check distinguishes verified finite models from rule-derived status") {
    std::string payload;
    CHECK(run("diagram-check K0A=Z/4 K1A=0 K0B=Z/4 K1B=0", &payload) == 0);
    ordered_json j = ordered_json::parse(payload);
    for (const auto& deg : j["result"]["degrees"]) {
        for (const auto& s : deg["sequences"]) CHECK(s["status"] == "verified");
        bool delta_matrix = false;
        for (const auto& m : deg["maps"])
            if (m["name"] == "delta" && m.contains("matrix")) delta_matrix = true;
        CHECK(delta_matrix);
    }

    CHECK(run("diagram-check K0A=prufer(2) K1A=0 K0B=0 K1B=InfSum(2; n)", &payload) == 0);
    j = ordered_json::parse(payload);
    for (const auto& s : j["result"]["degrees"][0]["sequences"])
        CHECK(s["status"] == "rule-derived");
}

TEST_CASE("golden catalog entries pass and the report records each comparison") {
    for (const std::string name : {"remark24", "remark46", "example53"}) {
        CAPTURE(name);
        Report rep = run_catalog(name, kDefaultWindow);
        CHECK(!rep.mismatch);
        const ordered_json& entry = rep.payload["result"]["entries"][0];
        CHECK(entry["name"] == name);
        CHECK(entry["pass"] == true);
        CHECK(entry["checks"].size() >= 6);
        for (const auto& c : entry["checks"]) {
            CAPTURE(c["check"].get<std::string>());
            CHECK(c["pass"] == true);
            CHECK(c["expected"] == c["got"]);
        }
    }
}

TEST_CASE("exit mapping: mismatch wins over strict, strict over success") {
    Report rep;
    CHECK(exit_code(rep, false) == 0);
    CHECK(exit_code(rep, true) == 0);
    rep.inconclusive = true;
    CHECK(exit_code(rep, false) == 0);
    CHECK(exit_code(rep, true) == 2);
    rep.mismatch = true;
    CHECK(exit_code(rep, true) == 3);
    CHECK(exit_code(rep, false) == 3);

    // a passing catalog entry maps to success through the same gate
    Report cat = run_catalog("remark46", kDefaultWindow);
    CHECK(exit_code(cat, false) == 0);
}
