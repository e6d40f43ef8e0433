#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "canvass/fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary_path() {
    const char* env = std::getenv("CANVASSCHECK_BIN");
    REQUIRE_MESSAGE(env != nullptr, "CANVASSCHECK_BIN must point at the built binary");
    return env;
}

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    fs::path out_file = fs::temp_directory_path() / "canvasscheck-cli-out.txt";
    std::string command = binary_path() + " " + args + " > " + out_file.string() + " 2>/dev/null";
    int status = std::system(command.c_str());
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, buf.str()};
}

const fs::path& fixture_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "canvass-cli-fixture";
        fs::remove_all(d);
        canvass::generate_fixture_to_dir(canvass::preset_spec("paper-tables"), d);
        return d;
    }();
    return dir;
}

const fs::path& clean_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "canvass-cli-clean";
        fs::remove_all(d);
        canvass::generate_fixture_to_dir(canvass::preset_spec("no-anomaly"), d);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("lcb prints the bound and exits 0") {
    RunResult result = run("lcb --population 916 --sample 100 --agreements 98 --confidence 0.95");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.substr(0, 4) == "862\n");

    RunResult json_result =
        run("lcb --population 10 --sample 5 --agreements 5 --format json");
    CHECK(json_result.exit_code == 0);
    json doc = json::parse(json_result.stdout_text);
    CHECK(doc["sections"]["lcb"]["lower_bound"] == 7);
    CHECK(doc["schema_version"] == 1);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("lcb --population 916").exit_code == 2);          // missing required flags
    CHECK(run("frobnicate").exit_code == 2);                    // unknown subcommand
    CHECK(run("lcb --population 10 --sample 50 --agreements 5").exit_code == 2);  // domain error
    CHECK(run("reconcile-audit --sheets /nonexistent.csv --rows /nonexistent.csv").exit_code == 2);
}

TEST_CASE("reconcile-audit exits 0 on clean books and 1 on findings") {
    RunResult clean = run("reconcile-audit --sheets " + (clean_dir() / "abbs.csv").string() +
                          " --rows " + (clean_dir() / "audit_rows.csv").string() + " --format json");
    CHECK(clean.exit_code == 0);
    json clean_doc = json::parse(clean.stdout_text);
    CHECK(clean_doc["findings"].empty());

    RunResult dirty = run("reconcile-audit --sheets " + (fixture_dir() / "abbs.csv").string() +
                          " --rows " + (fixture_dir() / "audit_rows.csv").string() + " --format json");
    CHECK(dirty.exit_code == 1);
    json dirty_doc = json::parse(dirty.stdout_text);
    int missing = 0;
    for (const auto& finding : dirty_doc["findings"]) {
        if (finding["check"] == "missing_sheet") ++missing;
    }
    CHECK(missing == 11);
}

TEST_CASE("schema violations name the file and line") {
    fs::path bad = fs::temp_directory_path() / "bad_rows.csv";
    std::ofstream(bad) << "county,batch_name,trump,biden,jorgensen\nFulton,b1,-4,2,0\n";
    RunResult result = run("reconcile-audit --sheets " + (clean_dir() / "abbs.csv").string() +
                           " --rows " + bad.string());
    CHECK(result.exit_code == 2);
}

TEST_CASE("verify-groups samples deterministically") {
    std::string base = "verify-groups --cvrs " + (fixture_dir() / "cvr_recount.csv").string() +
                       " --groups " + (fixture_dir() / "claimed_groups_recount.csv").string() +
                       " --phase recount --sample 5 --seed 42 --format json";
    RunResult a = run(base);
    RunResult b = run(base);
    CHECK(a.exit_code == 1);  // verified duplicates are findings
    CHECK(a.stdout_text == b.stdout_text);
    json doc = json::parse(a.stdout_text);
    CHECK(doc["sections"]["verify_groups_recount"]["verified"] == 11);
    CHECK(doc["sections"]["sample"]["indices"].size() == 5);
}

TEST_CASE("report-all produces byte-identical reports across runs") {
    fs::path out_a = fs::temp_directory_path() / "rep-a.json";
    fs::path out_b = fs::temp_directory_path() / "rep-b.json";
    std::string base = "report-all --dir " + fixture_dir().string() + " --seed 1 --format json --out ";
    RunResult a = run(base + out_a.string());
    RunResult b = run(base + out_b.string());
    CHECK(a.exit_code == 1);
    CHECK(b.exit_code == 1);
    std::stringstream sa, sb;
    sa << std::ifstream(out_a).rdbuf();
    sb << std::ifstream(out_b).rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() == a.stdout_text);  // --out carries the same JSON document

    SUBCASE("text report is a projection of the same findings") {
        RunResult text = run("report-all --dir " + fixture_dir().string() + " --seed 1 --format text");
        CHECK(text.exit_code == 1);
        json doc = json::parse(a.stdout_text);
        std::string expected = "findings: " + std::to_string(doc["findings"].size());
        CHECK(text.stdout_text.find(expected) != std::string::npos);
        // Every finding detail line appears verbatim in the text form.
        for (const auto& finding : doc["findings"]) {
            CHECK(text.stdout_text.find(finding["detail"].get<std::string>()) != std::string::npos);
        }
    }
}

TEST_CASE("report-all on the clean fixture exits 0") {
    RunResult result = run("report-all --dir " + clean_dir().string() + " --format json");
    CHECK(result.exit_code == 0);
    json doc = json::parse(result.stdout_text);
    CHECK(doc["findings"].empty());
}

TEST_CASE("generate-fixture honors explicit seeds") {
    fs::path dir = fs::temp_directory_path() / "canvass-cli-gen";
    fs::remove_all(dir);
    RunResult result = run("generate-fixture --preset no-anomaly --dir " + dir.string() + " --seed 9");
    CHECK(result.exit_code == 0);
    json truth = json::parse(std::ifstream(dir / "ground_truth.json"));
    CHECK(truth["seed"] == 9);
    fs::remove_all(dir);
}

TEST_CASE("env seed override applies when no flag is given") {
    fs::path dir = fs::temp_directory_path() / "canvass-cli-env";
    fs::remove_all(dir);
    std::string command = "CANVASS_SEED=123 " + binary_path() +
                          " generate-fixture --preset no-anomaly --dir " + dir.string() +
                          " > /dev/null 2>&1";
    REQUIRE(std::system(command.c_str()) == 0);
    json truth = json::parse(std::ifstream(dir / "ground_truth.json"));
    CHECK(truth["seed"] == 123);
    fs::remove_all(dir);
}
