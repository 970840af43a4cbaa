#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ulamlab/scenario.hpp"

using namespace ulamlab;
using ulamlab::scenario::Json;

namespace {

Json minimal_stabilize_config() {
    return Json::parse(R"json({
        "kind": "exponential.stabilize",
        "expect": "hur-stable-certified",
        "domain": {"kind": "naturals-add", "extent": 2048},
        "window": {"lo": 0, "hi": 10},
        "functions": {
            "f": {"components": ["2^x"], "perturbation": {"envelope": "2^(-x)", "seed": 5}},
            "g": {"components": ["2^x"]}
        },
        "controls": {"psi": {"arity": 2, "expr": "2*2^x*2^(-y)"}},
        "tolerances": {"tol": 1e-9}
    })json");
}

} // namespace

TEST_CASE("catalog lists every scenario family") {
    const auto& entries = scenario::catalog();
    CHECK(entries.size() >= 15);
    auto has = [&](const std::string& kind) {
        for (const auto& e : entries)
            if (e.kind == kind) return true;
        return false;
    };
    CHECK(has("linear.forward"));
    CHECK(has("additive.hyperstability"));
    CHECK(has("gallery.baker-example"));
    for (const auto& e : entries) {
        CHECK_FALSE(e.description.empty());
        CHECK_FALSE(e.anchor.empty());
    }
}

TEST_CASE("validation reports every problem, not just the first") {
    Json config = minimal_stabilize_config();
    config["functions"]["f"]["perturbation"].erase("seed");
    config["controls"]["psi"]["expr"] = "2*2^x*2^(-z)";
    config["kind"] = "exponential.unknown";

    auto problems = scenario::validate(config);
    REQUIRE(problems.size() >= 3);
    bool seed_named = false, ident_named = false, kind_named = false;
    for (const auto& p : problems) {
        seed_named = seed_named || p.find("without a seed") != std::string::npos;
        ident_named = ident_named || p.find("unknown identifier 'z'") != std::string::npos;
        kind_named = kind_named || p.find("unknown scenario kind") != std::string::npos;
    }
    CHECK(seed_named);
    CHECK(ident_named);
    CHECK(kind_named);

    CHECK(scenario::validate(minimal_stabilize_config()).empty());
}

TEST_CASE("unknown-identifier diagnostics carry the byte offset") {
    Json config = minimal_stabilize_config();
    config["controls"]["psi"]["expr"] = "2*2^x*2^(-z)";
    auto problems = scenario::validate(config);
    REQUIRE(problems.size() == 1);
    CHECK(problems.front().find("offset 10") != std::string::npos);
}

TEST_CASE("run produces byte-identical payloads for equal config and seed") {
    Json config = minimal_stabilize_config();
    auto first = scenario::run(config);
    auto second = scenario::run(config);
    CHECK(first.payload.dump(2) == second.payload.dump(2));
    CHECK(first.exit_code == 0);
}

TEST_CASE("seed override changes the instance deterministically") {
    Json config = minimal_stabilize_config();
    auto base = scenario::run(config);
    auto overridden = scenario::run(config, 1234);
    auto overridden_again = scenario::run(config, 1234);
    CHECK(base.payload.dump() != overridden.payload.dump());
    CHECK(overridden.payload.dump() == overridden_again.payload.dump());
}

TEST_CASE("expect mismatch exits 1") {
    Json config = minimal_stabilize_config();
    config["expect"] = "hypotheses-not-met";
    auto result = scenario::run(config);
    CHECK(result.verdict == "hur-stable-certified");
    CHECK(result.exit_code == 1);
    CHECK(result.payload["expect-matched"] == false);
}

TEST_CASE("unknown kind raises a config error at run time") {
    Json config = minimal_stabilize_config();
    config["kind"] = "nonsense.kind";
    CHECK_THROWS_AS(scenario::run(config), config_error);
}

TEST_CASE("report writer emits deterministic json and 17-digit csv") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ulamlab-test-report";
    fs::remove_all(dir);

    Json config = minimal_stabilize_config();
    auto result = scenario::run(config);
    scenario::write_report(result, dir.string(), "csv", 12.5);

    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "meta.json"));
    REQUIRE(fs::exists(dir / "trace-0.csv"));
    REQUIRE(fs::exists(dir / "bound_profile.csv"));

    {
        std::ifstream in(dir / "report.json");
        Json payload;
        in >> payload;
        CHECK(payload["verdict"] == "hur-stable-certified");
        CHECK(payload["artifact-version"] == scenario::kArtifactVersion);
        // Durations are quarantined in meta.json, outside the payload.
        CHECK_FALSE(payload.contains("duration-ms"));
    }
    {
        std::ifstream in(dir / "trace-0.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "step,distance,ratio");
    }
    CHECK(report::csv_number(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("self-map expressions must land exactly on the grid") {
    Json config = Json::parse(R"json({
        "kind": "linear.forward",
        "expect": "hur-stable-certified",
        "domain": {"kind": "reals-add-grid", "step": "0.25", "extent": [-64, 64]},
        "window": {"lo": 1, "hi": 8},
        "linear": {"rho": "x/3", "p": "2", "q": "0"},
        "functions": {"f": {"components": ["x"]}},
        "controls": {"psi": {"arity": 1, "expr": "1"}},
        "tolerances": {"tol": 1e-9}
    })json");
    // x/3 leaves the quarter-integer grid almost everywhere.
    CHECK_THROWS_AS(scenario::run(config), range_error);
}

TEST_CASE("condition sequences export to csv") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ulamlab-test-conditions";
    fs::remove_all(dir);
    Json config = Json::parse(R"json({
        "kind": "additive.hyperstability",
        "expect": "conditions-not-met",
        "domain": {"kind": "naturals-add", "extent": 4096},
        "window": {"lo": 1, "hi": 8},
        "functions": {},
        "controls": {"psi": {"arity": 2, "expr": "0.1"}},
        "base-pairs": [{"x0": 1, "y0": 1, "x": 1, "y": 1}],
        "tolerances": {"tol": 1e-4, "n-max": 512}
    })json");
    auto result = scenario::run(config);
    CHECK(result.exit_code == 0);
    scenario::write_report(result, dir.string(), "csv", 1.0);
    REQUIRE(fs::exists(dir / "conditions.csv"));
    std::ifstream in(dir / "conditions.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "label,n,value");
}

TEST_CASE("oracle scenario counts functions") {
    Json config = Json::parse(R"json({
        "kind": "exponential.oracle",
        "expect": "oracle-zero-violations",
        "domain": {"kind": "integers-mod-m", "modulus": 2},
        "window": {},
        "oracle": {"modulus": 2, "grid-range": 2},
        "epsilon": 1.0,
        "tolerances": {"tol": 1e-9}
    })json");
    auto result = scenario::run(config);
    CHECK(result.exit_code == 0);
    CHECK(result.payload["oracle"]["functions-checked"] == 625);
    CHECK(result.payload["oracle"]["violations"] == 0);
}
