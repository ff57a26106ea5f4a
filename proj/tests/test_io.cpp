#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "misclass/baselines.hpp"
#include "misclass/csv.hpp"
#include "misclass/em.hpp"
#include "misclass/report.hpp"
#include "misclass/sim.hpp"

using namespace misclass;
namespace fs = std::filesystem;

#ifndef MISCLASS_SCHEMA_DIR
#define MISCLASS_SCHEMA_DIR "schemas"
#endif

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "misclass_io_tests";
    fs::create_directories(dir);
    return dir;
}

nlohmann::json load_schema(const std::string& name) {
    std::ifstream in(std::string(MISCLASS_SCHEMA_DIR) + "/" + name);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("dataset CSV round trip") {
    ScenarioConfig scn = ScenarioConfig::setting(1);
    scn.seed = 3;
    scn.n = 120;
    const GeneratedDataset g = generate_dataset(scn, 0);
    const fs::path path = temp_dir() / "roundtrip.csv";
    write_dataset_csv(path.string(), g.data, &g.y_true);

    const DatasetCsv back = read_dataset_csv(path.string());
    CHECK(back.n_dropped == 0);
    CHECK(back.data.ystar() == g.data.ystar());
    CHECK(back.data.x() == g.data.x());  // %.17g survives the round trip bit-exactly
    CHECK(back.data.z() == g.data.z());
    REQUIRE(back.y_true.has_value());
    CHECK(*back.y_true == g.y_true);
}

TEST_CASE("CSV rows with missing fields are dropped and counted") {
    const fs::path path = temp_dir() / "missing.csv";
    write_file(path, "ystar,x1,z1\n1,0.5,1.2\n2,NA,0.7\n1,0.1,\n2,-0.3,0.9\n");
    const DatasetCsv got = read_dataset_csv(path.string());
    CHECK(got.n_dropped == 2);
    CHECK(got.data.n() == 2);
}

TEST_CASE("malformed CSV errors carry the line number") {
    const fs::path dir = temp_dir();
    SUBCASE("non-numeric field") {
        const fs::path p = dir / "junk.csv";
        write_file(p, "ystar,x1,z1\n1,0.5,1.2\n2,zebra,0.7\n");
        CHECK_THROWS_WITH_AS(read_dataset_csv(p.string()), doctest::Contains(":3:"),
                             ParseError);
    }
    SUBCASE("wrong field count") {
        const fs::path p = dir / "short.csv";
        write_file(p, "ystar,x1,z1\n1,0.5\n");
        CHECK_THROWS_WITH_AS(read_dataset_csv(p.string()), doctest::Contains(":2:"),
                             ParseError);
    }
    SUBCASE("out-of-range class") {
        const fs::path p = dir / "class.csv";
        write_file(p, "ystar,x1,z1\n3,0.5,0.6\n");
        CHECK_THROWS_WITH_AS(read_dataset_csv(p.string()), doctest::Contains("ystar"),
                             ParseError);
    }
    SUBCASE("unknown column") {
        const fs::path p = dir / "col.csv";
        write_file(p, "ystar,x1,w1\n1,0.5,0.6\n");
        CHECK_THROWS_AS(read_dataset_csv(p.string()), ParseError);
    }
    SUBCASE("missing file is an I/O error") {
        CHECK_THROWS_AS(read_dataset_csv((dir / "absent.csv").string()), IoError);
    }
}

TEST_CASE("fit result JSON validates against the shipped schema") {
    ScenarioConfig scn = ScenarioConfig::setting(1);
    scn.seed = 5;
    scn.n = 400;
    const GeneratedDataset g = generate_dataset(scn, 0);
    const nlohmann::json schema = load_schema("fit_result.schema.json");

    SUBCASE("em") {
        const nlohmann::json j = fit_result_to_json(fit_em(g.data));
        CHECK(validate_schema(j, schema).empty());
        CHECK(j["estimates"]["gamma1"].is_object());
        CHECK(j["schema_version"] == 1);
    }
    SUBCASE("naive leaves absent blocks null") {
        const nlohmann::json j = fit_result_to_json(fit_naive(g.data));
        CHECK(validate_schema(j, schema).empty());
        CHECK(j["estimates"]["gamma1"].is_null());
        CHECK(j["estimates"]["gamma2"].is_null());
        CHECK(j["rates"].is_null());
    }
    SUBCASE("perfect-specificity EM nulls only gamma2") {
        const nlohmann::json j = fit_result_to_json(
            fit_one_directional_em(g.data, Restriction::perfect_specificity));
        CHECK(validate_schema(j, schema).empty());
        CHECK(j["estimates"]["gamma1"].is_object());
        CHECK(j["estimates"]["gamma2"].is_null());
    }
    SUBCASE("schema violations are reported") {
        nlohmann::json j = fit_result_to_json(fit_naive(g.data));
        j.erase("loglik");
        const auto errors = validate_schema(j, schema);
        REQUIRE(!errors.empty());
        CHECK(errors[0].find("loglik") != std::string::npos);
    }
}

TEST_CASE("study summary JSON validates and the replicate CSV is complete") {
    ScenarioConfig scn = ScenarioConfig::setting(1);
    scn.seed = 7;
    scn.n = 500;
    scn.n_realizations = 2;
    scn.estimators = {Method::em, Method::naive};
    const StudyReport report = run_study(scn, 1);

    const nlohmann::json j = study_report_to_json(report);
    CHECK(validate_schema(j, load_schema("study_summary.schema.json")).empty());
    CHECK(j["methods"].contains("em"));
    CHECK(j["methods"]["em"]["coefficients"].contains("gamma_12z1"));

    const fs::path csv = temp_dir() / "replicates.csv";
    write_replicates_csv(csv.string(), report);
    std::ifstream in(csv);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * 2);  // header + reps x methods
}

TEST_CASE("manifest JSON carries the config hash and validates") {
    const nlohmann::json config{{"setting", 2}, {"seed", 7}};
    const nlohmann::json manifest =
        make_manifest("simulate", config, 7, {"dataset.csv"}, 0.25);
    CHECK(validate_schema(manifest, load_schema("manifest.schema.json")).empty());
    CHECK(manifest["config_hash"] == config_hash(config));
    CHECK(config_hash(config) != config_hash(nlohmann::json{{"setting", 3}, {"seed", 7}}));
    CHECK(config_hash(config).rfind("fnv1a:", 0) == 0);
}

TEST_CASE("atomic JSON writes leave no temp files behind") {
    const fs::path path = temp_dir() / "atomic.json";
    write_json_atomic(path.string(), nlohmann::json{{"ok", true}});
    CHECK(fs::exists(path));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    std::ifstream in(path);
    const nlohmann::json back = nlohmann::json::parse(in);
    CHECK(back["ok"] == true);
}

TEST_CASE("render helpers produce aligned, greppable text") {
    ScenarioConfig scn = ScenarioConfig::setting(1);
    scn.seed = 9;
    scn.n = 400;
    const GeneratedDataset g = generate_dataset(scn, 0);
    const std::string fit_table = render_fit_table(fit_em(g.data));
    CHECK(fit_table.find("beta_x1") != std::string::npos);
    CHECK(fit_table.find("average sensitivity") != std::string::npos);

    scn.n_realizations = 2;
    scn.estimators = {Method::em};
    const std::string study_table = render_study_tables(run_study(scn, 1));
    CHECK(study_table.find("rMSE") != std::string::npos);
    CHECK(study_table.find("P(Y = 1)") != std::string::npos);
}
