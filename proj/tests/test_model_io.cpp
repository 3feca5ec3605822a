#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "quakefis/model_io.hpp"

using namespace quakefis;

namespace {

FuzzyInferenceSystem awkward_system() {
    // Values with long binary expansions catch any lossy formatting.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10, 10);
    std::vector<SugenoRule> rules(3);
    for (auto& r : rules) {
        for (int j = 0; j < 4; ++j) {
            r.antecedents.emplace_back(std::abs(u(rng)) + 1e-9, std::abs(u(rng)) + 0.1, u(rng) / 3.0,
                                       "L" + std::to_string(j));
        }
        for (int j = 0; j < 5; ++j) r.consequent.push_back(u(rng) * 1e-7 + 1.0 / 3.0);
    }
    return FuzzyInferenceSystem(4, rules, AndOperator::minimum, {"mag", "mate", "dt", "dist"});
}

}  // namespace

TEST_CASE("model JSON round-trips bit-exactly") {
    const auto fis = awkward_system();
    const std::string text = model_to_json(fis);
    const auto back = model_from_json(text);
    CHECK(back == fis);
    CHECK(model_to_json(back) == text);
    CHECK(back.and_operator() == AndOperator::minimum);
    CHECK(back.input_labels() == fis.input_labels());
}

TEST_CASE("model files") {
    const auto dir = std::filesystem::temp_directory_path() / "quakefis_model_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model.json";
    std::ofstream(path) << model_to_json(awkward_system());
    CHECK(load_model(path) == awkward_system());
    CHECK_THROWS_AS(load_model(dir / "absent.json"), std::ios_base::failure);
    std::filesystem::remove_all(dir);
}

TEST_CASE("model format errors") {
    std::string text = model_to_json(awkward_system());
    const auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 7");
    try {
        model_from_json(text);
        FAIL("expected ModelFormatError");
    } catch (const ModelFormatError& e) {
        CHECK(std::string(e.what()).find("version 1") != std::string::npos);
    }
    CHECK_THROWS_AS(model_from_json("{not json"), ModelFormatError);
    CHECK_THROWS_AS(model_from_json("{}"), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(R"({"version":1,"input_dim":1,"and_operator":"product",
        "input_labels":["x1"],"rules":[{"antecedents":[{"a":-1,"b":2,"c":0,"label":""}],
        "consequent":[0,0]}]})"),
                    std::exception);
}
