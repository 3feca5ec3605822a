#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "quakefis/fuzzy.hpp"

using namespace quakefis;

namespace {

SugenoRule centered_rule(std::vector<double> centers, std::vector<double> consequent) {
    SugenoRule r;
    for (double c : centers) r.antecedents.emplace_back(1.0, 2.0, c);
    r.consequent = std::move(consequent);
    return r;
}

FuzzyInferenceSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t rules) {
    std::uniform_real_distribution<double> width(0.3, 3.0), slope(0.5, 3.0), center(-2.0, 2.0),
        coef(-3.0, 3.0);
    std::vector<SugenoRule> rs(rules);
    for (auto& r : rs) {
        for (std::size_t j = 0; j < n; ++j) r.antecedents.emplace_back(width(rng), slope(rng), center(rng));
        for (std::size_t j = 0; j <= n; ++j) r.consequent.push_back(coef(rng));
    }
    return FuzzyInferenceSystem(n, std::move(rs));
}

}  // namespace

TEST_CASE("bell membership values") {
    CHECK(mf_eval(BellMembership(2, 1, 5), 5.0) == 1.0);
    CHECK(mf_eval(BellMembership(2, 1, 5), 7.0) == 0.5);
    // 1/(1 + 0.5^4), extended-precision oracle 0.94117647058823529412
    CHECK(mf_eval(BellMembership(2, 2, 5), 6.0) == doctest::Approx(0.9411764705882353).epsilon(1e-15));
}

TEST_CASE("bell membership rejects invalid parameters and inputs") {
    CHECK_THROWS_AS(BellMembership(0.0, 1, 0), DomainError);
    CHECK_THROWS_AS(BellMembership(-1.0, 1, 0), DomainError);
    CHECK_THROWS_AS(BellMembership(1.0, 0.0, 0), DomainError);
    CHECK_THROWS_AS(BellMembership(1.0, 1.0, std::numeric_limits<double>::infinity()), DomainError);
    const BellMembership mf(1, 1, 0);
    CHECK_THROWS_AS(mf(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(mf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("bell membership properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> width(0.01, 10), slope(0.1, 5), center(-100, 100), d(0, 50);
    for (int trial = 0; trial < 2000; ++trial) {
        const BellMembership mf(width(rng), slope(rng), center(rng));
        const double dd = d(rng);
        CHECK(mf(mf.center()) == 1.0);
        CHECK(std::abs(mf(mf.center() + dd) - mf(mf.center() - dd)) <= 1e-12);
        const double v = mf(mf.center() + dd);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(mf(mf.center() + dd + 0.5) <= v);
    }
}

TEST_CASE("firing strength") {
    const auto rule = centered_rule({1, 2, 3, 4}, {0, 0, 0, 0, 0});
    const std::vector<double> at_centers = {1, 2, 3, 4};
    CHECK(firing_strength(rule, at_centers, AndOperator::product) == 1.0);
    CHECK(firing_strength(rule, at_centers, AndOperator::minimum) == 1.0);

    const std::vector<double> one_off = {1.0, 0.5, 1.0, 1.0};
    CHECK(combine_degrees(one_off, AndOperator::product) == 0.5);
    CHECK(combine_degrees(one_off, AndOperator::minimum) == 0.5);

    const std::vector<double> mixed = {0.9, 0.8, 0.5, 0.25};
    CHECK(combine_degrees(mixed, AndOperator::product) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(combine_degrees(mixed, AndOperator::minimum) == 0.25);

    const std::vector<double> short_x = {1, 2, 3};
    CHECK_THROWS_AS(firing_strength(rule, short_x, AndOperator::product), DimensionError);
}

TEST_CASE("product T-norm never exceeds minimum") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> deg(4);
        for (auto& v : deg) v = u(rng);
        CHECK(combine_degrees(deg, AndOperator::product) <= combine_degrees(deg, AndOperator::minimum));
    }
}

TEST_CASE("system construction validates shapes") {
    CHECK_THROWS_AS(FuzzyInferenceSystem(2, {}), DimensionError);
    CHECK_THROWS_AS(FuzzyInferenceSystem(2, {centered_rule({0}, {0, 0})}), DimensionError);
    CHECK_THROWS_AS(FuzzyInferenceSystem(2, {centered_rule({0, 0}, {0, 0})}), DimensionError);
    CHECK_THROWS_AS(FuzzyInferenceSystem(0, {centered_rule({}, {0})}), DimensionError);
    const FuzzyInferenceSystem fis(2, {centered_rule({0, 0}, {1, 0, 0})});
    CHECK(fis.input_labels() == std::vector<std::string>{"x1", "x2"});
    const std::vector<double> bad = {1, 2, 3};
    CHECK_THROWS_AS(fis.infer(bad), DimensionError);
}

TEST_CASE("weighted-average defuzzification") {
    SUBCASE("single rule returns its consequent") {
        const FuzzyInferenceSystem fis(2, {centered_rule({0, 0}, {1.5, 2.0, -1.0})});
        const std::vector<double> x = {0.7, -0.3};
        CHECK(fis.infer(x) == 1.5 + 2.0 * 0.7 + 1.0 * 0.3);
    }
    SUBCASE("equal firing gives the midpoint") {
        const FuzzyInferenceSystem fis(1, {centered_rule({0}, {5.0, 0}), centered_rule({0}, {6.0, 0})});
        const std::vector<double> x = {0.4};
        CHECK(fis.infer(x) == doctest::Approx(5.5).epsilon(1e-15));
    }
    SUBCASE("hand-computed weighted mean") {
        // (0.2*5.0 + 0.6*6.5) / 0.8 = 4.9 / 0.8 = 6.125
        const std::vector<double> w = {0.2, 0.6}, z = {5.0, 6.5}, x = {0.0};
        CHECK(weighted_average(w, z, x) == doctest::Approx(6.125).epsilon(1e-15));
    }
    SUBCASE("no rule fires") {
        const FuzzyInferenceSystem fis(1, {centered_rule({0}, {5.0, 0})});
        // mu underflows to exactly zero far from the center
        const std::vector<double> x = {1e200};
        try {
            fis.infer(x);
            FAIL("expected NoRuleFiresError");
        } catch (const NoRuleFiresError& e) {
            CHECK(e.input() == x);
        }
    }
}

TEST_CASE("inference stays in the consequent hull and scales with consequents") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> xs(-3, 3), k(-4, 4);
    for (int trial = 0; trial < 500; ++trial) {
        const auto fis = random_system(rng, 3, 3);
        const std::vector<double> x = {xs(rng), xs(rng), xs(rng)};
        const double out = fis.infer(x);
        double lo = 1e300, hi = -1e300;
        for (const auto& r : fis.rules()) {
            lo = std::min(lo, r.consequent_at(x));
            hi = std::max(hi, r.consequent_at(x));
        }
        CHECK(out >= lo);
        CHECK(out <= hi);

        const double kk = k(rng);
        auto rules = fis.rules();
        for (auto& r : rules) {
            for (auto& p : r.consequent) p *= kk;
        }
        const FuzzyInferenceSystem scaled(3, rules);
        CHECK(scaled.infer(x) == doctest::Approx(kk * out).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("minimum operator inference") {
    const FuzzyInferenceSystem fis(2, {centered_rule({0, 0}, {1, 0, 0}), centered_rule({3, 3}, {2, 0, 0})},
                                   AndOperator::minimum);
    const std::vector<double> x = {0, 3};
    // both rules fire at min(1, mu(3)) = 1/(1+81)
    CHECK(fis.infer(x) == doctest::Approx(1.5));
}
