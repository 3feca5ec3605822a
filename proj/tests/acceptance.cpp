// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "oracles.hpp"
#include "quakefis/anfis.hpp"
#include "quakefis/catalog.hpp"
#include "quakefis/evaluation.hpp"
#include "quakefis/model_io.hpp"
#include "quakefis/synthetic.hpp"

using namespace quakefis;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradAbsFloor = 1e-7;
constexpr double kGradStep = 1e-6;
constexpr double kLmsCoefTol = 1e-6;
constexpr double kLmsRmseTol = 1e-8;
constexpr double kTrainingRatio = 0.5;
constexpr double kDistanceRelTol = 0.005;
constexpr double kNormalizationTol = 1e-12;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    const char* id;
    const char* title;
    double budget_s;
    std::function<Outcome()> check;
};

FuzzyInferenceSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t rules,
                                   double slope_lo, double slope_hi) {
    std::uniform_real_distribution<double> width(0.5, 3.0), slope(slope_lo, slope_hi), center(-2.0, 2.0),
        coef(-3.0, 3.0);
    std::vector<SugenoRule> rs(rules);
    for (auto& r : rs) {
        for (std::size_t j = 0; j < n; ++j) r.antecedents.emplace_back(width(rng), slope(rng), center(rng));
        for (std::size_t j = 0; j <= n; ++j) r.consequent.push_back(coef(rng));
    }
    return FuzzyInferenceSystem(n, std::move(rs));
}

Outcome gradients_match() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> xs(-3, 3), offset(-2, 2);
    std::size_t compared = 0, failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto fis = random_system(rng, 4, 2, 1.0, 3.0);
        std::vector<double> x(4);
        // keep inputs off the centers, where the slope and center partials are not smooth
        for (std::size_t j = 0; j < 4; ++j) {
            do {
                x[j] = xs(rng);
            } while (std::abs(x[j] - fis.rules()[0].antecedents[j].center()) < 0.05 ||
                     std::abs(x[j] - fis.rules()[1].antecedents[j].center()) < 0.05);
        }
        const double target = fis.infer(x) + offset(rng);
        const auto a = flatten(premise_gradients(fis, x, target));
        const auto f = flatten(finite_difference_gradient(fis, x, target, kGradStep));
        for (std::size_t k = 0; k < a.size(); ++k) {
            ++compared;
            const double diff = std::abs(a[k] - f[k]);
            const double scale = std::max(std::abs(a[k]), std::abs(f[k]));
            worst = std::max(worst, diff);
            if (diff > kGradAbsFloor && diff > kGradRelTol * scale) ++failures;
        }
    }
    return {failures == 0, std::to_string(compared) + " partials, " + std::to_string(failures) +
                               " outside tolerance, max absolute difference " + format_double(worst)};
}

Outcome lms_recovers_planted() {
    SugenoRule r1, r2;
    const double c1[] = {0.2, 0.3, 0.25, 0.2}, c2[] = {0.8, 0.7, 0.75, 0.8};
    for (int j = 0; j < 4; ++j) {
        r1.antecedents.emplace_back(0.35, 2.0, c1[j]);
        r2.antecedents.emplace_back(0.30, 2.5, c2[j]);
    }
    r1.consequent = {1.0, 0.5, -0.25, 2.0, 0.75};
    r2.consequent = {-0.5, 1.5, 0.8, -1.0, 0.3};
    const FuzzyInferenceSystem truth(4, {r1, r2});

    PortableRng rng(2024);
    std::vector<Sample> data;
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform();
        data.push_back({x, truth.infer(x)});
    }
    auto blank = truth.rules();
    for (auto& r : blank) std::fill(r.consequent.begin(), r.consequent.end(), 0.0);
    const auto fit = fit_consequents_lms(FuzzyInferenceSystem(4, blank), data);
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            worst = std::max(worst, std::abs(fit.fis.rules()[i].consequent[j] - truth.rules()[i].consequent[j]));
        }
    }
    return {worst <= kLmsCoefTol && fit.rmse < kLmsRmseTol,
            "max coefficient error " + format_double(worst) + ", RMSE " + format_double(fit.rmse)};
}

Outcome training_halves_rmse() {
    PortableRng rng(7);
    std::vector<Sample> data;
    for (int k = 0; k < 500; ++k) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        data.push_back({x, std::sin(2 * x[0]) * std::cos(x[1]) + 0.1 * x[2] * x[3]});
    }
    TrainingConfig cfg;
    cfg.epochs = 200;
    cfg.convergence_tol = 0.0;
    try {
        const auto res = train(init_fis_grid(data, 2, 4).fis, data, {}, cfg);
        const double first = res.report.history.front().train_rmse;
        const double last = res.report.history.back().train_rmse;
        return {last <= kTrainingRatio * first,
                "epoch-1 RMSE " + format_double(first) + ", final " + format_double(last) + " after " +
                    std::to_string(res.report.epochs_run) + " epochs (ratio " + format_double(last / first) + ")"};
    } catch (const TrainingDiverged& e) {
        return {false, std::string("diverged: ") + e.what()};
    }
}

Outcome couples_match_brute_force() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> dist(50, 400), dt(10, 120), horizon(30, 365), radius(50, 500);
    std::size_t total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto ev = oracle::random_catalog(rng, 500);
        CouplingConfig cfg;
        cfg.max_dist_km = dist(rng);
        cfg.max_dt_days = dt(rng);
        cfg.horizon_days = horizon(rng);
        if (trial % 2) cfg.target_radius_km = radius(rng);
        const auto got = assign_targets(extract_couples(ev, cfg), ev, cfg);
        const auto want = oracle::couples(ev, cfg);
        if (got.size() != want.size()) {
            return {false, "trial " + std::to_string(trial) + ": " + std::to_string(got.size()) +
                               " couples, oracle " + std::to_string(want.size())};
        }
        for (std::size_t k = 0; k < got.size(); ++k) {
            const oracle::Couple g{got[k].primary_id, got[k].mate_id, got[k].features[0], got[k].features[1],
                                   got[k].features[2], got[k].features[3]};
            if (!(g == want[k]) ||
                got[k].target != oracle::window_max(ev, got[k].primary_time, got[k].primary_location, cfg)) {
                return {false, "trial " + std::to_string(trial) + ": couple " + got[k].primary_id + " differs"};
            }
        }
        total += got.size();
    }
    return {true, "100 catalogs, " + std::to_string(total) + " couples identical"};
}

struct CityPair {
    const char* a;
    double lat_a, lon_a;
    const char* b;
    double lat_b, lon_b;
    double km;
};

// Reference distances from an independent extended-precision computation.
constexpr CityPair kCityPairs[] = {
    {"Tehran", 35.6892, 51.389, "Shiraz", 29.5918, 52.5837, 687.148040008},
    {"Bandar Abbas", 27.1832, 56.2666, "Kermanshah", 34.3142, 47.065, 1182.99298199},
    {"Ahvaz", 31.3183, 48.6706, "Bushehr", 28.9684, 50.8385, 334.243940975},
    {"Qir 1972", 28.41, 52.79, "Tabas 1978", 33.22, 57.32, 687.71695209},
    {"Bam 2003", 29.0, 58.31, "Manjil 1990", 36.96, 49.41, 1212.30290682},
    {"Khorramabad", 33.4878, 48.3558, "Yasuj", 30.6682, 51.588, 437.025088256},
    {"Isfahan", 32.6546, 51.668, "Baghdad", 33.3152, 44.3661, 684.868133326},
    {"Dubai", 25.2048, 55.2708, "Muscat", 23.588, 58.3829, 362.803540355},
    {"London", 51.5074, -0.1278, "New York", 40.7128, -74.006, 5570.22987366},
    {"Tokyo", 35.6762, 139.6503, "Sydney", -33.8688, 151.2093, 7825.829426},
    {"Los Angeles", 34.0522, -118.2437, "Honolulu", 21.3069, -157.8583, 4119.934887},
    {"Santiago", -33.4489, -70.6693, "Lima", -12.0464, -77.0428, 2466.40719551},
    {"Anchorage", 61.2181, -149.9003, "Kathmandu", 27.7172, 85.324, 8954.47327647},
    {"Reykjavik", 64.1466, -21.9426, "Cape Town", -33.9249, 18.4241, 11463.5955313},
    {"Quito", -0.1807, -78.4678, "Singapore", 1.3521, 103.8198, 19729.3588142},
    {"Wellington", -41.2865, 174.7762, "Suva", -18.1248, 178.4501, 2599.13632809},
    {"Istanbul", 41.0082, 28.9784, "Izmit 1999", 40.76, 29.97, 87.8104060122},
    {"Mexico City", 19.4326, -99.1332, "Guatemala City", 14.6349, -90.5069, 1060.63728787},
    {"Nome", 64.5011, -165.4064, "Anadyr", 64.7337, 177.4968, 812.852454502},
    {"McMurdo", -77.8419, 166.6863, "Ushuaia", -54.8019, -68.303, 4801.60107842},
};
constexpr double kAntipodalKm = 20015.114442035924312;

Outcome distances_match_reference() {
    double worst = 0.0;
    for (const auto& p : kCityPairs) {
        const double d = haversine_km({p.lat_a, p.lon_a}, {p.lat_b, p.lon_b});
        worst = std::max(worst, std::abs(d - p.km) / p.km);
    }
    const bool zero = haversine_km({35.6892, 51.389}, {35.6892, 51.389}) == 0.0;
    const double anti = haversine_km({0.0, 0.0}, {0.0, 180.0});
    const bool antipodal = std::abs(anti - kAntipodalKm) <= 1e-9 * kAntipodalKm;
    return {worst <= kDistanceRelTol && zero && antipodal,
            "20 pairs, worst relative error " + format_double(worst) + ", antipodal " + format_double(anti) +
                " km, zero " + (zero ? "exact" : "wrong")};
}

Outcome beats_baselines() {
    std::string detail;
    bool all = true;
    for (std::uint64_t seed : {1, 2, 3, 4, 5, 42}) {
        SyntheticCatalogConfig sc;
        sc.seed = seed;
        const auto events = generate_synthetic_catalog(sc);
        CouplingConfig cfg;
        cfg.max_dt_days = 182.6;
        cfg.max_dist_km = 600.0;
        const auto couples = assign_targets(extract_couples(events, cfg), events, cfg);

        const Timestamp first = events.front().origin_time, last = events.back().origin_time;
        const Timestamp cut = first + (last - first) * 7 / 10;
        const Timestamp end = last + std::chrono::seconds(1);
        const auto split = split_by_epoch(couples, cut, cut, end);
        const auto tr = to_samples(split.train);
        const auto va = to_samples(split.validation);
        const auto model = train(init_fis_grid(tr, 2, 4).fis, tr, va, TrainingConfig{}).fis;

        const ScoringPeriod period{cut, end};
        const auto alarms = predict_couples(model, split.test, cfg.horizon_days).alarms;
        std::vector<AlarmRecord> always = alarms;
        const double mean = std::accumulate(tr.begin(), tr.end(), 0.0,
                                            [](double s, const Sample& x) { return s + x.target; }) /
                            static_cast<double>(tr.size());
        std::vector<AlarmRecord> constant = alarms;
        for (auto& a : always) a.predicted_mag = 10.0;
        for (auto& a : constant) a.predicted_mag = mean;

        const auto ours = evaluate_alarms(alarms, events, {5.5}, period);
        const auto alarm_all = evaluate_alarms(always, events, {5.5}, period);
        const auto flat = evaluate_alarms(constant, events, {5.5}, period);
        const auto& r = ours.rows[0];
        const bool far_ok = r.false_alarm_rate && alarm_all.rows[0].false_alarm_rate &&
                            *r.false_alarm_rate < *alarm_all.rows[0].false_alarm_rate;
        const bool rmse_ok = ours.rmse && flat.rmse && *ours.rmse < *flat.rmse;
        all = all && far_ok && rmse_ok;
        char line[256];
        std::snprintf(line, sizeof line, "%sseed %llu: FAR %.3f vs %.3f, RMSE %.3f vs %.3f%s",
                      detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed),
                      r.false_alarm_rate.value_or(NAN), alarm_all.rows[0].false_alarm_rate.value_or(NAN),
                      ours.rmse.value_or(NAN), flat.rmse.value_or(NAN), far_ok && rmse_ok ? "" : " (FAIL)");
        detail += line;
    }
    return {all, detail};
}

Outcome round_trip_reproduces() {
    SyntheticCatalogConfig sc;
    sc.seed = 9;
    sc.years = 100;
    const auto events = generate_synthetic_catalog(sc);
    const CouplingConfig cfg;
    const auto couples = assign_targets(extract_couples(events, cfg), events, cfg);
    const Timestamp cut = *parse_iso8601("1985-01-01");
    const auto split = split_by_epoch(couples, cut, cut, *parse_iso8601("2001-01-01"));
    const auto tr = to_samples(split.train);
    const auto va = to_samples(split.validation);
    TrainingConfig tc;
    tc.seed = 11;
    const auto a = train(init_fis_grid(tr, 2, 4).fis, tr, va, tc).fis;
    const auto b = train(init_fis_grid(tr, 2, 4).fis, tr, va, tc).fis;
    const std::string json = model_to_json(a);
    const auto reloaded = model_from_json(json);
    const std::string before = predictions_to_csv(predict_couples(a, couples, cfg.horizon_days).alarms);
    const std::string after = predictions_to_csv(predict_couples(reloaded, couples, cfg.horizon_days).alarms);
    const bool same_model = json == model_to_json(b);
    const bool same_predictions = before == after;
    return {same_model && same_predictions && !couples.empty(),
            std::to_string(couples.size()) + " predictions " +
                (same_predictions ? "byte-identical" : "differ") + " after reload, repeated training " +
                (same_model ? "identical" : "differs")};
}

Outcome outputs_stay_bounded() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> xs(-4, 4);
    std::size_t violations = 0, silent = 0;
    double worst_norm = 0.0;
    for (int trial = 0; trial < 100000; ++trial) {
        const auto fis = random_system(rng, 4, 2 + trial % 3, 0.5, 3.0);
        const std::vector<double> x = {xs(rng), xs(rng), xs(rng), xs(rng)};
        const auto t = anfis_forward(fis, x);
        if (!(t.firing.sum() > 0.0)) {
            ++silent;
            continue;
        }
        worst_norm = std::max(worst_norm, std::abs(t.normalized.sum() - 1.0));
        const double z = fis.infer(x);
        if (z < t.consequents.minCoeff() || z > t.consequents.maxCoeff()) ++violations;
    }
    return {violations == 0 && worst_norm <= kNormalizationTol,
            "100000 trials, " + std::to_string(violations) + " outside the hull, max |sum(wbar) - 1| " +
                format_double(worst_norm) + ", " + std::to_string(silent) + " silent"};
}

}  // namespace

int main(int argc, char** argv) {
    // optional arguments select criteria by id, e.g. `acceptance A1 A5`
    const std::vector<std::string> only(argv + 1, argv + argc);
    const Criterion criteria[] = {
        {"A1", "analytic premise gradients match central differences", 10.0, gradients_match},
        {"A2", "least squares recovers planted consequents", 1.0, lms_recovers_planted},
        {"A3", "hybrid training at least halves the epoch-1 RMSE", 30.0, training_halves_rmse},
        {"A4", "couples and targets match brute force", 30.0, couples_match_brute_force},
        {"A5", "haversine matches reference distances", 1.0, distances_match_reference},
        {"A6", "trained model beats both baselines on synthetic catalogs", 60.0, beats_baselines},
        {"A7", "save/load and reseeding reproduce outputs", 30.0, round_trip_reproduces},
        {"A8", "outputs stay in the consequent hull", 5.0, outputs_stay_bounded},
    };
    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s %s: %s (%.2fs of %.0fs) %s%s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs, c.budget_s,
                    o.detail.c_str(), in_time ? "" : " [over time budget]");
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion matches the given ids\n");
        return 2;
    }
    std::printf("%d of %d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
