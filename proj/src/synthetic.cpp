#include "quakefis/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace quakefis {

namespace {

std::chrono::seconds days_to_seconds(double days) {
    return std::chrono::seconds(std::llround(days * kSecondsPerDay));
}

// Inverse-CDF sample of a truncated Gutenberg-Richter law.
double gutenberg_richter(PortableRng& rng, double lo, double hi, double b) {
    const double beta = b * std::log(10.0);
    const double span = 1.0 - std::exp(-beta * (hi - lo));
    return lo - std::log1p(-rng.uniform() * span) / beta;
}

double round_mag(double m) { return std::round(m * 10.0) / 10.0; }

double round_coord(double c) { return std::round(c * 1e4) / 1e4; }

}  // namespace

std::vector<SeismicEvent> generate_synthetic_catalog(const SyntheticCatalogConfig& cfg) {
    PortableRng rng(cfg.seed);
    const Timestamp end = cfg.start + days_to_seconds(cfg.years * 365.25);

    std::vector<GeoPoint> zones;
    for (int z = 0; z < cfg.source_zones; ++z) {
        zones.push_back({rng.uniform(cfg.lat_min + 1.0, cfg.lat_max - 1.0),
                         rng.uniform(cfg.lon_min + 1.0, cfg.lon_max - 1.0)});
    }
    auto random_location = [&]() -> GeoPoint {
        if (!zones.empty() && rng.uniform() < cfg.zone_fraction) {
            const auto& zc = zones[static_cast<std::size_t>(rng.next() % zones.size())];
            const double r = cfg.zone_radius_deg * std::sqrt(rng.uniform());
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            return {std::clamp(zc.lat + r * std::sin(theta), cfg.lat_min, cfg.lat_max),
                    std::clamp(zc.lon + r * std::cos(theta), cfg.lon_min, cfg.lon_max)};
        }
        return {rng.uniform(cfg.lat_min, cfg.lat_max), rng.uniform(cfg.lon_min, cfg.lon_max)};
    };

    auto later = [](const SeismicEvent& a, const SeismicEvent& b) {
        return a.origin_time != b.origin_time ? a.origin_time > b.origin_time : a.id > b.id;
    };
    std::priority_queue<SeismicEvent, std::vector<SeismicEvent>, decltype(later)> pending(later);

    double t_days = 0.0;
    for (std::size_t n = 0;; ++n) {
        t_days += rng.exponential(cfg.background_rate_per_year / 365.25);
        const Timestamp t = cfg.start + days_to_seconds(t_days);
        if (t >= end) break;
        const GeoPoint p = random_location();
        SeismicEvent e;
        e.id = "bg-" + std::to_string(n);
        e.origin_time = t;
        e.lat = round_coord(p.lat);
        e.lon = round_coord(p.lon);
        e.depth_km = std::round(rng.uniform(5.0, 30.0));
        e.magnitude = round_mag(gutenberg_richter(rng, cfg.min_mag, cfg.max_mag, cfg.b_value));
        pending.push(std::move(e));
    }

    // Replay in time order so triggered events can themselves complete couples.
    std::vector<SeismicEvent> out;
    std::size_t triggered = 0;
    while (!pending.empty()) {
        SeismicEvent e = pending.top();
        pending.pop();
        if (e.magnitude >= cfg.rule.min_mag) {
            bool couples = false;
            for (auto it = out.rbegin(); it != out.rend(); ++it) {
                if (days_between(it->origin_time, e.origin_time) > cfg.rule.max_dt_days) break;
                if (it->magnitude >= cfg.rule.min_mag &&
                    haversine_km(it->location(), e.location()) <= cfg.rule.max_dist_km) {
                    couples = true;
                    break;
                }
            }
            if (couples && rng.uniform() < cfg.follow_probability) {
                const double delay = rng.uniform(1.0, cfg.rule.horizon_days);
                const Timestamp t = e.origin_time + days_to_seconds(delay);
                const GeoPoint p = random_location();
                const double mag = round_mag(rng.uniform(cfg.follow_mag_min, cfg.follow_mag_max));
                if (t < end) {
                    SeismicEvent f;
                    f.id = "tr-" + std::to_string(triggered++);
                    f.origin_time = t;
                    f.lat = round_coord(p.lat);
                    f.lon = round_coord(p.lon);
                    f.depth_km = std::round(rng.uniform(5.0, 30.0));
                    f.magnitude = mag;
                    pending.push(std::move(f));
                }
            }
        }
        out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.origin_time != b.origin_time ? a.origin_time < b.origin_time : a.id < b.id;
    });
    return out;
}

}  // namespace quakefis
