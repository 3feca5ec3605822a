// Synthetic regional catalogs with a planted coupled-earthquake precursor rule.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "quakefis/catalog.hpp"

namespace quakefis {

/// Uniform doubles from a fully specified engine, so generated catalogs are
/// identical across standard-library implementations.
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

struct SyntheticCatalogConfig {
    std::uint64_t seed = 1;
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{1900} / 1 / 1}};
    double years = 150.0;

    // Background: Poisson in time, Gutenberg-Richter magnitudes truncated to
    // [min_mag, max_mag], epicenters clustered around a few source zones.
    // The default cap keeps background events below the follow-up range, so
    // events of M >= follow_mag_min come from the planted rule.
    double background_rate_per_year = 20.0;
    double min_mag = 4.0;
    double max_mag = 5.4;
    double b_value = 1.0;
    double lat_min = 27.0, lat_max = 35.0;
    double lon_min = 46.0, lon_max = 56.0;
    int source_zones = 3;
    double zone_radius_deg = 0.8;
    double zone_fraction = 0.9;  // share of background events drawn from the zones

    // Planted rule: whenever an event completes a couple under `rule`, an
    // event of magnitude [follow_mag_min, follow_mag_max] follows within
    // rule.horizon_days with probability `follow_probability`.
    CouplingConfig rule{5.0, 91.0, 306.0, 182.6, std::nullopt};
    double follow_probability = 0.8;
    double follow_mag_min = 5.5;
    double follow_mag_max = 6.5;
};

/// Events sorted by time with ids `bg-<n>` (background) and `tr-<n>` (triggered).
std::vector<SeismicEvent> generate_synthetic_catalog(const SyntheticCatalogConfig& config);

}  // namespace quakefis
