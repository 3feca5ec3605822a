// Earthquake catalog ingestion and coupled-earthquake feature extraction.
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "quakefis/anfis.hpp"
#include "quakefis/csv_format.hpp"

namespace quakefis {

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kKmPerMile = 1.609344;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

struct SeismicEvent {
    std::string id;
    Timestamp origin_time;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<double> depth_km;
    double magnitude = 0.0;

    GeoPoint location() const noexcept { return {lat, lon}; }
};

/// Malformed catalog or couples file. `line()` is 1-based and counts the header.
class CatalogParseError : public std::runtime_error {
public:
    CatalogParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline constexpr const char* kCatalogHeader = "id,origin_time,lat,lon,depth_km,mag";

/// Reads `id,origin_time,lat,lon,depth_km,mag` rows and returns them sorted by
/// (origin_time, id). An empty stream or a header-only file yields no events.
std::vector<SeismicEvent> parse_catalog(std::istream& in);
std::vector<SeismicEvent> read_catalog(const std::filesystem::path& path);
std::string catalog_to_csv(std::span<const SeismicEvent> events);

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(GeoPoint p, GeoPoint q);

struct CouplingConfig {
    double min_mag = 5.0;
    double max_dt_days = 91.3;                  // three months
    double max_dist_km = 190.0 * kKmPerMile;    // 190 miles
    double horizon_days = 182.6;                // six months
    std::optional<double> target_radius_km;     // unset: whole catalog

    void validate() const;
};

struct CoupleRecord {
    std::string primary_id;
    std::string mate_id;
    Timestamp primary_time;
    GeoPoint primary_location;
    /// [primary magnitude, mate magnitude, |dt| in days, distance in km]
    std::array<double, 4> features{};
    std::optional<double> target;
    bool censored = false;
};

/// For each event at or above min_mag, picks the strongest qualifying mate that
/// does not follow it in time. Ties prefer the smaller time gap, then the
/// smaller distance, then the lexicographically smaller id. Throws
/// std::invalid_argument when the events are not time-sorted.
std::vector<CoupleRecord> extract_couples(std::span<const SeismicEvent> events,
                                          const CouplingConfig& config);

/// Target = largest magnitude in (t_primary, t_primary + horizon]. Records whose
/// window runs past the last catalog event are flagged as censored.
std::vector<CoupleRecord> assign_targets(std::vector<CoupleRecord> couples,
                                         std::span<const SeismicEvent> events,
                                         const CouplingConfig& config);

struct DatasetSplit {
    std::vector<CoupleRecord> train;
    std::vector<CoupleRecord> validation;
    std::vector<CoupleRecord> test;
};

/// Couples before `train_before` are split chronologically, the latest
/// `validation_fraction` (rounded down) going to validation. Test holds couples
/// in [test_start, test_end). Throws std::invalid_argument if the training
/// partition comes out empty or the boundaries are out of order.
DatasetSplit split_by_epoch(std::span<const CoupleRecord> couples, Timestamp train_before,
                            Timestamp test_start, Timestamp test_end,
                            double validation_fraction = 0.2);

/// Couples with a known target, as ANFIS samples.
std::vector<Sample> to_samples(std::span<const CoupleRecord> couples);

inline constexpr const char* kCouplesHeader =
    "primary_id,mate_id,x1,x2,x3_days,x4_km,target,censored";

std::string couples_to_csv(std::span<const CoupleRecord> couples);

/// Reads a couples file. Event ids are resolved against `events` to recover
/// each primary's time and location.
std::vector<CoupleRecord> parse_couples(std::istream& in, std::span<const SeismicEvent> events);

}  // namespace quakefis
