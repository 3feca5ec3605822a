#include "quakefis/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace quakefis {

CatalogParseError::CatalogParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

double require_number(std::string_view field, const char* name, std::size_t line) {
    const auto v = parse_double(trim(field));
    if (!v) {
        throw CatalogParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
    }
    return *v;
}

bool time_sorted(std::span<const SeismicEvent> events) {
    return std::is_sorted(events.begin(), events.end(),
                          [](const auto& a, const auto& b) { return a.origin_time < b.origin_time; });
}

}  // namespace

std::vector<SeismicEvent> parse_catalog(std::istream& in) {
    std::vector<SeismicEvent> events;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (trim(view).empty()) continue;
        if (!header_seen) {
            if (view != kCatalogHeader) {
                throw CatalogParseError(lineno, "expected header '" + std::string(kCatalogHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto f = split_csv_line(view);
        if (f.size() != 6) {
            throw CatalogParseError(lineno, "expected 6 fields, found " + std::to_string(f.size()));
        }
        SeismicEvent e;
        e.id = std::string(trim(f[0]));
        if (e.id.empty()) throw CatalogParseError(lineno, "empty event id");
        const auto t = parse_iso8601(trim(f[1]));
        if (!t) throw CatalogParseError(lineno, "invalid origin_time '" + std::string(f[1]) + "'");
        e.origin_time = *t;
        e.lat = require_number(f[2], "lat", lineno);
        e.lon = require_number(f[3], "lon", lineno);
        if (e.lat < -90.0 || e.lat > 90.0) {
            throw CatalogParseError(lineno, "event " + e.id + ": latitude out of range [-90, 90]");
        }
        if (e.lon < -180.0 || e.lon > 180.0) {
            throw CatalogParseError(lineno, "event " + e.id + ": longitude out of range [-180, 180]");
        }
        if (!trim(f[4]).empty()) {
            e.depth_km = require_number(f[4], "depth_km", lineno);
            if (*e.depth_km < 0.0) throw CatalogParseError(lineno, "event " + e.id + ": negative depth");
        }
        e.magnitude = require_number(f[5], "mag", lineno);
        if (!seen.insert(e.id).second) {
            throw CatalogParseError(lineno, "duplicate event id '" + e.id + "'");
        }
        events.push_back(std::move(e));
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        return a.origin_time != b.origin_time ? a.origin_time < b.origin_time : a.id < b.id;
    });
    return events;
}

std::vector<SeismicEvent> read_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open catalog " + path.string());
    return parse_catalog(in);
}

std::string catalog_to_csv(std::span<const SeismicEvent> events) {
    std::string out = std::string(kCatalogHeader) + "\n";
    for (const auto& e : events) {
        out += e.id + ',' + format_iso8601(e.origin_time) + ',' + format_double(e.lat) + ',' +
               format_double(e.lon) + ',' + (e.depth_km ? format_double(*e.depth_km) : "") + ',' +
               format_double(e.magnitude) + '\n';
    }
    return out;
}

double haversine_km(GeoPoint p, GeoPoint q) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double lat1 = p.lat * deg;
    const double lat2 = q.lat * deg;
    const double sdlat = std::sin((lat2 - lat1) / 2.0);
    const double sdlon = std::sin((q.lon - p.lon) * deg / 2.0);
    // The cosine product is commutative in IEEE arithmetic, which keeps the
    // result bit-identical under argument swap.
    const double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

void CouplingConfig::validate() const {
    if (!std::isfinite(min_mag)) throw std::invalid_argument("min_mag must be finite");
    if (!(max_dt_days > 0.0)) throw std::invalid_argument("max_dt_days must be > 0");
    if (!(max_dist_km > 0.0)) throw std::invalid_argument("max_dist_km must be > 0");
    if (!(horizon_days > 0.0)) throw std::invalid_argument("horizon_days must be > 0");
    if (target_radius_km && !(*target_radius_km > 0.0)) {
        throw std::invalid_argument("target radius must be > 0");
    }
}

std::vector<CoupleRecord> extract_couples(std::span<const SeismicEvent> events,
                                          const CouplingConfig& config) {
    config.validate();
    if (!time_sorted(events)) throw std::invalid_argument("events must be sorted by origin time");

    std::vector<CoupleRecord> out;
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto& primary = events[e];
        if (!(primary.magnitude >= config.min_mag)) continue;

        struct Candidate {
            std::size_t index;
            double dt;
            double dist;
        };
        std::optional<Candidate> best;
        auto consider = [&](std::size_t m) {
            const auto& mate = events[m];
            if (!(mate.magnitude >= config.min_mag)) return;
            const double dt = days_between(mate.origin_time, primary.origin_time);
            if (dt > config.max_dt_days) return;
            const double dist = haversine_km(primary.location(), mate.location());
            if (dist > config.max_dist_km) return;
            const Candidate c{m, dt, dist};
            if (!best) {
                best = c;
                return;
            }
            const auto& b = events[best->index];
            if (mate.magnitude != b.magnitude) {
                if (mate.magnitude > b.magnitude) best = c;
            } else if (c.dt != best->dt) {
                if (c.dt < best->dt) best = c;
            } else if (c.dist != best->dist) {
                if (c.dist < best->dist) best = c;
            } else if (mate.id < b.id) {
                best = c;
            }
        };
        // Simultaneous events may sit on either side of `e` in the sorted order.
        for (std::size_t m = e + 1; m < events.size() && events[m].origin_time == primary.origin_time; ++m) {
            consider(m);
        }
        for (std::size_t m = e; m-- > 0;) {
            if (days_between(events[m].origin_time, primary.origin_time) > config.max_dt_days) break;
            consider(m);
        }
        if (!best) continue;

        const auto& mate = events[best->index];
        CoupleRecord rec;
        rec.primary_id = primary.id;
        rec.mate_id = mate.id;
        rec.primary_time = primary.origin_time;
        rec.primary_location = primary.location();
        rec.features = {primary.magnitude, mate.magnitude, best->dt, best->dist};
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CoupleRecord> assign_targets(std::vector<CoupleRecord> couples,
                                         std::span<const SeismicEvent> events,
                                         const CouplingConfig& config) {
    config.validate();
    if (!time_sorted(events)) throw std::invalid_argument("events must be sorted by origin time");
    if (events.empty()) return couples;
    const Timestamp last = events.back().origin_time;

    for (auto& c : couples) {
        c.target.reset();
        auto it = std::upper_bound(events.begin(), events.end(), c.primary_time,
                                   [](Timestamp t, const SeismicEvent& e) { return t < e.origin_time; });
        for (; it != events.end(); ++it) {
            if (days_between(c.primary_time, it->origin_time) > config.horizon_days) break;
            if (config.target_radius_km &&
                haversine_km(c.primary_location, it->location()) > *config.target_radius_km) {
                continue;
            }
            if (!c.target || it->magnitude > *c.target) c.target = it->magnitude;
        }
        c.censored = days_between(c.primary_time, last) < config.horizon_days;
    }
    return couples;
}

DatasetSplit split_by_epoch(std::span<const CoupleRecord> couples, Timestamp train_before,
                            Timestamp test_start, Timestamp test_end, double validation_fraction) {
    if (test_start < train_before || test_end < test_start) {
        throw std::invalid_argument("split boundaries must satisfy train_before <= test_start <= test_end");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("validation fraction must lie in [0, 1)");
    }
    std::vector<CoupleRecord> early;
    DatasetSplit split;
    for (const auto& c : couples) {
        if (c.primary_time < train_before) {
            early.push_back(c);
        } else if (c.primary_time >= test_start && c.primary_time < test_end) {
            split.test.push_back(c);
        }
    }
    std::stable_sort(early.begin(), early.end(),
                     [](const auto& a, const auto& b) { return a.primary_time < b.primary_time; });
    const auto n_val = static_cast<std::size_t>(
        std::floor(validation_fraction * static_cast<double>(early.size())));
    const std::size_t n_train = early.size() - n_val;
    if (n_train == 0) throw std::invalid_argument("training partition is empty");
    split.train.assign(early.begin(), early.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.validation.assign(early.begin() + static_cast<std::ptrdiff_t>(n_train), early.end());
    return split;
}

std::vector<Sample> to_samples(std::span<const CoupleRecord> couples) {
    std::vector<Sample> out;
    for (const auto& c : couples) {
        if (c.target) out.push_back({std::vector<double>(c.features.begin(), c.features.end()), *c.target});
    }
    return out;
}

std::string couples_to_csv(std::span<const CoupleRecord> couples) {
    std::string out = std::string(kCouplesHeader) + "\n";
    for (const auto& c : couples) {
        out += c.primary_id + ',' + c.mate_id;
        for (double f : c.features) out += ',' + format_double(f);
        out += ',' + (c.target ? format_double(*c.target) : std::string{});
        out += c.censored ? ",1\n" : ",0\n";
    }
    return out;
}

std::vector<CoupleRecord> parse_couples(std::istream& in, std::span<const SeismicEvent> events) {
    std::unordered_map<std::string, const SeismicEvent*> by_id;
    for (const auto& e : events) by_id.emplace(e.id, &e);

    std::vector<CoupleRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (trim(view).empty()) continue;
        if (!header_seen) {
            if (view != kCouplesHeader) {
                throw CatalogParseError(lineno, "expected header '" + std::string(kCouplesHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto f = split_csv_line(view);
        if (f.size() != 8) {
            throw CatalogParseError(lineno, "expected 8 fields, found " + std::to_string(f.size()));
        }
        CoupleRecord c;
        c.primary_id = std::string(trim(f[0]));
        c.mate_id = std::string(trim(f[1]));
        const auto it = by_id.find(c.primary_id);
        if (it == by_id.end()) {
            throw CatalogParseError(lineno, "primary event '" + c.primary_id + "' is not in the catalog");
        }
        c.primary_time = it->second->origin_time;
        c.primary_location = it->second->location();
        static constexpr const char* names[] = {"x1", "x2", "x3_days", "x4_km"};
        for (std::size_t j = 0; j < 4; ++j) c.features[j] = require_number(f[2 + j], names[j], lineno);
        if (!trim(f[6]).empty()) c.target = require_number(f[6], "target", lineno);
        const auto censored = trim(f[7]);
        if (censored != "0" && censored != "1") {
            throw CatalogParseError(lineno, "censored must be 0 or 1");
        }
        c.censored = censored == "1";
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.primary_time < b.primary_time; });
    return out;
}

}  // namespace quakefis
