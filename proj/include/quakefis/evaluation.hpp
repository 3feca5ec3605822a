// Alarm generation from model output and false-alarm scoring.
#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quakefis/catalog.hpp"
#include "quakefis/fuzzy.hpp"

namespace quakefis {

/// One model prediction anchored at a couple's primary event. Its window
/// covers events with alarm_time < t <= alarm_time + horizon.
struct AlarmRecord {
    std::string primary_id;
    Timestamp alarm_time;
    double horizon_days = 0.0;
    GeoPoint location;
    double predicted_mag = 0.0;
    std::optional<double> target;

    Timestamp window_end() const;
    bool covers(const SeismicEvent& e, std::optional<double> match_radius_km = {}) const;
};

struct Prediction {
    std::vector<AlarmRecord> alarms;
    std::vector<std::string> skipped;  // primary ids for which no rule fired
};

Prediction predict_couples(const FuzzyInferenceSystem& fis, std::span<const CoupleRecord> couples,
                           double horizon_days);

inline constexpr const char* kPredictionHeader =
    "primary_id,alarm_time,window_end,predicted_mag,target";
std::string predictions_to_csv(std::span<const AlarmRecord> alarms);

/// Events in [start, end) are the ones that can be missed.
struct ScoringPeriod {
    Timestamp start;
    Timestamp end;
};

struct ThresholdScore {
    double threshold = 0.0;
    std::size_t alarms_issued = 0;
    std::size_t false_alarms = 0;
    std::size_t hits = 0;
    std::size_t missed = 0;
    std::optional<double> false_alarm_rate;  // absent when no alarm was issued
};

/// An alarm is issued when predicted_mag >= threshold and is a hit when an
/// event of at least that magnitude falls in its window. Every alarm is scored
/// on its own, so one event may confirm several alarms.
ThresholdScore score_alarms(std::span<const AlarmRecord> alarms, std::span<const SeismicEvent> events,
                            double threshold, const ScoringPeriod& period,
                            std::optional<double> match_radius_km = {});

struct EvaluationReport {
    std::vector<ThresholdScore> rows;  // ascending threshold
    std::optional<double> rmse;        // over alarms with a known target
    std::size_t scored_targets = 0;

    /// `threshold,alarms,false_alarms,hits,missed,false_alarm_rate,rmse`
    std::string to_csv() const;
    std::string to_text() const;
};

EvaluationReport evaluate_alarms(std::span<const AlarmRecord> alarms,
                                 std::span<const SeismicEvent> events,
                                 std::vector<double> thresholds, const ScoringPeriod& period,
                                 std::optional<double> match_radius_km = {});

enum class PlotSeries { actual, predicted };

struct PlotRow {
    Timestamp time;
    PlotSeries series = PlotSeries::actual;
    double magnitude = 0.0;
};

/// Catalog events and alarms with time in [from, to), sorted by time
/// (actual before predicted at equal times, then by magnitude).
std::vector<PlotRow> emit_plot_data(std::span<const AlarmRecord> alarms,
                                    std::span<const SeismicEvent> events, Timestamp from,
                                    Timestamp to);

inline constexpr const char* kPlotHeader = "time,series,magnitude";
std::string plot_rows_to_csv(std::span<const PlotRow> rows);
std::vector<PlotRow> parse_plot_csv(std::istream& in);

}  // namespace quakefis
