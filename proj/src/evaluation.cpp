#include "quakefis/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quakefis {

Timestamp AlarmRecord::window_end() const {
    return alarm_time + std::chrono::seconds(std::llround(horizon_days * kSecondsPerDay));
}

bool AlarmRecord::covers(const SeismicEvent& e, std::optional<double> match_radius_km) const {
    if (e.origin_time <= alarm_time) return false;
    if (days_between(alarm_time, e.origin_time) > horizon_days) return false;
    return !match_radius_km || haversine_km(location, e.location()) <= *match_radius_km;
}

Prediction predict_couples(const FuzzyInferenceSystem& fis, std::span<const CoupleRecord> couples,
                           double horizon_days) {
    Prediction out;
    for (const auto& c : couples) {
        try {
            const double z = fis.infer(c.features);
            out.alarms.push_back({c.primary_id, c.primary_time, horizon_days, c.primary_location, z, c.target});
        } catch (const NoRuleFiresError&) {
            out.skipped.push_back(c.primary_id);
        }
    }
    return out;
}

std::string predictions_to_csv(std::span<const AlarmRecord> alarms) {
    std::string out = std::string(kPredictionHeader) + "\n";
    for (const auto& a : alarms) {
        out += a.primary_id + ',' + format_iso8601(a.alarm_time) + ',' + format_iso8601(a.window_end()) +
               ',' + format_double(a.predicted_mag) + ',' +
               (a.target ? format_double(*a.target) : std::string{}) + '\n';
    }
    return out;
}

ThresholdScore score_alarms(std::span<const AlarmRecord> alarms, std::span<const SeismicEvent> events,
                            double threshold, const ScoringPeriod& period,
                            std::optional<double> match_radius_km) {
    ThresholdScore row;
    row.threshold = threshold;

    std::vector<const SeismicEvent*> strong;
    for (const auto& e : events) {
        if (e.magnitude >= threshold) strong.push_back(&e);
    }
    std::vector<const AlarmRecord*> issued;
    for (const auto& a : alarms) {
        if (a.predicted_mag >= threshold) issued.push_back(&a);
    }
    auto first_after = [&](Timestamp t) {
        return std::upper_bound(strong.begin(), strong.end(), t,
                                [](Timestamp t, const SeismicEvent* e) { return t < e->origin_time; });
    };

    row.alarms_issued = issued.size();
    for (const AlarmRecord* a : issued) {
        bool hit = false;
        for (auto it = first_after(a->alarm_time); it != strong.end(); ++it) {
            if (days_between(a->alarm_time, (*it)->origin_time) > a->horizon_days) break;
            if (a->covers(**it, match_radius_km)) {
                hit = true;
                break;
            }
        }
        ++(hit ? row.hits : row.false_alarms);
    }

    // Alarms sorted by time let each event look back only over alarms that
    // could still be open.
    std::sort(issued.begin(), issued.end(),
              [](const auto* a, const auto* b) { return a->alarm_time < b->alarm_time; });
    double max_horizon = 0.0;
    for (const auto* a : issued) max_horizon = std::max(max_horizon, a->horizon_days);
    for (const SeismicEvent* e : strong) {
        if (e->origin_time < period.start || e->origin_time >= period.end) continue;
        bool covered = false;
        auto it = std::lower_bound(issued.begin(), issued.end(), e->origin_time,
                                   [](const AlarmRecord* a, Timestamp t) { return a->alarm_time < t; });
        while (it != issued.begin()) {
            --it;
            if (days_between((*it)->alarm_time, e->origin_time) > max_horizon) break;
            if ((*it)->covers(*e, match_radius_km)) {
                covered = true;
                break;
            }
        }
        if (!covered) ++row.missed;
    }

    if (row.alarms_issued > 0) {
        row.false_alarm_rate =
            static_cast<double>(row.false_alarms) / static_cast<double>(row.alarms_issued);
    }
    return row;
}

EvaluationReport evaluate_alarms(std::span<const AlarmRecord> alarms,
                                 std::span<const SeismicEvent> events,
                                 std::vector<double> thresholds, const ScoringPeriod& period,
                                 std::optional<double> match_radius_km) {
    std::sort(thresholds.begin(), thresholds.end());
    EvaluationReport report;
    for (double tau : thresholds) {
        report.rows.push_back(score_alarms(alarms, events, tau, period, match_radius_km));
    }
    double sse = 0.0;
    for (const auto& a : alarms) {
        if (!a.target) continue;
        const double e = a.predicted_mag - *a.target;
        sse += e * e;
        ++report.scored_targets;
    }
    if (report.scored_targets > 0) {
        report.rmse = std::sqrt(sse / static_cast<double>(report.scored_targets));
    }
    return report;
}

std::string EvaluationReport::to_csv() const {
    std::string out = "threshold,alarms,false_alarms,hits,missed,false_alarm_rate,rmse\n";
    for (const auto& r : rows) {
        out += format_double(r.threshold) + ',' + std::to_string(r.alarms_issued) + ',' +
               std::to_string(r.false_alarms) + ',' + std::to_string(r.hits) + ',' +
               std::to_string(r.missed) + ',' +
               (r.false_alarm_rate ? format_double(*r.false_alarm_rate) : std::string{}) + ',' +
               (rmse ? format_double(*rmse) : std::string{}) + '\n';
    }
    return out;
}

std::string EvaluationReport::to_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    for (const auto& r : rows) {
        os.precision(1);
        os << "M >= " << r.threshold << ": " << r.false_alarms << " false alarms out of "
           << r.alarms_issued << " issued (" << r.hits << " hits, " << r.missed << " missed events)";
        if (r.false_alarm_rate) {
            os.precision(1);
            os << ", false-alarm rate " << 100.0 * *r.false_alarm_rate << "%";
        } else {
            os << ", false-alarm rate undefined";
        }
        os << '\n';
    }
    os.precision(4);
    if (rmse) {
        os << "magnitude RMSE " << *rmse << " over " << scored_targets << " couples with targets\n";
    } else {
        os << "magnitude RMSE undefined (no couples with targets)\n";
    }
    return os.str();
}

std::vector<PlotRow> emit_plot_data(std::span<const AlarmRecord> alarms,
                                    std::span<const SeismicEvent> events, Timestamp from,
                                    Timestamp to) {
    std::vector<PlotRow> rows;
    for (const auto& e : events) {
        if (e.origin_time >= from && e.origin_time < to) {
            rows.push_back({e.origin_time, PlotSeries::actual, e.magnitude});
        }
    }
    for (const auto& a : alarms) {
        if (a.alarm_time >= from && a.alarm_time < to) {
            rows.push_back({a.alarm_time, PlotSeries::predicted, a.predicted_mag});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const PlotRow& a, const PlotRow& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.series != b.series) return a.series < b.series;
        return a.magnitude < b.magnitude;
    });
    return rows;
}

std::string plot_rows_to_csv(std::span<const PlotRow> rows) {
    std::string out = std::string(kPlotHeader) + "\n";
    for (const auto& r : rows) {
        out += format_iso8601(r.time) + (r.series == PlotSeries::actual ? ",actual," : ",predicted,") +
               format_double(r.magnitude) + '\n';
    }
    return out;
}

std::vector<PlotRow> parse_plot_csv(std::istream& in) {
    std::vector<PlotRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty()) continue;
        if (lineno == 1) {
            if (view != kPlotHeader) throw CatalogParseError(lineno, "expected plot-data header");
            continue;
        }
        const auto f = split_csv_line(view);
        if (f.size() != 3) throw CatalogParseError(lineno, "expected 3 fields");
        const auto t = parse_iso8601(f[0]);
        const auto m = parse_double(f[2]);
        if (!t || !m || (f[1] != "actual" && f[1] != "predicted")) {
            throw CatalogParseError(lineno, "malformed plot-data row");
        }
        rows.push_back({*t, f[1] == "actual" ? PlotSeries::actual : PlotSeries::predicted, *m});
    }
    return rows;
}

}  // namespace quakefis
