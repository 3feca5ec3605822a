#include "quakefis/csv_format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace quakefis {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) return std::nullopt;
    // from_chars rejects a leading '+', which some catalog exports emit.
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

namespace {

std::optional<int> parse_digits(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) return std::nullopt;
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    using namespace std::chrono;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    const auto y = parse_digits(text, 0, 4);
    const auto mo = parse_digits(text, 5, 2);
    const auto d = parse_digits(text, 8, 2);
    if (!y || !mo || !d) return std::nullopt;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;

    int hh = 0, mm = 0, ss = 0;
    if (text.size() > 10) {
        if (text[10] != 'T' || text.size() < 19 || text[13] != ':' || text[16] != ':') {
            return std::nullopt;
        }
        const auto h = parse_digits(text, 11, 2);
        const auto m = parse_digits(text, 14, 2);
        const auto s = parse_digits(text, 17, 2);
        if (!h || !m || !s || *h > 23 || *m > 59 || *s > 60) return std::nullopt;
        hh = *h;
        mm = *m;
        ss = *s;
        const std::string_view rest = text.substr(19);
        if (!(rest.empty() || rest == "Z")) return std::nullopt;
    }
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

}  // namespace quakefis
