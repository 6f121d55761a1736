#include "lbvs/fixation_log.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lbvs/field2d.hpp"

namespace lbvs {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& s, int line_no, const char* column) {
    std::size_t pos = 0;
    double value;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DataError("fixation log line " + std::to_string(line_no) + ": non-numeric " +
                        column + " '" + s + "'");
    }
    if (pos != s.size())
        throw DataError("fixation log line " + std::to_string(line_no) + ": non-numeric " +
                        column + " '" + s + "'");
    return value;
}

}  // namespace

FixationSet parse_fixation_log(const std::string& path, double frame_rate, int num_frames) {
    if (!(frame_rate > 0.0)) throw DataError("parse_fixation_log: frame_rate must be > 0");
    if (num_frames < 1) throw DataError("parse_fixation_log: num_frames must be >= 1");
    std::ifstream in(path);
    if (!in) throw DataError("parse_fixation_log: cannot open '" + path + "'");

    FixationSet set;
    set.frame_rate = frame_rate;
    set.num_frames = num_frames;

    const double frames_per_ms = frame_rate / 1000.0;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!header_seen) {
            header_seen = true;  // header row is required and skipped
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 5)
            throw DataError("fixation log line " + std::to_string(line_no) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
        FixationRecord rec;
        rec.subject_id = fields[0];
        rec.start_ms = parse_number(fields[1], line_no, "start_time_ms");
        rec.duration_ms = parse_number(fields[2], line_no, "duration_ms");
        rec.x = parse_number(fields[3], line_no, "x");
        rec.y = parse_number(fields[4], line_no, "y");
        if (!(rec.duration_ms > 0.0))
            throw DataError("fixation log line " + std::to_string(line_no) +
                            ": duration must be > 0");

        // Frame k shows during [k, k+1) / frames_per_ms. Locate the overlapped
        // span, nudging against floating-point boundary cases.
        const double end_ms = rec.start_ms + rec.duration_ms;
        long first = static_cast<long>(std::floor(rec.start_ms * frames_per_ms));
        while (static_cast<double>(first + 1) / frames_per_ms <= rec.start_ms) ++first;
        while (first > 0 && static_cast<double>(first) / frames_per_ms > rec.start_ms) --first;
        long last = static_cast<long>(std::ceil(end_ms * frames_per_ms)) - 1;
        while (last >= 0 && static_cast<double>(last) / frames_per_ms >= end_ms) --last;
        while (static_cast<double>(last + 1) / frames_per_ms < end_ms) ++last;

        const long lo = std::max(first, 0L);
        const long hi = std::min(last, static_cast<long>(num_frames) - 1);
        if (lo > hi) {
            ++set.dropped_count;
            continue;
        }
        set.records.push_back(std::move(rec));
        set.frame_span.emplace_back(static_cast<int>(lo), static_cast<int>(hi));
    }
    if (!header_seen) throw DataError("parse_fixation_log: missing header row in '" + path + "'");
    return set;
}

}  // namespace lbvs
