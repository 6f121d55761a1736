#pragma once

#include <string>
#include <vector>

namespace lbvs {

/// One eye-tracker fixation event, pre-mapped to frame pixel coordinates
/// (top-left origin, x rightward, y downward).
struct FixationRecord {
    std::string subject_id;
    double start_ms = 0.0;
    double duration_ms = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Fixation events with their overlapped frame-index ranges resolved against
/// a frame rate. A record spanning several display intervals is assigned to
/// every overlapped frame.
struct FixationSet {
    double frame_rate = 0.0;
    int num_frames = 0;
    std::vector<FixationRecord> records;
    /// Inclusive [first, last] frame span per record, parallel to `records`.
    std::vector<std::pair<int, int>> frame_span;
    /// Records whose time span fell entirely outside [0, num_frames/fps).
    int dropped_count = 0;
};

/// Parses a CSV fixation log (header row required) with columns
/// subject_id, start_time_ms, duration_ms, x, y and assigns each record to
/// every frame whose display interval [k/fps, (k+1)/fps) overlaps
/// [start, start+duration). Malformed rows raise DataError naming the line.
FixationSet parse_fixation_log(const std::string& path, double frame_rate, int num_frames);

}  // namespace lbvs
