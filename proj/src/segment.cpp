#include "sideflow/segment.hpp"

#include "sideflow/errors.hpp"

#include <cmath>

namespace sideflow {

std::int64_t window_index_for(double offset, double window_s) {
    std::int64_t idx = static_cast<std::int64_t>(std::floor(offset / window_s));
    if (idx < 0) idx = 0;
    // Settle frames that the division put next to a boundary onto the
    // window the product comparisons select.
    while (static_cast<double>(idx + 1) * window_s <= offset) ++idx;
    while (idx > 0 && static_cast<double>(idx) * window_s > offset) --idx;
    return idx;
}

std::vector<FlowSegment> segment_by_window(const std::vector<CaptureRecord>& records,
                                           double window_s) {
    if (!(window_s > 0.0)) throw input_error("window_s must be positive");

    std::vector<FlowSegment> segments;
    if (records.empty()) return segments;

    const std::optional<ActivityLabel>& label = records.front().label;
    const double t0 = records.front().ts;

    for (const CaptureRecord& rec : records) {
        if (rec.label != label) throw input_error("mixed labels in segmentation input");
        const std::int64_t idx = window_index_for(rec.ts - t0, window_s);
        if (segments.empty() || segments.back().window_index != idx) {
            FlowSegment seg;
            seg.label = label;
            seg.window_index = idx;
            seg.window_s = window_s;
            segments.push_back(std::move(seg));
        }
        segments.back().frames.push_back(rec);
    }
    return segments;
}

} // namespace sideflow
