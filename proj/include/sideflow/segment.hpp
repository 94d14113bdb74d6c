#pragma once

#include "sideflow/capture.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sideflow {

// All data frames of one labeled stream inside one fixed time window; the
// unit the classifier sees. Windows are half-open intervals
// [k*w, (k+1)*w) anchored at the stream's first timestamp, so a frame
// landing exactly on a boundary belongs to the later window.
struct FlowSegment {
    std::optional<ActivityLabel> label; // absent for unlabeled streams
    std::int64_t window_index = 0;
    double window_s = 0.0;
    std::vector<CaptureRecord> frames; // never empty; empty windows are dropped
};

// Splits a filtered single-label stream into consecutive non-overlapping
// windows. Every input frame lands in exactly one segment; windows with no
// frames are omitted; segments come out ordered by window_index.
// Throws on window_s <= 0 or mixed labels.
std::vector<FlowSegment> segment_by_window(const std::vector<CaptureRecord>& records,
                                           double window_s);

// Window index of a frame at offset seconds from the stream anchor.
// Boundary semantics are defined by comparisons against k*window_s as
// computed in double arithmetic, which keeps the division fast path and
// any scan-based recount in exact agreement.
std::int64_t window_index_for(double offset, double window_s);

} // namespace sideflow
