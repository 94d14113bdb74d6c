#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sideflow {

enum class Direction : std::uint8_t { uplink, downlink };
enum class FrameType : std::uint8_t { data, management, control };

// Class identity for one fine-grained in-app action. The (app, activity)
// pair is the classification target; the app alone is the grouping key for
// leave-one-app-out evaluation.
struct ActivityLabel {
    std::string app;      // e.g. "gmail"
    std::string activity; // e.g. "send_mail"

    auto operator<=>(const ActivityLabel&) const = default;

    std::string str() const { return app + "/" + activity; }
};

// Both fields must be non-empty, lowercase, and free of whitespace.
// Commas and quotes are rejected as well so labels embed verbatim in CSV.
void validate_label(const ActivityLabel& label);

// Side-channel metadata of one sniffed 802.11 frame. Payload is never
// stored; length, timing, direction and flags are all a passive observer
// gets from an encrypted WLAN.
struct CaptureRecord {
    double ts = 0.0;       // seconds since capture start, non-decreasing per file
    std::uint32_t len = 0; // frame length in bytes, >= 1
    Direction dir = Direction::uplink;
    FrameType ftype = FrameType::data;
    bool retry = false;    // 802.11 retransmission flag
    bool fcs_ok = true;    // frame check sequence passed
    std::optional<ActivityLabel> label; // absent on unlabeled captures
};

struct CaptureMeta {
    std::size_t record_count = 0;         // records surviving the filter
    std::size_t dropped_mgmt_ctrl = 0;    // management/control frames removed
    std::size_t dropped_retry_or_fcs = 0; // data frames removed as retry or FCS-bad
    double duration = 0.0;                // last ts - first ts of survivors
    std::set<ActivityLabel> label_set;    // distinct labels among survivors
};

// Canonical frame-log format: UTF-8 JSON lines, one object per frame with
// keys exactly ts (number), len (integer), dir ("up"|"down"),
// ftype ("data"|"mgmt"|"ctrl"), retry (bool), fcs_ok (bool) and an optional
// app/activity string pair. Blank lines are skipped. Unknown keys,
// missing fields, bad tokens and decreasing timestamps are all reported
// with a line number.
std::vector<CaptureRecord> parse_frame_log(std::istream& in);
std::vector<CaptureRecord> parse_frame_log(const std::string& text);
std::vector<CaptureRecord> parse_frame_log_file(const std::string& path);

// One frame-log line in the canonical key order, no trailing newline.
std::string frame_log_line(const CaptureRecord& rec);
void write_frame_log(const std::vector<CaptureRecord>& records, std::ostream& out);

// Keeps exactly the error-free data frames: ftype == data, retry not set,
// FCS passed. Order is preserved; the meta reports both drop categories.
// A management/control frame counts toward dropped_mgmt_ctrl regardless of
// its other flags.
std::pair<std::vector<CaptureRecord>, CaptureMeta>
filter_frames(const std::vector<CaptureRecord>& records);

} // namespace sideflow
