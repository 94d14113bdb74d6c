#include "sideflow/capture.hpp"

#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sideflow {

using nlohmann::json;

void validate_label(const ActivityLabel& label) {
    auto check = [](const std::string& field, const std::string& value) {
        if (value.empty()) throw input_error("label field \"" + field + "\" is empty");
        for (unsigned char c : value) {
            if (std::isupper(c)) throw input_error("label field \"" + field + "\" must be lowercase: \"" + value + "\"");
            if (std::isspace(c)) throw input_error("label field \"" + field + "\" contains whitespace: \"" + value + "\"");
            if (c == ',' || c == '"') throw input_error("label field \"" + field + "\" contains '" + std::string(1, c) + "': \"" + value + "\"");
        }
    };
    check("app", label.app);
    check("activity", label.activity);
}

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& msg) {
    throw input_error(msg + " at line " + std::to_string(line_no));
}

CaptureRecord parse_record(const json& obj, std::size_t line_no) {
    static const std::set<std::string> known_keys = {
        "ts", "len", "dir", "ftype", "retry", "fcs_ok", "app", "activity"};

    if (!obj.is_object()) fail_line(line_no, "record is not a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known_keys.count(it.key())) fail_line(line_no, "unknown key \"" + it.key() + "\"");
    }
    for (const char* key : {"ts", "len", "dir", "ftype", "retry", "fcs_ok"}) {
        if (!obj.contains(key)) fail_line(line_no, "missing field \"" + std::string(key) + "\"");
    }

    CaptureRecord rec;

    const json& ts = obj["ts"];
    if (!ts.is_number()) fail_line(line_no, "field \"ts\" is not a number");
    rec.ts = ts.get<double>();
    if (!(rec.ts >= 0.0)) fail_line(line_no, "negative timestamp");

    const json& len = obj["len"];
    if (!len.is_number_integer()) fail_line(line_no, "field \"len\" is not an integer");
    const std::int64_t len_v = len.get<std::int64_t>();
    if (len_v < 1 || len_v > UINT32_MAX) fail_line(line_no, "field \"len\" out of range");
    rec.len = static_cast<std::uint32_t>(len_v);

    const json& dir = obj["dir"];
    if (!dir.is_string()) fail_line(line_no, "field \"dir\" is not a string");
    const std::string dir_s = dir.get<std::string>();
    if (dir_s == "up") rec.dir = Direction::uplink;
    else if (dir_s == "down") rec.dir = Direction::downlink;
    else fail_line(line_no, "unknown dir token \"" + dir_s + "\"");

    const json& ftype = obj["ftype"];
    if (!ftype.is_string()) fail_line(line_no, "field \"ftype\" is not a string");
    const std::string ftype_s = ftype.get<std::string>();
    if (ftype_s == "data") rec.ftype = FrameType::data;
    else if (ftype_s == "mgmt") rec.ftype = FrameType::management;
    else if (ftype_s == "ctrl") rec.ftype = FrameType::control;
    else fail_line(line_no, "unknown ftype token \"" + ftype_s + "\"");

    const json& retry = obj["retry"];
    if (!retry.is_boolean()) fail_line(line_no, "field \"retry\" is not a boolean");
    rec.retry = retry.get<bool>();

    const json& fcs = obj["fcs_ok"];
    if (!fcs.is_boolean()) fail_line(line_no, "field \"fcs_ok\" is not a boolean");
    rec.fcs_ok = fcs.get<bool>();

    const bool has_app = obj.contains("app");
    const bool has_activity = obj.contains("activity");
    if (has_app != has_activity) fail_line(line_no, "label needs both \"app\" and \"activity\"");
    if (has_app) {
        if (!obj["app"].is_string() || !obj["activity"].is_string()) {
            fail_line(line_no, "label fields must be strings");
        }
        ActivityLabel label{obj["app"].get<std::string>(), obj["activity"].get<std::string>()};
        try {
            validate_label(label);
        } catch (const input_error& e) {
            fail_line(line_no, e.what());
        }
        rec.label = std::move(label);
    }
    return rec;
}

} // namespace

std::vector<CaptureRecord> parse_frame_log(std::istream& in) {
    std::vector<CaptureRecord> records;
    std::string line;
    std::size_t line_no = 0;
    double prev_ts = -1.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded()) fail_line(line_no, "malformed record");
        CaptureRecord rec = parse_record(obj, line_no);
        if (!records.empty() && rec.ts < prev_ts) fail_line(line_no, "decreasing timestamp");
        prev_ts = rec.ts;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<CaptureRecord> parse_frame_log(const std::string& text) {
    std::istringstream in(text);
    return parse_frame_log(in);
}

std::vector<CaptureRecord> parse_frame_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    return parse_frame_log(in);
}

std::string frame_log_line(const CaptureRecord& rec) {
    std::string out = "{\"ts\":" + format_double(rec.ts);
    out += ",\"len\":" + std::to_string(rec.len);
    out += ",\"dir\":\"" + std::string(rec.dir == Direction::uplink ? "up" : "down") + "\"";
    const char* ftype = rec.ftype == FrameType::data ? "data"
                      : rec.ftype == FrameType::management ? "mgmt" : "ctrl";
    out += ",\"ftype\":\"" + std::string(ftype) + "\"";
    out += rec.retry ? ",\"retry\":true" : ",\"retry\":false";
    out += rec.fcs_ok ? ",\"fcs_ok\":true" : ",\"fcs_ok\":false";
    if (rec.label) {
        out += ",\"app\":\"" + rec.label->app + "\",\"activity\":\"" + rec.label->activity + "\"";
    }
    out += "}";
    return out;
}

void write_frame_log(const std::vector<CaptureRecord>& records, std::ostream& out) {
    for (const CaptureRecord& rec : records) {
        out << frame_log_line(rec) << '\n';
    }
}

std::pair<std::vector<CaptureRecord>, CaptureMeta>
filter_frames(const std::vector<CaptureRecord>& records) {
    std::vector<CaptureRecord> kept;
    CaptureMeta meta;
    for (const CaptureRecord& rec : records) {
        if (rec.ftype != FrameType::data) {
            ++meta.dropped_mgmt_ctrl;
            continue;
        }
        if (rec.retry || !rec.fcs_ok) {
            ++meta.dropped_retry_or_fcs;
            continue;
        }
        kept.push_back(rec);
    }
    meta.record_count = kept.size();
    if (kept.size() >= 2) meta.duration = kept.back().ts - kept.front().ts;
    for (const CaptureRecord& rec : kept) {
        if (rec.label) meta.label_set.insert(*rec.label);
    }
    return {std::move(kept), std::move(meta)};
}

} // namespace sideflow
