#include "sideflow/synth.hpp"

#include "sideflow/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace sideflow {

using nlohmann::json;

namespace {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double apply_clamp(double x, double lo, double hi) {
    if (lo == 0.0 && hi == 0.0) return x;
    return std::clamp(x, lo, hi);
}

} // namespace

double Distribution::sample(Rng& rng) const {
    double x = 0.0;
    switch (family) {
    case Family::lognormal:
        x = rng.lognormal(mu, sigma);
        break;
    case Family::exponential:
        x = rng.exponential(rate);
        break;
    case Family::mixture: {
        double total = 0.0;
        for (const Point& p : points) total += p.weight;
        double u = rng.u01() * total;
        x = points.back().value;
        for (const Point& p : points) {
            if (u < p.weight) {
                x = p.value;
                break;
            }
            u -= p.weight;
        }
        break;
    }
    }
    return apply_clamp(x, clamp_lo, clamp_hi);
}

double Distribution::analytic_mean() const {
    const bool clamped = !(clamp_lo == 0.0 && clamp_hi == 0.0);
    switch (family) {
    case Family::lognormal: {
        if (!clamped) return std::exp(mu + 0.5 * sigma * sigma);
        const double a = (std::log(clamp_lo) - mu) / sigma;
        const double b = (std::log(clamp_hi) - mu) / sigma;
        return clamp_lo * normal_cdf(a) + clamp_hi * (1.0 - normal_cdf(b)) +
               std::exp(mu + 0.5 * sigma * sigma) * (normal_cdf(b - sigma) - normal_cdf(a - sigma));
    }
    case Family::exponential: {
        if (!clamped) return 1.0 / rate;
        return clamp_lo + (std::exp(-rate * clamp_lo) - std::exp(-rate * clamp_hi)) / rate;
    }
    case Family::mixture: {
        double total = 0.0, acc = 0.0;
        for (const Point& p : points) {
            total += p.weight;
            acc += p.weight * apply_clamp(p.value, clamp_lo, clamp_hi);
        }
        return acc / total;
    }
    }
    return 0.0;
}

void Distribution::validate(const std::string& what) const {
    switch (family) {
    case Family::lognormal:
        if (!(sigma > 0.0)) throw input_error(what + ": lognormal sigma must be positive");
        break;
    case Family::exponential:
        if (!(rate > 0.0)) throw input_error(what + ": exponential rate must be positive");
        break;
    case Family::mixture: {
        if (points.empty()) throw input_error(what + ": mixture needs at least one point");
        double total = 0.0;
        for (const Point& p : points) {
            if (!(p.weight > 0.0)) throw input_error(what + ": mixture weights must be positive");
            total += p.weight;
        }
        if (!(total > 0.0)) throw input_error(what + ": mixture weights sum to zero");
        break;
    }
    }
    if (clamp_lo != 0.0 || clamp_hi != 0.0) {
        if (!(clamp_lo < clamp_hi)) throw input_error(what + ": clamp bounds out of order");
    }
}

Distribution Distribution::make_lognormal(double mu, double sigma, double lo, double hi) {
    Distribution d;
    d.family = Family::lognormal;
    d.mu = mu;
    d.sigma = sigma;
    d.clamp_lo = lo;
    d.clamp_hi = hi;
    return d;
}

Distribution Distribution::make_exponential(double rate) {
    Distribution d;
    d.family = Family::exponential;
    d.rate = rate;
    return d;
}

Distribution Distribution::make_mixture(std::vector<Point> points) {
    Distribution d;
    d.family = Family::mixture;
    d.points = std::move(points);
    return d;
}

double ActivityProfile::implied_uplink_fraction() const {
    const double r_up = 1.0 / uplink_iat.analytic_mean();
    const double r_down = 1.0 / downlink_iat.analytic_mean();
    return r_up / (r_up + r_down);
}

void ActivityProfile::validate() const {
    validate_label(label);
    const std::string tag = label.str();
    if (!(uplink_fraction >= 0.0 && uplink_fraction <= 1.0)) {
        throw input_error(tag + ": uplink_fraction must lie in [0, 1]");
    }
    if (!(mgmt_ctrl_rate >= 0.0 && mgmt_ctrl_rate < 1.0)) {
        throw input_error(tag + ": mgmt_ctrl_rate must lie in [0, 1)");
    }
    if (!(retry_rate >= 0.0 && retry_rate < 1.0)) {
        throw input_error(tag + ": retry_rate must lie in [0, 1)");
    }
    auto check_len = [&](const Distribution& d, const char* side) {
        d.validate(tag + " " + side + " length");
        const double lo = d.family == Distribution::Family::mixture && d.clamp_lo == 0.0 && d.clamp_hi == 0.0
                              ? std::min_element(d.points.begin(), d.points.end(),
                                                 [](auto& a, auto& b) { return a.value < b.value; })
                                    ->value
                              : d.clamp_lo;
        const double hi = d.family == Distribution::Family::mixture && d.clamp_lo == 0.0 && d.clamp_hi == 0.0
                              ? std::max_element(d.points.begin(), d.points.end(),
                                                 [](auto& a, auto& b) { return a.value < b.value; })
                                    ->value
                              : d.clamp_hi;
        if (lo < 40.0 || hi > 1500.0 || hi == 0.0) {
            throw input_error(tag + ": " + side + " length support must lie within [40, 1500]");
        }
    };
    if (uplink_fraction > 0.0) {
        check_len(uplink_len, "uplink");
        uplink_iat.validate(tag + " uplink interarrival");
    }
    if (uplink_fraction < 1.0) {
        check_len(downlink_len, "downlink");
        downlink_iat.validate(tag + " downlink interarrival");
    }
    if (uplink_fraction > 0.0 && uplink_fraction < 1.0) {
        const double implied = implied_uplink_fraction();
        if (std::fabs(uplink_fraction - implied) > 0.05) {
            throw input_error(tag + ": uplink_fraction " + format_double(uplink_fraction) +
                              " disagrees with the iat-implied fraction " + format_double(implied));
        }
    }
}

std::vector<CaptureRecord> generate_capture(const ActivityProfile& profile,
                                            double duration, std::uint64_t seed) {
    if (!(duration > 0.0)) throw input_error("duration must be positive");
    profile.validate();

    struct Event {
        double ts;
        std::size_t order;
        CaptureRecord rec;
    };
    std::vector<Event> events;
    std::size_t order = 0;

    auto run_direction = [&](Direction dir, const Distribution& iat, const Distribution& len,
                             std::uint64_t stream) {
        Rng rng(derive_seed(seed, stream));
        double t = 0.0;
        while (true) {
            t += iat.sample(rng);
            if (t > duration) break;
            CaptureRecord rec;
            rec.ts = t;
            rec.len = static_cast<std::uint32_t>(std::llround(len.sample(rng)));
            rec.dir = dir;
            rec.ftype = FrameType::data;
            rec.label = profile.label;
            events.push_back({t, order++, std::move(rec)});
        }
    };
    if (profile.uplink_fraction > 0.0) {
        run_direction(Direction::uplink, profile.uplink_iat, profile.uplink_len, 1);
    }
    if (profile.uplink_fraction < 1.0) {
        run_direction(Direction::downlink, profile.downlink_iat, profile.downlink_len, 2);
    }
    const std::size_t n_data = events.size();

    Rng noise_rng(derive_seed(seed, 3));
    if (profile.mgmt_ctrl_rate > 0.0 && n_data > 0) {
        const double r = profile.mgmt_ctrl_rate;
        const auto n_noise = static_cast<std::size_t>(
            std::llround(static_cast<double>(n_data) * r / (1.0 - r)));
        for (std::size_t i = 0; i < n_noise; ++i) {
            CaptureRecord rec;
            rec.ts = noise_rng.uniform(0.0, duration);
            rec.len = 28 + static_cast<std::uint32_t>(noise_rng.below(93)); // short frames
            rec.dir = noise_rng.u01() < 0.5 ? Direction::uplink : Direction::downlink;
            rec.ftype = noise_rng.u01() < 0.5 ? FrameType::management : FrameType::control;
            rec.label = profile.label;
            events.push_back({rec.ts, order++, std::move(rec)});
        }
    }

    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return a.ts != b.ts ? a.ts < b.ts : a.order < b.order;
    });

    // retry flags are assigned in final time order
    std::vector<CaptureRecord> records;
    records.reserve(events.size());
    for (Event& ev : events) {
        if (ev.rec.ftype == FrameType::data && profile.retry_rate > 0.0 &&
            noise_rng.u01() < profile.retry_rate) {
            ev.rec.retry = true;
        }
        records.push_back(std::move(ev.rec));
    }
    return records;
}

namespace {

json distribution_to_json(const Distribution& d) {
    json obj;
    switch (d.family) {
    case Distribution::Family::lognormal:
        obj["family"] = "lognormal";
        obj["mu"] = d.mu;
        obj["sigma"] = d.sigma;
        break;
    case Distribution::Family::exponential:
        obj["family"] = "exponential";
        obj["rate"] = d.rate;
        break;
    case Distribution::Family::mixture: {
        obj["family"] = "mixture";
        json points = json::array();
        for (const Distribution::Point& p : d.points) {
            points.push_back(json{{"value", p.value}, {"weight", p.weight}});
        }
        obj["points"] = std::move(points);
        break;
    }
    }
    if (d.clamp_lo != 0.0 || d.clamp_hi != 0.0) {
        obj["clamp_lo"] = d.clamp_lo;
        obj["clamp_hi"] = d.clamp_hi;
    }
    return obj;
}

Distribution distribution_from_json(const json& obj, const std::string& what) {
    if (!obj.is_object() || !obj.contains("family")) {
        throw input_error(what + ": distribution needs a \"family\" key");
    }
    const std::string family = obj["family"].get<std::string>();
    Distribution d;
    if (family == "lognormal") {
        d.family = Distribution::Family::lognormal;
        d.mu = obj.at("mu").get<double>();
        d.sigma = obj.at("sigma").get<double>();
    } else if (family == "exponential") {
        d.family = Distribution::Family::exponential;
        d.rate = obj.at("rate").get<double>();
    } else if (family == "mixture") {
        d.family = Distribution::Family::mixture;
        for (const json& p : obj.at("points")) {
            d.points.push_back({p.at("value").get<double>(), p.at("weight").get<double>()});
        }
    } else {
        throw input_error(what + ": unknown distribution family \"" + family + "\"");
    }
    if (obj.contains("clamp_lo") || obj.contains("clamp_hi")) {
        d.clamp_lo = obj.at("clamp_lo").get<double>();
        d.clamp_hi = obj.at("clamp_hi").get<double>();
    }
    return d;
}

} // namespace

std::vector<ActivityProfile> profiles_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("activities")) {
        throw input_error("profile config must be a JSON object with an \"activities\" array");
    }
    std::vector<ActivityProfile> profiles;
    for (const json& entry : doc["activities"]) {
        ActivityProfile p;
        p.label = {entry.at("app").get<std::string>(), entry.at("activity").get<std::string>()};
        const std::string tag = p.label.str();
        p.uplink_len = distribution_from_json(entry.at("uplink_len"), tag + " uplink_len");
        p.downlink_len = distribution_from_json(entry.at("downlink_len"), tag + " downlink_len");
        p.uplink_iat = distribution_from_json(entry.at("uplink_iat"), tag + " uplink_iat");
        p.downlink_iat = distribution_from_json(entry.at("downlink_iat"), tag + " downlink_iat");
        if (entry.contains("mgmt_ctrl_rate")) p.mgmt_ctrl_rate = entry["mgmt_ctrl_rate"].get<double>();
        if (entry.contains("retry_rate")) p.retry_rate = entry["retry_rate"].get<double>();
        p.uplink_fraction = entry.contains("uplink_fraction")
                                ? entry["uplink_fraction"].get<double>()
                                : p.implied_uplink_fraction();
        p.validate();
        profiles.push_back(std::move(p));
    }
    if (profiles.empty()) throw input_error("profile config has no activities");
    return profiles;
}

std::string profiles_to_json(const std::vector<ActivityProfile>& profiles) {
    json activities = json::array();
    for (const ActivityProfile& p : profiles) {
        json entry{{"app", p.label.app},
                   {"activity", p.label.activity},
                   {"uplink_len", distribution_to_json(p.uplink_len)},
                   {"downlink_len", distribution_to_json(p.downlink_len)},
                   {"uplink_iat", distribution_to_json(p.uplink_iat)},
                   {"downlink_iat", distribution_to_json(p.downlink_iat)},
                   {"uplink_fraction", p.uplink_fraction},
                   {"mgmt_ctrl_rate", p.mgmt_ctrl_rate},
                   {"retry_rate", p.retry_rate}};
        activities.push_back(std::move(entry));
    }
    return json{{"activities", std::move(activities)}}.dump(2) + "\n";
}

std::vector<ActivityProfile> load_profiles(const std::string& path) {
    return profiles_from_json(read_file(path));
}

namespace {

ActivityProfile make_profile(const char* app, const char* activity,
                             double up_mu, double up_sigma,
                             double down_mu, double down_sigma,
                             double up_rate, double down_rate) {
    ActivityProfile p;
    p.label = {app, activity};
    p.uplink_len = Distribution::make_lognormal(up_mu, up_sigma, 40.0, 1500.0);
    p.downlink_len = Distribution::make_lognormal(down_mu, down_sigma, 40.0, 1500.0);
    p.uplink_iat = Distribution::make_exponential(up_rate);
    p.downlink_iat = Distribution::make_exponential(down_rate);
    p.uplink_fraction = up_rate / (up_rate + down_rate);
    p.mgmt_ctrl_rate = 0.04;
    p.retry_rate = 0.04;
    return p;
}

} // namespace

std::vector<ActivityProfile> demo8_profiles() {
    std::vector<ActivityProfile> v;
    // streambox: video streaming, mostly downlink-heavy large frames
    v.push_back(make_profile("streambox", "watch_video", 4.70, 0.30, 7.10, 0.25, 15, 120));
    v.push_back(make_profile("streambox", "browse_home", 5.00, 0.40, 6.50, 0.40, 25, 60));
    v.push_back(make_profile("streambox", "search_titles", 5.35, 0.40, 5.95, 0.40, 32, 33));
    v.push_back(make_profile("streambox", "upload_clip", 7.10, 0.25, 4.85, 0.35, 118, 25));
    v.push_back(make_profile("streambox", "live_chat", 5.60, 0.50, 5.60, 0.50, 45, 45));
    // pixogram: photo sharing
    v.push_back(make_profile("pixogram", "browse_feed", 4.90, 0.35, 6.90, 0.30, 20, 90));
    v.push_back(make_profile("pixogram", "post_photo", 6.90, 0.25, 5.00, 0.30, 80, 25));
    v.push_back(make_profile("pixogram", "view_story", 4.60, 0.30, 6.70, 0.35, 12, 70));
    v.push_back(make_profile("pixogram", "send_dm", 5.40, 0.40, 5.20, 0.40, 35, 30));
    v.push_back(make_profile("pixogram", "like_scroll", 5.10, 0.30, 6.20, 0.40, 28, 55));
    // chatly: messaging
    v.push_back(make_profile("chatly", "send_text", 4.80, 0.25, 4.70, 0.25, 18, 15));
    v.push_back(make_profile("chatly", "send_image", 6.60, 0.30, 4.90, 0.30, 65, 18));
    v.push_back(make_profile("chatly", "voice_note", 6.20, 0.20, 4.80, 0.25, 50, 15));
    v.push_back(make_profile("chatly", "group_chat", 5.00, 0.35, 5.10, 0.35, 30, 32));
    v.push_back(make_profile("chatly", "read_sync", 4.60, 0.20, 5.50, 0.30, 10, 28));
    // mailpost: email
    v.push_back(make_profile("mailpost", "send_mail", 6.00, 0.30, 4.70, 0.25, 40, 12));
    v.push_back(make_profile("mailpost", "read_inbox", 4.70, 0.25, 6.10, 0.30, 12, 42));
    v.push_back(make_profile("mailpost", "attach_file", 7.08, 0.12, 4.70, 0.15, 88, 12));
    v.push_back(make_profile("mailpost", "sync_folders", 5.15, 0.18, 5.70, 0.18, 20, 48));
    // voxtel: calls, symmetric steady streams
    v.push_back(make_profile("voxtel", "audio_call", 5.46, 0.15, 5.46, 0.15, 50, 50));
    v.push_back(make_profile("voxtel", "video_call", 6.55, 0.20, 6.55, 0.20, 90, 90));
    v.push_back(make_profile("voxtel", "dial_connect", 5.05, 0.50, 5.05, 0.50, 15, 16));
    v.push_back(make_profile("voxtel", "send_sms", 4.45, 0.15, 4.42, 0.15, 9, 7));
    // boardly: forum browsing
    v.push_back(make_profile("boardly", "scroll_board", 4.82, 0.22, 6.30, 0.50, 19, 78));
    v.push_back(make_profile("boardly", "post_thread", 5.70, 0.40, 5.15, 0.40, 34, 26));
    v.push_back(make_profile("boardly", "open_images", 4.80, 0.20, 6.78, 0.15, 12, 100));
    v.push_back(make_profile("boardly", "vote_refresh", 5.10, 0.25, 5.40, 0.30, 26, 30));
    v.push_back(make_profile("boardly", "profile_view", 4.72, 0.45, 5.85, 0.45, 18, 52));
    // cliphub: short video; each activity sits between a close pair of
    // trained activities, where confidence splits
    v.push_back(make_profile("cliphub", "watch_clip", 4.75, 0.32, 6.80, 0.32, 16, 80));
    v.push_back(make_profile("cliphub", "swipe_feed", 5.05, 0.35, 6.35, 0.40, 26, 58));
    v.push_back(make_profile("cliphub", "upload_short", 6.99, 0.20, 4.85, 0.22, 84, 18));
    v.push_back(make_profile("cliphub", "like_comment", 5.25, 0.35, 5.65, 0.35, 32, 38));
    // gamerush: gaming, same placement rule around voxtel/chatly/streambox
    v.push_back(make_profile("gamerush", "match_play", 5.50, 0.30, 5.50, 0.30, 47, 47));
    v.push_back(make_profile("gamerush", "lobby_chat", 4.90, 0.30, 4.90, 0.30, 24, 26));
    v.push_back(make_profile("gamerush", "download_assets", 4.78, 0.22, 6.90, 0.18, 13, 106));
    v.push_back(make_profile("gamerush", "spectate", 5.30, 0.25, 6.40, 0.30, 30, 75));
    return v;
}

std::vector<ActivityProfile> demo8_noise_profiles() {
    std::vector<ActivityProfile> v;
    v.push_back(make_profile("calnoise", "drift_a", 5.50, 0.35, 6.00, 0.35, 33, 40));
    v.push_back(make_profile("calnoise", "drift_b", 4.95, 0.30, 6.45, 0.35, 18, 66));
    v.push_back(make_profile("calnoise", "drift_c", 6.45, 0.28, 4.95, 0.30, 70, 21));
    v.push_back(make_profile("calnoise", "drift_d", 5.05, 0.28, 5.30, 0.30, 24, 27));
    return v;
}

} // namespace sideflow
