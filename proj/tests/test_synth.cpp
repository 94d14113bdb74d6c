#include "sideflow/synth.hpp"
#include "sideflow/capture.hpp"
#include "sideflow/errors.hpp"
#include "sideflow/features.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

using namespace sideflow;

namespace {

bool slurp_profiles_equal(const std::string& path, const std::vector<ActivityProfile>& expected) {
    return profiles_to_json(load_profiles(path)) == profiles_to_json(expected);
}

ActivityProfile clean_profile() {
    ActivityProfile p;
    p.label = {"synthapp", "steady_pull"};
    p.uplink_len = Distribution::make_lognormal(5.0, 0.3, 40.0, 1500.0);
    p.downlink_len = Distribution::make_lognormal(6.5, 0.25, 40.0, 1500.0);
    p.uplink_iat = Distribution::make_exponential(25.0);
    p.downlink_iat = Distribution::make_exponential(75.0);
    p.uplink_fraction = 0.25;
    return p;
}

} // namespace

TEST_CASE("a clean profile survives filtering untouched") {
    ActivityProfile p = clean_profile();
    const auto records = generate_capture(p, 30.0, 1);
    REQUIRE_FALSE(records.empty());
    const auto [kept, meta] = filter_frames(records);
    CHECK(kept.size() == records.size());
    CHECK(meta.dropped_mgmt_ctrl == 0);
    CHECK(meta.dropped_retry_or_fcs == 0);
}

TEST_CASE("generation is deterministic in (profile, duration, seed)") {
    ActivityProfile p = clean_profile();
    p.mgmt_ctrl_rate = 0.05;
    p.retry_rate = 0.05;
    const auto a = generate_capture(p, 20.0, 42);
    const auto b = generate_capture(p, 20.0, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ts == b[i].ts);
        CHECK(a[i].len == b[i].len);
        CHECK(a[i].dir == b[i].dir);
        CHECK(a[i].ftype == b[i].ftype);
        CHECK(a[i].retry == b[i].retry);
    }
    CHECK(generate_capture(p, 20.0, 43).size() != 0);
}

TEST_CASE("timestamps stay inside (0, duration] and never decrease") {
    ActivityProfile p = clean_profile();
    p.mgmt_ctrl_rate = 0.1;
    p.retry_rate = 0.1;
    const double duration = 25.0;
    const auto records = generate_capture(p, duration, 7);
    double prev = 0.0;
    for (const CaptureRecord& rec : records) {
        CHECK(rec.ts > 0.0);
        CHECK(rec.ts <= duration);
        CHECK(rec.ts >= prev);
        if (rec.ftype == FrameType::data) {
            CHECK(rec.len >= 40);
            CHECK(rec.len <= 1500);
        }
        REQUIRE(rec.label.has_value());
        CHECK(*rec.label == p.label);
        prev = rec.ts;
    }
}

TEST_CASE("mgmt and retry rates shape the filter drop counts") {
    ActivityProfile p = clean_profile();
    p.mgmt_ctrl_rate = 0.10;
    p.retry_rate = 0.08;
    const auto records = generate_capture(p, 120.0, 11);
    const auto [kept, meta] = filter_frames(records);
    const double mgmt_share =
        static_cast<double>(meta.dropped_mgmt_ctrl) / static_cast<double>(records.size());
    CHECK(mgmt_share == doctest::Approx(0.10).epsilon(0.25));
    const double retry_share = static_cast<double>(meta.dropped_retry_or_fcs) /
                               static_cast<double>(records.size() - meta.dropped_mgmt_ctrl);
    CHECK(retry_share == doctest::Approx(0.08).epsilon(0.30));
    CHECK_FALSE(kept.empty());
}

TEST_CASE("empirical means converge to the analytic profile values") {
    ActivityProfile p = clean_profile();
    // long capture: ~25 up/s for 500 s gives ~12.5k uplink samples
    const auto records = generate_capture(p, 500.0, 13);
    const auto [kept, meta] = filter_frames(records);

    std::vector<double> up_len, up_ts, down_len, down_ts;
    for (const CaptureRecord& rec : kept) {
        if (rec.dir == Direction::uplink) {
            up_len.push_back(rec.len);
            up_ts.push_back(rec.ts);
        } else {
            down_len.push_back(rec.len);
            down_ts.push_back(rec.ts);
        }
    }
    REQUIRE(up_len.size() > 10000);

    auto check_mean = [](const std::vector<double>& sample, double analytic) {
        double sum = 0.0;
        for (double v : sample) sum += v;
        const double mean = sum / static_cast<double>(sample.size());
        double ss = 0.0;
        for (double v : sample) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / static_cast<double>(sample.size() - 1)) /
                          std::sqrt(static_cast<double>(sample.size()));
        CHECK(std::fabs(mean - analytic) <= 3.0 * se + 0.5); // +0.5: integer rounding slack
    };
    check_mean(up_len, p.uplink_len.analytic_mean());
    check_mean(down_len, p.downlink_len.analytic_mean());

    const auto up_gaps = interarrival(up_ts);
    const auto down_gaps = interarrival(down_ts);
    auto check_gap_mean = [](const std::vector<double>& gaps, double analytic) {
        double sum = 0.0;
        for (double v : gaps) sum += v;
        const double mean = sum / static_cast<double>(gaps.size());
        double ss = 0.0;
        for (double v : gaps) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / static_cast<double>(gaps.size() - 1)) /
                          std::sqrt(static_cast<double>(gaps.size()));
        CHECK(std::fabs(mean - analytic) <= 3.0 * se);
    };
    check_gap_mean(up_gaps, 1.0 / 25.0);
    check_gap_mean(down_gaps, 1.0 / 75.0);
}

TEST_CASE("analytic means handle clamping") {
    // no clamp: plain lognormal mean
    const Distribution plain = Distribution::make_lognormal(5.0, 0.5);
    CHECK(plain.analytic_mean() == doctest::Approx(std::exp(5.125)).epsilon(1e-12));

    // clamp far outside the mass: same as unclamped
    const Distribution wide = Distribution::make_lognormal(5.0, 0.1, 1.0, 1e6);
    CHECK(wide.analytic_mean() == doctest::Approx(std::exp(5.005)).epsilon(1e-6));

    // tight clamp: mean is pulled toward the bounds
    const Distribution tight = Distribution::make_lognormal(7.2, 0.4, 40.0, 1500.0);
    CHECK(tight.analytic_mean() < std::exp(7.2 + 0.08));
    CHECK(tight.analytic_mean() <= 1500.0);

    const Distribution expo = Distribution::make_exponential(2.0);
    CHECK(expo.analytic_mean() == 0.5);

    const Distribution mix = Distribution::make_mixture({{60.0, 1.0}, {1400.0, 3.0}});
    CHECK(mix.analytic_mean() == doctest::Approx((60.0 + 3.0 * 1400.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("profile validation catches bad parameters") {
    ActivityProfile p = clean_profile();
    p.uplink_fraction = 1.2;
    CHECK_THROWS_AS(p.validate(), input_error);

    p = clean_profile();
    p.uplink_fraction = 0.9; // implied fraction is 0.25
    CHECK_THROWS_AS(p.validate(), input_error);

    p = clean_profile();
    p.uplink_len = Distribution::make_lognormal(5.0, 0.3); // unbounded length support
    CHECK_THROWS_AS(p.validate(), input_error);

    p = clean_profile();
    p.retry_rate = 1.0;
    CHECK_THROWS_AS(p.validate(), input_error);

    CHECK_THROWS_AS(generate_capture(clean_profile(), 0.0, 1), input_error);

    // extremes disable one direction
    p = clean_profile();
    p.uplink_fraction = 1.0;
    const auto up_only = generate_capture(p, 10.0, 3);
    for (const CaptureRecord& rec : up_only) {
        if (rec.ftype == FrameType::data) CHECK(rec.dir == Direction::uplink);
    }
}

TEST_CASE("profiles round-trip through the JSON config format") {
    const auto profiles = demo8_profiles();
    const std::string text = profiles_to_json(profiles);
    const auto parsed = profiles_from_json(text);
    REQUIRE(parsed.size() == profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        CHECK(parsed[i].label == profiles[i].label);
        CHECK(parsed[i].uplink_fraction == profiles[i].uplink_fraction);
        CHECK(parsed[i].uplink_len.mu == profiles[i].uplink_len.mu);
        CHECK(parsed[i].downlink_iat.rate == profiles[i].downlink_iat.rate);
        // identical generation from the reparsed profile
        CHECK(generate_capture(parsed[i], 5.0, 9).size() ==
              generate_capture(profiles[i], 5.0, 9).size());
    }

    CHECK_THROWS_AS(profiles_from_json("{}"), input_error);
    CHECK_THROWS_AS(profiles_from_json(R"({"activities":[]})"), input_error);
}

TEST_CASE("the shipped fixture files match the built-in profiles") {
    const std::string root = SIDEFLOW_SOURCE_DIR;
    CHECK(slurp_profiles_equal(root + "/fixtures/demo8.json", demo8_profiles()));
    CHECK(slurp_profiles_equal(root + "/fixtures/demo8-noise.json", demo8_noise_profiles()));
}

TEST_CASE("the demo8 fixture is valid and spans 8 apps plus calibration noise") {
    const auto profiles = demo8_profiles();
    std::set<std::string> apps;
    std::map<std::string, int> per_app;
    for (const ActivityProfile& p : profiles) {
        CHECK_NOTHROW(p.validate());
        apps.insert(p.label.app);
        ++per_app[p.label.app];
    }
    CHECK(apps.size() == 8);
    for (const auto& [app, count] : per_app) {
        CHECK(count >= 4);
        CHECK(count <= 6);
    }
    for (const ActivityProfile& p : demo8_noise_profiles()) {
        CHECK_NOTHROW(p.validate());
        CHECK(p.label.app == "calnoise");
        CHECK(apps.count(p.label.app) == 0);
    }
}
