#pragma once

#include "sideflow/capture.hpp"
#include "sideflow/util.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sideflow {

// Sampling distribution for frame lengths (bytes) or inter-arrival gaps
// (seconds). Three families cover the fixture needs: lognormal,
// exponential, and a discrete weighted mixture. Optional clamp bounds cap
// samples (lengths must stay within [40, 1500]); analytic_mean() accounts
// for the clamping so generator output can be checked against it.
struct Distribution {
    enum class Family { lognormal, exponential, mixture };
    struct Point {
        double value = 0.0;
        double weight = 0.0;
    };

    Family family = Family::exponential;
    double mu = 0.0;     // lognormal
    double sigma = 0.0;  // lognormal
    double rate = 0.0;   // exponential
    std::vector<Point> points; // mixture
    double clamp_lo = 0.0;     // no clamp when lo == hi == 0
    double clamp_hi = 0.0;

    double sample(Rng& rng) const;
    double analytic_mean() const;
    void validate(const std::string& what) const;

    static Distribution make_lognormal(double mu, double sigma, double lo = 0.0, double hi = 0.0);
    static Distribution make_exponential(double rate);
    static Distribution make_mixture(std::vector<Point> points);
};

// Declarative recipe for one activity's traffic. Per direction an
// independent renewal process draws arrival gaps from the iat distribution
// and a length per arrival; management/control frames and retry flags are
// mixed in at the given rates. uplink_fraction documents the intended
// share of uplink data frames: 0 disables the uplink entirely, 1 the
// downlink, and any value in between must agree with the fraction implied
// by the two iat rates to within 0.05.
struct ActivityProfile {
    ActivityLabel label;
    Distribution uplink_len;
    Distribution downlink_len;
    Distribution uplink_iat;
    Distribution downlink_iat;
    double uplink_fraction = 0.5;
    double mgmt_ctrl_rate = 0.0;
    double retry_rate = 0.0;

    double implied_uplink_fraction() const;
    void validate() const;
};

// Time-ordered labeled frame stream over (0, duration], fully determined
// by (profile, duration, seed).
std::vector<CaptureRecord> generate_capture(const ActivityProfile& profile,
                                            double duration, std::uint64_t seed);

// Profile config document: {"activities": [{...}, ...]} with keys
// mirroring ActivityProfile; uplink_fraction may be omitted and is then
// derived from the iat rates.
std::vector<ActivityProfile> profiles_from_json(const std::string& text);
std::string profiles_to_json(const std::vector<ActivityProfile>& profiles);
std::vector<ActivityProfile> load_profiles(const std::string& path);

// Shipped fixture: 8 synthetic apps, 4-6 activities each. Two app pairs
// overlap on purpose (cliphub vs streambox, gamerush vs voxtel/chatly) so
// held-out traffic lands between trained classes, the regime the
// rejection threshold is meant to catch; the rest are well separated.
std::vector<ActivityProfile> demo8_profiles();

// Designated calibration noise: activities of a ninth app placed between
// other trained-class pairs. Use these, never the apps under evaluation,
// as the unknown side when sweeping for a threshold.
std::vector<ActivityProfile> demo8_noise_profiles();

} // namespace sideflow
