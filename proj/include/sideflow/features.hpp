#pragma once

#include "sideflow/capture.hpp"
#include "sideflow/segment.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sideflow {

// Twelve order-free summary statistics of one series. Conventions are
// pinned so independent implementations agree to the last bit:
//   - quartiles: linear interpolation at rank h = (n-1)*p
//   - variance / standard deviation: sample convention, divisor n-1 (n >= 2)
//   - skew: bias-corrected G1 (n >= 3), kurtosis: bias-corrected excess G2
//     (n >= 4), both 0 when the series is constant
//   - median_absolute_deviation: median(|x - median(x)|), literally
//   - any statistic undefined at the series length takes fill value 0;
//     the empty series yields all twelve as 0
struct DirectionalStats {
    double minimum = 0.0;
    double maximum = 0.0;
    double standard_deviation = 0.0;
    double first_quartile = 0.0;
    double second_quartile = 0.0;
    double third_quartile = 0.0;
    double mean = 0.0;
    double median_absolute_deviation = 0.0;
    double variance = 0.0;
    double skew = 0.0;
    double kurtosis = 0.0;
    double sum = 0.0;

    std::array<double, 12> as_array() const {
        return {minimum, maximum, standard_deviation, first_quartile,
                second_quartile, third_quartile, mean, median_absolute_deviation,
                variance, skew, kurtosis, sum};
    }
};

inline constexpr std::size_t kFeatureCount = 48;

// 48 values ordered as [length-uplink, length-downlink,
// interarrival-uplink, interarrival-downlink], each block in
// DirectionalStats order. Inter-arrival times are computed within each
// direction independently.
struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::optional<ActivityLabel> label;
    std::int64_t window_index = 0;
};

// Per-feature standardization parameters, population convention
// (divisor n). A std entry of 0 marks a feature constant on the fitting
// data; apply_scaler maps such features to exactly 0.
struct Scaler {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std{};
};

// Consecutive differences of a non-decreasing timestamp series;
// n-1 values for n >= 2, empty otherwise. Throws on decreasing input.
std::vector<double> interarrival(const std::vector<double>& timestamps);

DirectionalStats stats12(const std::vector<double>& series);

FeatureVector featurize(const FlowSegment& segment);

Scaler fit_scaler(const std::vector<FeatureVector>& matrix);

FeatureVector apply_scaler(const Scaler& scaler, const FeatureVector& vector);

// CSV surface: header "app,activity,window_index,f00..f47", values written
// at round-trip-exact precision. Reading rejects unlabeled rows, a wrong
// header, or malformed fields (with line numbers).
std::string feature_csv_header();
std::string feature_csv_row(const FeatureVector& fv);
void write_feature_csv(const std::vector<FeatureVector>& rows, std::ostream& out);
std::vector<FeatureVector> read_feature_csv(std::istream& in);
std::vector<FeatureVector> read_feature_csv_file(const std::string& path);

} // namespace sideflow
