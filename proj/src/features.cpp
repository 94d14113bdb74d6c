#include "sideflow/features.hpp"

#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sideflow {

std::vector<double> interarrival(const std::vector<double>& timestamps) {
    std::vector<double> gaps;
    if (timestamps.size() < 2) return gaps;
    gaps.reserve(timestamps.size() - 1);
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        const double gap = timestamps[i] - timestamps[i - 1];
        if (gap < 0.0) throw input_error("decreasing timestamps in interarrival input");
        gaps.push_back(gap);
    }
    return gaps;
}

namespace {

// Rank-h order statistic with linear interpolation, h = (n-1)*p.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const double fl = std::floor(h);
    const std::size_t lo = static_cast<std::size_t>(fl);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - fl) * (sorted[hi] - sorted[lo]);
}

double median_sorted(const std::vector<double>& sorted) {
    return quantile_sorted(sorted, 0.5);
}

} // namespace

DirectionalStats stats12(const std::vector<double>& series) {
    DirectionalStats s;
    const std::size_t n = series.size();
    if (n == 0) return s;

    for (double x : series) {
        if (!std::isfinite(x)) throw input_error("non-finite value in statistics input");
    }

    std::vector<double> sorted = series;
    std::sort(sorted.begin(), sorted.end());

    s.minimum = sorted.front();
    s.maximum = sorted.back();

    double total = 0.0;
    for (double x : series) total += x;
    s.sum = total;
    s.mean = total / static_cast<double>(n);

    s.first_quartile = quantile_sorted(sorted, 0.25);
    s.second_quartile = quantile_sorted(sorted, 0.50);
    s.third_quartile = quantile_sorted(sorted, 0.75);

    const double med = s.second_quartile;
    std::vector<double> abs_dev;
    abs_dev.reserve(n);
    for (double x : series) abs_dev.push_back(std::fabs(x - med));
    std::sort(abs_dev.begin(), abs_dev.end());
    s.median_absolute_deviation = median_sorted(abs_dev);

    if (n >= 2) {
        double ss = 0.0;
        for (double x : series) {
            const double d = x - s.mean;
            ss += d * d;
        }
        s.variance = ss / static_cast<double>(n - 1);
        s.standard_deviation = std::sqrt(s.variance);

        // population central moments for the shape statistics
        const double m2 = ss / static_cast<double>(n);
        if (n >= 3 && m2 > 0.0) {
            double m3 = 0.0;
            for (double x : series) {
                const double d = x - s.mean;
                m3 += d * d * d;
            }
            m3 /= static_cast<double>(n);
            const double g1 = m3 / std::pow(m2, 1.5);
            const double nn = static_cast<double>(n);
            s.skew = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
        }
        if (n >= 4 && m2 > 0.0) {
            double m4 = 0.0;
            for (double x : series) {
                const double d = x - s.mean;
                const double d2 = d * d;
                m4 += d2 * d2;
            }
            m4 /= static_cast<double>(n);
            const double g2 = m4 / (m2 * m2) - 3.0;
            const double nn = static_cast<double>(n);
            s.kurtosis = ((nn + 1.0) * g2 + 6.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0));
        }
    }
    return s;
}

FeatureVector featurize(const FlowSegment& segment) {
    if (segment.frames.empty()) throw input_error("cannot featurize an empty segment");

    std::vector<double> up_len, down_len, up_ts, down_ts;
    for (const CaptureRecord& rec : segment.frames) {
        if (rec.dir == Direction::uplink) {
            up_len.push_back(static_cast<double>(rec.len));
            up_ts.push_back(rec.ts);
        } else {
            down_len.push_back(static_cast<double>(rec.len));
            down_ts.push_back(rec.ts);
        }
    }

    FeatureVector fv;
    fv.label = segment.label;
    fv.window_index = segment.window_index;

    const std::array<std::array<double, 12>, 4> blocks = {
        stats12(up_len).as_array(),
        stats12(down_len).as_array(),
        stats12(interarrival(up_ts)).as_array(),
        stats12(interarrival(down_ts)).as_array(),
    };
    std::size_t k = 0;
    for (const auto& block : blocks) {
        for (double v : block) fv.values[k++] = v;
    }
    return fv;
}

Scaler fit_scaler(const std::vector<FeatureVector>& matrix) {
    if (matrix.empty()) throw input_error("cannot fit a scaler on an empty matrix");
    const double n = static_cast<double>(matrix.size());

    Scaler sc;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        // A column that never varies gets (mean = value, std = 0) exactly,
        // so apply_scaler sends it to 0 without floating-point residue.
        const double first = matrix.front().values[j];
        bool constant = true;
        for (const FeatureVector& row : matrix) {
            if (row.values[j] != first) {
                constant = false;
                break;
            }
        }
        if (constant) {
            sc.mean[j] = first;
            sc.std[j] = 0.0;
            continue;
        }
        double total = 0.0;
        for (const FeatureVector& row : matrix) total += row.values[j];
        const double mu = total / n;
        double ss = 0.0;
        for (const FeatureVector& row : matrix) {
            const double d = row.values[j] - mu;
            ss += d * d;
        }
        sc.mean[j] = mu;
        sc.std[j] = std::sqrt(ss / n);
    }
    return sc;
}

FeatureVector apply_scaler(const Scaler& scaler, const FeatureVector& vector) {
    FeatureVector out = vector;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        out.values[j] = scaler.std[j] == 0.0
                            ? 0.0
                            : (vector.values[j] - scaler.mean[j]) / scaler.std[j];
    }
    return out;
}

std::string feature_csv_header() {
    std::string header = "app,activity,window_index";
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), ",f%02zu", j);
        header += buf;
    }
    return header;
}

std::string feature_csv_row(const FeatureVector& fv) {
    if (!fv.label) throw input_error("feature CSV rows need a label");
    std::string row = fv.label->app + "," + fv.label->activity + "," +
                      std::to_string(fv.window_index);
    for (double v : fv.values) {
        row += ",";
        row += format_double(v);
    }
    return row;
}

void write_feature_csv(const std::vector<FeatureVector>& rows, std::ostream& out) {
    out << feature_csv_header() << '\n';
    for (const FeatureVector& fv : rows) out << feature_csv_row(fv) << '\n';
}

std::vector<FeatureVector> read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw input_error("empty feature CSV");
    if (line == feature_csv_header() + "\r") line.pop_back();
    if (line != feature_csv_header()) throw input_error("unexpected feature CSV header");

    std::vector<FeatureVector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 3 + kFeatureCount) {
            throw input_error("wrong column count at line " + std::to_string(line_no));
        }
        FeatureVector fv;
        ActivityLabel label{cells[0], cells[1]};
        try {
            validate_label(label);
            fv.window_index = parse_int(cells[2]);
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                fv.values[j] = parse_double(cells[3 + j]);
            }
        } catch (const input_error& e) {
            throw input_error(std::string(e.what()) + " at line " + std::to_string(line_no));
        }
        fv.label = std::move(label);
        rows.push_back(std::move(fv));
    }
    return rows;
}

std::vector<FeatureVector> read_feature_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    return read_feature_csv(in);
}

} // namespace sideflow
