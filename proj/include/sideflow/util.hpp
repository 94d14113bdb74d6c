#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sideflow {

// Deterministic random source. All distribution transforms are implemented
// here rather than with std::*_distribution, whose output is
// implementation-defined; a given seed must produce the same stream on
// every platform this code builds on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n);

    // Standard normal, Box-Muller with one cached spare.
    double normal();

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    double exponential(double rate);

    double lognormal(double mu, double sigma);

    // Fisher-Yates using below(); std::shuffle is implementation-defined.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives a stream seed from a master seed and a tag (e.g. activity index)
// so independent generators never share state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

// Exact inverse of format_double; throws input_error on garbage.
double parse_double(const std::string& s);

std::int64_t parse_int(const std::string& s);

std::vector<std::string> split(const std::string& line, char sep);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Writes via a temp file in the same directory followed by a rename, so
// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

} // namespace sideflow
