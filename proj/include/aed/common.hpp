#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aed {

// Input that fails to parse or violates a data invariant. Maps to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad command line or configuration. Maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal consistency check failed. Maps to exit code 3.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::int64_t kSecondsPerDay = 86400;

inline bool is_missing(double v) { return std::isnan(v); }

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

enum class Application : std::uint8_t { MusicStreaming, MobileApplications, VideoStreaming };

inline constexpr Application kAllApplications[] = {
    Application::MusicStreaming, Application::MobileApplications, Application::VideoStreaming};

std::string_view to_string(Application app);
Application parse_application(std::string_view text);

// Five-level relevance scale, Unacceptable (1) through Perfect (5).
enum class RelevanceLabel : std::uint8_t {
    Unacceptable = 1,
    Acceptable = 2,
    Good = 3,
    Excellent = 4,
    Perfect = 5,
};

inline int level(RelevanceLabel l) { return static_cast<int>(l); }

inline int ordinal_distance(RelevanceLabel a, RelevanceLabel b) {
    return std::abs(level(a) - level(b));
}

RelevanceLabel label_from_level(int level);
std::string_view to_string(RelevanceLabel label);
RelevanceLabel parse_label(std::string_view text);

// Stable 64-bit FNV-1a, used for config provenance hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace aed
