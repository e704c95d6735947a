#include "aed/common.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace aed {

std::string_view to_string(Application app) {
    switch (app) {
    case Application::MusicStreaming: return "music_streaming";
    case Application::MobileApplications: return "mobile_applications";
    case Application::VideoStreaming: return "video_streaming";
    }
    throw InvariantError("bad Application value");
}

Application parse_application(std::string_view text) {
    for (Application app : kAllApplications) {
        if (to_string(app) == text) {
            return app;
        }
    }
    throw DataError("unknown application '" + std::string(text) + "'");
}

RelevanceLabel label_from_level(int lvl) {
    if (lvl < 1 || lvl > 5) {
        throw DataError("relevance level out of range: " + std::to_string(lvl));
    }
    return static_cast<RelevanceLabel>(lvl);
}

std::string_view to_string(RelevanceLabel label) {
    switch (label) {
    case RelevanceLabel::Unacceptable: return "Unacceptable";
    case RelevanceLabel::Acceptable: return "Acceptable";
    case RelevanceLabel::Good: return "Good";
    case RelevanceLabel::Excellent: return "Excellent";
    case RelevanceLabel::Perfect: return "Perfect";
    }
    throw InvariantError("bad RelevanceLabel value");
}

RelevanceLabel parse_label(std::string_view text) {
    for (int lvl = 1; lvl <= 5; ++lvl) {
        if (to_string(static_cast<RelevanceLabel>(lvl)) == text) {
            return static_cast<RelevanceLabel>(lvl);
        }
    }
    throw DataError("unknown relevance label '" + std::string(text) + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw InvariantError("to_chars failed");
    }
    return std::string(buf.data(), ptr);
}

}  // namespace aed
