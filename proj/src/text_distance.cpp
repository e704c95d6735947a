#include "aed/text_distance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace aed {

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        int extra = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
        } else {
            out.push_back(U'�');
            ++i;
            continue;
        }
        if (i + static_cast<std::size_t>(extra) >= text.size()) {
            out.push_back(U'�');
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(U'�');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(extra) + 1;
    }
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const std::u32string s = decode_utf8(a);
    const std::u32string t = decode_utf8(b);
    if (s.empty()) {
        return t.size();
    }
    if (t.empty()) {
        return s.size();
    }
    std::vector<std::size_t> prev(t.size() + 1);
    std::vector<std::size_t> cur(t.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t substitute = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
        }
        std::swap(prev, cur);
    }
    return prev[t.size()];
}

namespace {

std::map<std::u32string, long long> trigram_counts(const std::u32string& s) {
    std::map<std::u32string, long long> counts;
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
        ++counts[s.substr(i, 3)];
    }
    return counts;
}

}  // namespace

double TrigramEmbedder::distance(std::string_view a, std::string_view b) const {
    const std::u32string s = decode_utf8(a);
    const std::u32string t = decode_utf8(b);
    const auto ca = trigram_counts(s);
    const auto cb = trigram_counts(t);
    if (ca.empty() || cb.empty()) {
        return (ca.empty() && cb.empty() && s == t) ? 0.0 : 1.0;
    }
    long long dot = 0;
    long long na = 0;
    long long nb = 0;
    for (const auto& [gram, count] : ca) {
        na += count * count;
        if (auto it = cb.find(gram); it != cb.end()) {
            dot += count * it->second;
        }
    }
    for (const auto& [gram, count] : cb) {
        nb += count * count;
    }
    const double cosine =
        static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
    return std::clamp(1.0 - cosine, 0.0, 1.0);
}

double embedding_distance(std::string_view a, std::string_view b) {
    return TrigramEmbedder{}.distance(a, b);
}

}  // namespace aed
