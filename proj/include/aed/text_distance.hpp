#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace aed {

// Decodes UTF-8 into Unicode scalar values. Malformed bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view text);

// Levenshtein distance with unit costs over Unicode scalar values.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Distance in [0,1] between two strings under some text representation.
class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual double distance(std::string_view a, std::string_view b) const = 0;
};

// 1 − cosine similarity of character-trigram count vectors. Two strings with
// no trigrams are at distance 0 when equal and 1 otherwise.
class TrigramEmbedder final : public TextEmbedder {
public:
    double distance(std::string_view a, std::string_view b) const override;
};

double embedding_distance(std::string_view a, std::string_view b);

}  // namespace aed
