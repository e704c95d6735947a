#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace aed::csv {

using Row = std::vector<std::string>;

// Reads one RFC 4180 record. Quoted fields may contain commas, quotes ("")
// and newlines. Returns false at end of input. `line` tracks the physical
// line number of the record start for error messages.
bool read_row(std::istream& in, Row& row, std::size_t& line);

void write_row(std::ostream& out, const Row& row);

std::string escape(const std::string& field);

}  // namespace aed::csv
