#include "aed/csv.hpp"

#include "aed/common.hpp"

namespace aed::csv {

bool read_row(std::istream& in, Row& row, std::size_t& line) {
    row.clear();
    int c = in.get();
    if (c == std::char_traits<char>::eof()) {
        return false;
    }
    ++line;
    const std::size_t start_line = line;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (true) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) {
                throw DataError("line " + std::to_string(start_line) + ": unterminated quoted field");
            }
            row.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') {
                    ++line;
                }
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !field_was_quoted) {
            quoted = true;
            field_was_quoted = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
        } else if (ch == '\n') {
            row.push_back(std::move(field));
            return true;
        } else if (ch == '\r' && in.peek() == '\n') {
            // CRLF line ending; the '\n' closes the record next iteration.
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out += "\"\"";
        } else {
            out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << escape(row[i]);
    }
    out << '\n';
}

}  // namespace aed::csv
