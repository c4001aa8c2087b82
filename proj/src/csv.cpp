#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace hvsm {

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : Error(what), row_(row), column_(column) {}

TrainingError::TrainingError(const std::string& what, std::size_t iteration)
    : Error(what), iteration_(iteration) {}

namespace csv {

std::optional<Row> Reader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        record_line_ = line_;

        Row row;
        std::string field;
        bool quoted = false;
        std::size_t i = 0;
        for (;;) {
            if (i == line.size()) {
                if (quoted) {
                    // Quoted field spans a newline.
                    std::string more;
                    if (!std::getline(in_, more)) {
                        throw ParseError("unterminated quoted field", record_line_);
                    }
                    ++line_;
                    if (!more.empty() && more.back() == '\r') {
                        more.pop_back();
                    }
                    field.push_back('\n');
                    line = std::move(more);
                    i = 0;
                    continue;
                }
                row.push_back(std::move(field));
                break;
            }
            const char ch = line[i];
            if (quoted) {
                if (ch == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                row.push_back(std::move(field));
                field.clear();
            } else {
                field.push_back(ch);
            }
            ++i;
        }
        return row;
    }
    return std::nullopt;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out.push_back('"');
        }
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string join(const Row& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        out += escape(fields[i]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    std::string out(buf, end);
    if (out.starts_with('-') && out.find_first_not_of("-0.") == std::string::npos) {
        out.erase(0, 1); // no "-0.000"
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) {
        return std::nullopt;
    }
    const char* begin = t.data();
    if (*begin == '+') {
        ++begin;
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<long long> parse_int(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) {
        return std::nullopt;
    }
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr == t.data() + t.size()) {
        return v;
    }
    // PROMISE tables occasionally store integral counts as "3.0".
    if (auto d = parse_double(t); d && *d == std::floor(*d) && std::fabs(*d) < 9e15) {
        return static_cast<long long>(*d);
    }
    return std::nullopt;
}

} // namespace csv
} // namespace hvsm
