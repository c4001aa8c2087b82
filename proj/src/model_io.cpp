#include "hvsm/model_io.hpp"

#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace hvsm {

ModelWriter::ModelWriter(std::ostream& out, std::string_view kind) : out_(out) {
    out_ << "hvsm-model " << kModelFormatVersion << '\n';
    out_ << "kind " << kind << '\n';
}

void ModelWriter::text(std::string_view key, std::string_view value) { out_ << key << ' ' << value << '\n'; }

void ModelWriter::words(std::string_view key, std::span<const std::string> values) {
    out_ << key;
    for (const auto& w : values) {
        if (w.empty() || w.find_first_of(" \t\n") != std::string::npos) {
            throw InvalidArgument("model field '" + std::string(key) + "' has a value with whitespace");
        }
        out_ << ' ' << w;
    }
    out_ << '\n';
}

void ModelWriter::number(std::string_view key, double value) { out_ << key << ' ' << csv::format_double(value) << '\n'; }

void ModelWriter::integer(std::string_view key, long long value) { out_ << key << ' ' << value << '\n'; }

void ModelWriter::numbers(std::string_view key, std::span<const double> values) {
    out_ << key;
    for (double v : values) {
        out_ << ' ' << csv::format_double(v);
    }
    out_ << '\n';
}

void ModelWriter::finish() {
    out_ << "end\n";
    out_.flush();
}

ModelReader::ModelReader(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool ended = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) {
            continue;
        }
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) {
            tokens.push_back(std::move(t));
        }
        if (lineno == 1) {
            if (key != "hvsm-model" || tokens.size() != 1 || tokens[0] != std::to_string(kModelFormatVersion)) {
                throw ParseError("not an hvsm model file (version " + std::to_string(kModelFormatVersion) + ")", 1);
            }
            continue;
        }
        if (key == "end") {
            ended = true;
            break;
        }
        if (key == "kind") {
            if (tokens.size() != 1) {
                throw ParseError("bad kind line", lineno);
            }
            kind_ = tokens[0];
            continue;
        }
        if (!fields_.emplace(key, std::move(tokens)).second) {
            throw ParseError("repeated model field '" + key + "'", lineno);
        }
    }
    if (lineno == 0) {
        throw ParseError("empty model file");
    }
    if (!ended) {
        throw ParseError("truncated model file (no 'end' line)", lineno);
    }
    if (kind_.empty()) {
        throw ParseError("model file has no kind");
    }
}

bool ModelReader::has(std::string_view key) const { return fields_.find(key) != fields_.end(); }

const std::vector<std::string>& ModelReader::tokens(std::string_view key) const {
    const auto it = fields_.find(key);
    if (it == fields_.end()) {
        throw ParseError("model file lacks field '" + std::string(key) + "'");
    }
    return it->second;
}

std::string ModelReader::text(std::string_view key) const {
    const auto& t = tokens(key);
    if (t.size() != 1) {
        throw ParseError("model field '" + std::string(key) + "' should hold one value");
    }
    return t[0];
}

std::vector<std::string> ModelReader::words(std::string_view key) const { return tokens(key); }

double ModelReader::number(std::string_view key) const {
    const auto v = csv::parse_double(text(key));
    if (!v) {
        throw ParseError("model field '" + std::string(key) + "' is not a finite number");
    }
    return *v;
}

long long ModelReader::integer(std::string_view key) const {
    const auto v = csv::parse_int(text(key));
    if (!v) {
        throw ParseError("model field '" + std::string(key) + "' is not an integer");
    }
    return *v;
}

std::vector<double> ModelReader::numbers(std::string_view key, std::size_t expected_count) const {
    const auto& t = tokens(key);
    if (t.size() != expected_count) {
        throw ParseError("model field '" + std::string(key) + "' has " + std::to_string(t.size()) +
                         " values, expected " + std::to_string(expected_count));
    }
    std::vector<double> out;
    out.reserve(t.size());
    for (const auto& s : t) {
        const auto v = csv::parse_double(s);
        if (!v) {
            throw ParseError("model field '" + std::string(key) + "' has a non-finite entry '" + s + "'");
        }
        out.push_back(*v);
    }
    return out;
}

} // namespace hvsm
