#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hvsm {

/// Line-oriented model envelope:
///
///     hvsm-model 1
///     kind <tag>
///     <key> <token> <token> ...
///     end
///
/// Numbers are written in shortest round-trip decimal form, so a save/load
/// cycle reproduces every double bit for bit.
class ModelWriter {
public:
    ModelWriter(std::ostream& out, std::string_view kind);

    void text(std::string_view key, std::string_view value);
    void words(std::string_view key, std::span<const std::string> values);
    void number(std::string_view key, double value);
    void integer(std::string_view key, long long value);
    void numbers(std::string_view key, std::span<const double> values);
    void finish();

private:
    std::ostream& out_;
};

class ModelReader {
public:
    /// Parses the whole envelope. Throws ParseError on a bad header, missing `end`, or repeated keys.
    explicit ModelReader(std::istream& in);

    const std::string& kind() const noexcept { return kind_; }
    bool has(std::string_view key) const;

    std::string text(std::string_view key) const;
    std::vector<std::string> words(std::string_view key) const;
    double number(std::string_view key) const;
    long long integer(std::string_view key) const;
    std::vector<double> numbers(std::string_view key, std::size_t expected_count) const;

private:
    const std::vector<std::string>& tokens(std::string_view key) const;

    std::string kind_;
    std::map<std::string, std::vector<std::string>, std::less<>> fields_;
};

inline constexpr int kModelFormatVersion = 1;

} // namespace hvsm
