#pragma once

// Record-oriented keyed text shared by every file format in the toolkit:
//
//   # comment
//   [hazard]
//   id = H-1
//   S = S2
//
// A section header opens a record; `key = value` lines belong to the most
// recent record. Keys may repeat (e.g. `param`). Values run to end of line.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safecase {

struct KeyedField {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct KeyedRecord {
    std::string section;
    std::size_t line = 0;
    std::vector<KeyedField> fields;

    /// First field with this key, or nullptr.
    const KeyedField* find(std::string_view key) const;
    /// All values for a repeated key, in file order.
    std::vector<const KeyedField*> find_all(std::string_view key) const;
    /// Value of a mandatory key; ParseError naming the record line if absent.
    const KeyedField& require(std::string_view key, const std::string& source) const;
};

struct KeyedDocument {
    std::string source;
    std::vector<KeyedRecord> records;
};

KeyedDocument parse_keyed(std::string_view text, std::string source = {});
KeyedDocument read_keyed_file(const std::string& path);

/// Accumulates records and renders them back to keyed text.
class KeyedWriter {
public:
    void comment(std::string_view text);
    void section(std::string_view name);
    void field(std::string_view key, std::string_view value);
    void field(std::string_view key, double value);
    void field(std::string_view key, std::int64_t value);
    const std::string& str() const noexcept { return out_; }

private:
    std::string out_;
};

// Scalar helpers used across the formats.

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
/// Ten significant digits; for diagnostics, not for round-tripping.
std::string format_short(double v);
double parse_double(std::string_view text, const std::string& source, std::size_t line);
std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line);
bool parse_bool(std::string_view text, const std::string& source, std::size_t line);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Orders "REQ-2" before "REQ-10": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

std::string read_file(const std::string& path);
/// Writes `text` to `path`; refuses to replace an existing file unless `force`.
void write_file(const std::string& path, std::string_view text, bool force);

}  // namespace safecase
