#include "safecase/keyed_text.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "safecase/digest.hpp"
#include "safecase/errors.hpp"

namespace safecase {

const KeyedField* KeyedRecord::find(std::string_view key) const {
    for (const auto& f : fields)
        if (f.key == key) return &f;
    return nullptr;
}

std::vector<const KeyedField*> KeyedRecord::find_all(std::string_view key) const {
    std::vector<const KeyedField*> out;
    for (const auto& f : fields)
        if (f.key == key) out.push_back(&f);
    return out;
}

const KeyedField& KeyedRecord::require(std::string_view key, const std::string& source) const {
    if (const auto* f = find(key)) return *f;
    throw ParseError(source, line, "[" + section + "] record is missing required key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

KeyedDocument parse_keyed(std::string_view text, std::string source) {
    KeyedDocument doc;
    doc.source = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') {
            if (eol == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ParseError(doc.source, line_no, "malformed section header '" + std::string(line) + "'");
            doc.records.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
        } else {
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ParseError(doc.source, line_no, "expected 'key = value', got '" + std::string(line) + "'");
            if (doc.records.empty()) throw ParseError(doc.source, line_no, "field outside of any [section]");
            auto key = trim(line.substr(0, eq));
            if (key.empty()) throw ParseError(doc.source, line_no, "empty key");
            doc.records.back().fields.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
        }
        if (eol == text.size()) break;
    }
    return doc;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view text, bool force) {
    if (!force && std::filesystem::exists(path)) throw Error(path + ": output exists; pass --force to overwrite");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(path + ": write failed");
}

KeyedDocument read_keyed_file(const std::string& path) { return parse_keyed(read_file(path), path); }

void KeyedWriter::comment(std::string_view text) {
    out_ += "# ";
    out_ += text;
    out_ += '\n';
}

void KeyedWriter::section(std::string_view name) {
    if (!out_.empty()) out_ += '\n';
    out_ += '[';
    out_ += name;
    out_ += "]\n";
}

void KeyedWriter::field(std::string_view key, std::string_view value) {
    out_ += key;
    out_ += " = ";
    out_ += value;
    out_ += '\n';
}

void KeyedWriter::field(std::string_view key, double value) { field(key, format_double(value)); }
void KeyedWriter::field(std::string_view key, std::int64_t value) { field(key, std::to_string(value)); }

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

std::string format_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
    auto t = trim(text);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size())
        throw ParseError(source, line, "expected a number, got '" + std::string(text) + "'");
    return v;
}

std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line) {
    auto t = trim(text);
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size())
        throw ParseError(source, line, "expected an integer, got '" + std::string(text) + "'");
    return v;
}

bool parse_bool(std::string_view text, const std::string& source, std::size_t line) {
    auto t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ParseError(source, line, "expected true/false, got '" + std::string(text) + "'");
}

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            auto si = i, sj = j;
            while (si < a.size() && a[si] == '0')
                ++si;
            while (sj < b.size() && b[sj] == '0')
                ++sj;
            auto ei = si, ej = sj;
            while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei])))
                ++ei;
            while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej])))
                ++ej;
            if (ei - si != ej - sj) return ei - si < ej - sj;
            auto cmp = a.substr(si, ei - si).compare(b.substr(sj, ej - sj));
            if (cmp != 0) return cmp < 0;
            // Equal value: fewer leading zeros first keeps the order total.
            if (ei - i != ej - j) return ei - i < ej - j;
            i = ei;
            j = ej;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

std::string digest_hex(std::string_view bytes) {
    static constexpr char kHex[] = "0123456789abcdef";
    auto h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace safecase
