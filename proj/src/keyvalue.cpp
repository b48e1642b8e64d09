#include "cardioresp/keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "cardioresp/errors.hpp"

namespace cardioresp {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

int bracket_depth(std::string_view s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
        }
    }
    return depth;
}

bool valid_key(std::string_view k) {
    if (k.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!alpha(k[0])) return false;
    for (char c : k)
        if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

}  // namespace

KvDocument KvDocument::parse(std::string_view text, std::string source) {
    KvDocument doc;
    doc.source_ = std::move(source);

    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) lines.push_back(cur);
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string body = trim(strip_comment(lines[i]));
        if (body.empty()) continue;
        if (body.front() == '[')
            throw ParseError(doc.source_, lineno, "sections are not supported, expected key = value");

        std::size_t eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(doc.source_, lineno, "expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!valid_key(key)) throw ParseError(doc.source_, lineno, "invalid key '" + key + "'");
        if (value.empty()) throw ParseError(doc.source_, lineno, "missing value for '" + key + "'");
        if (doc.find(key)) throw ParseError(doc.source_, lineno, "duplicate key '" + key + "'");

        while (bracket_depth(value) > 0) {
            if (++i >= lines.size())
                throw ParseError(doc.source_, lineno, "unterminated array for '" + key + "'");
            value += " " + trim(strip_comment(lines[i]));
        }

        nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
        if (parsed.is_discarded())
            throw ParseError(doc.source_, lineno, "cannot parse value for '" + key + "': " + value);
        doc.entries_.push_back({key, std::move(parsed), lineno});
    }
    return doc;
}

KvDocument KvDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

const KvEntry* KvDocument::find(std::string_view key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

void KvDocument::fail(const KvEntry& entry, const std::string& what) const {
    throw ParseError(source_, entry.line, entry.key + ": " + what);
}

double KvDocument::number(const KvEntry& entry) const {
    if (!entry.value.is_number()) fail(entry, "expected a number");
    return entry.value.get<double>();
}

bool KvDocument::boolean(const KvEntry& entry) const {
    if (!entry.value.is_boolean()) fail(entry, "expected true or false");
    return entry.value.get<bool>();
}

std::string KvDocument::string(const KvEntry& entry) const {
    if (!entry.value.is_string()) fail(entry, "expected a quoted string");
    return entry.value.get<std::string>();
}

std::string kv_format(const nlohmann::json& value) { return value.dump(); }

}  // namespace cardioresp
