#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cardioresp {

// Flat `key = value` documents. Values use JSON literal syntax (numbers,
// "strings", true/false, [arrays]); arrays may span several lines. `#` starts
// a comment outside of strings.
struct KvEntry {
    std::string key;
    nlohmann::json value;
    std::size_t line = 0;
};

class KvDocument {
public:
    static KvDocument parse(std::string_view text, std::string source = "<input>");
    static KvDocument load(const std::filesystem::path& path);

    const std::string& source() const { return source_; }
    const std::vector<KvEntry>& entries() const { return entries_; }
    const KvEntry* find(std::string_view key) const;

    [[noreturn]] void fail(const KvEntry& entry, const std::string& what) const;

    double number(const KvEntry& entry) const;
    bool boolean(const KvEntry& entry) const;
    std::string string(const KvEntry& entry) const;

private:
    std::string source_;
    std::vector<KvEntry> entries_;
};

std::string kv_format(const nlohmann::json& value);

}  // namespace cardioresp
