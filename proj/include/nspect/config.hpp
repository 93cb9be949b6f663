#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "nspect/domain.hpp"

namespace nspect {

/// Value in a key-value config: string, number, boolean, or a flat array.
struct ConfigValue {
    std::variant<std::string, double, bool, std::vector<double>, std::vector<std::string>> v;
    int line = 0;
};

/// Parsed key-value config with one level of [section] tables.
/// Syntax: `key = value` lines, `[section]` headers, `#` comments, strings in
/// double quotes, numbers, true/false, arrays like [1, 2.5] or ["a", "b"].
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& name = "<config>");

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key) const;
    double get_number_or(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;
    std::vector<double> get_numbers_or(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const;

    /// Strict validation: every present key must have been read through one
    /// of the getters above; unknown keys are hard errors.
    void assert_fully_consumed() const;

    /// Strict validation scoped to the sections a command reads: every key
    /// in an active section must have been consumed, and any other section
    /// must be one of the known command sections (shared configs can carry
    /// parameters for several subcommands).
    void assert_consumed(const std::vector<std::string>& active_sections) const;

    /// Replaces or inserts a numeric key (command-line flag overrides).
    /// Folded into the content hash so cache identities stay faithful.
    void set_override(const std::string& section, const std::string& key, double value);

    const std::string& name() const { return name_; }
    uint64_t content_hash() const { return content_hash_; }

private:
    const ConfigValue* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, ConfigValue>> tables_;
    mutable std::set<std::string> consumed_;
    std::string name_;
    uint64_t content_hash_ = 0;
};

/// Builds the domain described by the [domain] section.
/// kinds: box, ball, graph, cusp, implicit.
DomainPtr domain_from_config(const ConfigFile& cfg);

}  // namespace nspect
