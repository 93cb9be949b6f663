#include "nspect/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace nspect {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

ConfigValue parse_value(const std::string& raw, int line, const std::string& where) {
    ConfigValue out;
    out.line = line;
    std::string s = trim(raw);
    if (s.empty()) throw ConfigError(where + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError(where + ": unterminated string");
        out.v = s.substr(1, s.size() - 2);
        return out;
    }
    if (s == "true" || s == "false") {
        out.v = (s == "true");
        return out;
    }
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(where + ": unterminated array");
        std::string body = s.substr(1, s.size() - 2);
        std::vector<std::string> items;
        std::string cur;
        bool quoted = false;
        for (char c : body) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) items.push_back(trim(cur));
        if (!items.empty() && items.front().size() && items.front().front() == '"') {
            std::vector<std::string> strs;
            for (auto& it : items) {
                if (it.size() < 2 || it.front() != '"' || it.back() != '"')
                    throw ConfigError(where + ": bad string array element '" + it + "'");
                strs.push_back(it.substr(1, it.size() - 2));
            }
            out.v = strs;
            return out;
        }
        std::vector<double> nums;
        for (auto& it : items) {
            try {
                size_t used = 0;
                nums.push_back(std::stod(it, &used));
                if (used != it.size()) throw std::invalid_argument(it);
            } catch (const std::exception&) {
                throw ConfigError(where + ": bad number '" + it + "'");
            }
        }
        out.v = nums;
        return out;
    }
    try {
        size_t used = 0;
        double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        out.v = d;
        return out;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse value '" + s + "'");
    }
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    cfg.content_hash_ = fnv1a(text);
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        std::string where = name + ":" + std::to_string(lineno);
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + ": bad section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            cfg.tables_[section];
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        for (char c : key)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                throw ConfigError(where + ": bad key '" + key + "'");
        auto& table = cfg.tables_[section];
        if (table.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        table[key] = parse_value(s.substr(eq + 1), lineno, where);
    }
    return cfg;
}

const ConfigValue* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto t = tables_.find(section);
    if (t == tables_.end()) return nullptr;
    auto v = t->second.find(key);
    if (v == t->second.end()) return nullptr;
    consumed_.insert(section + "." + key);
    return &v->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto t = tables_.find(section);
    return t != tables_.end() && t->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const ConfigValue* v = find(section, key);
    if (!v) throw ConfigError(name_ + ": missing key [" + section + "] " + key);
    if (!std::holds_alternative<std::string>(v->v))
        throw ConfigError(name_ + ": [" + section + "] " + key + " must be a string");
    return std::get<std::string>(v->v);
}

double ConfigFile::get_number(const std::string& section, const std::string& key) const {
    const ConfigValue* v = find(section, key);
    if (!v) throw ConfigError(name_ + ": missing key [" + section + "] " + key);
    if (!std::holds_alternative<double>(v->v))
        throw ConfigError(name_ + ": [" + section + "] " + key + " must be a number");
    return std::get<double>(v->v);
}

double ConfigFile::get_number_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
    const ConfigValue* v = find(section, key);
    if (!v) return fallback;
    if (!std::holds_alternative<bool>(v->v))
        throw ConfigError(name_ + ": [" + section + "] " + key + " must be true/false");
    return std::get<bool>(v->v);
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

std::vector<double> ConfigFile::get_numbers(const std::string& section,
                                            const std::string& key) const {
    const ConfigValue* v = find(section, key);
    if (!v) throw ConfigError(name_ + ": missing key [" + section + "] " + key);
    if (std::holds_alternative<std::vector<double>>(v->v))
        return std::get<std::vector<double>>(v->v);
    if (std::holds_alternative<double>(v->v)) return {std::get<double>(v->v)};
    throw ConfigError(name_ + ": [" + section + "] " + key + " must be a number array");
}

std::vector<double> ConfigFile::get_numbers_or(const std::string& section, const std::string& key,
                                               const std::vector<double>& fallback) const {
    return has(section, key) ? get_numbers(section, key) : fallback;
}

void ConfigFile::set_override(const std::string& section, const std::string& key, double value) {
    ConfigValue v;
    v.v = value;
    v.line = 0;
    tables_[section][key] = v;
    char buf[120];
    std::snprintf(buf, sizeof buf, "|%s.%s=%.17g", section.c_str(), key.c_str(), value);
    content_hash_ = fnv1a(hex_id(content_hash_) + buf);
}

void ConfigFile::assert_fully_consumed() const {
    for (const auto& [section, table] : tables_)
        for (const auto& [key, value] : table) {
            std::string id = section + "." + key;
            if (!consumed_.count(id))
                throw ConfigError(name_ + ":" + std::to_string(value.line) + ": unknown key [" +
                                  section + "] " + key);
        }
}

void ConfigFile::assert_consumed(const std::vector<std::string>& active_sections) const {
    static const std::set<std::string> known = {"",        "domain",  "spectrum", "whitney",
                                                "dimension", "heat",   "sobolev",  "perturb",
                                                "verify",  "output"};
    for (const auto& [section, table] : tables_) {
        bool active = std::find(active_sections.begin(), active_sections.end(), section) !=
                      active_sections.end();
        if (!active) {
            if (!known.count(section))
                throw ConfigError(name_ + ": unknown section [" + section + "]");
            continue;
        }
        for (const auto& [key, value] : table) {
            std::string id = section + "." + key;
            if (!consumed_.count(id))
                throw ConfigError(name_ + ":" + std::to_string(value.line) + ": unknown key [" +
                                  section + "] " + key);
        }
    }
}

DomainPtr domain_from_config(const ConfigFile& cfg) {
    std::string kind = cfg.get_string("domain", "kind");
    int dim = static_cast<int>(cfg.get_number_or("domain", "dim", 2));
    if (kind == "box") {
        auto lo = cfg.get_numbers("domain", "lo");
        auto hi = cfg.get_numbers("domain", "hi");
        if (lo.size() != hi.size() || lo.empty() || lo.size() > 3)
            throw ConfigError("domain: lo/hi must have 1..3 matching entries");
        Box b;
        b.dim = static_cast<int>(lo.size());
        for (size_t i = 0; i < lo.size(); ++i) {
            b.lo[i] = lo[i];
            b.hi[i] = hi[i];
            if (!(hi[i] > lo[i])) throw ConfigError("domain: hi must exceed lo");
        }
        return std::make_shared<BoxDomain>(b);
    }
    if (kind == "ball") {
        auto center = cfg.get_numbers_or("domain", "center", std::vector<double>(dim, 0.0));
        double radius = cfg.get_number("domain", "radius");
        return std::make_shared<BallDomain>(dim, make_point(center), radius);
    }
    if (kind == "cusp") {
        double gamma = cfg.get_number("domain", "gamma");
        return std::make_shared<CuspDomain>(dim, gamma);
    }
    if (kind == "graph") {
        auto lo = cfg.get_numbers("domain", "base_lo");
        auto hi = cfg.get_numbers("domain", "base_hi");
        if (lo.size() != hi.size() || lo.empty() || lo.size() > 2)
            throw ConfigError("domain: base must be 1- or 2-dimensional");
        Box base;
        base.dim = static_cast<int>(lo.size());
        for (size_t i = 0; i < lo.size(); ++i) {
            base.lo[i] = lo[i];
            base.hi[i] = hi[i];
        }
        std::vector<std::string> vars = base.dim == 1 ? std::vector<std::string>{"x"}
                                                      : std::vector<std::string>{"x", "y"};
        Expr phi = Expr::parse(cfg.get_string("domain", "profile"), vars);
        double gamma = cfg.get_number_or("domain", "gamma", 1.0);
        double holder = cfg.get_number_or("domain", "holder_const", 1.0);
        double k_lo = cfg.get_number("domain", "k_lo");
        double k_hi = cfg.get_number("domain", "k_hi");
        return std::make_shared<GraphDomain>(base, Profile::from_expr(phi), gamma, holder, k_lo,
                                             k_hi);
    }
    if (kind == "implicit") {
        auto lo = cfg.get_numbers("domain", "lo");
        auto hi = cfg.get_numbers("domain", "hi");
        Box b;
        b.dim = static_cast<int>(lo.size());
        for (size_t i = 0; i < lo.size(); ++i) {
            b.lo[i] = lo[i];
            b.hi[i] = hi[i];
        }
        std::vector<std::string> vars{"x", "y", "z"};
        vars.resize(b.dim);
        Expr f = Expr::parse(cfg.get_string("domain", "formula"), vars);
        auto anchor = cfg.get_numbers("domain", "anchor");
        return std::make_shared<ImplicitDomain>(b.dim, b, f, make_point(anchor));
    }
    throw ConfigError("domain: unknown kind '" + kind +
                      "' (expected box, ball, graph, cusp, implicit)");
}

}  // namespace nspect
