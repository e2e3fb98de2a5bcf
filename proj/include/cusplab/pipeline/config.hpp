#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cusplab/core.hpp"

namespace cusplab::pipeline {

/// Flat `key = value` file with dotted keys and `#` comments. Values are
/// raw strings; typed getters raise ConfigError naming the field.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<config>") {
        Config c;
        c.origin_ = origin;
        std::istringstream is(text);
        std::string line;
        for (int no = 1; std::getline(is, line); ++no) {
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(no) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(no) + ": empty key");
            if (c.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
            c.values_[key] = value;
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot read config " + path);
        std::stringstream ss;
        ss << is.rdbuf();
        return parse(ss.str(), path);
    }

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    [[nodiscard]] const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(origin_ + ": missing required field '" + key + "'");
        used_.insert(key);
        return it->second;
    }
    [[nodiscard]] std::string str(const std::string& key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }

    [[nodiscard]] double real(const std::string& key) const { return to_real(key, str(key)); }
    [[nodiscard]] double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

    [[nodiscard]] long integer(const std::string& key) const {
        const double v = real(key);
        if (v != std::floor(v)) throw ConfigError(origin_ + ": field '" + key + "' must be an integer");
        return static_cast<long>(v);
    }
    [[nodiscard]] long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

    [[nodiscard]] std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        std::istringstream is(str(key));
        std::string item;
        while (std::getline(is, item, ',')) out.push_back(to_real(key, trim(item)));
        if (out.empty()) throw ConfigError(origin_ + ": field '" + key + "' is empty");
        return out;
    }

    /// Keys that no getter asked for; a typo guard.
    [[nodiscard]] std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    /// Canonical text (sorted keys) and its 64-bit FNV-1a hash.
    [[nodiscard]] std::string canonical() const {
        std::string s;
        for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
        return s;
    }
    [[nodiscard]] std::string hash() const { return fnv1a(canonical()); }
    [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
    [[nodiscard]] const std::string& origin() const { return origin_; }

    static std::string fnv1a(const std::string& s) {
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    }

    [[nodiscard]] double to_real(const std::string& key, const std::string& v) const {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used == v.size()) return d;
        } catch (const std::exception&) {
        }
        throw ConfigError(origin_ + ": field '" + key + "' expects a number, got '" + v + "'");
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace cusplab::pipeline
