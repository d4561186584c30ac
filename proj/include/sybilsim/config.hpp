#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sybilsim/error.hpp"
#include "sybilsim/format.hpp"

namespace sybilsim {

// Flat key=value file with dotted section prefixes; '#' starts a comment.
class ConfigMap {
public:
    static ConfigMap parse(std::istream& in) {
        ConfigMap c;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            auto body = trim(std::string_view(line).substr(0, hash));
            if (body.empty()) continue;
            auto eq = body.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
            auto key = std::string(trim(body.substr(0, eq)));
            auto value = std::string(trim(body.substr(eq + 1)));
            if (key.empty()) throw ParseError("empty key", lineno);
            if (c.values_.count(key)) throw ParseError("duplicate key '" + key + "'", lineno);
            c.values_[key] = value;
        }
        return c;
    }

    static ConfigMap parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    static ConfigMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file " + path);
        return parse(in);
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return to_number(key, it->second);
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
        double v = num(key, double(fallback));
        if (!(v >= 0) || v != std::floor(v) || v > 9.0e15) throw ConfigError(key + " must be a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    bool flag(const std::string& key, bool fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError(key + " must be a boolean");
    }

    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        for (auto f : split(it->second, ','))
            if (!f.empty()) out.emplace_back(f);
        return out;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
        auto raw = list(key, {});
        if (raw.empty()) return has(key) ? std::vector<double>{} : fallback;
        std::vector<double> out;
        for (const auto& r : raw) out.push_back(to_number(key, r));
        return out;
    }

    // Keys present in the file that no reader asked for.
    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    // Accepts plain decimals and powers of two written as 2^k.
    static double to_number(const std::string& key, const std::string& text) {
        double v;
        auto caret = text.find('^');
        if (caret != std::string::npos) {
            double base, exp;
            if (parse_double(std::string_view(text).substr(0, caret), base) &&
                parse_double(std::string_view(text).substr(caret + 1), exp))
                return std::pow(base, exp);
        } else if (parse_double(text, v)) {
            return v;
        }
        throw ConfigError(key + ": '" + text + "' is not a number");
    }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace sybilsim
