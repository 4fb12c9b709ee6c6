#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "delrl/util.hpp"

namespace delrl {

/**
 * Flat key-value configuration: one `section.key = value` per line, `#`
 * comments. Keys keep their dotted form; the canonical rendering (sorted
 * keys) feeds the config hash stamped into every artifact.
 */
class Config {
  public:
    static Config parse(std::istream& is) {
        Config cfg;
        std::string line;
        int line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            auto hash_pos = line.find('#');
            if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
            std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": expected 'key = value', got '" + trimmed + "'");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_string(const std::string& text) {
        std::istringstream is(text);
        return parse(is);
    }

    static Config parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
        return parse(is);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw std::invalid_argument("config: missing required key '" + key + "'");
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return parse_double(key, values_.at(key));
    }
    double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

    long get_long(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        return parse_long(key, values_.at(key));
    }
    long get_long(const std::string& key) const { return parse_long(key, get_string(key)); }

    int get_int(const std::string& key, int fallback) const { return int(get_long(key, fallback)); }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = values_.at(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::invalid_argument("config: key '" + key + "' is not a boolean: '" + v + "'");
    }

    std::vector<long> get_long_list(const std::string& key) const {
        std::vector<long> out;
        std::istringstream is(get_string(key));
        std::string item;
        while (std::getline(is, item, ',')) out.push_back(parse_long(key, trim(item)));
        if (out.empty()) throw std::invalid_argument("config: key '" + key + "' lists no values");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const {
        if (!has(key)) return fallback;
        std::vector<int> out;
        for (long v : get_long_list(key)) out.push_back(int(v));
        return out;
    }

    /// Sorted `key = value` lines; identical configs render identically.
    std::string canonical() const {
        std::ostringstream os;
        for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
        return os.str();
    }

    std::string hash_hex() const { return hex64(fnv1a(canonical())); }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    static std::string trim(const std::string& s) {
        auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not a number: '" + v + "'");
        }
    }
    static long parse_long(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            long x = std::stol(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not an integer: '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace delrl
