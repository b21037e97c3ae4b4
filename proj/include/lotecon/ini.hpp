#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lotecon/errors.hpp"

namespace lotecon {

// Minimal INI-style document: [section], key = value, '#' comments.
// Values keep their raw text; typed access parses on demand.
class IniDoc {
public:
    static IniDoc parse(const std::string& text, const std::string& origin = "<string>") {
        IniDoc doc;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ValidationError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
            doc.values_[section + "." + key] = value;
        }
        return doc;
    }

    static IniDoc parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ValidationError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), path);
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    const std::string& raw(const std::string& section, const std::string& key) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end())
            throw ValidationError("config: missing field " + section + "." + key);
        return it->second;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(raw(section, key), section + "." + key);
    }
    double get_double(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    int get_int(const std::string& section, const std::string& key) const {
        const std::string& s = raw(section, key);
        char* end = nullptr;
        long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            throw ValidationError("config: field " + section + "." + key + " is not an integer: '" + s + "'");
        return static_cast<int>(v);
    }
    int get_int(const std::string& section, const std::string& key, int fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? raw(section, key) : fallback;
    }

    std::vector<double> get_vector(const std::string& section, const std::string& key) const {
        const std::string& s = raw(section, key);
        std::vector<double> out;
        std::istringstream in(s);
        std::string tok;
        while (in >> tok) out.push_back(to_double(tok, section + "." + key));
        if (out.empty())
            throw ValidationError("config: field " + section + "." + key + " is empty");
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& s, const std::string& field) {
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw ValidationError("config: field " + field + " is not a number: '" + s + "'");
        return v;
    }

    std::map<std::string, std::string> values_;
};

} // namespace lotecon
