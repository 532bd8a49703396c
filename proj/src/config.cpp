#include "kmoco/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kmoco {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key on line " +
                                                     std::to_string(line_no));
        if (cfg.values_.count(key))
            throw std::invalid_argument("config: duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return from_string(buf.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
    return it->second;
}

long Config::get_int(const std::string& key, long fallback) {
    const std::string v = get(key, "");
    if (v.empty()) return fallback;
    std::size_t pos = 0;
    const long out = std::stol(v, &pos);
    if (pos != v.size())
        throw std::invalid_argument("config: key '" + key + "' is not an integer");
    return out;
}

double Config::get_double(const std::string& key, double fallback) {
    const std::string v = get(key, "");
    if (v.empty()) return fallback;
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size())
        throw std::invalid_argument("config: key '" + key + "' is not a number");
    return out;
}

void Config::reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) unknown += unknown.empty() ? key : (", " + key);
    }
    if (!unknown.empty()) throw std::invalid_argument("config: unknown keys: " + unknown);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

} // namespace kmoco
