#pragma once

#include <map>
#include <set>
#include <string>

namespace kmoco {

// Flat key=value configuration text. `#` starts a comment; blank lines are
// ignored. Lookups track which keys were consumed so unknown keys can be
// rejected wholesale (reproducibility guard).
class Config {
public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback);
    std::string require(const std::string& key);
    long get_int(const std::string& key, long fallback);
    double get_double(const std::string& key, double fallback);

    // throws listing any keys never consumed by a getter
    void reject_unknown() const;

    void set(const std::string& key, const std::string& value);

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

} // namespace kmoco
