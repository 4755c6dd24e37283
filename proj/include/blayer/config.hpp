/**
 * @file config.hpp
 * @brief Sectioned key/value benchmark configuration (INI syntax) with paper defaults.
 */
#pragma once

#include <boost/property_tree/ptree.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace blayer {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schema version written to `[config] version`.
inline constexpr int kConfigVersion = 1;

/// Benchmark configuration. Keys are `section.name`; values are stored as text and parsed on access.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config load(const std::string& path);
    std::string serialize() const;
    void save(const std::string& path) const;

    std::string benchmark() const { return get_string("config.benchmark"); }

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// Comma separated list of numbers.
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value);
    void set(const std::string& key, int value);
    void set(const std::string& key, bool value);
    void set(const std::string& key, const std::vector<double>& values);

    /// Overrides `section.name=value` given on the command line.
    void apply_override(const std::string& assignment);

    const boost::property_tree::ptree& tree() const { return tree_; }
    bool operator==(const Config& other) const { return tree_ == other.tree_; }

private:
    boost::property_tree::ptree tree_;
};

/// Benchmark ids accepted by default_config and run_benchmark.
const std::vector<std::string>& benchmark_ids();

/// Paper parameters for a benchmark id.
Config default_config(const std::string& benchmark);

/// Throws ConfigError for unknown ids, missing keys or values out of range.
void validate_config(const Config& config);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace blayer
