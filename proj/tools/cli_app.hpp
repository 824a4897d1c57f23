#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "tiltprice/claim.hpp"
#include "tiltprice/market.hpp"
#include "tiltprice/utility.hpp"

namespace tiltprice::cli {

//! INI run configuration: [section] headers, key = value lines, and
//! whole-line comments starting with '#' or ';'.
class RunConfig {
public:
    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_string(const std::string& text);

    bool has(const std::string& key) const;
    bool has_section(const std::string& section) const;

    //! Throw ConfigError naming `key` when it is missing or malformed.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    std::vector<double> get_list(const std::string& key) const;

    double get_double(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    //! FNV-1a hash of the file bytes.
    std::uint64_t hash() const { return hash_; }
    //! Directory relative paths in the file are resolved against.
    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    boost::property_tree::ptree tree_;
    std::uint64_t hash_ = 0;
    std::filesystem::path base_dir_;
};

BasisRiskModel model_from_config(const RunConfig& cfg);
ClaimSpec claim_from_config(const RunConfig& cfg);
UtilitySpec utility_from_config(const RunConfig& cfg);
SimulationSettings simulation_from_config(const RunConfig& cfg);

//! "0.08" is constant, "0.03*y" proportional.
Coefficient parse_coefficient(const std::string& text, const std::string& key);

struct CsvTable {
    //! Written as "# k=v k=v ..." in insertion order.
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<double> values);
};

//! Shortest round-trip decimal form.
std::string format_double(double v);

//! Write to `path` via a sibling temporary file and rename.
void write_csv_atomic(const CsvTable& table, const std::filesystem::path& path);

struct RunOptions {
    std::string command;
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> output;
    bool allow_extreme_rho = false;
    std::string demo;
};

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = {
        "price",     "optimal-quantity", "limit-study", "fixed-market-study",
        "trinomial", "tilt-solve",       "check-utility"};
    return names;
}

//! Run one subcommand and return its table.
CsvTable run_command(const RunOptions& options, const RunConfig& cfg);

//! Output path from --output, else [output] path.
std::filesystem::path output_path(const RunOptions& options, const RunConfig& cfg);

//! Exit codes: 0 success, 2 configuration, 3 domain, 4 numerical.
int exit_code_for(const std::exception& e);

//! Entry point shared by the executable and the tests.
int main(int argc, char** argv);

} // namespace tiltprice::cli
