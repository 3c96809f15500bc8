#pragma once
// Command-line front end. Everything except main() lives here so the tests
// can drive the commands in-process.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvqkd/analysis.hpp"

namespace cvqkd::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 2,
    kUnphysical = 3,
    kNumerical = 4,
};

/// Flat run configuration. Optional fields are absent unless set by the
/// config file or a flag.
struct RunConfig {
    double v_a = 20.0;
    double v_b = 20.0;
    double eta = 0.75;
    double beta = 1.0;
    double excess_noise = 0.2;
    double electronic_noise = 0.0;
    std::optional<double> k_override;
    double attenuation_db_per_km = 0.2;
    double distance_km = 10.0;
    std::optional<double> c_x;
    std::optional<double> c_p;
    /// Region map ancilla variances.
    double v_e1 = 3.0;
    double v_e2 = 3.0;
    int grid = 41;
    int refine = 12;
    std::optional<std::vector<double>> betas;
    std::optional<std::vector<double>> distances;
    std::optional<std::vector<double>> epsilons;
    std::string out = ".";
    int workers = 1;

    bool operator==(const RunConfig&) const = default;

    /// Protocol parameters at `distance_km`.
    ProtocolParams protocol() const;
    ProtocolParams protocol_at(double distance_km) const;
    std::vector<double> beta_list() const;
    std::vector<double> distance_list() const;
    std::vector<double> epsilon_list() const;
};

/// Thrown for malformed config files or flag values; maps to exit 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const RunConfig& config);
/// Overlays the keys present in `j` onto `base`. Unknown keys and wrong
/// types raise ConfigError naming the key.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// 15 significant digits, "." separator, no locale.
std::string format_number(double x);
std::string format_optional(const std::optional<double>& x);

int cmd_keyrate(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& log);
int cmd_optimal(const RunConfig& config, std::ostream& log);
int cmd_frontier(const RunConfig& config, std::ostream& log);
int cmd_region(const RunConfig& config, std::ostream& log);

/// Parses argv (without the program name) and runs a subcommand; errors go
/// to `err` and are mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvqkd::cli
