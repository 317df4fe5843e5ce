// cli.hpp — batch experiment runner: configuration, result tables and output.

#pragma once

#include "ftparity/model.hpp"
#include "ftparity/protocols.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ftparity::cli {

inline constexpr const char* kVersion = "1.0.0";

enum class Format { csv, json };

struct RunConfig {
    std::string experiment;
    std::string params_path;  // empty: defaults
    std::uint64_t seed = 0;
    int trajectories = 2000;
    int fock_dim = 20;
    std::string out;  // empty: stdout
    Format format = Format::json;
    std::optional<ProtocolKind> protocol;
    int n_max = 80;
    DriveMode drive = DriveMode::effective;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    Table(std::string n, std::vector<std::string> cols) : name(std::move(n)), columns(std::move(cols)) {}
    void add(std::vector<Cell> row);
};

using Report = std::vector<Table>;

const std::vector<std::string>& experiment_names();

/// Runs one experiment; throws the library error types on failure.
Report run_experiment(const RunConfig& cfg, const SystemParams& p);

/// Serialized output with the resolved parameters and seed embedded.
std::string render(const RunConfig& cfg, const SystemParams& p, const Report& report);

/// Full command line entry point. Returns the process exit code: 0 on success,
/// 2 on bad configuration, 3 on numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ftparity::cli
