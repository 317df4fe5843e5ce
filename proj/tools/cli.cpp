#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace ftparity::cli {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table " + name + ": row width mismatch");
    rows.push_back(std::move(row));
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"t2-sweep",     "chevron",      "stark-shift", "parity-once",
                                                "parity-decay", "error-budget", "prep-cat",    "wigner"};
    return names;
}

namespace {

const char* format_name(Format f) { return f == Format::csv ? "csv" : "json"; }

const char* drive_flag(DriveMode m) {
    switch (m) {
    case DriveMode::off: return "off";
    case DriveMode::effective: return "effective";
    case DriveMode::time_dependent: return "time-dependent";
    }
    return "?";
}

nlohmann::ordered_json meta(const RunConfig& cfg, const SystemParams& p) {
    nlohmann::ordered_json m;
    m["experiment"] = cfg.experiment;
    m["seed"] = cfg.seed;
    m["version"] = kVersion;
    m["params"] = nlohmann::ordered_json::parse(params_to_json(p).dump());
    nlohmann::ordered_json c;
    c["params_path"] = cfg.params_path;
    c["trajectories"] = cfg.trajectories;
    c["fock_dim"] = cfg.fock_dim;
    c["n_max"] = cfg.n_max;
    c["protocol"] = cfg.protocol ? protocol_name(*cfg.protocol) : "all";
    c["drive"] = drive_flag(cfg.drive);
    c["format"] = format_name(cfg.format);
    m["config"] = c;
    return m;
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

std::string cell_csv(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, r.ptr);
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

} // namespace

std::string render(const RunConfig& cfg, const SystemParams& p, const Report& report) {
    if (cfg.format == Format::json) {
        nlohmann::ordered_json doc;
        doc["meta"] = meta(cfg, p);
        nlohmann::ordered_json data = nlohmann::ordered_json::object();
        for (const Table& t : report) {
            nlohmann::ordered_json cols = nlohmann::ordered_json::object();
            for (std::size_t j = 0; j < t.columns.size(); ++j) {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const auto& row : t.rows) arr.push_back(cell_json(row[j]));
                cols[t.columns[j]] = std::move(arr);
            }
            data[t.name] = std::move(cols);
        }
        doc["data"] = std::move(data);
        return doc.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "# meta: " << meta(cfg, p).dump() << "\n";
    for (const Table& t : report) {
        os << "# table: " << t.name << "\n";
        for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
        os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << cell_csv(row[j]);
            os << "\n";
        }
    }
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string format = "json", protocol, drive = "effective";
    CLI::App app{"Simulation runner for fault-tolerant parity measurement experiments"};
    app.add_option("experiment", cfg.experiment, "Experiment name")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--params", cfg.params_path, "Parameter file (flat JSON)");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--trajectories", cfg.trajectories, "Trajectories, trials or shots")->check(CLI::PositiveNumber);
    app.add_option("--fock-dim", cfg.fock_dim, "Cavity Fock cutoff")->check(CLI::Range(2, 200));
    app.add_option("--out", cfg.out, "Output file (stdout when omitted)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--protocol", protocol, "ge, gf or ft")->check(CLI::IsMember({"ge", "gf", "ft"}));
    app.add_option("--n-max", cfg.n_max, "Largest number of repeated measurements")->check(CLI::PositiveNumber);
    app.add_option("--drive", drive, "off, effective or time-dependent")
        ->check(CLI::IsMember({"off", "effective", "time-dependent"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    cfg.format = format == "csv" ? Format::csv : Format::json;
    if (!protocol.empty()) cfg.protocol = parse_protocol(protocol);
    cfg.drive = drive == "off" ? DriveMode::off : drive == "effective" ? DriveMode::effective : DriveMode::time_dependent;

    std::string text;
    try {
        const SystemParams p = cfg.params_path.empty() ? SystemParams{} : load_params(cfg.params_path);
        validate(p);
        const Report report = run_experiment(cfg, p);
        text = render(cfg, p, report);
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }

    if (cfg.out.empty()) {
        out << text;
        return 0;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
        err << "configuration error: cannot open " << cfg.out << "\n";
        return 2;
    }
    f << text;
    if (!f) {
        err << "error: write failed for " << cfg.out << "\n";
        return 3;
    }
    return 0;
}

} // namespace ftparity::cli
