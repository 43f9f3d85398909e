#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bayespred/family.hpp"

namespace bayespred {

/// Everything that determines a CLI run's output. Thread count is left out
/// on purpose: results do not depend on it, and leaving it out keeps output
/// files byte-identical across --threads values.
struct RunConfig {
    std::string subcommand;
    std::string family;
    int r = 1;
    double sigma = 1.0;
    int dim = 1;
    std::string prior;
    std::string theta;   // points separated by ';', components by ','; or lo:hi:count
    std::string n;       // single size, comma list, or lo:hi:count
    std::vector<std::string> procedures;
    std::size_t reps = 0;
    std::optional<std::uint64_t> seed;
    bool exact = false;
    std::string method;  // identities: analytic | monte-carlo
    bool printed_coupling = false;  // expansion-check diagnostics
    double shrink_alpha = 0.0;
    double radius_max = 0.0;
    std::size_t grid_size = 0;
    std::string format = "csv";
    std::string output;

    bool operator==(const RunConfig&) const = default;
};

std::string config_to_json(const RunConfig& c);
RunConfig config_from_json(const std::string& text);

FamilyHyper hyper_of(const RunConfig& c);

/// "lo:hi:count" (log-spaced when `log_spaced`, else linear), a comma list,
/// or a single number.
std::vector<double> parse_grid(const std::string& text, bool log_spaced);

/// Points for a family: ';' separates points, ',' separates the components
/// of one point. One-parameter families also accept ',' between points and
/// lo:hi:count (log-spaced on a positive domain).
std::vector<Vector> parse_theta(const std::string& text, const Family& family);

std::vector<std::size_t> parse_sizes(const std::string& text);

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes;  // extra '#' lines after the config (CSV only)
    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// 12 significant digits; inf / -inf / nan spelled out.
std::string format_number(double v);

/// CSV: "# <config json>", then notes as "# ..." lines, the column header
/// and rows. JSON: {"config": ..., "rows": [{column: value}, ...]}.
void write_table(std::ostream& os, const RunConfig& c, const Table& t);

/// Destination file for a run: --output, else $BAYESPRED_OUTPUT_DIR/<subcommand>.<format>,
/// else empty (stdout).
std::string output_path(const RunConfig& c);

/// Reads the embedded config back from an output file's contents.
RunConfig read_config(const std::string& contents);

}  // namespace bayespred
