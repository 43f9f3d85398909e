#include "bayespred/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "bayespred/error.hpp"

namespace bayespred {

using nlohmann::json;

namespace {

json to_json_value(const RunConfig& c) {
    json j;
    j["subcommand"] = c.subcommand;
    j["family"] = c.family;
    j["r"] = c.r;
    j["sigma"] = c.sigma;
    j["dim"] = c.dim;
    j["prior"] = c.prior;
    j["theta"] = c.theta;
    j["n"] = c.n;
    j["procedures"] = c.procedures;
    j["reps"] = c.reps;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["exact"] = c.exact;
    j["method"] = c.method;
    j["printed_coupling"] = c.printed_coupling;
    j["shrink_alpha"] = c.shrink_alpha;
    j["radius_max"] = c.radius_max;
    j["grid_size"] = c.grid_size;
    j["format"] = c.format;
    j["output"] = c.output;
    return j;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used == 0 || used != s.size()) throw InvalidArgument("not a number: '" + s + "'");
    return v;
}

json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return format_number(v);
                return std::stod(format_number(v));
            } else {
                return v;
            }
        },
        c);
}

std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return format_number(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
            else {
                if (v.find_first_of(",\"\n") == std::string::npos) return v;
                std::string q = "\"";
                for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                return q + "\"";
            }
        },
        c);
}

}  // namespace

std::string config_to_json(const RunConfig& c) { return to_json_value(c).dump(); }

RunConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    RunConfig c;
    c.subcommand = j.at("subcommand").get<std::string>();
    c.family = j.at("family").get<std::string>();
    c.r = j.at("r").get<int>();
    c.sigma = j.at("sigma").get<double>();
    c.dim = j.at("dim").get<int>();
    c.prior = j.at("prior").get<std::string>();
    c.theta = j.at("theta").get<std::string>();
    c.n = j.at("n").get<std::string>();
    c.procedures = j.at("procedures").get<std::vector<std::string>>();
    c.reps = j.at("reps").get<std::size_t>();
    if (!j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
    c.exact = j.at("exact").get<bool>();
    c.method = j.at("method").get<std::string>();
    c.printed_coupling = j.at("printed_coupling").get<bool>();
    c.shrink_alpha = j.at("shrink_alpha").get<double>();
    c.radius_max = j.at("radius_max").get<double>();
    c.grid_size = j.at("grid_size").get<std::size_t>();
    c.format = j.at("format").get<std::string>();
    c.output = j.at("output").get<std::string>();
    return c;
}

FamilyHyper hyper_of(const RunConfig& c) {
    FamilyHyper h;
    h.r = c.r;
    h.sigma = c.sigma;
    h.dim = c.dim;
    return h;
}

std::vector<double> parse_grid(const std::string& text, bool log_spaced) {
    if (text.empty()) throw InvalidArgument("empty grid");
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw InvalidArgument("grid must be lo:hi:count, got '" + text + "'");
        const double lo = to_real(parts[0]), hi = to_real(parts[1]);
        const double cnt = to_real(parts[2]);
        if (cnt < 1 || cnt != std::floor(cnt))
            throw InvalidArgument("grid count must be a positive integer in '" + text + "'");
        const auto count = static_cast<std::size_t>(cnt);
        if (log_spaced && !(lo > 0 && hi > 0))
            throw InvalidArgument("log-spaced grid needs positive endpoints: '" + text + "'");
        std::vector<double> out;
        for (std::size_t k = 0; k < count; ++k) {
            const double f = count == 1 ? 0.0 : double(k) / double(count - 1);
            out.push_back(log_spaced ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(to_real(s));
    return out;
}

std::vector<Vector> parse_theta(const std::string& text, const Family& family) {
    const std::size_t p = family.param_dim();
    std::vector<Vector> out;
    if (p == 1) {
        const auto coords = family.coordinates();
        const bool positive = !coords.empty() && coords[0] == Coordinate::positive;
        for (const auto& piece : split(text, ';'))
            for (double v : parse_grid(piece, positive && piece.find(':') != std::string::npos))
                out.push_back(Vector::Constant(1, v));
    } else {
        for (const auto& piece : split(text, ';')) {
            const auto comps = split(piece, ',');
            if (comps.size() != p)
                throw InvalidArgument("theta point '" + piece + "' needs " + std::to_string(p) +
                                      " comma-separated components for " + family.name());
            Vector v(static_cast<Eigen::Index>(p));
            for (std::size_t a = 0; a < p; ++a) v(a) = to_real(comps[a]);
            out.push_back(v);
        }
    }
    if (out.empty()) throw InvalidArgument("no theta values in '" + text + "'");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_grid(text, text.find(':') != std::string::npos)) {
        const double r = std::round(v);
        if (r < 1) throw InvalidArgument("sample sizes must be >= 1 in '" + text + "'");
        out.push_back(static_cast<std::size_t>(r));
    }
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_table(std::ostream& os, const RunConfig& c, const Table& t) {
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& r : t.rows) {
            json o = json::object();
            for (std::size_t k = 0; k < t.columns.size(); ++k) o[t.columns[k]] = cell_json(r[k]);
            rows.push_back(o);
        }
        json doc;
        doc["config"] = to_json_value(c);
        doc["notes"] = t.notes;
        doc["rows"] = rows;
        os << doc.dump(2) << '\n';
        return;
    }
    if (c.format != "csv") throw InvalidArgument("format must be csv or json");
    os << "# " << config_to_json(c) << '\n';
    for (const auto& note : t.notes) os << "# " << note << '\n';
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << cell_text(r[k]);
        os << '\n';
    }
}

std::string output_path(const RunConfig& c) {
    if (!c.output.empty()) return c.output;
    if (const char* dir = std::getenv("BAYESPRED_OUTPUT_DIR"); dir && *dir)
        return std::string(dir) + "/" + c.subcommand + "." + c.format;
    return {};
}

RunConfig read_config(const std::string& contents) {
    if (contents.rfind("# ", 0) == 0) {
        const auto eol = contents.find('\n');
        return config_from_json(contents.substr(2, eol == std::string::npos ? eol : eol - 2));
    }
    const json doc = json::parse(contents);
    return config_from_json(doc.at("config").dump());
}

}  // namespace bayespred
