#include "qprec/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace qprec {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(const std::string& raw) {
    std::string body = trim(raw);
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw ConfigError("unterminated list: " + raw);
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(body);
    while (std::getline(in, item, ',')) {
        item = strip_quotes(trim(item));
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double parse_double(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(key + ": not a number: '" + raw + "'");
    return value;
}

long long parse_int(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    long long value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(key + ": not an integer: '" + raw + "'");
    return value;
}

std::uint64_t parse_u64(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    std::uint64_t value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(key + ": not an unsigned integer: '" + raw + "'");
    return value;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["schemes"] = [](ExperimentConfig& c, const std::string& v) {
            std::vector<Scheme> out;
            for (const std::string& name : split_list(v)) {
                const auto s = parse_scheme(name);
                if (!s) throw ConfigError("schemes: unknown scheme '" + name + "'");
                out.push_back(*s);
            }
            c.schemes = std::move(out);
        };
        t["snr_grid_db"] = [](ExperimentConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const std::string& item : split_list(v))
                out.push_back(parse_double(item, "snr_grid_db"));
            c.snr_grid_db = std::move(out);
        };
        t["antennas"] = [](ExperimentConfig& c, const std::string& v) {
            c.antennas = static_cast<int>(parse_int(v, "antennas"));
        };
        t["users"] = [](ExperimentConfig& c, const std::string& v) {
            c.users = static_cast<int>(parse_int(v, "users"));
        };
        t["levels"] = [](ExperimentConfig& c, const std::string& v) {
            c.levels = static_cast<int>(parse_int(v, "levels"));
        };
        t["trials"] = [](ExperimentConfig& c, const std::string& v) {
            c.trials = static_cast<int>(parse_int(v, "trials"));
        };
        t["seed"] = [](ExperimentConfig& c, const std::string& v) {
            c.seed = parse_u64(v, "seed");
        };
        t["power_budget"] = [](ExperimentConfig& c, const std::string& v) {
            c.power_budget = parse_double(v, "power_budget");
        };
        t["carrier_ghz"] = [](ExperimentConfig& c, const std::string& v) {
            c.carrier_ghz = parse_double(v, "carrier_ghz");
        };
        t["channel.rician_factor"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.rician_factor = parse_double(v, "channel.rician_factor");
        };
        t["channel.angle_min"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.angle_min = parse_double(v, "channel.angle_min");
        };
        t["channel.angle_max"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.angle_max = parse_double(v, "channel.angle_max");
        };
        t["channel.distance_min"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.distance_min = parse_double(v, "channel.distance_min");
        };
        t["channel.distance_max"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.distance_max = parse_double(v, "channel.distance_max");
        };
        t["channel.scatter_std"] = [](ExperimentConfig& c, const std::string& v) {
            c.channel.scatter_std = parse_double(v, "channel.scatter_std");
        };
        t["channel.nlos"] = [](ExperimentConfig& c, const std::string& v) {
            const std::string s = strip_quotes(trim(v));
            if (s == "uncorrelated")
                c.channel.nlos = NlosModel::Uncorrelated;
            else if (s == "correlated_stub")
                c.channel.nlos = NlosModel::CorrelatedStub;
            else
                throw ConfigError("channel.nlos: unknown model '" + s + "'");
        };
        t["channel.path_gain"] = [](ExperimentConfig& c, const std::string& v) {
            const std::string s = strip_quotes(trim(v));
            if (s == "unit")
                c.channel.path_gain = PathGainModel::Unit;
            else if (s == "umi_3gpp")
                c.channel.path_gain = PathGainModel::Umi3gpp;
            else
                throw ConfigError("channel.path_gain: unknown model '" + s + "'");
        };
        t["csi.mode"] = [](ExperimentConfig& c, const std::string& v) {
            const std::string s = strip_quotes(trim(v));
            if (s == "perfect")
                c.csi.mode = CsiMode::Perfect;
            else if (s == "ls")
                c.csi.mode = CsiMode::LsEstimate;
            else if (s == "ls_aqnm")
                c.csi.mode = CsiMode::LsPlusAqnm;
            else
                throw ConfigError("csi.mode: unknown mode '" + s + "'");
        };
        t["csi.pilot_length"] = [](ExperimentConfig& c, const std::string& v) {
            c.csi.pilot_length = static_cast<int>(parse_int(v, "csi.pilot_length"));
        };
        t["csi.uplink_power"] = [](ExperimentConfig& c, const std::string& v) {
            c.csi.uplink_power = parse_double(v, "csi.uplink_power");
        };
        t["csi.uplink_noise"] = [](ExperimentConfig& c, const std::string& v) {
            c.csi.uplink_noise = parse_double(v, "csi.uplink_noise");
        };
        t["csi.csi_bits"] = [](ExperimentConfig& c, const std::string& v) {
            c.csi.csi_bits = static_cast<int>(parse_int(v, "csi.csi_bits"));
        };
        t["wmmse.max_iterations"] = [](ExperimentConfig& c, const std::string& v) {
            c.wmmse_max_iterations =
                static_cast<int>(parse_int(v, "wmmse.max_iterations"));
        };
        t["wmmse.tolerance"] = [](ExperimentConfig& c, const std::string& v) {
            c.wmmse_tolerance = parse_double(v, "wmmse.tolerance");
        };
        t["ep.max_iterations"] = [](ExperimentConfig& c, const std::string& v) {
            c.ep.max_iterations = static_cast<int>(parse_int(v, "ep.max_iterations"));
        };
        t["ep.damping"] = [](ExperimentConfig& c, const std::string& v) {
            c.ep.damping = parse_double(v, "ep.damping");
        };
        t["ep.variance_floor"] = [](ExperimentConfig& c, const std::string& v) {
            c.ep.variance_floor = parse_double(v, "ep.variance_floor");
        };
        t["ep.cavity_variance_floor"] = [](ExperimentConfig& c, const std::string& v) {
            c.ep.cavity_variance_floor =
                parse_double(v, "ep.cavity_variance_floor");
        };
        t["weights.mode"] = [](ExperimentConfig& c, const std::string& v) {
            const std::string s = strip_quotes(trim(v));
            if (s == "uniform")
                c.weight_mode = WeightMode::Uniform;
            else if (s == "fixed")
                c.weight_mode = WeightMode::Fixed;
            else if (s == "random_one_two")
                c.weight_mode = WeightMode::RandomOneTwo;
            else
                throw ConfigError("weights.mode: unknown mode '" + s + "'");
        };
        t["weights.values"] = [](ExperimentConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const std::string& item : split_list(v))
                out.push_back(parse_double(item, "weights.values"));
            c.weights = std::move(out);
        };
        return t;
    }();
    return table;
}

const char* nlos_name(NlosModel m) {
    return m == NlosModel::Uncorrelated ? "uncorrelated" : "correlated_stub";
}
const char* path_gain_name(PathGainModel m) {
    return m == PathGainModel::Unit ? "unit" : "umi_3gpp";
}
const char* csi_mode_name(CsiMode m) {
    switch (m) {
        case CsiMode::Perfect: return "perfect";
        case CsiMode::LsEstimate: return "ls";
        case CsiMode::LsPlusAqnm: return "ls_aqnm";
    }
    return "perfect";
}
const char* weight_mode_name(WeightMode m) {
    switch (m) {
        case WeightMode::Uniform: return "uniform";
        case WeightMode::Fixed: return "fixed";
        case WeightMode::RandomOneTwo: return "random_one_two";
    }
    return "uniform";
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg = default_config();
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section != "channel" && section != "csi" && section != "wmmse" &&
                    section != "ep" && section != "weights")
                    throw ConfigError("unknown section [" + section + "]");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const std::string dotted = section.empty() ? key : section + "." + key;
            const auto it = setters().find(dotted);
            if (it == setters().end())
                throw ConfigError("unknown key '" + dotted + "'");
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
    const auto it = setters().find(trim(key));
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
    it->second(cfg, value);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "schemes = [";
    for (size_t i = 0; i < cfg.schemes.size(); ++i)
        out << (i ? ", " : "") << '"' << scheme_name(cfg.schemes[i]) << '"';
    out << "]\n";
    out << "snr_grid_db = [";
    for (size_t i = 0; i < cfg.snr_grid_db.size(); ++i)
        out << (i ? ", " : "") << format_double(cfg.snr_grid_db[i]);
    out << "]\n";
    out << "antennas = " << cfg.antennas << "\n";
    out << "users = " << cfg.users << "\n";
    out << "levels = " << cfg.levels << "\n";
    out << "trials = " << cfg.trials << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "power_budget = " << format_double(cfg.power_budget) << "\n";
    out << "carrier_ghz = " << format_double(cfg.carrier_ghz) << "\n";
    out << "\n[channel]\n";
    out << "rician_factor = " << format_double(cfg.channel.rician_factor) << "\n";
    out << "angle_min = " << format_double(cfg.channel.angle_min) << "\n";
    out << "angle_max = " << format_double(cfg.channel.angle_max) << "\n";
    out << "distance_min = " << format_double(cfg.channel.distance_min) << "\n";
    out << "distance_max = " << format_double(cfg.channel.distance_max) << "\n";
    out << "nlos = \"" << nlos_name(cfg.channel.nlos) << "\"\n";
    out << "path_gain = \"" << path_gain_name(cfg.channel.path_gain) << "\"\n";
    out << "scatter_std = " << format_double(cfg.channel.scatter_std) << "\n";
    out << "\n[csi]\n";
    out << "mode = \"" << csi_mode_name(cfg.csi.mode) << "\"\n";
    out << "pilot_length = " << cfg.csi.pilot_length << "\n";
    out << "uplink_power = " << format_double(cfg.csi.uplink_power) << "\n";
    out << "uplink_noise = " << format_double(cfg.csi.uplink_noise) << "\n";
    out << "csi_bits = " << cfg.csi.csi_bits << "\n";
    out << "\n[wmmse]\n";
    out << "max_iterations = " << cfg.wmmse_max_iterations << "\n";
    out << "tolerance = " << format_double(cfg.wmmse_tolerance) << "\n";
    out << "\n[ep]\n";
    out << "max_iterations = " << cfg.ep.max_iterations << "\n";
    out << "damping = " << format_double(cfg.ep.damping) << "\n";
    out << "variance_floor = " << format_double(cfg.ep.variance_floor) << "\n";
    out << "cavity_variance_floor = " << format_double(cfg.ep.cavity_variance_floor)
        << "\n";
    out << "\n[weights]\n";
    out << "mode = \"" << weight_mode_name(cfg.weight_mode) << "\"\n";
    out << "values = [";
    for (size_t i = 0; i < cfg.weights.size(); ++i)
        out << (i ? ", " : "") << format_double(cfg.weights[i]);
    out << "]\n";
    return out.str();
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (cfg.schemes.empty()) fail("config: schemes is empty");
    if (cfg.snr_grid_db.empty()) fail("config: snr_grid_db is empty");
    if (cfg.users < 1) fail("config: users < 1");
    if (cfg.antennas < cfg.users) fail("config: antennas < users");
    if (cfg.levels < 2) fail("config: levels < 2");
    if (cfg.trials < 1) fail("config: trials < 1");
    if (!(cfg.power_budget > 0.0)) fail("config: power_budget <= 0");
    if (!(cfg.carrier_ghz > 0.0)) fail("config: carrier_ghz <= 0");
    if (!(cfg.channel.rician_factor >= 0.0)) fail("config: rician_factor < 0");
    if (!(cfg.channel.angle_min < cfg.channel.angle_max))
        fail("config: degenerate angle range");
    if (!(cfg.channel.distance_min > 0.0) ||
        !(cfg.channel.distance_min < cfg.channel.distance_max))
        fail("config: degenerate distance range");
    if (!(cfg.channel.scatter_std >= 0.0)) fail("config: scatter_std < 0");
    if (cfg.csi.pilot_length < 1) fail("config: pilot_length < 1");
    if (cfg.csi.csi_bits < 1) fail("config: csi_bits < 1");
    if (cfg.csi.uplink_power < 0.0) fail("config: uplink_power < 0");
    if (cfg.csi.uplink_noise < 0.0) fail("config: uplink_noise < 0");
    if (cfg.wmmse_max_iterations < 1) fail("config: wmmse.max_iterations < 1");
    if (!(cfg.wmmse_tolerance > 0.0)) fail("config: wmmse.tolerance <= 0");
    if (cfg.ep.max_iterations < 1) fail("config: ep.max_iterations < 1");
    if (!(cfg.ep.damping >= 0.0 && cfg.ep.damping <= 1.0))
        fail("config: ep.damping outside [0, 1]");
    if (!(cfg.ep.variance_floor > 0.0) || !(cfg.ep.cavity_variance_floor > 0.0))
        fail("config: ep floors must be positive");
    if (cfg.weight_mode == WeightMode::Fixed) {
        if (static_cast<int>(cfg.weights.size()) != cfg.users)
            fail("config: weights.values size must match users");
        for (double w : cfg.weights)
            if (!(w >= 0.0)) fail("config: negative UE weight");
    }
}

}  // namespace qprec
