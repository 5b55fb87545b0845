#include "ofdmlink/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ofdmlink/error.hpp"

namespace ofdmlink {

using nlohmann::json;

Range speed_preset(const std::string& name) {
    if (name == "low") return {0.0, 5.1};
    if (name == "medium") return {13.6, 18.8};
    if (name == "high") return {27.4, 32.5};
    if (name == "training") return {0.0, 32.5};
    throw ConfigError("unknown speed preset '" + name + "' (expected low, medium, high or training)");
}

RadioParams ScenarioConfig::radio() const {
    return RadioParams::from_numerology(carrier_hz, subcarrier_spacing_hz, cyclic_prefix_s);
}

namespace {

void check_range(const Range& r, const char* what) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo < 0.0 || r.hi < r.lo) {
        throw ConfigError(std::string(what) + ": need 0 <= lo <= hi");
    }
}

std::string axis_name(SnrAxis a) {
    switch (a) {
        case SnrAxis::eb_over_sigma2_db: return "eb_over_sigma2_db";
        case SnrAxis::es_over_sigma2_db: return "es_over_sigma2_db";
        case SnrAxis::sigma2_db: return "sigma2_db";
    }
    return "";
}

SnrAxis parse_axis(const std::string& s) {
    if (s == "eb_over_sigma2_db") return SnrAxis::eb_over_sigma2_db;
    if (s == "es_over_sigma2_db") return SnrAxis::es_over_sigma2_db;
    if (s == "sigma2_db") return SnrAxis::sigma2_db;
    throw ConfigError("unknown snr axis '" + s + "'");
}

std::string tx_name(TransmitterKind k) {
    switch (k) {
        case TransmitterKind::qam: return "qam";
        case TransmitterKind::gs: return "gs";
        case TransmitterKind::sip: return "sip";
    }
    return "";
}

TransmitterKind parse_tx(const std::string& s) {
    if (s == "qam") return TransmitterKind::qam;
    if (s == "gs") return TransmitterKind::gs;
    if (s == "sip") return TransmitterKind::sip;
    throw ConfigError("unknown transmitter kind '" + s + "' (expected qam, gs or sip)");
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; })) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

Range parse_range(const json& j, const std::string& what) {
    if (j.is_string()) return speed_preset(j.get<std::string>());
    if (!j.is_array() || j.size() != 2) throw ConfigError(what + " must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
    std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) return path;
    return base / path;
}

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
    if (dims.size() == 0) throw ConfigError("grid must be non-empty");
    if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0) || !(cyclic_prefix_s >= 0.0)) {
        throw ConfigError("radio parameters must be positive");
    }
    check_range(speed, "speed");
    check_range(delay_spread, "delay_spread_s");
    check_range(covariance.speed, "covariance.speed");
    check_range(covariance.delay_spread, "covariance.delay_spread_s");
    if (pdps.empty() || covariance.pdps.empty()) throw ConfigError("pdps must be non-empty");
    for (const auto& p : pdps) named_pdp(p);
    for (const auto& p : covariance.pdps) named_pdp(p);
    if (snr_points.empty()) throw ConfigError("snr.points must be non-empty");
    for (double s : snr_points) {
        if (!std::isfinite(s)) throw ConfigError("snr.points must be finite");
    }
    if (pilots != "1P" && pilots != "2P" && pilots != "none") throw ConfigError("pilots must be 1P, 2P or none");
    if (receivers.empty()) throw ConfigError("receivers must be non-empty");
    std::set<ReceiverKind> unique(receivers.begin(), receivers.end());
    if (unique.size() != receivers.size()) throw ConfigError("receivers must not repeat");
    const bool estimating = std::any_of(receivers.begin(), receivers.end(),
                                        [](ReceiverKind k) { return k != ReceiverKind::perfect_csi; });
    if (pilots == "none" && estimating) {
        throw ConfigError("pilotless configurations support only the perfect_csi receiver");
    }
    if (transmitter.kind != TransmitterKind::qam && pilots != "none") {
        throw ConfigError("gs and sip transmitters are pilotless; set pilots to none");
    }
    if (transmitter.kind == TransmitterKind::gs && transmitter.constellation_file.empty()) {
        throw ConfigError("gs transmitter needs constellation_file");
    }
    if (transmitter.kind == TransmitterKind::sip && transmitter.allocation_file.empty() &&
        !(transmitter.uniform_fraction >= 0.0 && transmitter.uniform_fraction <= 1.0)) {
        throw ConfigError("sip uniform_fraction must lie in [0, 1]");
    }
    if (transmitter.kind != TransmitterKind::gs && bits_per_symbol != 2 && bits_per_symbol != 4 &&
        bits_per_symbol != 6) {
        throw ConfigError("bits_per_symbol must be 2, 4 or 6 for QAM");
    }
    if (receiver_settings.bp_iterations < 1 || receiver_settings.outer_iterations < 1 ||
        receiver_settings.inner_bp_iterations < 1) {
        throw ConfigError("iteration counts must be positive");
    }
    if (frames == 0) throw ConfigError("frames must be positive");
    if (covariance.samples == 0) throw ConfigError("covariance.samples must be positive");
}

ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    try {
        reject_unknown(j,
                       {"schema_version", "n_subcarriers", "n_symbols", "carrier_hz", "subcarrier_spacing_hz",
                        "cyclic_prefix_s", "bits_per_symbol", "pdps", "speed", "delay_spread_s", "snr", "pilots",
                        "pilot_seed", "interleaver_seed", "transmitter", "receivers", "bp_iterations",
                        "iedd_outer_iterations", "iedd_inner_bp_iterations", "iedd_stop_on_convergence",
                        "receiver_covariance", "covariance_file", "covariance", "frames", "frames_per_block",
                        "min_errors", "force", "seed"},
                       "config");
        const int version = j.value("schema_version", kConfigSchemaVersion);
        if (version != kConfigSchemaVersion) {
            throw ConfigError("unsupported schema_version " + std::to_string(version));
        }
        c.dims = OfdmDims(j.value("n_subcarriers", c.dims.n_subcarriers), j.value("n_symbols", c.dims.n_symbols));
        read_opt(j, "carrier_hz", c.carrier_hz);
        read_opt(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz);
        read_opt(j, "cyclic_prefix_s", c.cyclic_prefix_s);
        read_opt(j, "bits_per_symbol", c.bits_per_symbol);
        read_opt(j, "pdps", c.pdps);
        if (j.contains("speed")) c.speed = parse_range(j.at("speed"), "speed");
        if (j.contains("delay_spread_s")) c.delay_spread = parse_range(j.at("delay_spread_s"), "delay_spread_s");
        if (j.contains("snr")) {
            const auto& s = j.at("snr");
            reject_unknown(s, {"axis", "points"}, "snr");
            if (s.contains("axis")) c.snr_axis = parse_axis(s.at("axis").get<std::string>());
            read_opt(s, "points", c.snr_points);
        }
        read_opt(j, "pilots", c.pilots);
        read_opt(j, "pilot_seed", c.pilot_seed);
        read_opt(j, "interleaver_seed", c.interleaver_seed);
        if (j.contains("transmitter")) {
            const auto& t = j.at("transmitter");
            reject_unknown(t, {"kind", "constellation_file", "allocation_file", "uniform_fraction", "sip_seed"},
                           "transmitter");
            c.transmitter.kind = parse_tx(t.value("kind", std::string("qam")));
            if (t.contains("constellation_file")) {
                c.transmitter.constellation_file = resolve(t.at("constellation_file").get<std::string>(), base_dir);
            }
            if (t.contains("allocation_file")) {
                c.transmitter.allocation_file = resolve(t.at("allocation_file").get<std::string>(), base_dir);
            }
            read_opt(t, "uniform_fraction", c.transmitter.uniform_fraction);
            read_opt(t, "sip_seed", c.transmitter.sip_seed);
        }
        if (j.contains("receivers")) {
            c.receivers.clear();
            for (const auto& r : j.at("receivers")) c.receivers.push_back(parse_receiver_kind(r.get<std::string>()));
        }
        read_opt(j, "bp_iterations", c.receiver_settings.bp_iterations);
        read_opt(j, "iedd_outer_iterations", c.receiver_settings.outer_iterations);
        read_opt(j, "iedd_inner_bp_iterations", c.receiver_settings.inner_bp_iterations);
        read_opt(j, "iedd_stop_on_convergence", c.receiver_settings.stop_on_convergence);
        if (j.contains("receiver_covariance")) {
            const auto s = j.at("receiver_covariance").get<std::string>();
            if (s == "empirical") {
                c.receiver_covariance = ReceiverCovariance::empirical;
            } else if (s == "true") {
                c.receiver_covariance = ReceiverCovariance::true_model;
            } else {
                throw ConfigError("receiver_covariance must be empirical or true");
            }
        }
        if (j.contains("covariance_file")) {
            c.covariance_file = resolve(j.at("covariance_file").get<std::string>(), base_dir);
        }
        if (j.contains("covariance")) {
            const auto& cv = j.at("covariance");
            reject_unknown(cv, {"samples", "speed", "delay_spread_s", "pdps", "seed"}, "covariance");
            read_opt(cv, "samples", c.covariance.samples);
            if (cv.contains("speed")) c.covariance.speed = parse_range(cv.at("speed"), "covariance.speed");
            if (cv.contains("delay_spread_s")) {
                c.covariance.delay_spread = parse_range(cv.at("delay_spread_s"), "covariance.delay_spread_s");
            }
            read_opt(cv, "pdps", c.covariance.pdps);
            read_opt(cv, "seed", c.covariance.seed);
        }
        read_opt(j, "frames", c.frames);
        read_opt(j, "frames_per_block", c.frames_per_block);
        read_opt(j, "min_errors", c.min_errors);
        read_opt(j, "force", c.force);
        read_opt(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["n_subcarriers"] = c.dims.n_subcarriers;
    j["n_symbols"] = c.dims.n_symbols;
    j["carrier_hz"] = c.carrier_hz;
    j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
    j["cyclic_prefix_s"] = c.cyclic_prefix_s;
    j["bits_per_symbol"] = c.bits_per_symbol;
    j["pdps"] = c.pdps;
    j["speed"] = {c.speed.lo, c.speed.hi};
    j["delay_spread_s"] = {c.delay_spread.lo, c.delay_spread.hi};
    j["snr"] = {{"axis", axis_name(c.snr_axis)}, {"points", c.snr_points}};
    j["pilots"] = c.pilots;
    j["pilot_seed"] = c.pilot_seed;
    j["interleaver_seed"] = c.interleaver_seed;
    json t = {{"kind", tx_name(c.transmitter.kind)}};
    if (!c.transmitter.constellation_file.empty()) t["constellation_file"] = c.transmitter.constellation_file.string();
    if (!c.transmitter.allocation_file.empty()) t["allocation_file"] = c.transmitter.allocation_file.string();
    t["uniform_fraction"] = c.transmitter.uniform_fraction;
    t["sip_seed"] = c.transmitter.sip_seed;
    j["transmitter"] = t;
    json rx = json::array();
    for (auto r : c.receivers) rx.push_back(to_string(r));
    j["receivers"] = rx;
    j["bp_iterations"] = c.receiver_settings.bp_iterations;
    j["iedd_outer_iterations"] = c.receiver_settings.outer_iterations;
    j["iedd_inner_bp_iterations"] = c.receiver_settings.inner_bp_iterations;
    j["iedd_stop_on_convergence"] = c.receiver_settings.stop_on_convergence;
    j["receiver_covariance"] = c.receiver_covariance == ReceiverCovariance::empirical ? "empirical" : "true";
    if (!c.covariance_file.empty()) j["covariance_file"] = c.covariance_file.string();
    j["covariance"] = {{"samples", c.covariance.samples},
                       {"speed", {c.covariance.speed.lo, c.covariance.speed.hi}},
                       {"delay_spread_s", {c.covariance.delay_spread.lo, c.covariance.delay_spread.hi}},
                       {"pdps", c.covariance.pdps},
                       {"seed", c.covariance.seed}};
    j["frames"] = c.frames;
    j["frames_per_block"] = c.frames_per_block;
    j["min_errors"] = c.min_errors;
    j["force"] = c.force;
    j["seed"] = c.seed;
    return j;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

}  // namespace ofdmlink
