#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "cvqkd/cli.hpp"

namespace cvqkd::cli {
namespace {

using nlohmann::json;

template <typename T>
T read_as(const json& j, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!j.is_number()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, int>) {
            if (!j.is_number_integer()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string()) throw ConfigError("");
        } else {
            if (!j.is_array()) throw ConfigError("");
            for (const auto& e : j)
                if (!e.is_number()) throw ConfigError("");
        }
        return j.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

template <typename T>
void read_optional(const json& j, const std::string& key, std::optional<T>& field) {
    if (j.is_null()) field.reset();
    else field = read_as<T>(j, key);
}

}  // namespace

ProtocolParams RunConfig::protocol() const { return protocol_at(distance_km); }

ProtocolParams RunConfig::protocol_at(double d) const {
    ProtocolParams p;
    p.v_a = v_a;
    p.v_b = v_b;
    p.eta = eta;
    p.beta = beta;
    p.excess_noise = excess_noise;
    p.electronic_noise = electronic_noise;
    p.k_override = k_override;
    p.transmittance = distance_to_transmittance({attenuation_db_per_km, d});
    p.validate();
    return p;
}

std::vector<double> RunConfig::beta_list() const { return betas.value_or(std::vector<double>{beta}); }
std::vector<double> RunConfig::distance_list() const {
    return distances.value_or(std::vector<double>{distance_km});
}
std::vector<double> RunConfig::epsilon_list() const {
    return epsilons.value_or(std::vector<double>{excess_noise});
}

json to_json(const RunConfig& c) {
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    return json{
        {"v_a", c.v_a},
        {"v_b", c.v_b},
        {"eta", c.eta},
        {"beta", c.beta},
        {"excess_noise", c.excess_noise},
        {"electronic_noise", c.electronic_noise},
        {"k_override", opt(c.k_override)},
        {"attenuation_db_per_km", c.attenuation_db_per_km},
        {"distance_km", c.distance_km},
        {"c_x", opt(c.c_x)},
        {"c_p", opt(c.c_p)},
        {"v_e1", c.v_e1},
        {"v_e2", c.v_e2},
        {"grid", c.grid},
        {"refine", c.refine},
        {"betas", opt(c.betas)},
        {"distances", opt(c.distances)},
        {"epsilons", opt(c.epsilons)},
        {"out", c.out},
        {"workers", c.workers},
    };
}

RunConfig apply_json(RunConfig c, const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "v_a") c.v_a = read_as<double>(v, key);
        else if (key == "v_b") c.v_b = read_as<double>(v, key);
        else if (key == "eta") c.eta = read_as<double>(v, key);
        else if (key == "beta") c.beta = read_as<double>(v, key);
        else if (key == "excess_noise") c.excess_noise = read_as<double>(v, key);
        else if (key == "electronic_noise") c.electronic_noise = read_as<double>(v, key);
        else if (key == "k_override") read_optional(v, key, c.k_override);
        else if (key == "attenuation_db_per_km") c.attenuation_db_per_km = read_as<double>(v, key);
        else if (key == "distance_km") c.distance_km = read_as<double>(v, key);
        else if (key == "c_x") read_optional(v, key, c.c_x);
        else if (key == "c_p") read_optional(v, key, c.c_p);
        else if (key == "v_e1") c.v_e1 = read_as<double>(v, key);
        else if (key == "v_e2") c.v_e2 = read_as<double>(v, key);
        else if (key == "grid") c.grid = read_as<int>(v, key);
        else if (key == "refine") c.refine = read_as<int>(v, key);
        else if (key == "betas") read_optional(v, key, c.betas);
        else if (key == "distances") read_optional(v, key, c.distances);
        else if (key == "epsilons") read_optional(v, key, c.epsilons);
        else if (key == "out") c.out = read_as<std::string>(v, key);
        else if (key == "workers") c.workers = read_as<int>(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return apply_json(std::move(base), j);
}

std::string format_number(double x) {
    if (std::isnan(x)) return "";
    if (x == 0.0) x = 0.0;  // drops the sign of -0
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 15);
    return {buf, r.ptr};
}

std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

}  // namespace cvqkd::cli
