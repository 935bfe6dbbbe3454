#include "dfield/config.hpp"

#include <sstream>

#include "dfield/util.hpp"

namespace dfield {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    return from_string(read_file(path));
}

RunConfig RunConfig::from_string(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        nlohmann::json j = nlohmann::json::parse(val, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" + key +
                              "' (values are JSON fragments; quote strings)");
        c.values_[key] = std::move(j);
    }
    return c;
}

const nlohmann::json& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_number()) throw ConfigError("config: '" + key + "' must be a number");
    return it->second.get<double>();
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
    return it->second.get<int>();
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
    return it->second.get<std::uint64_t>();
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.is_string()) throw ConfigError("config: '" + key + "' must be a string");
    return it->second.get<std::string>();
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += " = ";
        out += v.dump();
        out += '\n';
    }
    return out;
}

std::uint64_t RunConfig::digest() const { return fnv1a(canonical()); }

namespace {

std::vector<Vec3> vec3_list(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("config: '" + key + "' must be a list of [x,y,z]");
    std::vector<Vec3> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 3) throw ConfigError("config: '" + key + "' entries must be [x,y,z]");
        out.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
    return out;
}

} // namespace

ArrayGeometry geometry_from_config(const RunConfig& c) {
    if (c.has("mics")) return make_geometry(vec3_list(c.get("mics"), "mics"));
    const std::string preset = c.get_string("mics.preset", "linear16");
    if (preset == "linear16") return default_linear_array();
    if (preset == "sphere32") return make_spherical_array32(c.get_double("mics.radius_m", 0.042));
    throw ConfigError("config: unknown mics.preset '" + preset + "'");
}

LoudspeakerLayout layout_from_config(const RunConfig& c) {
    if (c.has("layout.positions"))
        return make_explicit_layout(vec3_list(c.get("layout.positions"), "layout.positions"));
    const auto kind = layout_kind_from_string(c.get_string("layout.kind", "rhombic-triacontahedron"));
    const double radius = c.get_double("layout.radius_m", 1.8);
    const int count = c.get_int("layout.count", std::min(26, layout_vertex_budget(kind)));
    return make_polyhedral_layout(kind, radius, count);
}

void geometry_to_config(const ArrayGeometry& g, RunConfig& c) {
    nlohmann::json mics = nlohmann::json::array();
    for (const auto& p : g.mic_positions) mics.push_back({p.x, p.y, p.z});
    c.set("mics", std::move(mics));
}

void layout_to_config(const LoudspeakerLayout& l, RunConfig& c) {
    nlohmann::json spk = nlohmann::json::array();
    for (const auto& p : l.speaker_positions) spk.push_back({p.x, p.y, p.z});
    c.set("layout.positions", std::move(spk));
    c.set("layout.kind", to_string(l.kind));
    c.set("layout.radius_m", l.radius);
    c.set("layout.count", l.speaker_positions.size());
}

} // namespace dfield
