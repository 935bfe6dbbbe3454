#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "dfield/geometry.hpp"

namespace dfield {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Line-oriented `key = value` run configuration. Keys are dotted paths
/// (`layout.kind`), values are JSON fragments (`1.8`, `"proposed"`,
/// `[[0,0,0],[0.016,0,0]]`). `#` starts a comment line; blank lines ignored.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, nlohmann::json v) { values_[key] = std::move(v); }

    const nlohmann::json& get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    /// Keys in sorted order, one `key = value` per line; digests and
    /// re-parsing use this normal form.
    std::string canonical() const;
    std::uint64_t digest() const;

private:
    std::map<std::string, nlohmann::json> values_;
};

/// Geometry from config: explicit `mics = [[x,y,z],...]` wins, else
/// `mics.preset` ("linear16" or "sphere32"), else the default 16-mic line.
ArrayGeometry geometry_from_config(const RunConfig& c);

/// Layout from config: explicit `layout.positions = [[x,y,z],...]` wins,
/// else `layout.kind` / `layout.radius_m` / `layout.count` (default
/// rhombic-triacontahedron, 1.8 m, 26).
LoudspeakerLayout layout_from_config(const RunConfig& c);

void geometry_to_config(const ArrayGeometry& g, RunConfig& c);
void layout_to_config(const LoudspeakerLayout& l, RunConfig& c);

} // namespace dfield
