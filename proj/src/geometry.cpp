#include "dfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "dfield/rng.hpp"

namespace dfield {

namespace {

constexpr double kGolden = 1.6180339887498948482;
constexpr double kTranslationSafety = 0.9;

void append_cyclic(std::vector<Vec3>& out, double a, double b, double c) {
    out.push_back({a, b, c});
    out.push_back({c, a, b});
    out.push_back({b, c, a});
}

// 20 dodecahedron vertex directions (unit).
std::vector<Vec3> dodecahedron_dirs() {
    std::vector<Vec3> v;
    for (int sx : {1, -1})
        for (int sy : {1, -1})
            for (int sz : {1, -1}) v.push_back({double(sx), double(sy), double(sz)});
    for (int sy : {1, -1})
        for (int sz : {1, -1}) append_cyclic(v, 0.0, sy / kGolden, sz * kGolden);
    for (auto& d : v) d = normalize(d);
    return v;
}

// 12 icosahedron vertex directions (unit).
std::vector<Vec3> icosahedron_dirs() {
    std::vector<Vec3> v;
    for (int sy : {1, -1})
        for (int sz : {1, -1}) append_cyclic(v, 0.0, double(sy), sz * kGolden);
    for (auto& d : v) d = normalize(d);
    return v;
}

std::vector<Vec3> tetrahedron_dirs() {
    std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (auto& d : v) d = normalize(d);
    return v;
}

// 30 dodecahedron edge midpoints projected to the sphere (equivalently the
// icosidodecahedron vertices) for the 30-speaker dodecahedral shell.
std::vector<Vec3> dodecahedron_edge_dirs() {
    const auto verts = dodecahedron_dirs();
    // edges join the closest vertex pairs
    double min_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
            min_d = std::min(min_d, norm(verts[i] - verts[j]));
    std::vector<Vec3> mids;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
            if (norm(verts[i] - verts[j]) < min_d * 1.05)
                mids.push_back(normalize(verts[i] + verts[j]));
    return mids;
}

// 32 rhombic triacontahedron vertex directions: the 20 dodecahedron plus the
// 12 icosahedron directions, all projected onto the unit sphere.
std::vector<Vec3> rhombic_triacontahedron_dirs() {
    auto v = dodecahedron_dirs();
    const auto ico = icosahedron_dirs();
    v.insert(v.end(), ico.begin(), ico.end());
    return v;
}

std::vector<Vec3> kind_dirs(LayoutKind k) {
    switch (k) {
        case LayoutKind::tetrahedron: return tetrahedron_dirs();
        case LayoutKind::icosahedron: return icosahedron_dirs();
        case LayoutKind::dodecahedron: return dodecahedron_dirs();
        case LayoutKind::dodecahedron_edges: return dodecahedron_edge_dirs();
        case LayoutKind::rhombic_triacontahedron: return rhombic_triacontahedron_dirs();
        case LayoutKind::explicit_positions:
            throw std::invalid_argument("explicit layout has no vertex set");
    }
    throw std::invalid_argument("unknown layout kind");
}

} // namespace

double ArrayGeometry::extent() const {
    double e = 0.0;
    for (const auto& p : mic_positions) e = std::max(e, norm(p));
    return e;
}

ArrayGeometry make_geometry(std::vector<Vec3> positions, std::vector<std::string> labels) {
    if (positions.size() < 2)
        throw std::invalid_argument("geometry: need at least 2 microphones");
    for (const auto& p : positions)
        if (!is_finite(p)) throw std::invalid_argument("geometry: non-finite mic position");
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (norm(positions[i] - positions[j]) == 0.0)
                throw std::invalid_argument("geometry: duplicate mic positions");
    if (labels.empty()) {
        labels.reserve(positions.size());
        for (std::size_t i = 0; i < positions.size(); ++i)
            labels.push_back("mic" + std::to_string(i));
    } else if (labels.size() != positions.size()) {
        throw std::invalid_argument("geometry: label count mismatch");
    }
    return {std::move(positions), std::move(labels)};
}

ArrayGeometry make_linear_array(std::span<const double> gaps) {
    if (gaps.empty()) throw std::invalid_argument("linear array: need at least one gap");
    std::vector<Vec3> pos;
    pos.reserve(gaps.size() + 1);
    double x = 0.0;
    pos.push_back({0.0, 0.0, 0.0});
    for (double g : gaps) {
        if (!(g > 0.0)) throw std::invalid_argument("linear array: gaps must be > 0");
        x += g;
        pos.push_back({x, 0.0, 0.0});
    }
    return make_geometry(std::move(pos));
}

ArrayGeometry default_linear_array() {
    static const double gaps_mm[] = {16, 17, 18, 21, 23, 29, 26, 24, 22, 28, 16, 25, 20, 19, 16};
    std::vector<double> gaps;
    for (double g : gaps_mm) gaps.push_back(g * 1e-3);
    return make_linear_array(gaps);
}

ArrayGeometry make_spherical_array32(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("spherical array: radius must be > 0");
    std::vector<Vec3> pos;
    for (const auto& d : rhombic_triacontahedron_dirs()) pos.push_back(d * radius);
    return make_geometry(std::move(pos));
}

LayoutKind layout_kind_from_string(std::string_view s) {
    if (s == "tetrahedron") return LayoutKind::tetrahedron;
    if (s == "icosahedron") return LayoutKind::icosahedron;
    if (s == "dodecahedron") return LayoutKind::dodecahedron;
    if (s == "dodecahedron-edges") return LayoutKind::dodecahedron_edges;
    if (s == "rhombic-triacontahedron") return LayoutKind::rhombic_triacontahedron;
    if (s == "explicit") return LayoutKind::explicit_positions;
    throw std::invalid_argument("unknown layout kind: " + std::string(s));
}

std::string to_string(LayoutKind k) {
    switch (k) {
        case LayoutKind::tetrahedron: return "tetrahedron";
        case LayoutKind::icosahedron: return "icosahedron";
        case LayoutKind::dodecahedron: return "dodecahedron";
        case LayoutKind::dodecahedron_edges: return "dodecahedron-edges";
        case LayoutKind::rhombic_triacontahedron: return "rhombic-triacontahedron";
        case LayoutKind::explicit_positions: return "explicit";
    }
    return "unknown";
}

int layout_vertex_budget(LayoutKind k) {
    switch (k) {
        case LayoutKind::tetrahedron: return 4;
        case LayoutKind::icosahedron: return 12;
        case LayoutKind::dodecahedron: return 20;
        case LayoutKind::dodecahedron_edges: return 30;
        case LayoutKind::rhombic_triacontahedron: return 32;
        case LayoutKind::explicit_positions: return 0;
    }
    return 0;
}

Vec3 LoudspeakerLayout::propagation_direction(std::size_t i) const {
    return normalize(-speaker_positions.at(i));
}

std::vector<int> max_min_angle_subset(const std::vector<Vec3>& dirs, int count) {
    if (count < 1 || count > static_cast<int>(dirs.size()))
        throw std::invalid_argument("subset count out of range");
    std::vector<int> selected = {0};
    std::vector<bool> used(dirs.size(), false);
    used[0] = true;
    while (static_cast<int>(selected.size()) < count) {
        int best = -1;
        double best_min = -2.0;
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            if (used[j]) continue;
            double min_cos = -2.0; // maximize min angle == minimize max cosine
            for (int s : selected) min_cos = std::max(min_cos, dot(dirs[j], dirs[s]));
            const double min_angle = std::acos(std::clamp(min_cos, -1.0, 1.0));
            if (min_angle > best_min + 1e-12) {
                best_min = min_angle;
                best = static_cast<int>(j);
            }
        }
        selected.push_back(best);
        used[best] = true;
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

LoudspeakerLayout make_polyhedral_layout(LayoutKind kind, double radius, int count) {
    if (!(radius > 0.0)) throw std::invalid_argument("layout: radius must be > 0");
    const auto dirs = kind_dirs(kind);
    if (count < 1 || count > static_cast<int>(dirs.size()))
        throw std::invalid_argument("layout: count exceeds vertex budget of " + to_string(kind));

    std::vector<Vec3> pos;
    if (count == static_cast<int>(dirs.size())) {
        for (const auto& d : dirs) pos.push_back(d * radius);
    } else {
        for (int i : max_min_angle_subset(dirs, count)) pos.push_back(dirs[i] * radius);
    }
    return {std::move(pos), radius, kind};
}

LoudspeakerLayout make_explicit_layout(std::vector<Vec3> positions) {
    if (positions.empty()) throw std::invalid_argument("layout: empty speaker list");
    double rmax = 0.0;
    for (const auto& p : positions) {
        const double r = norm(p);
        if (!(r > 0.0)) throw std::invalid_argument("layout: speaker at the origin");
        rmax = std::max(rmax, r);
    }
    return {std::move(positions), rmax, LayoutKind::explicit_positions};
}

Pose make_pose(const Vec3& translation, const Mat3& rotation) {
    if (!is_finite(translation)) throw std::invalid_argument("pose: non-finite translation");
    if (!is_rotation(rotation, 1e-9))
        throw std::invalid_argument("pose: rotation not orthonormal with det +1");
    return {translation, rotation};
}

double Trajectory::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

Trajectory Trajectory::fixed(double duration, const Pose& pose) {
    if (!(duration > 0.0)) throw std::invalid_argument("trajectory: duration must be > 0");
    return {{{duration, pose}}};
}

Trajectory sample_trajectory(double shell_radius, double array_extent, int num_segments,
                             double total_duration, std::uint64_t seed) {
    if (!(shell_radius > 0.0)) throw std::invalid_argument("trajectory: shell radius must be > 0");
    if (!(array_extent >= 0.0) || array_extent >= shell_radius)
        throw std::invalid_argument("trajectory: array too large for shell");
    if (num_segments < 1) throw std::invalid_argument("trajectory: need at least one segment");
    if (!(total_duration > 0.0)) throw std::invalid_argument("trajectory: duration must be > 0");

    const double ball = (shell_radius - array_extent) * kTranslationSafety;
    const double seg_dur = total_duration / num_segments;
    Rng rng(seed);
    Trajectory t;
    t.segments.reserve(num_segments);
    for (int i = 0; i < num_segments; ++i) {
        const Vec3 tr = sample_in_ball(rng, ball);
        const Mat3 rot = sample_rotation(rng);
        t.segments.push_back({seg_dur, Pose{tr, rot}});
    }
    return t;
}

ArrayGeometry apply_pose(const ArrayGeometry& g, const Pose& p) {
    ArrayGeometry out = g;
    for (auto& x : out.mic_positions) x = p.rotation * x + p.translation;
    return out;
}

std::vector<PairDistance> pair_distances(const ArrayGeometry& g) {
    if (g.size() < 2) throw std::invalid_argument("pair_distances: need at least 2 mics");
    std::vector<PairDistance> out;
    const int m = static_cast<int>(g.size());
    out.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q)
            out.push_back({p, q, norm(g.mic_positions[q] - g.mic_positions[p])});
    return out;
}

bool trajectory_fits(const Trajectory& t, const ArrayGeometry& g, double shell_radius) {
    for (const auto& seg : t.segments) {
        for (const auto& p : g.mic_positions) {
            if (norm(seg.pose.rotation * p + seg.pose.translation) >= shell_radius) return false;
        }
    }
    return true;
}

std::uint64_t trajectory_digest(const Trajectory& t) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits;
        h *= 0x100000001b3ULL;
    };
    for (const auto& s : t.segments) {
        mix(s.duration);
        mix(s.pose.translation.x);
        mix(s.pose.translation.y);
        mix(s.pose.translation.z);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mix(s.pose.rotation.m[i][j]);
    }
    return h;
}

} // namespace dfield
