#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfield/vec3.hpp"

namespace dfield {

/// Microphone positions in the array-local frame, meters.
struct ArrayGeometry {
    std::vector<Vec3> mic_positions;
    std::vector<std::string> labels;

    std::size_t size() const { return mic_positions.size(); }
    /// Largest |position| over the mics (local-frame reach).
    double extent() const;
};

/// Validates the geometry invariants (>= 2 mics, finite, pairwise distinct)
/// and fills default labels where missing.
ArrayGeometry make_geometry(std::vector<Vec3> positions, std::vector<std::string> labels = {});

/// Mics on a line along +x; position k is the cumulative sum of gaps,
/// mic 0 at the origin. All gaps must be > 0.
ArrayGeometry make_linear_array(std::span<const double> gaps);

/// The stock 16-element line used throughout: gaps in mm
/// {16,17,18,21,23,29,26,24,22,28,16,25,20,19,16}, spanning pair distances
/// 0.016..0.32 m with 97 distinct values (0.15 m among them).
ArrayGeometry default_linear_array();

/// 32 mics on a sphere: dodecahedron plus icosahedron vertex directions
/// (pentakis-dodecahedron arrangement), radius in meters.
ArrayGeometry make_spherical_array32(double radius);

enum class LayoutKind {
    tetrahedron,
    icosahedron,
    dodecahedron,
    dodecahedron_edges,      // 30 edge-midpoint directions
    rhombic_triacontahedron, // 32 vertex directions
    explicit_positions,
};

LayoutKind layout_kind_from_string(std::string_view s);
std::string to_string(LayoutKind k);
int layout_vertex_budget(LayoutKind k);

/// Loudspeaker positions in the room frame, meters; for polyhedral shells
/// all positions lie at the common radius.
struct LoudspeakerLayout {
    std::vector<Vec3> speaker_positions;
    double radius = 0.0;
    LayoutKind kind = LayoutKind::explicit_positions;

    std::size_t size() const { return speaker_positions.size(); }
    /// Propagation direction of speaker i: unit vector toward the origin.
    Vec3 propagation_direction(std::size_t i) const;
};

/// `count` positions on a sphere of `radius` taken from the vertex set of
/// `kind`. When count is below the vertex budget, the subset greedily
/// maximizes the minimum angular separation starting from vertex 0, ties
/// broken by lowest index, so the selection is reproducible.
LoudspeakerLayout make_polyhedral_layout(LayoutKind kind, double radius, int count);

LoudspeakerLayout make_explicit_layout(std::vector<Vec3> positions);

/// Greedy max-min-angle subset of unit directions; exposed for documentation
/// and tests of the selection rule.
std::vector<int> max_min_angle_subset(const std::vector<Vec3>& dirs, int count);

/// Rigid pose: x -> rotation * x + translation.
struct Pose {
    Vec3 translation;
    Mat3 rotation;

    static Pose identity() { return {Vec3{}, Mat3::identity()}; }
};

/// Validates rotation orthonormality (det +1 within 1e-9).
Pose make_pose(const Vec3& translation, const Mat3& rotation);

/// Piecewise-constant rigid motion of the array during a capture.
struct Trajectory {
    struct Segment {
        double duration = 0.0; // seconds
        Pose pose;
    };
    std::vector<Segment> segments;

    double total_duration() const;
    static Trajectory fixed(double duration, const Pose& pose = Pose::identity());
};

/// Random trajectory for the perturbed-capture method: per segment, a
/// translation uniform in a ball of radius (shell_radius - array_extent) *
/// 0.9 and a rotation uniform over SO(3). Equal segment durations;
/// deterministic in the seed. The first pose of a K-segment trajectory
/// equals the pose of the 1-segment trajectory with the same seed.
Trajectory sample_trajectory(double shell_radius, double array_extent, int num_segments,
                             double total_duration, std::uint64_t seed);

ArrayGeometry apply_pose(const ArrayGeometry& g, const Pose& p);

struct PairDistance {
    int p = 0;
    int q = 0;
    double distance = 0.0;
};

/// All M(M-1)/2 unordered pairs with Euclidean distances.
std::vector<PairDistance> pair_distances(const ArrayGeometry& g);

/// True when every mic position under every segment pose lies strictly
/// inside the shell radius.
bool trajectory_fits(const Trajectory& t, const ArrayGeometry& g, double shell_radius);

/// Digest of the pose stream, for provenance sidecars.
std::uint64_t trajectory_digest(const Trajectory& t);

} // namespace dfield
