#pragma once

#include "kmoco/coils.hpp"
#include "kmoco/complex_image.hpp"
#include "kmoco/rng.hpp"
#include "kmoco/scan_order.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kmoco {

// One to three discrete motions at strictly increasing acquisition timings.
// transforms[i] is the absolute pose held from timings[i] onward; pose 0
// (before the first motion) is the identity by convention.
struct MotionTrace {
    std::vector<int> timings;
    std::vector<RigidTransform> transforms;

    int n_poses() const { return static_cast<int>(timings.size()) + 1; }
};

struct MotionConfig {
    double max_angle = 8.0 * 3.14159265358979323846 / 180.0; // radians
    double max_shift = 5.0;                                  // pixels
    int second_motion_gap = 64; // minimum t2 - t1 when the first motion is early
    int t_min = 8;              // guards against degenerate one-column poses
    int max_motions = 3;

    // Which half of the first-motion timing law to draw from. Auto picks
    // uniformly among the feasible variants.
    enum class Variant { Auto, EarlyFirstMotion, LateFirstMotion };
    Variant variant = Variant::Auto;
};

// Draw a motion trace per the timing law: an early first motion lands in
// (0, t_center) and then forces t2 >= t1 + gap; a late first motion lands in
// [max(t_center, t_min), |T|/2). Later timings are uniform past t1 and the
// motion count is uniform over what fits.
MotionTrace sample_motion_trace(Rng& rng, const ScanOrder& order, const MotionConfig& cfg);

void validate_trace(const MotionTrace& trace, const ScanOrder& order);

// Partition of the order's acquisitions: acquisition t belongs to pose
// p = (number of trace timings <= t). Returns one column set per pose.
std::vector<std::vector<int>> pose_intervals(const ScanOrder& order, const MotionTrace& trace);

// Pose-wise merged corrupted k-space: each pose's image is projected through
// the fixed (scanner-frame) maps and contributes exactly its own columns.
MultiCoilKSpace simulate_corrupted(const ComplexImage& x, const SensitivityMaps& maps,
                                   const ScanOrder& order, const MotionTrace& trace);

// Absolute pose transform by pose index (pose 0 is the identity).
RigidTransform pose_transform(const MotionTrace& trace, int pose_index);

// Text format: `trace v1` header, then `t,angle_deg,shift_x,shift_y` lines.
MotionTrace load_trace(std::istream& in);
MotionTrace load_trace_file(const std::string& path);
void save_trace(const MotionTrace& trace, std::ostream& out);
void save_trace_file(const MotionTrace& trace, const std::string& path);

} // namespace kmoco
