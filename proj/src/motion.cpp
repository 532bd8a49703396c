#include "kmoco/motion.hpp"

#include "kmoco/fft.hpp"
#include "kmoco/resample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kmoco {

namespace {

// Largest valid first-motion timing is the last t with t < |T|/2.
int late_hi_exclusive(int scan_len) { return (scan_len + 1) / 2; }

} // namespace

MotionTrace sample_motion_trace(Rng& rng, const ScanOrder& order, const MotionConfig& cfg) {
    const int scan_len = order.length();
    const int t_center = order.t_center();

    const bool early_feasible = t_center >= 2; // t1 falls in the open interval (0, t_center)
    const int late_lo = std::max({t_center, cfg.t_min, 1});
    const bool late_feasible = late_lo < late_hi_exclusive(scan_len);

    bool early;
    switch (cfg.variant) {
        case MotionConfig::Variant::EarlyFirstMotion:
            if (!early_feasible)
                throw std::invalid_argument("sample_motion_trace: infeasible constraints "
                                            "(no room for an early first motion)");
            early = true;
            break;
        case MotionConfig::Variant::LateFirstMotion:
            if (!late_feasible)
                throw std::invalid_argument("sample_motion_trace: infeasible constraints "
                                            "(no room for a late first motion)");
            early = false;
            break;
        case MotionConfig::Variant::Auto:
        default:
            if (early_feasible && late_feasible) {
                early = rng.uniform_int(2) == 0;
            } else if (early_feasible) {
                early = true;
            } else if (late_feasible) {
                early = false;
            } else {
                throw std::invalid_argument("sample_motion_trace: infeasible constraints "
                                            "(no valid first-motion timing exists)");
            }
            break;
    }

    MotionTrace trace;
    int t1;
    if (early) {
        t1 = 1 + static_cast<int>(rng.uniform_int(t_center - 1));
    } else {
        t1 = late_lo + static_cast<int>(rng.uniform_int(late_hi_exclusive(scan_len) - late_lo));
    }
    trace.timings.push_back(t1);

    // second/third motions: uniform past t1; an early first motion additionally
    // forces a minimum delay before the second one
    const int lo2 = t1 + (early ? cfg.second_motion_gap : 1);
    int max_count = 1;
    if (lo2 <= scan_len - 1) max_count = 2;
    if (lo2 <= scan_len - 2) max_count = 3;
    max_count = std::min(max_count, cfg.max_motions);
    const int count = 1 + static_cast<int>(rng.uniform_int(max_count));

    if (count == 2) {
        trace.timings.push_back(lo2 + static_cast<int>(rng.uniform_int(scan_len - lo2)));
    } else if (count == 3) {
        int a = lo2 + static_cast<int>(rng.uniform_int(scan_len - lo2));
        int b = a;
        while (b == a) b = lo2 + static_cast<int>(rng.uniform_int(scan_len - lo2));
        trace.timings.push_back(std::min(a, b));
        trace.timings.push_back(std::max(a, b));
    }

    for (std::size_t i = 0; i < trace.timings.size(); ++i) {
        RigidTransform t;
        t.angle = rng.uniform(-cfg.max_angle, cfg.max_angle);
        t.shift_x = rng.uniform(-cfg.max_shift, cfg.max_shift);
        t.shift_y = rng.uniform(-cfg.max_shift, cfg.max_shift);
        trace.transforms.push_back(t);
    }
    return trace;
}

void validate_trace(const MotionTrace& trace, const ScanOrder& order) {
    (void)order;
    if (trace.timings.empty()) throw std::invalid_argument("trace: needs at least one motion");
    if (trace.timings.size() != trace.transforms.size())
        throw std::invalid_argument("trace: one transform per timing required");
    if (trace.timings.front() <= 0) throw std::invalid_argument("trace: first timing must be > 0");
    for (std::size_t i = 1; i < trace.timings.size(); ++i) {
        if (trace.timings[i] <= trace.timings[i - 1])
            throw std::invalid_argument("trace: timings must be strictly increasing");
    }
}

std::vector<std::vector<int>> pose_intervals(const ScanOrder& order, const MotionTrace& trace) {
    std::vector<std::vector<int>> sets(trace.n_poses());
    for (const ScanOrder::Timing& e : order.timings()) {
        int pose = 0;
        for (int t_motion : trace.timings) {
            if (t_motion <= e.t) ++pose;
        }
        sets[pose].push_back(e.column);
    }
    return sets;
}

RigidTransform pose_transform(const MotionTrace& trace, int pose_index) {
    if (pose_index == 0) return RigidTransform{};
    return trace.transforms.at(pose_index - 1);
}

MultiCoilKSpace simulate_corrupted(const ComplexImage& x, const SensitivityMaps& maps,
                                   const ScanOrder& order, const MotionTrace& trace) {
    const std::vector<std::vector<int>> poses = pose_intervals(order, trace);

    MultiCoilKSpace out;
    out.order = order;
    out.planes.assign(maps.n_coils(), ComplexImage(x.height(), x.width()));

    for (std::size_t p = 0; p < poses.size(); ++p) {
        if (poses[p].empty()) continue; // motion past the end of the scan is a no-op
        const ComplexImage xp =
            (p == 0) ? x : resample_rigid(x, trace.transforms[p - 1]);
        const MultiCoilKSpace kp = coil_project(xp, maps, order);
        for (int i = 0; i < out.n_coils(); ++i) {
            for (int col : poses[p]) {
                for (int r = 0; r < x.height(); ++r)
                    out.planes[i].at(r, col) = kp.planes[i].at(r, col);
            }
        }
    }
    return out;
}

MotionTrace load_trace(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("trace: empty file");
    if (header != "trace v1") throw std::invalid_argument("trace: bad header '" + header + "'");
    MotionTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double t = 0, angle_deg = 0, sx = 0, sy = 0;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ls >> t >> c1 >> angle_deg >> c2 >> sx >> c3 >> sy) || c1 != ',' || c2 != ',' ||
            c3 != ',')
            throw std::invalid_argument("trace: bad line '" + line + "'");
        trace.timings.push_back(static_cast<int>(t));
        RigidTransform tr;
        tr.angle = angle_deg * 3.14159265358979323846 / 180.0;
        tr.shift_x = sx;
        tr.shift_y = sy;
        trace.transforms.push_back(tr);
    }
    if (trace.timings.empty()) throw std::invalid_argument("trace: no motions listed");
    for (std::size_t i = 1; i < trace.timings.size(); ++i) {
        if (trace.timings[i] <= trace.timings[i - 1])
            throw std::invalid_argument("trace: timings must be strictly increasing");
    }
    if (trace.timings.front() <= 0) throw std::invalid_argument("trace: first timing must be > 0");
    return trace;
}

MotionTrace load_trace_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("trace: cannot open " + path);
    return load_trace(f);
}

void save_trace(const MotionTrace& trace, std::ostream& out) {
    out << "trace v1\n";
    out.precision(17);
    for (std::size_t i = 0; i < trace.timings.size(); ++i) {
        const RigidTransform& t = trace.transforms[i];
        out << trace.timings[i] << "," << t.angle * 180.0 / 3.14159265358979323846 << ","
            << t.shift_x << "," << t.shift_y << "\n";
    }
}

void save_trace_file(const MotionTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("trace: cannot write " + path);
    save_trace(trace, f);
}

} // namespace kmoco
