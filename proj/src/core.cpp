#include "farmsim/core.hpp"

#include <algorithm>
#include <cmath>

namespace farmsim {

double distance_m(const Position& a, const Position& b) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

int orientation(const Position& a, const Position& b, const Position& c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(const Position& a, const Position& b, const Position& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

} // namespace

bool segments_intersect_2d(const Position& p, const Position& q,
                           const Position& r, const Position& s) {
    int o1 = orientation(p, q, r);
    int o2 = orientation(p, q, s);
    int o3 = orientation(r, s, p);
    int o4 = orientation(r, s, q);

    if (o1 != o2 && o3 != o4) return true;

    // collinear cases, including overlap and endpoint touch
    if (o1 == 0 && on_segment(p, q, r)) return true;
    if (o2 == 0 && on_segment(p, q, s)) return true;
    if (o3 == 0 && on_segment(r, s, p)) return true;
    if (o4 == 0 && on_segment(r, s, q)) return true;
    return false;
}

bool line_of_sight(const std::vector<Obstruction>& obstructions,
                   const Position& a, const Position& b) {
    if (a.x == b.x && a.y == b.y)
        throw std::invalid_argument("line_of_sight: endpoints coincide in ground plane");
    for (const Obstruction& o : obstructions) {
        if (segments_intersect_2d(a, b, o.a, o.b)) return false;
    }
    return true;
}

} // namespace farmsim
