#include "boxmodel/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boxmodel {

void IntervalSet::normalize() {
    std::sort(parts.begin(), parts.end());
    std::vector<std::pair<double, double>> out;
    for (const auto& p : parts) {
        if (p.second < p.first) continue;
        if (!out.empty() && p.first <= out.back().second)
            out.back().second = std::max(out.back().second, p.second);
        else
            out.push_back(p);
    }
    parts = std::move(out);
}

double distance(const IntervalSet& a, const IntervalSet& b) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [a0, a1] : a.parts)
        for (const auto& [b0, b1] : b.parts) {
            if (a1 < b0)
                d = std::min(d, b0 - a1);
            else if (b1 < a0)
                d = std::min(d, a0 - b1);
            else
                return 0.0;
        }
    return d;
}

IntervalSet complement(const IntervalSet& a, double lo, double hi) {
    IntervalSet s = a;
    s.normalize();
    IntervalSet out;
    double cur = lo;
    for (const auto& [x0, x1] : s.parts) {
        if (x1 < lo || x0 > hi) continue;
        if (x0 > cur) out.parts.emplace_back(cur, x0);
        cur = std::max(cur, x1);
    }
    if (cur < hi) out.parts.emplace_back(cur, hi);
    return out;
}

IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out = a;
    out.parts.insert(out.parts.end(), b.parts.begin(), b.parts.end());
    out.normalize();
    return out;
}

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    for (const auto& [a0, a1] : a.parts)
        for (const auto& [b0, b1] : b.parts) {
            const double lo = std::max(a0, b0);
            const double hi = std::min(a1, b1);
            if (lo <= hi) out.parts.emplace_back(lo, hi);
        }
    out.normalize();
    return out;
}

}  // namespace boxmodel
