#pragma once

#include <utility>
#include <vector>

namespace boxmodel {

/// Finite union of closed intervals, kept sorted and disjoint.
struct IntervalSet {
    std::vector<std::pair<double, double>> parts;

    bool empty() const { return parts.empty(); }
    bool contains(double x) const {
        for (const auto& [a, b] : parts)
            if (x >= a && x <= b) return true;
        return false;
    }
    double lower() const { return parts.front().first; }
    double upper() const { return parts.back().second; }
    double length() const {
        double s = 0.0;
        for (const auto& [a, b] : parts) s += b - a;
        return s;
    }
    /// Sorts and merges overlapping or touching parts.
    void normalize();
};

/// Smallest distance between a point of A and a point of B (0 if they meet).
double distance(const IntervalSet& a, const IntervalSet& b);

/// Complement of A within [lo, hi].
IntervalSet complement(const IntervalSet& a, double lo, double hi);

IntervalSet unite(const IntervalSet& a, const IntervalSet& b);

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b);

}  // namespace boxmodel
