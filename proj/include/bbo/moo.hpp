#pragma once

#include <span>
#include <vector>

namespace bbo::moo {

using Point = std::vector<double>;

/// a <= b componentwise with at least one strict inequality (minimization).
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fast non-dominated sort: fronts of indices, front 0 being the non-dominated set.
/// Indices inside a front are in ascending order.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Point>& points);

/// NSGA-II crowding distance of each point of one front.
std::vector<double> crowding_distance(const std::vector<Point>& front);

/// Dominated hypervolume w.r.t. ref. Points exceeding ref in any component are ignored.
/// m == 2 uses a sweep; m >= 3 uses exact dimension-recursive slicing.
double hypervolume(const std::vector<Point>& points, const Point& ref);

/// Exact slicing algorithm for any m >= 1; exposed so the m == 2 sweep can be cross-checked.
double hypervolume_recursive(const std::vector<Point>& points, const Point& ref);

/// Sweep algorithm for m == 2.
double hypervolume_2d(const std::vector<Point>& points, const Point& ref);

/// Hypervolume gained by adding y to a 2-D front. `sorted_front` must be
/// mutually non-dominated, inside ref, and sorted by ascending first objective.
double hypervolume_improvement_2d(const std::vector<Point>& sorted_front, double y0, double y1,
                                  const Point& ref);

struct HypervolumeDifference {
    double value;
    /// Set when the achieved hypervolume exceeds optimal_hv (the optimum was underestimated).
    bool optimum_underestimated;
};

HypervolumeDifference hypervolume_difference(const std::vector<Point>& points, const Point& ref,
                                             double optimal_hv);

/// Non-dominated subset (duplicates collapse onto the first occurrence), in input order.
std::vector<Point> non_dominated(const std::vector<Point>& points);

} // namespace bbo::moo
