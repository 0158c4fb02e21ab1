#include "bbo/moo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bbo::moo {

namespace {

std::vector<Point> inside_ref(const std::vector<Point>& points, const Point& ref)
{
    std::vector<Point> kept;
    kept.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != ref.size())
            throw std::invalid_argument("hypervolume: point and reference lengths differ");
        bool inside = true;
        for (std::size_t k = 0; k < p.size(); ++k)
            if (!(p[k] <= ref[k])) inside = false;
        if (inside) kept.push_back(p);
    }
    return kept;
}

double sweep_2d(std::vector<Point> pts, const Point& ref)
{
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double floor = ref[1];
    for (const auto& p : pts) {
        if (p[1] < floor) {
            area += (ref[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    return area;
}

// Slices along the last objective; `use_sweep` bottoms out at m == 2.
double slice(std::vector<Point> pts, const Point& ref, bool use_sweep)
{
    const std::size_t m = ref.size();
    if (pts.empty()) return 0.0;
    if (m == 1) {
        double lo = ref[0];
        for (const auto& p : pts) lo = std::min(lo, p[0]);
        return ref[0] - lo;
    }
    if (m == 2 && use_sweep) return sweep_2d(std::move(pts), ref);
    if (m > 2) pts = non_dominated(pts);

    std::sort(pts.begin(), pts.end(),
              [m](const Point& a, const Point& b) { return a[m - 1] < b[m - 1]; });
    Point sub_ref(ref.begin(), ref.end() - 1);
    std::vector<Point> projected;
    projected.reserve(pts.size());
    double volume = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        projected.emplace_back(pts[i].begin(), pts[i].end() - 1);
        double top = i + 1 < pts.size() ? pts[i + 1][m - 1] : ref[m - 1];
        double depth = top - pts[i][m - 1];
        if (depth > 0.0) volume += depth * slice(projected, sub_ref, use_sweep);
    }
    return volume;
}

} // namespace

bool dominates(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("dominates: length mismatch");
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
        if (a[k] < b[k]) strict = true;
    }
    return strict;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Point>& points)
{
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated_by[p].push_back(q);
                ++count[q];
            } else if (dominates(points[q], points[p])) {
                dominated_by[q].push_back(p);
                ++count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p)
        if (count[p] == 0) fronts[0].push_back(p);
    while (true) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts.back())
            for (std::size_t q : dominated_by[p])
                if (--count[q] == 0) next.push_back(q);
        if (next.empty()) break;
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    if (fronts.front().empty()) fronts.clear();
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Point>& front)
{
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    const std::size_t m = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        double range = front[order.back()][k] - front[order.front()][k];
        if (range <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i)
            dist[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
    }
    return dist;
}

double hypervolume(const std::vector<Point>& points, const Point& ref)
{
    auto pts = inside_ref(points, ref);
    if (pts.empty()) return 0.0;
    if (ref.size() == 2) return sweep_2d(std::move(pts), ref);
    return slice(std::move(pts), ref, true);
}

double hypervolume_recursive(const std::vector<Point>& points, const Point& ref)
{
    return slice(inside_ref(points, ref), ref, false);
}

double hypervolume_2d(const std::vector<Point>& points, const Point& ref)
{
    if (ref.size() != 2) throw std::invalid_argument("hypervolume_2d: expected two objectives");
    return sweep_2d(inside_ref(points, ref), ref);
}

double hypervolume_improvement_2d(const std::vector<Point>& sorted_front, double y0, double y1,
                                  const Point& ref)
{
    if (!(y0 < ref[0]) || !(y1 < ref[1])) return 0.0;
    const std::size_t n = sorted_front.size();
    // Last front point whose first objective is <= y0.
    auto it = std::upper_bound(sorted_front.begin(), sorted_front.end(), y0,
                               [](double v, const Point& p) { return v < p[0]; });
    std::size_t i = static_cast<std::size_t>(it - sorted_front.begin());
    double height = i > 0 ? std::min(sorted_front[i - 1][1], ref[1]) : ref[1];
    double t = y0;
    double area = 0.0;
    while (height > y1) {
        double t_next = i < n ? std::min(sorted_front[i][0], ref[0]) : ref[0];
        area += (t_next - t) * (height - y1);
        if (i >= n || t_next >= ref[0]) break;
        t = t_next;
        height = std::min(sorted_front[i][1], ref[1]);
        ++i;
    }
    return area;
}

HypervolumeDifference hypervolume_difference(const std::vector<Point>& points, const Point& ref,
                                             double optimal_hv)
{
    double diff = optimal_hv - hypervolume(points, ref);
    return {diff, diff < 0.0};
}

std::vector<Point> non_dominated(const std::vector<Point>& points)
{
    std::vector<Point> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (i == j) continue;
            if (dominates(points[j], points[i]) || (j < i && points[j] == points[i])) keep = false;
        }
        if (keep) out.push_back(points[i]);
    }
    return out;
}

} // namespace bbo::moo
