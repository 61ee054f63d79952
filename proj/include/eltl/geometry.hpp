/**
 * Planar geometry primitives and stroke resampling.
 *
 * Coordinates are map-image pixels.
 */
#pragma once

#include "eltl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace eltl
{
  struct Point
  {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point &, const Point &) = default;
  };

  /// Closed segment from a to b; a == b is a single point.
  struct Segment
  {
    Point a;
    Point b;
  };

  struct SamplingParams
  {
    double d_m = 20.0;     ///< emission distance, px
    double theta_m = 20.0; ///< cumulative heading change, degrees
  };

  inline double distance(const Point &p, const Point &q)
  {
    return std::hypot(p.x - q.x, p.y - q.y);
  }

  inline bool is_finite(const Point &p)
  {
    return std::isfinite(p.x) && std::isfinite(p.y);
  }

  /// Euclidean distance from p to the closest point of the closed segment s.
  inline double point_segment_distance(const Point &p, const Segment &s)
  {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0)
      return distance(p, s.a);
    double t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, Point{s.a.x + t * dx, s.a.y + t * dy});
  }

  namespace detail
  {
    // Signed turn in degrees from heading (a->b) to heading (b->c), in (-180, 180].
    inline double turn_degrees(const Point &a, const Point &b, const Point &c)
    {
      const double h1 = std::atan2(b.y - a.y, b.x - a.x);
      const double h2 = std::atan2(c.y - b.y, c.x - b.x);
      double d = h2 - h1;
      while (d > std::numbers::pi)
        d -= 2.0 * std::numbers::pi;
      while (d <= -std::numbers::pi)
        d += 2.0 * std::numbers::pi;
      return d * 180.0 / std::numbers::pi;
    }
  }

  /**
   * Resample a raw stroke by distance and heading change.
   *
   * The first and last raw points are always kept. An interior raw point is
   * emitted once the arc length since the last emitted point reaches d_m, or
   * once the net heading change since the last emission (signed turns summed
   * over the vertices passed) reaches theta_m in magnitude. Both accumulators reset on emission.
   * Consecutive duplicate raw points are ignored.
   */
  inline std::vector<Point> sample_stroke(std::span<const Point> raw,
                                          const SamplingParams &params = {})
  {
    if (raw.empty())
      throw Error(ErrorCode::invalid_input, "empty stroke");
    if (!(params.d_m > 0.0) || !(params.theta_m > 0.0) || params.theta_m >= 180.0)
      throw Error(ErrorCode::invalid_input, "sampling parameters out of range");

    std::vector<Point> pts;
    pts.reserve(raw.size());
    for (const Point &p : raw)
    {
      if (!is_finite(p))
        throw Error(ErrorCode::invalid_input, "non-finite stroke point");
      if (pts.empty() || !(pts.back() == p))
        pts.push_back(p);
    }

    std::vector<Point> out{pts.front()};
    if (pts.size() == 1)
      return out;

    double arc = 0.0;
    double turn = 0.0;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i)
    {
      arc += distance(pts[i - 1], pts[i]);
      turn += detail::turn_degrees(pts[i - 1], pts[i], pts[i + 1]);
      if (arc >= params.d_m || std::abs(turn) >= params.theta_m)
      {
        out.push_back(pts[i]);
        arc = 0.0;
        turn = 0.0;
      }
    }
    out.push_back(pts.back());
    return out;
  }
}
