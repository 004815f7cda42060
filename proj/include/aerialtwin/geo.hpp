#pragma once

// Coordinate frames, distances and geofence containment.
//
// All local coordinates are east/north/up meters relative to a geodetic
// origin, using an equirectangular projection (constant meters-per-degree
// evaluated at the origin latitude). The operating areas this models span
// well under 20 km, where the projection error is negligible.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace aerialtwin::geo {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
// 111194.9267... m per degree of latitude on the sphere above.
inline constexpr double kMetersPerDegree = kEarthRadiusM * kDegToRad;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;

  bool valid() const {
    return std::isfinite(lat_deg) && std::isfinite(lon_deg) && std::isfinite(alt_m) &&
           lat_deg >= -90.0 && lat_deg <= 90.0 && lon_deg >= -180.0 && lon_deg <= 180.0;
  }
};

struct EnuVector {
  double east = 0.0;
  double north = 0.0;
  double up = 0.0;

  EnuVector operator+(const EnuVector& o) const { return {east + o.east, north + o.north, up + o.up}; }
  EnuVector operator-(const EnuVector& o) const { return {east - o.east, north - o.north, up - o.up}; }
  EnuVector operator*(double s) const { return {east * s, north * s, up * s}; }

  double norm() const { return std::sqrt(east * east + north * north + up * up); }
  double horizontal_norm() const { return std::hypot(east, north); }

  bool finite() const { return std::isfinite(east) && std::isfinite(north) && std::isfinite(up); }
};

inline EnuVector geodetic_to_enu(const GeoPoint& origin, const GeoPoint& p) {
  const double m_per_deg_lon = kMetersPerDegree * std::cos(origin.lat_deg * kDegToRad);
  return {(p.lon_deg - origin.lon_deg) * m_per_deg_lon,
          (p.lat_deg - origin.lat_deg) * kMetersPerDegree,
          p.alt_m - origin.alt_m};
}

inline GeoPoint enu_to_geodetic(const GeoPoint& origin, const EnuVector& v) {
  const double m_per_deg_lon = kMetersPerDegree * std::cos(origin.lat_deg * kDegToRad);
  return {origin.lat_deg + v.north / kMetersPerDegree,
          origin.lon_deg + v.east / m_per_deg_lon,
          origin.alt_m + v.up};
}

inline double distance_3d(const EnuVector& a, const EnuVector& b) {
  return (a - b).norm();
}

namespace detail {

struct Point2 {
  double x = 0.0;  // east
  double y = 0.0;  // north
};

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  const double c = cross(a, b, p);
  const double seg_len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
  if (c * c > 1e-18 * std::max(seg_len2, 1.0)) {
    return false;
  }
  const double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
  return dot >= 0.0 && dot <= seg_len2;
}

// Even-odd ray casting; points on an edge or vertex count as inside.
inline bool point_in_polygon(const std::vector<Point2>& poly, const Point2& p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(poly[j], poly[i], p)) {
      return true;
    }
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (poly[i].y > p.y) != (poly[j].y > p.y);
    if (straddles) {
      const double x_hit =
          poly[j].x + (p.y - poly[j].y) / (poly[i].y - poly[j].y) * (poly[i].x - poly[j].x);
      if (p.x < x_hit) {
        inside = !inside;
      }
    }
  }
  return inside;
}

inline double polygon_area(const std::vector<Point2>& poly) {
  double twice_area = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    twice_area += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  }
  return std::abs(twice_area) / 2.0;
}

inline bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline bool polygon_is_simple(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip edges sharing a vertex.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) {
        continue;
      }
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

// Geofence projected into the local ENU frame; this is the form the
// per-tick supervisor checks use.
class LocalFence {
 public:
  LocalFence(std::vector<detail::Point2> boundary, double alt_min, double alt_max)
      : boundary_(std::move(boundary)), alt_min_(alt_min), alt_max_(alt_max) {
    if (boundary_.size() < 3) {
      throw std::invalid_argument("geofence boundary needs at least 3 vertices");
    }
    if (!(alt_min_ < alt_max_)) {
      throw std::invalid_argument("geofence requires alt_min < alt_max");
    }
    if (detail::polygon_area(boundary_) <= 0.0) {
      throw std::invalid_argument("geofence polygon is degenerate (zero area)");
    }
    if (!detail::polygon_is_simple(boundary_)) {
      throw std::invalid_argument("geofence polygon is self-intersecting");
    }
  }

  bool contains(const EnuVector& p) const {
    if (p.up < alt_min_ || p.up > alt_max_) {
      return false;
    }
    return detail::point_in_polygon(boundary_, {p.east, p.north});
  }

  double alt_min() const { return alt_min_; }
  double alt_max() const { return alt_max_; }
  const std::vector<detail::Point2>& boundary() const { return boundary_; }

 private:
  std::vector<detail::Point2> boundary_;
  double alt_min_;
  double alt_max_;
};

struct Geofence {
  std::vector<GeoPoint> boundary;  // 2-D polygon, altitude component ignored
  double alt_min = 0.0;
  double alt_max = 0.0;

  LocalFence to_local(const GeoPoint& origin) const {
    std::vector<detail::Point2> pts;
    pts.reserve(boundary.size());
    for (const auto& gp : boundary) {
      const EnuVector v = geodetic_to_enu(origin, gp);
      pts.push_back({v.east, v.north});
    }
    return LocalFence(std::move(pts), alt_min, alt_max);
  }
};

// Geodetic containment check. The first boundary vertex anchors the local
// projection; any origin within the operating area gives the same answer.
inline bool contains(const Geofence& fence, const GeoPoint& p) {
  if (fence.boundary.empty()) {
    throw std::invalid_argument("geofence boundary is empty");
  }
  GeoPoint origin = fence.boundary.front();
  origin.alt_m = 0.0;
  const LocalFence local = fence.to_local(origin);
  return local.contains(geodetic_to_enu(origin, p));
}

}  // namespace aerialtwin::geo
