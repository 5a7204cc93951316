#pragma once

// Planar geometry for city-scale work: a local azimuthal-equidistant
// projection about a configured center, plus the polygon primitives used by
// the Voronoi and region-assignment code. All projected coordinates are in
// meters; distances reported to callers are in km.

#include <cmath>
#include <string>
#include <vector>

#include "mobility/error.hpp"

namespace mobility {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

struct XY {
    double x = 0.0;
    double y = 0.0;
};

struct BoundingBox {
    double lon_min = -180.0, lon_max = 180.0;
    double lat_min = -90.0, lat_max = 90.0;

    bool contains(LonLat p) const {
        return p.lon >= lon_min && p.lon <= lon_max && p.lat >= lat_min && p.lat <= lat_max;
    }
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Azimuthal equidistant projection on a spherical earth, centered on the
/// study area. Radial distances from the center are exact; chord distances
/// between points within ~50 km of the center are accurate to well under
/// 0.5%.
class Projection {
public:
    Projection() = default;
    Projection(LonLat center, BoundingBox bbox) : center_(center), bbox_(bbox) {
        sin_lat0_ = std::sin(deg2rad(center.lat));
        cos_lat0_ = std::cos(deg2rad(center.lat));
    }

    LonLat center() const { return center_; }
    const BoundingBox& bbox() const { return bbox_; }

    XY forward(LonLat p) const {
        if (!bbox_.contains(p))
            throw InputError("coordinate outside configured bounding box: lon=" +
                             std::to_string(p.lon) + " lat=" + std::to_string(p.lat));
        double lat = deg2rad(p.lat);
        double dlon = deg2rad(p.lon - center_.lon);
        double sin_lat = std::sin(lat), cos_lat = std::cos(lat);
        double cos_c = sin_lat0_ * sin_lat + cos_lat0_ * cos_lat * std::cos(dlon);
        cos_c = std::fmin(1.0, std::fmax(-1.0, cos_c));
        double c = std::acos(cos_c);
        double k = c < 1e-12 ? 1.0 : c / std::sin(c);
        return {kEarthRadiusM * k * cos_lat * std::sin(dlon),
                kEarthRadiusM * k * (cos_lat0_ * sin_lat - sin_lat0_ * cos_lat * std::cos(dlon))};
    }

    LonLat inverse(XY p) const {
        double rho = std::hypot(p.x, p.y);
        if (rho < 1e-9) return center_;
        double c = rho / kEarthRadiusM;
        double sin_c = std::sin(c), cos_c = std::cos(c);
        double lat = std::asin(cos_c * sin_lat0_ + p.y * sin_c * cos_lat0_ / rho);
        double lon = deg2rad(center_.lon) +
                     std::atan2(p.x * sin_c, rho * cos_c * cos_lat0_ - p.y * sin_c * sin_lat0_);
        return {rad2deg(lon), rad2deg(lat)};
    }

    /// Euclidean distance of the projected points, in km.
    double distance_km(LonLat a, LonLat b) const {
        XY pa = forward(a), pb = forward(b);
        return std::hypot(pa.x - pb.x, pa.y - pb.y) / 1000.0;
    }

private:
    LonLat center_;
    BoundingBox bbox_;
    double sin_lat0_ = 0.0, cos_lat0_ = 1.0;
};

inline double distance_m(XY a, XY b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Polygon = std::vector<XY>;  // open ring, counter-clockwise or clockwise

inline double polygon_area(const Polygon& poly) {
    double s = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const XY& a = poly[i];
        const XY& b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::fabs(s) * 0.5;
}

/// Ray-casting containment, tolerant at the boundary: points within `eps`
/// of an edge count as inside. Assignment loops rely on this being
/// boundary-inclusive so they can take the first match deterministically.
inline bool point_in_polygon(XY p, const Polygon& poly, double eps = 1e-9) {
    size_t n = poly.size();
    if (n < 3) return false;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        XY a = poly[j], b = poly[i];
        // on-edge check
        double dx = b.x - a.x, dy = b.y - a.y;
        double len2 = dx * dx + dy * dy;
        if (len2 > 0) {
            double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
            if (t >= 0 && t <= 1) {
                double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
                if (ex * ex + ey * ey <= eps * eps) return true;
            }
        }
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_int = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_int) inside = !inside;
        }
    }
    return inside;
}

/// Clips `poly` to the half-plane of points at least as close to `site` as
/// to `other` (the Voronoi dominance region). Sutherland-Hodgman with the
/// perpendicular bisector as the clipping line.
inline Polygon clip_to_bisector(const Polygon& poly, XY site, XY other) {
    // half-plane: dot(p - mid, d) <= 0 where d = other - site
    double dx = other.x - site.x, dy = other.y - site.y;
    double mx = (site.x + other.x) * 0.5, my = (site.y + other.y) * 0.5;
    auto side = [&](XY p) { return (p.x - mx) * dx + (p.y - my) * dy; };

    Polygon out;
    size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 4);
    for (size_t i = 0; i < n; ++i) {
        XY cur = poly[i];
        XY nxt = poly[(i + 1) % n];
        double sc = side(cur), sn = side(nxt);
        if (sc <= 0) out.push_back(cur);
        if ((sc < 0 && sn > 0) || (sc > 0 && sn < 0)) {
            double t = sc / (sc - sn);
            out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
        }
    }
    return out;
}

inline Polygon make_circle_polygon(XY center, double radius_m, int vertices = 96) {
    Polygon poly;
    poly.reserve(static_cast<size_t>(vertices));
    for (int i = 0; i < vertices; ++i) {
        double a = 2.0 * kPi * i / vertices;
        poly.push_back({center.x + radius_m * std::cos(a), center.y + radius_m * std::sin(a)});
    }
    return poly;
}

/// WKT POLYGON with vertices converted back to lon/lat for mapping tools.
/// The ring is closed by repeating the first vertex.
inline std::string polygon_wkt_lonlat(const Polygon& poly, const Projection& proj) {
    std::string s = "POLYGON((";
    char tmp[64];
    for (size_t i = 0; i <= poly.size(); ++i) {
        LonLat ll = proj.inverse(poly[i % poly.size()]);
        int len = std::snprintf(tmp, sizeof(tmp), "%.6f %.6f", ll.lon, ll.lat);
        if (i) s += ',';
        s.append(tmp, static_cast<size_t>(len));
    }
    s += "))";
    return s;
}

} // namespace mobility
