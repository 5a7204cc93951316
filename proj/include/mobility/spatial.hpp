#pragma once

// Cell merging, Voronoi tessellation, price attachment and administrative
// labeling. Everything here works on projected (planar, meters) geometry;
// lon/lat only appears at the module edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mobility/error.hpp"
#include "mobility/geo.hpp"
#include "mobility/ingest.hpp"
#include "mobility/keys.hpp"
#include "mobility/parallel.hpp"

namespace mobility {

enum class AdminKind : uint8_t { district, agglomeration_sector, outside };

inline const char* to_string(AdminKind k) {
    switch (k) {
        case AdminKind::district: return "district";
        case AdminKind::agglomeration_sector: return "agglomeration_sector";
        default: return "outside";
    }
}

inline AdminKind parse_admin_kind(std::string_view s) {
    if (s == "district") return AdminKind::district;
    if (s == "agglomeration_sector") return AdminKind::agglomeration_sector;
    if (s == "outside") return AdminKind::outside;
    throw InputError("unknown admin kind: " + std::string(s));
}

struct AdminLabel {
    AdminKind kind = AdminKind::outside;
    int id = 0;  // district 1..23 or sector 1..6; 0 for outside

    std::string key() const {
        if (kind == AdminKind::outside) return "outside";
        return std::string(to_string(kind)) + "_" + std::to_string(id);
    }
};

struct MergedCell {
    std::string merged_id;                     // smallest member cell_id
    std::vector<std::string> member_cell_ids;  // sorted
    LonLat centroid;
    XY centroid_xy;
    Polygon polygon;  // projected meters, set by build_voronoi
    double mean_price_per_m2 = std::numeric_limits<double>::quiet_NaN();
    uint32_t listing_count = 0;
    AdminLabel admin;

    bool has_price() const { return mean_price_per_m2 == mean_price_per_m2; }
};

struct AdminRegion {
    int unit_id = 0;
    AdminKind kind = AdminKind::outside;
    std::string name;
    std::vector<Polygon> rings;  // projected outer rings; holes unsupported
};

/// DBSCAN over projected centroids with min cluster size 1, which reduces to
/// connected components of the eps-radius graph and is therefore independent
/// of input order. Each component becomes one merged cell whose centroid is
/// the activity-weighted mean of member centroids (plain mean if every
/// weight is zero). merged_id = lexicographically smallest member cell_id.
inline std::vector<MergedCell> merge_cells(const std::vector<RawCell>& cells,
                                           const StringMap<uint64_t>& weights,
                                           const Projection& proj, double eps_m = 100.0) {
    if (eps_m <= 0) throw InputError("merge eps must be positive");
    size_t n = cells.size();
    std::vector<XY> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = proj.forward(cells[i].centroid);

    // union-find
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&](size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // eps-sized grid so neighbor checks only touch 3x3 buckets
    struct Key {
        int64_t gx, gy;
        bool operator==(const Key& o) const { return gx == o.gx && gy == o.gy; }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return std::hash<int64_t>()(k.gx * 1000003 + k.gy);
        }
    };
    auto key_of = [&](XY p) {
        return Key{static_cast<int64_t>(std::floor(p.x / eps_m)),
                   static_cast<int64_t>(std::floor(p.y / eps_m))};
    };
    std::unordered_map<Key, std::vector<size_t>, KeyHash> grid;
    for (size_t i = 0; i < n; ++i) grid[key_of(pts[i])].push_back(i);
    double eps2 = eps_m * eps_m;
    for (size_t i = 0; i < n; ++i) {
        Key k = key_of(pts[i]);
        for (int64_t dx = -1; dx <= 1; ++dx)
            for (int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find(Key{k.gx + dx, k.gy + dy});
                if (it == grid.end()) continue;
                for (size_t j : it->second) {
                    if (j <= i) continue;
                    double ddx = pts[i].x - pts[j].x, ddy = pts[i].y - pts[j].y;
                    if (ddx * ddx + ddy * ddy <= eps2) unite(i, j);
                }
            }
    }

    std::unordered_map<size_t, std::vector<size_t>> groups;
    for (size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<MergedCell> merged;
    merged.reserve(groups.size());
    for (auto& [root, members] : groups) {
        MergedCell mc;
        double wsum = 0.0, xsum = 0.0, ysum = 0.0;
        mc.member_cell_ids.reserve(members.size());
        for (size_t i : members) mc.member_cell_ids.push_back(cells[i].cell_id);
        std::sort(mc.member_cell_ids.begin(), mc.member_cell_ids.end());
        mc.merged_id = mc.member_cell_ids.front();
        // weighted mean in a fixed (sorted-member) order for reproducibility
        std::sort(members.begin(), members.end(),
                  [&](size_t a, size_t b) { return cells[a].cell_id < cells[b].cell_id; });
        for (size_t i : members) {
            auto it = weights.find(cells[i].cell_id);
            double w = it == weights.end() ? 0.0 : static_cast<double>(it->second);
            wsum += w;
            xsum += w * pts[i].x;
            ysum += w * pts[i].y;
        }
        if (wsum > 0.0) {
            mc.centroid_xy = {xsum / wsum, ysum / wsum};
        } else {
            xsum = ysum = 0.0;
            for (size_t i : members) {
                xsum += pts[i].x;
                ysum += pts[i].y;
            }
            mc.centroid_xy = {xsum / static_cast<double>(members.size()),
                              ysum / static_cast<double>(members.size())};
        }
        mc.centroid = proj.inverse(mc.centroid_xy);
        merged.push_back(std::move(mc));
    }
    std::sort(merged.begin(), merged.end(),
              [](const MergedCell& a, const MergedCell& b) { return a.merged_id < b.merged_id; });
    return merged;
}

/// Voronoi region of each centroid, clipped to `boundary`. Built by clipping
/// the boundary against perpendicular bisectors, nearest neighbors first;
/// once the next site is more than twice the farthest current vertex away it
/// cannot cut the polygon and the loop stops.
inline void build_voronoi(std::vector<MergedCell>& merged, const Polygon& boundary) {
    if (merged.empty()) throw InputError("voronoi needs at least one cell");
    if (boundary.size() < 3) throw InputError("voronoi boundary polygon needs >= 3 vertices");
    size_t n = merged.size();
    for (size_t i = 0; i < n; ++i) {
        if (!point_in_polygon(merged[i].centroid_xy, boundary))
            throw InputError("merged cell centroid outside voronoi boundary: " + merged[i].merged_id);
        for (size_t j = i + 1; j < n; ++j)
            if (merged[i].centroid_xy.x == merged[j].centroid_xy.x &&
                merged[i].centroid_xy.y == merged[j].centroid_xy.y)
                throw InputError("duplicate merged centroids: " + merged[i].merged_id + " and " +
                                 merged[j].merged_id);
    }

    std::vector<size_t> order(n);
    std::vector<double> dist2(n);
    for (size_t i = 0; i < n; ++i) {
        XY site = merged[i].centroid_xy;
        std::iota(order.begin(), order.end(), size_t{0});
        for (size_t j = 0; j < n; ++j) {
            double dx = merged[j].centroid_xy.x - site.x, dy = merged[j].centroid_xy.y - site.y;
            dist2[j] = dx * dx + dy * dy;
        }
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return dist2[a] < dist2[b]; });

        Polygon poly = boundary;
        double max_r2 = 0.0;
        for (const XY& v : poly) {
            double dx = v.x - site.x, dy = v.y - site.y;
            max_r2 = std::max(max_r2, dx * dx + dy * dy);
        }
        for (size_t oi = 0; oi < n && !poly.empty(); ++oi) {
            size_t j = order[oi];
            if (j == i) continue;
            // bisector of a site at distance d only cuts within d/2 of it
            if (dist2[j] > 4.0 * max_r2) break;
            poly = clip_to_bisector(poly, site, merged[j].centroid_xy);
            max_r2 = 0.0;
            for (const XY& v : poly) {
                double dx = v.x - site.x, dy = v.y - site.y;
                max_r2 = std::max(max_r2, dx * dx + dy * dy);
            }
        }
        if (poly.size() < 3)
            throw InputError("degenerate voronoi polygon for " + merged[i].merged_id);
        merged[i].polygon = std::move(poly);
    }
}

struct PriceAttachReport {
    uint64_t assigned = 0;
    uint64_t unassigned = 0;
};

/// Assigns each listing to the polygon that contains it; listings on shared
/// edges go to the polygon whose merged_id sorts first (the iteration
/// order), so assignment is deterministic.
inline PriceAttachReport attach_prices(std::vector<MergedCell>& merged,
                                       const std::vector<EstateListing>& listings,
                                       const Projection& proj, uint32_t min_listings = 1,
                                       int threads = 1) {
    PriceAttachReport report;
    size_t n = merged.size();
    std::vector<double> sums(n, 0.0);
    std::vector<uint32_t> counts(n, 0);

    // coarse grid over polygon bounding boxes to keep this near-linear
    double cell_size = 1000.0;
    struct Key {
        int64_t gx, gy;
        bool operator==(const Key& o) const { return gx == o.gx && gy == o.gy; }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return std::hash<int64_t>()(k.gx * 1000003 + k.gy);
        }
    };
    std::unordered_map<Key, std::vector<uint32_t>, KeyHash> grid;
    for (size_t i = 0; i < n; ++i) {
        double xmin = 1e18, xmax = -1e18, ymin = 1e18, ymax = -1e18;
        for (const XY& v : merged[i].polygon) {
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            ymin = std::min(ymin, v.y);
            ymax = std::max(ymax, v.y);
        }
        for (int64_t gx = static_cast<int64_t>(std::floor(xmin / cell_size));
             gx <= static_cast<int64_t>(std::floor(xmax / cell_size)); ++gx)
            for (int64_t gy = static_cast<int64_t>(std::floor(ymin / cell_size));
                 gy <= static_cast<int64_t>(std::floor(ymax / cell_size)); ++gy)
                grid[Key{gx, gy}].push_back(static_cast<uint32_t>(i));
    }
    // merged is sorted by merged_id, so sorting candidate indices gives the
    // smallest-merged_id-first tie-break
    for (auto& [k, v] : grid) std::sort(v.begin(), v.end());

    // assignment per listing is independent, so it parallelizes; aggregation
    // stays sequential in listing order to keep sums byte-stable
    std::vector<int64_t> assigned_to(listings.size(), -1);
    parallel_for(listings.size(), threads, [&](size_t li) {
        const EstateListing& l = listings[li];
        if (!proj.bbox().contains(l.location)) return;
        XY p = proj.forward(l.location);
        Key key{static_cast<int64_t>(std::floor(p.x / cell_size)),
                static_cast<int64_t>(std::floor(p.y / cell_size))};
        auto it = grid.find(key);
        if (it == grid.end()) return;
        for (uint32_t i : it->second) {
            if (point_in_polygon(p, merged[i].polygon)) {
                assigned_to[li] = static_cast<int64_t>(i);
                return;
            }
        }
    });
    for (size_t li = 0; li < listings.size(); ++li) {
        int64_t i = assigned_to[li];
        if (i < 0) {
            ++report.unassigned;
            continue;
        }
        sums[static_cast<size_t>(i)] += listings[li].price_per_m2;
        ++counts[static_cast<size_t>(i)];
        ++report.assigned;
    }

    for (size_t i = 0; i < n; ++i) {
        merged[i].listing_count = counts[i];
        merged[i].mean_price_per_m2 = counts[i] >= min_listings && counts[i] > 0
                                          ? sums[i] / counts[i]
                                          : std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

/// Loads a GeoJSON FeatureCollection of admin regions (properties unit_id,
/// kind, name; Polygon or MultiPolygon, outer rings only) and projects the
/// rings for in-plane containment tests.
inline std::vector<AdminRegion> load_admin_regions(const std::string& path, const Projection& proj) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open admin regions file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw InputError("bad GeoJSON in " + path + ": " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw InputError("admin regions must be a GeoJSON FeatureCollection: " + path);

    auto ring_to_polygon = [&](const nlohmann::json& ring) {
        Polygon poly;
        poly.reserve(ring.size());
        for (const auto& coord : ring) {
            LonLat ll{coord.at(0).get<double>(), coord.at(1).get<double>()};
            poly.push_back(proj.forward(ll));
        }
        // GeoJSON rings repeat the first vertex; our polygons are open
        if (poly.size() > 1 && poly.front().x == poly.back().x && poly.front().y == poly.back().y)
            poly.pop_back();
        if (poly.size() < 3) throw InputError("degenerate admin ring in " + path);
        return poly;
    };

    std::vector<AdminRegion> regions;
    for (const auto& feat : doc.at("features")) {
        AdminRegion r;
        const auto& props = feat.at("properties");
        r.unit_id = props.at("unit_id").get<int>();
        std::string kind = props.at("kind").get<std::string>();
        if (kind == "district") r.kind = AdminKind::district;
        else if (kind == "agglomeration_sector") r.kind = AdminKind::agglomeration_sector;
        else if (kind == "outside") r.kind = AdminKind::outside;
        else throw InputError("unknown admin kind '" + kind + "' in " + path);
        r.name = props.value("name", "");
        const auto& geom = feat.at("geometry");
        std::string gtype = geom.value("type", "");
        if (gtype == "Polygon") {
            r.rings.push_back(ring_to_polygon(geom.at("coordinates").at(0)));
        } else if (gtype == "MultiPolygon") {
            for (const auto& polycoords : geom.at("coordinates"))
                r.rings.push_back(ring_to_polygon(polycoords.at(0)));
        } else {
            throw InputError("unsupported admin geometry '" + gtype + "' in " + path);
        }
        regions.push_back(std::move(r));
    }
    return regions;
}

/// Labels each merged cell with the first region (input order) containing
/// its centroid; no region → outside.
inline void assign_admin(std::vector<MergedCell>& merged, const std::vector<AdminRegion>& regions) {
    for (MergedCell& mc : merged) {
        mc.admin = AdminLabel{};
        for (const AdminRegion& r : regions) {
            bool inside = false;
            for (const Polygon& ring : r.rings)
                if (point_in_polygon(mc.centroid_xy, ring)) {
                    inside = true;
                    break;
                }
            if (inside) {
                mc.admin = AdminLabel{r.kind, r.unit_id};
                break;
            }
        }
    }
}

} // namespace mobility
