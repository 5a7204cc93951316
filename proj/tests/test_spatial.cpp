#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/geo.hpp"
#include "mobility/spatial.hpp"
#include "test_util.hpp"

using namespace mobility;

namespace {

const BoundingBox kBox{18.4, 19.7, 47.0, 48.0};
const LonLat kCenter{19.05, 47.4979};

Projection proj() { return Projection(kCenter, kBox); }

// place a cell at planar offset (x, y) meters from the center
RawCell cell_at(const Projection& p, std::string id, double x, double y) {
    RawCell c;
    c.cell_id = std::move(id);
    c.centroid = p.inverse(XY{x, y});
    c.base_station = c.centroid;
    c.area_m2 = 1000.0;
    return c;
}

StringMap<uint64_t> weights(std::initializer_list<std::pair<const char*, uint64_t>> kv) {
    StringMap<uint64_t> w;
    for (const auto& [k, v] : kv) w[std::string(k)] = v;
    return w;
}

EstateListing listing_at(const Projection& p, std::string id, double x, double y,
                         double price_per_m2) {
    EstateListing l;
    l.listing_id = std::move(id);
    l.location = p.inverse(XY{x, y});
    l.floor_m2 = 50.0;
    l.total_price = price_per_m2 * l.floor_m2;
    l.price_per_m2 = price_per_m2;
    return l;
}

Polygon square(double half) {
    return Polygon{{-half, -half}, {half, -half}, {half, half}, {-half, half}};
}

} // namespace

TEST(MergeCells, FiftyMetersApartMergesToOne) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0), cell_at(p, "b", 50, 0)};
    auto merged = merge_cells(cells, {}, p);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].merged_id, "a");
    EXPECT_EQ(merged[0].member_cell_ids, (std::vector<std::string>{"a", "b"}));
}

TEST(MergeCells, HundredFiftyMetersApartStaySeparate) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0), cell_at(p, "b", 150, 0)};
    auto merged = merge_cells(cells, {}, p);
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_EQ(merged[0].merged_id, "a");
    EXPECT_EQ(merged[1].merged_id, "b");
}

TEST(MergeCells, WeightedCentroid) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0), cell_at(p, "b", 90, 0)};
    auto merged = merge_cells(cells, weights({{"a", 3}, {"b", 1}}), p);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_NEAR(merged[0].centroid_xy.x, 22.5, 1e-6);
    EXPECT_NEAR(merged[0].centroid_xy.y, 0.0, 1e-6);
}

TEST(MergeCells, ZeroWeightsFallBackToPlainMean) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0), cell_at(p, "b", 90, 0)};
    auto merged = merge_cells(cells, {}, p);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_NEAR(merged[0].centroid_xy.x, 45.0, 1e-6);
}

TEST(MergeCells, ChainsThroughIntermediates) {
    // a-b and b-c are within eps; a-c is not, but density connectivity joins all three
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0), cell_at(p, "b", 90, 0),
                               cell_at(p, "c", 180, 0)};
    auto merged = merge_cells(cells, {}, p);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].member_cell_ids.size(), 3u);
}

TEST(MergeCells, PermutationInvariantBitExact) {
    Projection p = proj();
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> coord(-2000.0, 2000.0);
    std::vector<RawCell> cells;
    StringMap<uint64_t> w;
    for (int i = 0; i < 120; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "c%03d", i);
        cells.push_back(cell_at(p, id, coord(rng), coord(rng)));
        w[id] = rng() % 500;
    }
    auto base = merge_cells(cells, w, p, 120.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(cells.begin(), cells.end(), rng);
        auto again = merge_cells(cells, w, p, 120.0);
        ASSERT_EQ(again.size(), base.size());
        for (size_t i = 0; i < base.size(); ++i) {
            EXPECT_EQ(again[i].merged_id, base[i].merged_id);
            EXPECT_EQ(again[i].member_cell_ids, base[i].member_cell_ids);
            EXPECT_EQ(again[i].centroid_xy.x, base[i].centroid_xy.x);
            EXPECT_EQ(again[i].centroid_xy.y, base[i].centroid_xy.y);
        }
    }
}

TEST(MergeCells, ClusterCountMonotoneInEps) {
    Projection p = proj();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coord(-1500.0, 1500.0);
    std::vector<RawCell> cells;
    for (int i = 0; i < 150; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "c%03d", i);
        cells.push_back(cell_at(p, id, coord(rng), coord(rng)));
    }
    size_t prev = SIZE_MAX;
    for (double eps : {40.0, 80.0, 160.0, 320.0, 640.0}) {
        size_t count = merge_cells(cells, {}, p, eps).size();
        EXPECT_LE(count, prev) << "eps=" << eps;
        prev = count;
    }
}

TEST(MergeCells, EmptyInputAndBadEps) {
    Projection p = proj();
    EXPECT_TRUE(merge_cells({}, {}, p).empty());
    std::vector<RawCell> cells{cell_at(p, "a", 0, 0)};
    EXPECT_THROW(merge_cells(cells, {}, p, 0.0), InputError);
    EXPECT_THROW(merge_cells(cells, {}, p, -5.0), InputError);
}

TEST(Voronoi, SingleSiteKeepsBoundary) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", 10, 10)};
    auto merged = merge_cells(cells, {}, p);
    Polygon boundary = square(5000.0);
    build_voronoi(merged, boundary);
    ASSERT_EQ(merged[0].polygon.size(), boundary.size());
    EXPECT_DOUBLE_EQ(polygon_area(merged[0].polygon), polygon_area(boundary));
}

TEST(Voronoi, TwoSitesSplitSquareInHalf) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", -400, 0), cell_at(p, "b", 400, 0)};
    auto merged = merge_cells(cells, {}, p);
    Polygon boundary = square(1000.0);
    build_voronoi(merged, boundary);
    double total = polygon_area(boundary);
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_NEAR(polygon_area(merged[0].polygon), total / 2, total * 1e-9);
    EXPECT_NEAR(polygon_area(merged[1].polygon), total / 2, total * 1e-9);
    for (const auto& mc : merged) EXPECT_TRUE(point_in_polygon(mc.centroid_xy, mc.polygon));
}

TEST(Voronoi, NearestSiteOracleAndAreaSum) {
    Projection p = proj();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coord(-4000.0, 4000.0);
    std::vector<RawCell> cells;
    for (int i = 0; i < 30; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "s%02d", i);
        cells.push_back(cell_at(p, id, coord(rng), coord(rng)));
    }
    auto merged = merge_cells(cells, {}, p);
    Polygon boundary = make_circle_polygon(XY{0, 0}, 6000.0);
    build_voronoi(merged, boundary);

    double area_sum = 0.0;
    for (const auto& mc : merged) {
        EXPECT_TRUE(point_in_polygon(mc.centroid_xy, mc.polygon)) << mc.merged_id;
        area_sum += polygon_area(mc.polygon);
    }
    double boundary_area = polygon_area(boundary);
    EXPECT_NEAR(area_sum, boundary_area, boundary_area * 1e-3);

    std::uniform_real_distribution<double> sample(-6000.0, 6000.0);
    int checked = 0, agree = 0;
    while (checked < 20000) {
        XY pt{sample(rng), sample(rng)};
        if (!point_in_polygon(pt, boundary)) continue;
        size_t nearest = 0;
        double best = 1e30, second = 1e30;
        for (size_t i = 0; i < merged.size(); ++i) {
            double dx = pt.x - merged[i].centroid_xy.x, dy = pt.y - merged[i].centroid_xy.y;
            double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                second = best;
                best = d2;
                nearest = i;
            } else if (d2 < second) {
                second = d2;
            }
        }
        if (std::sqrt(second) - std::sqrt(best) < 1e-6) continue;  // tie: oracle undefined
        ++checked;
        if (point_in_polygon(pt, merged[nearest].polygon)) ++agree;
    }
    EXPECT_GE(static_cast<double>(agree) / checked, 0.999);
}

TEST(Voronoi, InvalidInputsThrow) {
    Projection p = proj();
    Polygon boundary = square(1000.0);

    std::vector<MergedCell> none;
    EXPECT_THROW(build_voronoi(none, boundary), InputError);

    std::vector<RawCell> cells{cell_at(p, "a", 0, 0)};
    auto merged = merge_cells(cells, {}, p);
    EXPECT_THROW(build_voronoi(merged, Polygon{{0, 0}, {1, 0}}), InputError);

    auto outside = merged;
    outside[0].centroid_xy = XY{5000.0, 0.0};
    EXPECT_THROW(build_voronoi(outside, boundary), InputError);

    auto dup = merged;
    dup.push_back(dup[0]);
    dup[1].merged_id = "b";
    EXPECT_THROW(build_voronoi(dup, boundary), InputError);
}

TEST(AttachPrices, MeanPerPolygon) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", -400, 0), cell_at(p, "b", 400, 0)};
    auto merged = merge_cells(cells, {}, p);
    build_voronoi(merged, square(1000.0));

    std::vector<EstateListing> ls{listing_at(p, "l1", -500, 100, 800e3),
                                  listing_at(p, "l2", -300, -200, 1.0e6),
                                  listing_at(p, "l3", 500, 0, 250e3)};
    auto rep = attach_prices(merged, ls, p);
    EXPECT_EQ(rep.assigned, 3u);
    EXPECT_EQ(rep.unassigned, 0u);
    EXPECT_EQ(merged[0].listing_count, 2u);
    EXPECT_NEAR(merged[0].mean_price_per_m2, 900e3, 1e-6);
    EXPECT_EQ(merged[1].listing_count, 1u);
    EXPECT_NEAR(merged[1].mean_price_per_m2, 250e3, 1e-6);
}

TEST(AttachPrices, MinListingsGate) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", -400, 0), cell_at(p, "b", 400, 0)};
    auto merged = merge_cells(cells, {}, p);
    build_voronoi(merged, square(1000.0));

    std::vector<EstateListing> ls{listing_at(p, "l1", -500, 0, 800e3)};
    attach_prices(merged, ls, p, /*min_listings=*/2);
    EXPECT_EQ(merged[0].listing_count, 1u);
    EXPECT_FALSE(merged[0].has_price());
    EXPECT_EQ(merged[1].listing_count, 0u);
    EXPECT_FALSE(merged[1].has_price());
}

TEST(AttachPrices, ConservationWithStrays) {
    Projection p = proj();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coord(-900.0, 900.0);
    std::vector<RawCell> cells{cell_at(p, "a", -400, 0), cell_at(p, "b", 400, 0),
                               cell_at(p, "c", 0, 400)};
    auto merged = merge_cells(cells, {}, p);
    build_voronoi(merged, square(1000.0));

    std::vector<EstateListing> ls;
    for (int i = 0; i < 200; ++i)
        ls.push_back(listing_at(p, "in" + std::to_string(i), coord(rng), coord(rng), 500e3));
    ls.push_back(listing_at(p, "far", 250000.0, 0, 500e3));  // inside bbox, outside boundary
    EstateListing off;  // outside the projection bounding box entirely
    off.listing_id = "off";
    off.location = LonLat{0.0, 0.0};
    off.price_per_m2 = 500e3;
    ls.push_back(off);

    for (int threads : {1, 4}) {
        auto fresh = merged;
        auto rep = attach_prices(fresh, ls, p, 1, threads);
        EXPECT_EQ(rep.assigned + rep.unassigned, ls.size());
        EXPECT_EQ(rep.assigned, 200u);
        uint64_t count_sum = 0;
        for (const auto& mc : fresh) count_sum += mc.listing_count;
        EXPECT_EQ(count_sum, rep.assigned);
    }
}

TEST(AttachPrices, SharedEdgeGoesToSmallestMergedId) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", -100, 0), cell_at(p, "b", 100, 0)};
    auto merged = merge_cells(cells, {}, p, 50.0);
    build_voronoi(merged, square(1000.0));

    // exactly on the bisector x=0 shared by both polygons
    std::vector<EstateListing> ls{listing_at(p, "edge", 0, 50, 700e3)};
    auto rep = attach_prices(merged, ls, p);
    EXPECT_EQ(rep.assigned, 1u);
    EXPECT_EQ(merged[0].merged_id, "a");
    EXPECT_EQ(merged[0].listing_count, 1u);
    EXPECT_EQ(merged[1].listing_count, 0u);
}

TEST(AdminRegions, GeoJsonParseAndAssign) {
    Projection p = proj();
    testutil::TempDir dir;

    auto lonlat = [&](double x, double y) {
        LonLat ll = p.inverse(XY{x, y});
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%.10f,%.10f]", ll.lon, ll.lat);
        return std::string(buf);
    };
    auto ring = [&](double x0, double y0, double x1, double y1) {
        return "[" + lonlat(x0, y0) + "," + lonlat(x1, y0) + "," + lonlat(x1, y1) + "," +
               lonlat(x0, y1) + "," + lonlat(x0, y0) + "]";
    };
    std::string doc = R"({"type":"FeatureCollection","features":[)";
    doc += R"({"type":"Feature","properties":{"unit_id":5,"kind":"district","name":"V"},)";
    doc += R"("geometry":{"type":"Polygon","coordinates":[)" + ring(-1000, -1000, 1000, 1000) + "]}},";
    doc += R"({"type":"Feature","properties":{"unit_id":3,"kind":"agglomeration_sector"},)";
    doc += R"("geometry":{"type":"MultiPolygon","coordinates":[[)" + ring(2000, -1000, 4000, 1000) +
           "],[" + ring(-4000, -1000, -2000, 1000) + "]]}}]}";
    std::string path = dir.file("admin.geojson");
    testutil::write_file(path, doc);

    auto regions = load_admin_regions(path, p);
    ASSERT_EQ(regions.size(), 2u);
    EXPECT_EQ(regions[0].unit_id, 5);
    EXPECT_EQ(regions[0].kind, AdminKind::district);
    EXPECT_EQ(regions[0].name, "V");
    ASSERT_EQ(regions[0].rings.size(), 1u);
    EXPECT_EQ(regions[0].rings[0].size(), 4u);  // closing vertex dropped
    EXPECT_EQ(regions[1].rings.size(), 2u);
    EXPECT_EQ(regions[1].name, "");

    std::vector<RawCell> cells{cell_at(p, "in5", 0, 0), cell_at(p, "insec", -3000, 0),
                               cell_at(p, "nowhere", 0, 8000)};
    auto merged = merge_cells(cells, {}, p);
    assign_admin(merged, regions);
    ASSERT_EQ(merged.size(), 3u);
    EXPECT_EQ(merged[0].admin.key(), "district_5");    // in5
    EXPECT_EQ(merged[1].admin.key(), "agglomeration_sector_3");  // insec
    EXPECT_EQ(merged[2].admin.key(), "outside");       // nowhere
}

TEST(AdminRegions, FirstMatchingRegionWins) {
    Projection p = proj();
    testutil::TempDir dir;
    auto lonlat = [&](double x, double y) {
        LonLat ll = p.inverse(XY{x, y});
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%.10f,%.10f]", ll.lon, ll.lat);
        return std::string(buf);
    };
    auto ring = [&](double h) {
        return "[" + lonlat(-h, -h) + "," + lonlat(h, -h) + "," + lonlat(h, h) + "," +
               lonlat(-h, h) + "," + lonlat(-h, -h) + "]";
    };
    // overlapping squares: district 1 listed before district 2
    std::string doc = R"({"type":"FeatureCollection","features":[)";
    doc += R"({"type":"Feature","properties":{"unit_id":1,"kind":"district"},)";
    doc += R"("geometry":{"type":"Polygon","coordinates":[)" + ring(500) + "]}},";
    doc += R"({"type":"Feature","properties":{"unit_id":2,"kind":"district"},)";
    doc += R"("geometry":{"type":"Polygon","coordinates":[)" + ring(2000) + "]}}]}";
    std::string path = dir.file("overlap.geojson");
    testutil::write_file(path, doc);
    auto regions = load_admin_regions(path, p);

    std::vector<RawCell> cells{cell_at(p, "x", 0, 0)};
    auto merged = merge_cells(cells, {}, p);
    assign_admin(merged, regions);
    EXPECT_EQ(merged[0].admin.key(), "district_1");
}

TEST(AdminRegions, MalformedInputsThrow) {
    Projection p = proj();
    testutil::TempDir dir;
    auto expect_throw = [&](const char* name, const std::string& body) {
        std::string path = dir.file(name);
        testutil::write_file(path, body);
        EXPECT_THROW(load_admin_regions(path, p), InputError) << name;
    };
    EXPECT_THROW(load_admin_regions(dir.file("missing.geojson"), p), InputError);
    expect_throw("notjson.geojson", "{nope");
    expect_throw("wrongtype.geojson", R"({"type":"Feature","features":[]})");
    expect_throw("badkind.geojson",
                 R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
                 R"("properties":{"unit_id":1,"kind":"province"},)"
                 R"("geometry":{"type":"Polygon","coordinates":[[[19.05,47.5],[19.06,47.5],[19.06,47.51],[19.05,47.5]]]}}]})");
    expect_throw("badgeom.geojson",
                 R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
                 R"("properties":{"unit_id":1,"kind":"district"},)"
                 R"("geometry":{"type":"Point","coordinates":[19.05,47.5]}}]})");
    expect_throw("tinyring.geojson",
                 R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
                 R"("properties":{"unit_id":1,"kind":"district"},)"
                 R"("geometry":{"type":"Polygon","coordinates":[[[19.05,47.5],[19.06,47.5],[19.05,47.5]]]}}]})");
}

TEST(AdminKindNames, RoundTripAndUnknown) {
    for (AdminKind k :
         {AdminKind::district, AdminKind::agglomeration_sector, AdminKind::outside})
        EXPECT_EQ(parse_admin_kind(to_string(k)), k);
    EXPECT_THROW(parse_admin_kind("county"), InputError);
}

TEST(WktOutput, SurvivesCsvQuoting) {
    Projection p = proj();
    std::vector<RawCell> cells{cell_at(p, "a", -400, 0), cell_at(p, "b", 400, 0)};
    auto merged = merge_cells(cells, {}, p);
    build_voronoi(merged, square(1000.0));
    std::string wkt = polygon_wkt_lonlat(merged[0].polygon, p);
    EXPECT_EQ(wkt.rfind("POLYGON((", 0), 0u);
    EXPECT_NE(wkt.find(','), std::string::npos);

    testutil::TempDir dir;
    std::string path = dir.file("row.csv");
    {
        CsvWriter w(path);
        w.row({"merged_id", "polygon_wkt"});
        w.field(merged[0].merged_id);
        w.field_quoted(wkt);
        w.end_row();
    }
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    CsvReader::read(
        path, [&](const auto& h) { header.assign(h.begin(), h.end()); },
        [&](const auto& f) { rows.emplace_back(f.begin(), f.end()); });
    ASSERT_EQ(header.size(), 2u);
    ASSERT_EQ(rows.size(), 1u);
    ASSERT_EQ(rows[0].size(), 2u);
    EXPECT_EQ(rows[0][0], "a");
    EXPECT_EQ(rows[0][1], wkt);
}
