#pragma once

// Pipeline stages over a shared run directory. Every stage reads either raw
// input files or artifacts written by an earlier stage, writes its own
// artifacts under outdir, and returns a key-value run report. Stages can be
// invoked individually and resume from whatever the previous stage left on
// disk; a missing prerequisite artifact is an input error that names the
// stage to run first.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mobility/activity.hpp"
#include "mobility/anchors.hpp"
#include "mobility/calendar.hpp"
#include "mobility/config.hpp"
#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/indicators.hpp"
#include "mobility/ingest.hpp"
#include "mobility/keys.hpp"
#include "mobility/parallel.hpp"
#include "mobility/pca.hpp"
#include "mobility/ses.hpp"
#include "mobility/spatial.hpp"

namespace mobility {

using KvReport = std::vector<std::pair<std::string, std::string>>;

namespace pipe {

inline std::string artifact(const RunConfig& cfg, const char* name) {
    return cfg.outdir + "/" + name;
}

inline void require_artifact(const std::string& path, const char* producer) {
    if (!std::filesystem::exists(path))
        throw InputError(path + " not found; run the '" + producer + "' stage first");
}

inline void kv(KvReport& r, std::string key, std::string value) {
    r.emplace_back(std::move(key), std::move(value));
}
inline void kv(KvReport& r, std::string key, uint64_t value) {
    kv(r, std::move(key), std::to_string(value));
}
inline void kv(KvReport& r, std::string key, double value) {
    kv(r, std::move(key), format_double(value));
}

inline void expect_header(const std::vector<std::string_view>& got,
                          std::initializer_list<std::string_view> want, const std::string& path) {
    bool ok = got.size() == want.size();
    size_t i = 0;
    for (std::string_view w : want) {
        if (!ok) break;
        ok = got[i++] == w;
    }
    if (!ok) throw InputError("unexpected header in " + path);
}

inline uint64_t parse_u64_field(std::string_view s, const std::string& path) {
    int64_t v;
    if (!parse_i64(s, v) || v < 0) throw InputError("bad integer in " + path);
    return static_cast<uint64_t>(v);
}

// empty field = NaN, mirroring how the writers serialize missing values
inline double parse_opt_double(std::string_view s, const std::string& path) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v;
    if (!parse_double(s, v)) throw InputError("bad number in " + path);
    return v;
}

// ---------------------------------------------------------------------------
// artifact loaders

struct MergedIndex {
    std::vector<MergedCell> cells;   // sorted by merged_id, polygons not loaded
    StringMap<uint32_t> index;       // merged_id -> position in cells
};

inline MergedIndex load_merged_cells(const RunConfig& cfg, const Projection& proj) {
    std::string path = artifact(cfg, "merged_cells.csv");
    require_artifact(path, "cells");
    MergedIndex out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h,
                          {"merged_id", "lon", "lat", "listing_count", "mean_price_per_m2",
                           "admin_kind", "admin_id", "polygon_wkt"},
                          path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 8) throw InputError("malformed row in " + path);
            MergedCell c;
            c.merged_id = std::string(f[0]);
            double lon, lat;
            if (!parse_double(f[1], lon) || !parse_double(f[2], lat))
                throw InputError("bad centroid in " + path);
            c.centroid = LonLat{lon, lat};
            c.centroid_xy = proj.forward(c.centroid);
            c.listing_count = static_cast<uint32_t>(parse_u64_field(f[3], path));
            c.mean_price_per_m2 = parse_opt_double(f[4], path);
            c.admin.kind = parse_admin_kind(f[5]);
            c.admin.id = static_cast<int>(parse_u64_field(f[6], path));
            out.cells.push_back(std::move(c));
        });
    if (out.cells.empty()) throw InputError(path + " is empty");
    for (size_t i = 0; i < out.cells.size(); ++i) {
        if (i > 0 && !(out.cells[i - 1].merged_id < out.cells[i].merged_id))
            throw InputError(path + " is not sorted by merged_id");
        out.index.emplace(out.cells[i].merged_id, static_cast<uint32_t>(i));
    }
    return out;
}

inline StringMap<uint32_t> load_cell_map(const RunConfig& cfg, const MergedIndex& merged) {
    std::string path = artifact(cfg, "cell_map.csv");
    require_artifact(path, "cells");
    StringMap<uint32_t> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h, {"cell_id", "merged_id"}, path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 2) throw InputError("malformed row in " + path);
            auto it = merged.index.find(f[1]);
            if (it == merged.index.end())
                throw InputError(path + " references unknown merged cell " + std::string(f[1]));
            if (!out.emplace(std::string(f[0]), it->second).second)
                throw InputError(path + " has duplicate cell " + std::string(f[0]));
        });
    return out;
}

inline StringSet load_active(const RunConfig& cfg) {
    std::string path = artifact(cfg, "active_sims.csv");
    require_artifact(path, "filter");
    StringSet out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) { expect_header(h, {"sim_id"}, path); },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 1 || f[0].empty()) throw InputError("malformed row in " + path);
            out.insert(std::string(f[0]));
        });
    return out;
}

struct AnchorRow {
    int32_t home_cell = -1;  // merged index, -1 when absent
    int32_t work_cell = -1;
    uint32_t home_count = 0;
    uint32_t work_count = 0;
    double home_work_km = std::numeric_limits<double>::quiet_NaN();
};

inline std::map<std::string, AnchorRow> load_anchors(const RunConfig& cfg,
                                                     const MergedIndex& merged) {
    std::string path = artifact(cfg, "anchors.csv");
    require_artifact(path, "anchors");
    std::map<std::string, AnchorRow> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h,
                          {"sim_id", "home_merged_id", "work_merged_id", "home_count",
                           "work_count", "home_work_km"},
                          path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 6) throw InputError("malformed row in " + path);
            AnchorRow a;
            auto resolve = [&](std::string_view id) -> int32_t {
                if (id.empty()) return -1;
                auto it = merged.index.find(id);
                if (it == merged.index.end())
                    throw InputError(path + " references unknown merged cell " + std::string(id));
                return static_cast<int32_t>(it->second);
            };
            a.home_cell = resolve(f[1]);
            a.work_cell = resolve(f[2]);
            a.home_count = static_cast<uint32_t>(parse_u64_field(f[3], path));
            a.work_count = static_cast<uint32_t>(parse_u64_field(f[4], path));
            a.home_work_km = parse_opt_double(f[5], path);
            if (!out.emplace(std::string(f[0]), a).second)
                throw InputError(path + " has duplicate sim " + std::string(f[0]));
        });
    return out;
}

struct IndicatorRow {
    double rg_km = 0.0;
    double rg_k_km = 0.0;
    double entropy = 0.0;
    std::string mobility_class;
    uint32_t location_count = 0;
};

// keyed by (sim_id, day_type string: workday|holiday|all)
inline std::map<std::pair<std::string, std::string>, IndicatorRow> load_indicators(
    const RunConfig& cfg) {
    std::string path = artifact(cfg, "indicators.csv");
    require_artifact(path, "indicators");
    std::map<std::pair<std::string, std::string>, IndicatorRow> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h,
                          {"sim_id", "day_type", "rg_km", "rg2_km", "entropy", "mobility_class",
                           "location_count"},
                          path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 7) throw InputError("malformed row in " + path);
            IndicatorRow r;
            if (!parse_double(f[2], r.rg_km) || !parse_double(f[3], r.rg_k_km) ||
                !parse_double(f[4], r.entropy))
                throw InputError("bad number in " + path);
            r.mobility_class = std::string(f[5]);
            r.location_count = static_cast<uint32_t>(parse_u64_field(f[6], path));
            auto key = std::make_pair(std::string(f[0]), std::string(f[1]));
            if (!out.emplace(std::move(key), std::move(r)).second)
                throw InputError(path + " has duplicate (sim, day_type) row");
        });
    return out;
}

struct SesRow {
    double v_ses = std::numeric_limits<double>::quiet_NaN();
    int home_price_category = 0;  // 0 = unassigned
    int stratum = 0;              // 0 = not stratified
    double work_price = std::numeric_limits<double>::quiet_NaN();
    std::optional<QuartileGroup> quartile_group;
    bool stationary = false;
};

inline std::map<std::string, SesRow> load_ses(const RunConfig& cfg) {
    std::string path = artifact(cfg, "ses_assignments.csv");
    require_artifact(path, "ses");
    std::map<std::string, SesRow> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h,
                          {"sim_id", "v_ses", "home_price_category", "stratum", "work_price",
                           "quartile_group", "stationary"},
                          path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 7) throw InputError("malformed row in " + path);
            SesRow r;
            r.v_ses = parse_opt_double(f[1], path);
            if (!f[2].empty()) r.home_price_category = static_cast<int>(parse_u64_field(f[2], path));
            if (!f[3].empty()) r.stratum = static_cast<int>(parse_u64_field(f[3], path));
            r.work_price = parse_opt_double(f[4], path);
            if (!f[5].empty()) {
                QuartileGroup g;
                if (!parse_quartile_group(f[5], g))
                    throw InputError("bad quartile group in " + path);
                r.quartile_group = g;
            }
            if (f[6] == "1") r.stationary = true;
            else if (f[6] != "0") throw InputError("bad stationary flag in " + path);
            if (!out.emplace(std::string(f[0]), std::move(r)).second)
                throw InputError(path + " has duplicate sim " + std::string(f[0]));
        });
    return out;
}

inline std::map<std::string, SimAttributes> load_sim_attributes(const RunConfig& cfg) {
    std::string path = artifact(cfg, "sim_attributes.csv");
    require_artifact(path, "ingest");
    std::map<std::string, SimAttributes> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(
                h, {"sim_id", "customer_type", "subscription_type", "age", "gender", "tac"}, path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 6) throw InputError("malformed row in " + path);
            SimAttributes a;
            int age;
            if (!detail::parse_customer(f[1], a.customer_type) ||
                !detail::parse_subscription(f[2], a.subscription_type) ||
                !detail::parse_age(f[3], age) || !detail::parse_gender(f[4], a.gender))
                throw InputError("bad attribute value in " + path);
            a.age = age;
            if (f[5] != "unknown") a.tac = std::string(f[5]);
            if (!out.emplace(std::string(f[0]), std::move(a)).second)
                throw InputError(path + " has duplicate sim " + std::string(f[0]));
        });
    return out;
}

inline std::map<std::string, SimActivityStats> load_sim_stats(const RunConfig& cfg) {
    std::string path = artifact(cfg, "sim_stats.csv");
    require_artifact(path, "stats");
    std::map<std::string, SimActivityStats> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& h) {
            expect_header(h,
                          {"sim_id", "total_records", "active_days", "weekday_daily_mean",
                           "weekend_daily_mean", "records_per_day_mean"},
                          path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 6) throw InputError("malformed row in " + path);
            SimActivityStats s;
            s.total_records = parse_u64_field(f[1], path);
            s.active_days = static_cast<uint32_t>(parse_u64_field(f[2], path));
            if (!parse_double(f[3], s.weekday_daily_mean) ||
                !parse_double(f[4], s.weekend_daily_mean) ||
                !parse_double(f[5], s.records_per_day_mean))
                throw InputError("bad number in " + path);
            if (!out.emplace(std::string(f[0]), s).second)
                throw InputError(path + " has duplicate sim " + std::string(f[0]));
        });
    return out;
}

inline std::vector<RawCell> load_raw_cells(const RunConfig& cfg, CellParseReport* rep = nullptr) {
    if (cfg.cells.empty()) throw InputError("config key 'cells' is required for this stage");
    return parse_cells(cfg.cells, cfg.bbox, rep);
}

inline StringSet cell_id_set(const std::vector<RawCell>& cells) {
    StringSet known;
    known.reserve(cells.size() * 2);
    for (const RawCell& c : cells) known.insert(c.cell_id);
    return known;
}

inline void require_cdr(const RunConfig& cfg) {
    if (cfg.cdr.empty()) throw InputError("config key 'cdr' is required for this stage");
}

} // namespace pipe

// ---------------------------------------------------------------------------
// ingest: one full CDR pass for attribute normalization and per-cell volume

inline KvReport stage_ingest(const RunConfig& cfg) {
    pipe::require_cdr(cfg);
    CellParseReport cell_rep;
    auto cells = pipe::load_raw_cells(cfg, &cell_rep);
    StringSet known = pipe::cell_id_set(cells);
    std::filesystem::create_directories(cfg.outdir);

    StringMap<uint64_t> cell_records;
    for (const RawCell& c : cells) cell_records.emplace(c.cell_id, 0);
    StringSet sims_seen;
    AttributeReducer reducer;
    CdrParseReport rep = parse_cdr(
        cfg.cdr, known,
        [&](std::string_view sim, int64_t, std::string_view cell) {
            ++cell_records.find(cell)->second;
            if (sims_seen.find(sim) == sims_seen.end()) sims_seen.insert(std::string(sim));
        },
        [&](std::string_view sim, const SimAttributes& a) { reducer.observe(sim, a); });

    auto attrs = reducer.finalize();
    {
        CsvWriter w(pipe::artifact(cfg, "sim_attributes.csv"));
        w.row({"sim_id", "customer_type", "subscription_type", "age", "gender", "tac"});
        for (const auto& [sim, a] : attrs) {
            w.field(sim);
            w.field(std::string_view(to_string(a.customer_type)));
            w.field(std::string_view(to_string(a.subscription_type)));
            if (a.age == kAgeUnknown) w.field(std::string_view("unknown"));
            else w.field(a.age);
            w.field(std::string_view(to_string(a.gender)));
            w.field(std::string_view(a.tac.empty() ? "unknown" : a.tac.c_str()));
            w.end_row();
        }
    }
    {
        std::vector<std::string_view> ids;
        ids.reserve(cell_records.size());
        for (const auto& [id, n] : cell_records) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        CsvWriter w(pipe::artifact(cfg, "cell_activity.csv"));
        w.row({"cell_id", "records"});
        for (std::string_view id : ids) {
            w.field(id);
            w.field(cell_records.find(id)->second);
            w.end_row();
        }
    }

    KvReport r;
    pipe::kv(r, "total_rows", rep.total_rows);
    pipe::kv(r, "parsed", rep.parsed);
    pipe::kv(r, "malformed", rep.malformed);
    pipe::kv(r, "dropped_unknown_cell", rep.dropped_unknown_cell);
    pipe::kv(r, "sims", static_cast<uint64_t>(sims_seen.size()));
    pipe::kv(r, "sims_with_attributes", static_cast<uint64_t>(attrs.size()));
    pipe::kv(r, "cells", static_cast<uint64_t>(cells.size()));
    pipe::kv(r, "cells_outside_bbox", cell_rep.dropped_out_of_bbox);
    return r;
}

// ---------------------------------------------------------------------------
// cells: merge towers, tessellate, attach listing prices, label admin units

inline KvReport stage_cells(const RunConfig& cfg) {
    if (cfg.listings.empty())
        throw InputError("config key 'listings' is required for this stage");
    auto cells = pipe::load_raw_cells(cfg);
    Projection proj = cfg.projection();
    std::filesystem::create_directories(cfg.outdir);

    StringMap<uint64_t> weights;
    {
        std::string path = pipe::artifact(cfg, "cell_activity.csv");
        pipe::require_artifact(path, "ingest");
        CsvReader::read(
            path,
            [&](const std::vector<std::string_view>& h) {
                pipe::expect_header(h, {"cell_id", "records"}, path);
            },
            [&](const std::vector<std::string_view>& f) {
                if (f.size() != 2) throw InputError("malformed row in " + path);
                weights[std::string(f[0])] = pipe::parse_u64_field(f[1], path);
            });
    }

    auto merged = merge_cells(cells, weights, proj, cfg.merge_eps_m);
    Polygon boundary = make_circle_polygon(XY{0.0, 0.0}, cfg.boundary_radius_km * 1000.0);
    build_voronoi(merged, boundary);

    ListingParseReport lrep;
    auto listings = parse_listings(cfg.listings, &lrep);
    PriceAttachReport prep = attach_prices(merged, listings, proj, cfg.min_listings, cfg.threads);

    std::vector<AdminRegion> regions;
    if (!cfg.admin.empty()) regions = load_admin_regions(cfg.admin, proj);
    assign_admin(merged, regions);

    uint64_t priced = 0, multi = 0;
    {
        CsvWriter w(pipe::artifact(cfg, "merged_cells.csv"));
        w.row({"merged_id", "lon", "lat", "listing_count", "mean_price_per_m2", "admin_kind",
               "admin_id", "polygon_wkt"});
        for (const MergedCell& m : merged) {
            if (m.has_price()) ++priced;
            if (m.member_cell_ids.size() > 1) ++multi;
            w.field(m.merged_id);
            w.field_full(m.centroid.lon);
            w.field_full(m.centroid.lat);
            w.field(static_cast<uint64_t>(m.listing_count));
            w.field_full(m.mean_price_per_m2);
            w.field(std::string_view(to_string(m.admin.kind)));
            w.field(m.admin.id);
            w.field_quoted(polygon_wkt_lonlat(m.polygon, proj));
            w.end_row();
        }
    }
    {
        std::vector<std::pair<std::string_view, std::string_view>> map_rows;
        for (const MergedCell& m : merged)
            for (const std::string& member : m.member_cell_ids)
                map_rows.emplace_back(member, m.merged_id);
        std::sort(map_rows.begin(), map_rows.end());
        CsvWriter w(pipe::artifact(cfg, "cell_map.csv"));
        w.row({"cell_id", "merged_id"});
        for (const auto& [cell, mid] : map_rows) {
            w.field(cell);
            w.field(mid);
            w.end_row();
        }
    }

    KvReport r;
    pipe::kv(r, "raw_cells", static_cast<uint64_t>(cells.size()));
    pipe::kv(r, "merged_cells", static_cast<uint64_t>(merged.size()));
    pipe::kv(r, "merged_multi_member", multi);
    pipe::kv(r, "priced_cells", priced);
    pipe::kv(r, "listings_total", lrep.total_rows);
    pipe::kv(r, "listings_parsed", lrep.parsed);
    pipe::kv(r, "listings_malformed", lrep.malformed);
    pipe::kv(r, "listings_dropped_floor", lrep.dropped_nonpositive_floor);
    pipe::kv(r, "listings_assigned", prep.assigned);
    pipe::kv(r, "listings_unassigned", prep.unassigned);
    pipe::kv(r, "admin_regions", static_cast<uint64_t>(regions.size()));
    return r;
}

// ---------------------------------------------------------------------------
// stats: per-SIM activity statistics and exploration tables

inline KvReport stage_stats(const RunConfig& cfg) {
    pipe::require_cdr(cfg);
    auto cells = pipe::load_raw_cells(cfg);
    StringSet known = pipe::cell_id_set(cells);
    HolidayCalendar cal = cfg.calendar();
    std::filesystem::create_directories(cfg.outdir);

    ActivityAccumulator acc;
    DayHourMatrix day_hour;
    CdrParseReport rep = parse_cdr(cfg.cdr, known,
                                   [&](std::string_view sim, int64_t ts, std::string_view) {
                                       acc.add(sim, ts, cal);
                                       day_hour.add(ts, cal);
                                   });
    auto stats = acc.finalize(cal);

    {
        CsvWriter w(pipe::artifact(cfg, "sim_stats.csv"));
        w.row({"sim_id", "total_records", "active_days", "weekday_daily_mean",
               "weekend_daily_mean", "records_per_day_mean"});
        for (const auto& [sim, s] : stats) {
            w.field(sim);
            w.field(s.total_records);
            w.field(static_cast<uint64_t>(s.active_days));
            w.field_full(s.weekday_daily_mean);
            w.field_full(s.weekend_daily_mean);
            w.field_full(s.records_per_day_mean);
            w.end_row();
        }
    }
    {
        ActivityCategories cats = activity_categories(stats);
        CsvWriter w(pipe::artifact(cfg, "activity_categories.csv"));
        w.row({"bucket", "sims", "records", "sim_share", "activity_share"});
        for (int b = 0; b < ActivityCategories::kBuckets; ++b) {
            w.field(std::string_view(ActivityCategories::bucket_name(b)));
            w.field(cats.sim_count[static_cast<size_t>(b)]);
            w.field(cats.record_count[static_cast<size_t>(b)]);
            w.field_full(cats.sim_share(b));
            w.field_full(cats.activity_share(b));
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "active_days_hist.csv"));
        w.row({"active_days", "sims"});
        for (const auto& [days, sims] : active_days_histogram(stats)) {
            w.field(static_cast<uint64_t>(days));
            w.field(static_cast<uint64_t>(sims));
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "day_hour_matrix.csv"));
        w.row({"dow", "hour", "records"});
        for (int d = 0; d < 7; ++d)
            for (int h = 0; h < 24; ++h) {
                w.field(d);
                w.field(h);
                w.field(day_hour.counts[static_cast<size_t>(d)][static_cast<size_t>(h)]);
                w.end_row();
            }
    }

    KvReport r;
    pipe::kv(r, "rows_parsed", rep.parsed);
    pipe::kv(r, "malformed", rep.malformed);
    pipe::kv(r, "dropped_unknown_cell", rep.dropped_unknown_cell);
    pipe::kv(r, "sims", static_cast<uint64_t>(stats.size()));
    return r;
}

// ---------------------------------------------------------------------------
// filter: apply the activity criteria to the stats artifact

inline KvReport stage_filter(const RunConfig& cfg) {
    auto stats = pipe::load_sim_stats(cfg);
    std::filesystem::create_directories(cfg.outdir);
    auto active = select_active(stats, cfg.criteria);

    uint64_t fail_days = 0, fail_weekday = 0, fail_weekend = 0, fail_volume = 0;
    for (const auto& [sim, s] : stats) {
        if (s.active_days < cfg.criteria.min_days) ++fail_days;
        if (s.weekday_daily_mean < cfg.criteria.min_weekday_mean) ++fail_weekday;
        if (s.weekend_daily_mean < cfg.criteria.min_weekend_mean) ++fail_weekend;
        if (s.records_per_day_mean > cfg.criteria.max_daily_mean) ++fail_volume;
    }

    CsvWriter w(pipe::artifact(cfg, "active_sims.csv"));
    w.row({"sim_id"});
    for (const std::string& sim : active) {
        w.field(sim);
        w.end_row();
    }

    KvReport r;
    pipe::kv(r, "sims", static_cast<uint64_t>(stats.size()));
    pipe::kv(r, "active", static_cast<uint64_t>(active.size()));
    pipe::kv(r, "fail_active_days", fail_days);
    pipe::kv(r, "fail_weekday_mean", fail_weekday);
    pipe::kv(r, "fail_weekend_mean", fail_weekend);
    pipe::kv(r, "fail_daily_volume", fail_volume);
    return r;
}

// ---------------------------------------------------------------------------
// anchors: most-visited cell per time window for every active SIM

inline KvReport stage_anchors(const RunConfig& cfg) {
    pipe::require_cdr(cfg);
    auto cells = pipe::load_raw_cells(cfg);
    StringSet known = pipe::cell_id_set(cells);
    Projection proj = cfg.projection();
    HolidayCalendar cal = cfg.calendar();
    auto merged = pipe::load_merged_cells(cfg, proj);
    auto cell_map = pipe::load_cell_map(cfg, merged);
    StringSet active = pipe::load_active(cfg);

    StringMap<size_t> slot;
    std::vector<AnchorCounts> counts;
    parse_cdr(cfg.cdr, known, [&](std::string_view sim, int64_t ts, std::string_view cell) {
        if (active.find(sim) == active.end()) return;
        auto it = slot.find(sim);
        if (it == slot.end()) {
            it = slot.emplace(std::string(sim), counts.size()).first;
            counts.emplace_back();
        }
        counts[it->second].add(cell_map.find(cell)->second, ts, cal);
    });

    std::vector<std::pair<std::string_view, size_t>> order(slot.begin(), slot.end());
    std::sort(order.begin(), order.end());

    uint64_t with_home = 0, with_work = 0, with_both = 0;
    double km_sum = 0.0;
    CsvWriter w(pipe::artifact(cfg, "anchors.csv"));
    w.row({"sim_id", "home_merged_id", "work_merged_id", "home_count", "work_count",
           "home_work_km"});
    for (const auto& [sim, idx] : order) {
        AnchorEstimate est = estimate_anchors(counts[idx], merged.cells);
        w.field(sim);
        w.field(est.has_home()
                    ? std::string_view(merged.cells[static_cast<size_t>(est.home_cell)].merged_id)
                    : std::string_view{});
        w.field(est.has_work()
                    ? std::string_view(merged.cells[static_cast<size_t>(est.work_cell)].merged_id)
                    : std::string_view{});
        w.field(static_cast<uint64_t>(est.home_count));
        w.field(static_cast<uint64_t>(est.work_count));
        w.field_full(est.home_work_km);
        w.end_row();
        if (est.has_home()) ++with_home;
        if (est.has_work()) ++with_work;
        if (est.has_distance()) {
            ++with_both;
            km_sum += est.home_work_km;
        }
    }

    KvReport r;
    pipe::kv(r, "active_sims", static_cast<uint64_t>(order.size()));
    pipe::kv(r, "with_home", with_home);
    pipe::kv(r, "with_work", with_work);
    pipe::kv(r, "with_both", with_both);
    pipe::kv(r, "mean_home_work_km", with_both ? km_sum / static_cast<double>(with_both) : 0.0);
    return r;
}

// ---------------------------------------------------------------------------
// indicators: radius of gyration, k-radius, entropy per SIM and day type,
// plus a per-day series

inline KvReport stage_indicators(const RunConfig& cfg) {
    pipe::require_cdr(cfg);
    auto cells = pipe::load_raw_cells(cfg);
    StringSet known = pipe::cell_id_set(cells);
    Projection proj = cfg.projection();
    HolidayCalendar cal = cfg.calendar();
    auto merged = pipe::load_merged_cells(cfg, proj);
    auto cell_map = pipe::load_cell_map(cfg, merged);
    StringSet active = pipe::load_active(cfg);

    // (local day << 32 | merged index) -> record count, one map per SIM
    StringMap<size_t> slot;
    std::vector<std::unordered_map<uint64_t, uint32_t>> day_cell;
    parse_cdr(cfg.cdr, known, [&](std::string_view sim, int64_t ts, std::string_view cell) {
        if (active.find(sim) == active.end()) return;
        auto it = slot.find(sim);
        if (it == slot.end()) {
            it = slot.emplace(std::string(sim), day_cell.size()).first;
            day_cell.emplace_back();
        }
        uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(cal.local_day(ts))) << 32) |
                       cell_map.find(cell)->second;
        ++day_cell[it->second][key];
    });

    std::vector<std::pair<std::string_view, size_t>> order(slot.begin(), slot.end());
    std::sort(order.begin(), order.end());

    std::vector<XY> cell_pos(merged.cells.size());
    for (size_t i = 0; i < merged.cells.size(); ++i) cell_pos[i] = merged.cells[i].centroid_xy;

    constexpr int kTypes = 3;  // workday, holiday, all
    struct SimOut {
        std::array<MobilityIndicators, kTypes> ind{};
        std::array<bool, kTypes> present{};
        std::vector<DailyIndicators> daily;
    };
    std::vector<SimOut> results(order.size());
    parallel_for(order.size(), cfg.threads, [&](size_t oi) {
        const auto& entries = day_cell[order[oi].second];
        std::vector<std::pair<uint64_t, uint32_t>> sorted(entries.begin(), entries.end());
        std::sort(sorted.begin(), sorted.end());

        SimOut& out = results[oi];
        std::array<std::map<uint32_t, uint32_t>, kTypes> per_type;
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            int32_t day = static_cast<int32_t>(sorted[i].first >> 32);
            VisitHistogram day_hist;
            while (j < sorted.size() && static_cast<int32_t>(sorted[j].first >> 32) == day) {
                uint32_t cell = static_cast<uint32_t>(sorted[j].first & 0xffffffffu);
                uint32_t n = sorted[j].second;
                day_hist.push_back(Visit{cell, cell_pos[cell], n});
                int t = cal.day_type(day) == DayType::workday ? 0 : 1;
                per_type[static_cast<size_t>(t)][cell] += n;
                per_type[2][cell] += n;
                ++j;
            }
            DailyIndicators d;
            d.day = day;
            d.day_type = cal.day_type(day);
            d.rg_km = radius_of_gyration_km(day_hist);
            d.entropy = location_entropy(day_hist);
            d.location_count = static_cast<uint32_t>(day_hist.size());
            out.daily.push_back(d);
            i = j;
        }
        for (int t = 0; t < kTypes; ++t) {
            const auto& agg = per_type[static_cast<size_t>(t)];
            if (agg.empty()) continue;
            VisitHistogram h;
            h.reserve(agg.size());
            for (const auto& [cell, n] : agg) h.push_back(Visit{cell, cell_pos[cell], n});
            out.ind[static_cast<size_t>(t)] = compute_indicators(h, cfg.rg_k);
            out.present[static_cast<size_t>(t)] = true;
        }
    });

    static const char* kTypeNames[kTypes] = {"workday", "holiday", "all"};
    uint64_t rows = 0, daily_rows = 0;
    {
        CsvWriter w(pipe::artifact(cfg, "indicators.csv"));
        w.row({"sim_id", "day_type", "rg_km", "rg2_km", "entropy", "mobility_class",
               "location_count"});
        for (size_t oi = 0; oi < order.size(); ++oi) {
            const SimOut& out = results[oi];
            for (int t = 0; t < kTypes; ++t) {
                if (!out.present[static_cast<size_t>(t)]) continue;
                const MobilityIndicators& m = out.ind[static_cast<size_t>(t)];
                w.field(order[oi].first);
                w.field(std::string_view(kTypeNames[t]));
                w.field_full(m.rg_km);
                w.field_full(m.rg_k_km);
                w.field_full(m.entropy);
                w.field(std::string_view(to_string(m.mobility_class)));
                w.field(static_cast<uint64_t>(m.location_count));
                w.end_row();
                ++rows;
            }
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "daily_indicators.csv"));
        w.row({"sim_id", "date", "day_type", "rg_km", "entropy", "location_count"});
        for (size_t oi = 0; oi < order.size(); ++oi) {
            for (const DailyIndicators& d : results[oi].daily) {
                w.field(order[oi].first);
                w.field(std::string_view(format_date(d.day)));
                w.field(std::string_view(to_string(d.day_type)));
                w.field_full(d.rg_km);
                w.field_full(d.entropy);
                w.field(static_cast<uint64_t>(d.location_count));
                w.end_row();
                ++daily_rows;
            }
        }
    }

    KvReport r;
    pipe::kv(r, "active_sims", static_cast<uint64_t>(order.size()));
    pipe::kv(r, "indicator_rows", rows);
    pipe::kv(r, "daily_rows", daily_rows);
    return r;
}

// ---------------------------------------------------------------------------
// ses: home-price SES assignment, equal-sum strata, work-price quartile
// groups, and per-category indicator summaries

inline KvReport stage_ses(const RunConfig& cfg) {
    Projection proj = cfg.projection();
    auto merged = pipe::load_merged_cells(cfg, proj);
    auto anchors = pipe::load_anchors(cfg, merged);
    auto indicators = pipe::load_indicators(cfg);

    auto price_of = [&](int32_t cell) {
        return cell >= 0 ? merged.cells[static_cast<size_t>(cell)].mean_price_per_m2
                         : std::numeric_limits<double>::quiet_NaN();
    };

    struct Entry {
        pipe::SesRow row;
        const pipe::AnchorRow* anchor;
    };
    std::map<std::string, Entry> entries;
    uint64_t no_home = 0, unpriced = 0, stationary_n = 0;
    for (const auto& [sim, a] : anchors) {
        auto ind = indicators.find({sim, "all"});
        if (ind == indicators.end())
            throw InputError("indicators.csv has no 'all' row for sim " + sim +
                             "; re-run the 'indicators' stage");
        Entry e;
        e.anchor = &a;
        e.row.v_ses = price_of(a.home_cell);
        e.row.work_price = price_of(a.work_cell);
        e.row.stationary = is_stationary(ind->second.rg_km, a.home_work_km);
        if (e.row.v_ses == e.row.v_ses) e.row.home_price_category = price_category(e.row.v_ses);
        if (a.home_cell < 0) ++no_home;
        else if (e.row.v_ses != e.row.v_ses) ++unpriced;
        if (e.row.stationary) ++stationary_n;
        entries.emplace(sim, std::move(e));
    }

    // strata over the SES population: home price known and not stationary
    std::vector<std::pair<std::string, double>> population;
    for (const auto& [sim, e] : entries)
        if (e.row.v_ses == e.row.v_ses && !e.row.stationary)
            population.emplace_back(sim, e.row.v_ses);
    if (static_cast<int>(population.size()) < cfg.strata_q)
        throw InputError("SES population of " + std::to_string(population.size()) +
                         " is smaller than strata_q=" + std::to_string(cfg.strata_q));
    auto strata = stratify_equal_sum(population, cfg.strata_q);
    for (auto& [sim, e] : entries) {
        auto it = strata.find(sim);
        if (it != strata.end()) e.row.stratum = it->second;
    }

    // work-price quartile groups within each home price category
    std::map<int, std::vector<std::pair<std::string, double>>> work_by_cat;
    for (const auto& [sim, e] : entries)
        if (e.row.home_price_category > 0 && !e.row.stationary &&
            e.row.work_price == e.row.work_price)
            work_by_cat[e.row.home_price_category].emplace_back(sim, e.row.work_price);
    uint64_t grouped = 0;
    for (const auto& [cat, prices] : work_by_cat) {
        auto groups = quartile_groups(prices);
        for (const auto& [sim, g] : groups) {
            entries.at(sim).row.quartile_group = g;
            ++grouped;
        }
    }

    std::filesystem::create_directories(cfg.outdir);
    {
        CsvWriter w(pipe::artifact(cfg, "ses_assignments.csv"));
        w.row({"sim_id", "v_ses", "home_price_category", "stratum", "work_price",
               "quartile_group", "stationary"});
        for (const auto& [sim, e] : entries) {
            w.field(sim);
            w.field_full(e.row.v_ses);
            if (e.row.home_price_category > 0) w.field(e.row.home_price_category);
            else w.field(std::string_view{});
            if (e.row.stratum > 0) w.field(e.row.stratum);
            else w.field(std::string_view{});
            w.field_full(e.row.work_price);
            w.field(e.row.quartile_group ? std::string_view(to_string(*e.row.quartile_group))
                                         : std::string_view{});
            w.field(std::string_view(e.row.stationary ? "1" : "0"));
            w.end_row();
        }
    }

    // per-category summaries of the indicator distributions
    {
        static const char* kTypeNames[3] = {"workday", "holiday", "all"};
        CsvWriter w(pipe::artifact(cfg, "category_stats.csv"));
        w.row({"category", "day_type", "indicator", "count", "mean", "min", "q1", "median", "q3",
               "max"});
        auto write_summary = [&](int cat, const char* dt, const char* name,
                                 const std::vector<double>& values) {
            if (values.empty()) return;
            SummaryStats s = summarize(values);
            w.field(cat);
            w.field(std::string_view(dt));
            w.field(std::string_view(name));
            w.field(static_cast<uint64_t>(s.count));
            w.field_full(s.mean);
            w.field_full(s.min);
            w.field_full(s.q1);
            w.field_full(s.median);
            w.field_full(s.q3);
            w.field_full(s.max);
            w.end_row();
        };
        for (int cat = 1; cat <= kPriceCatCount; ++cat) {
            for (int t = 0; t < 3; ++t) {
                std::vector<double> rg, rg2, entropy;
                for (const auto& [sim, e] : entries) {
                    if (e.row.home_price_category != cat || e.row.stationary) continue;
                    auto it = indicators.find({sim, kTypeNames[t]});
                    if (it == indicators.end()) continue;
                    rg.push_back(it->second.rg_km);
                    rg2.push_back(it->second.rg_k_km);
                    entropy.push_back(it->second.entropy);
                }
                write_summary(cat, kTypeNames[t], "rg_km", rg);
                write_summary(cat, kTypeNames[t], "rg2_km", rg2);
                write_summary(cat, kTypeNames[t], "entropy", entropy);
            }
            std::vector<double> hw;
            for (const auto& [sim, e] : entries) {
                if (e.row.home_price_category != cat || e.row.stationary) continue;
                if (e.anchor->home_work_km == e.anchor->home_work_km)
                    hw.push_back(e.anchor->home_work_km);
            }
            write_summary(cat, "all", "home_work_km", hw);
        }
    }

    KvReport r;
    pipe::kv(r, "sims", static_cast<uint64_t>(entries.size()));
    pipe::kv(r, "no_home_anchor", no_home);
    pipe::kv(r, "home_unpriced", unpriced);
    pipe::kv(r, "stationary", stationary_n);
    pipe::kv(r, "population", static_cast<uint64_t>(population.size()));
    pipe::kv(r, "strata_q", static_cast<uint64_t>(cfg.strata_q));
    pipe::kv(r, "quartile_grouped", grouped);
    return r;
}

// ---------------------------------------------------------------------------
// pca: keyed feature matrix over binned rg/entropy distributions, principal
// components over its rows

inline KvReport stage_pca(const RunConfig& cfg) {
    auto ses = pipe::load_ses(cfg);
    auto indicators = pipe::load_indicators(cfg);

    std::vector<FeaturePoint> points;
    static const std::pair<const char*, DayType> kDayTypes[2] = {
        {"workday", DayType::workday}, {"holiday", DayType::holiday}};
    for (const auto& [sim, row] : ses) {
        if (row.home_price_category <= 0 || row.stationary || !row.quartile_group) continue;
        for (const auto& [name, dt] : kDayTypes) {
            auto it = indicators.find({sim, name});
            if (it == indicators.end()) continue;
            FeaturePoint p;
            p.key = FeatureKey{row.home_price_category, *row.quartile_group, dt};
            p.rg_km = it->second.rg_km;
            p.entropy = it->second.entropy;
            points.push_back(p);
        }
    }

    FeatureMatrix matrix = build_matrix(points);
    PcaResult pca = run_pca(matrix.rows);

    std::filesystem::create_directories(cfg.outdir);
    auto col_name = [](int c) {
        char buf[32];
        if (c < kRgBins) std::snprintf(buf, sizeof(buf), "rg_bin_%02d", c + 1);
        else std::snprintf(buf, sizeof(buf), "entropy_bin_%02d", c - kRgBins + 1);
        return std::string(buf);
    };
    auto write_key = [](CsvWriter& w, const FeatureKey& k) {
        w.field(k.home_price_category);
        w.field(std::string_view(to_string(k.quartile_group)));
        w.field(std::string_view(to_string(k.day_type)));
    };
    {
        CsvWriter w(pipe::artifact(cfg, "feature_matrix.csv"));
        w.field(std::string_view("home_price_category"));
        w.field(std::string_view("quartile_group"));
        w.field(std::string_view("day_type"));
        for (int c = 0; c < kFeatureCols; ++c) w.field(std::string_view(col_name(c)));
        w.end_row();
        for (size_t i = 0; i < matrix.rows.size(); ++i) {
            write_key(w, matrix.keys[i]);
            for (double v : matrix.rows[i]) w.field_full(v);
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "pca_loadings.csv"));
        w.field(std::string_view("component"));
        for (int c = 0; c < kFeatureCols; ++c) w.field(std::string_view(col_name(c)));
        w.end_row();
        for (size_t i = 0; i < pca.components.size(); ++i) {
            w.field(static_cast<uint64_t>(i + 1));
            for (double v : pca.components[i]) w.field_full(v);
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "pca_ratios.csv"));
        w.row({"component", "eigenvalue", "ratio", "cumulative"});
        double cum = 0.0;
        for (size_t i = 0; i < pca.eigenvalues.size(); ++i) {
            cum += pca.explained_variance_ratio[i];
            w.field(static_cast<uint64_t>(i + 1));
            w.field_full(pca.eigenvalues[i]);
            w.field_full(pca.explained_variance_ratio[i]);
            w.field_full(cum);
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "pca_scores.csv"));
        w.field(std::string_view("home_price_category"));
        w.field(std::string_view("quartile_group"));
        w.field(std::string_view("day_type"));
        for (int c = 0; c < kFeatureCols; ++c) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "pc%02d", c + 1);
            w.field(std::string_view(buf));
        }
        w.end_row();
        for (size_t i = 0; i < pca.scores.size(); ++i) {
            write_key(w, matrix.keys[i]);
            for (double v : pca.scores[i]) w.field_full(v);
            w.end_row();
        }
    }

    KvReport r;
    pipe::kv(r, "points", static_cast<uint64_t>(points.size()));
    pipe::kv(r, "rows", static_cast<uint64_t>(matrix.rows.size()));
    pipe::kv(r, "dropped_rg", matrix.dropped_rg);
    pipe::kv(r, "dropped_entropy", matrix.dropped_entropy);
    pipe::kv(r, "pc1_ratio",
             pca.explained_variance_ratio.empty() ? 0.0 : pca.explained_variance_ratio[0]);
    pipe::kv(r, "pc2_ratio",
             pca.explained_variance_ratio.size() < 2 ? 0.0 : pca.explained_variance_ratio[1]);
    return r;
}

// ---------------------------------------------------------------------------
// commute: origin mix per work district, age mix per home sector, optional
// comparison against census reference tables

inline KvReport stage_commute(const RunConfig& cfg) {
    Projection proj = cfg.projection();
    auto merged = pipe::load_merged_cells(cfg, proj);
    auto anchors = pipe::load_anchors(cfg, merged);
    auto attrs = pipe::load_sim_attributes(cfg);

    std::vector<CommuterRow> rows;
    for (const auto& [sim, a] : anchors) {
        if (a.home_cell < 0 || a.work_cell < 0) continue;
        CommuterRow row;
        row.home = merged.cells[static_cast<size_t>(a.home_cell)].admin;
        row.work = merged.cells[static_cast<size_t>(a.work_cell)].admin;
        auto it = attrs.find(sim);
        row.age = it != attrs.end() ? it->second.age : kAgeUnknown;
        rows.push_back(row);
    }
    CommuteTables tables = commuting_tables(rows);

    std::filesystem::create_directories(cfg.outdir);
    {
        CsvWriter w(pipe::artifact(cfg, "commute_district.csv"));
        w.row({"district", "same", "other_bp", "agglo", "outside"});
        for (const auto& [district, row] : tables.district) {
            w.field(district);
            for (double v : row) w.field_full(v);
            w.end_row();
        }
    }
    {
        CsvWriter w(pipe::artifact(cfg, "commute_age.csv"));
        w.row({"sector", "a20_29", "a30_39", "a40_49", "a50_59", "a60p"});
        for (const auto& [sector, row] : tables.age) {
            w.field(sector);
            for (double v : row) w.field_full(v);
            w.end_row();
        }
    }

    KvReport r;
    pipe::kv(r, "commuters", static_cast<uint64_t>(rows.size()));
    pipe::kv(r, "district_rows", static_cast<uint64_t>(tables.district.size()));
    pipe::kv(r, "age_rows", static_cast<uint64_t>(tables.age.size()));

    if (!cfg.census_district.empty() || !cfg.census_age.empty()) {
        CsvWriter w(pipe::artifact(cfg, "census_diff.csv"));
        w.row({"table", "key", "column", "pipeline", "census", "abs_diff", "rel_diff"});
        auto write_diff = [&](const char* table, int key, const char* column, double ours,
                              double census, double abs, double rel) {
            w.field(std::string_view(table));
            w.field(key);
            w.field(std::string_view(column));
            w.field_full(ours);
            w.field_full(census);
            w.field_full(abs);
            w.field_full(rel);
            w.end_row();
        };
        if (!cfg.census_district.empty()) {
            auto census = parse_census_csv<kDistrictOriginCols>(
                cfg.census_district, {"district", "same", "other_bp", "agglo", "outside"});
            auto cmp = compare_to_census<kDistrictOriginCols>(tables.district, census);
            for (const auto& [key, abs_row] : cmp.abs_diff)
                for (int i = 0; i < kDistrictOriginCols; ++i)
                    write_diff("district", key, district_origin_name(i),
                               tables.district.at(key)[static_cast<size_t>(i)],
                               census.at(key)[static_cast<size_t>(i)],
                               abs_row[static_cast<size_t>(i)],
                               cmp.rel_diff.at(key)[static_cast<size_t>(i)]);
            pipe::kv(r, "census_district_mean_abs_diff", cmp.mean_abs_diff);
        }
        if (!cfg.census_age.empty()) {
            auto census = parse_census_csv<kAgeCols>(
                cfg.census_age, {"sector", "a20_29", "a30_39", "a40_49", "a50_59", "a60p"});
            auto cmp = compare_to_census<kAgeCols>(tables.age, census);
            for (const auto& [key, abs_row] : cmp.abs_diff)
                for (int i = 0; i < kAgeCols; ++i)
                    write_diff("age", key, age_col_name(i),
                               tables.age.at(key)[static_cast<size_t>(i)],
                               census.at(key)[static_cast<size_t>(i)],
                               abs_row[static_cast<size_t>(i)],
                               cmp.rel_diff.at(key)[static_cast<size_t>(i)]);
            pipe::kv(r, "census_age_mean_abs_diff", cmp.mean_abs_diff);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// report: read-only summary of a completed run

inline std::string run_report(const RunConfig& cfg) {
    auto stats = pipe::load_sim_stats(cfg);
    StringSet active = pipe::load_active(cfg);
    auto ses = pipe::load_ses(cfg);

    std::string out;
    char line[160];
    auto add = [&](const char* fmt, auto... args) {
        std::snprintf(line, sizeof(line), fmt, args...);
        out += line;
        out += '\n';
    };

    add("sims_ingested=%zu", stats.size());
    add("sims_active=%zu", active.size());
    add("sims_filtered_out=%zu", stats.size() - active.size());

    ActivityCategories cats = activity_categories(stats);
    for (int b = 0; b < ActivityCategories::kBuckets; ++b)
        add("activity[%s] sims=%llu sim_share=%.4f activity_share=%.4f",
            ActivityCategories::bucket_name(b),
            static_cast<unsigned long long>(cats.sim_count[static_cast<size_t>(b)]),
            cats.sim_share(b), cats.activity_share(b));

    std::array<uint64_t, kPriceCatCount + 1> per_cat{};
    uint64_t stationary = 0;
    for (const auto& [sim, row] : ses) {
        ++per_cat[static_cast<size_t>(row.home_price_category)];
        if (row.stationary) ++stationary;
    }
    add("ses_sims=%zu", ses.size());
    add("ses_stationary=%llu", static_cast<unsigned long long>(stationary));
    add("ses_unassigned=%llu", static_cast<unsigned long long>(per_cat[0]));
    for (int c = 1; c <= kPriceCatCount; ++c)
        add("ses_category[%d] sims=%llu", c,
            static_cast<unsigned long long>(per_cat[static_cast<size_t>(c)]));

    std::string ratios_path = pipe::artifact(cfg, "pca_ratios.csv");
    pipe::require_artifact(ratios_path, "pca");
    std::vector<double> ratios;
    CsvReader::read(
        ratios_path,
        [&](const std::vector<std::string_view>& h) {
            pipe::expect_header(h, {"component", "eigenvalue", "ratio", "cumulative"},
                                ratios_path);
        },
        [&](const std::vector<std::string_view>& f) {
            if (f.size() != 4) throw InputError("malformed row in " + ratios_path);
            double v;
            if (!parse_double(f[2], v)) throw InputError("bad number in " + ratios_path);
            ratios.push_back(v);
        });
    add("pca_pc1_ratio=%.6f", ratios.empty() ? 0.0 : ratios[0]);
    add("pca_pc2_ratio=%.6f", ratios.size() < 2 ? 0.0 : ratios[1]);
    return out;
}

// ---------------------------------------------------------------------------
// pipeline: every stage in dependency order

inline KvReport run_pipeline(const RunConfig& cfg) {
    struct Stage {
        const char* name;
        KvReport (*fn)(const RunConfig&);
    };
    static const Stage kStages[] = {
        {"ingest", stage_ingest},       {"cells", stage_cells},
        {"stats", stage_stats},         {"filter", stage_filter},
        {"anchors", stage_anchors},     {"indicators", stage_indicators},
        {"ses", stage_ses},             {"pca", stage_pca},
        {"commute", stage_commute},
    };
    KvReport combined;
    for (const Stage& s : kStages) {
        KvReport r;
        try {
            r = s.fn(cfg);
        } catch (const InputError& e) {
            throw InputError("stage " + std::string(s.name) + ": " + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + std::string(s.name) + ": " + e.what());
        }
        for (auto& [k, v] : r)
            combined.emplace_back(std::string(s.name) + "." + k, std::move(v));
    }
    return combined;
}

} // namespace mobility
