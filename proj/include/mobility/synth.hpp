#pragma once

// Deterministic synthetic city: cells thin out away from the center, estate
// prices fall linearly with radius, districts are 23 wedges of the inner
// disc and the agglomeration is a 6-sector ring. Every SIM has a planted
// home/work pair and behavior pattern, so end-to-end tests can check that
// the pipeline recovers known ground truth.
//
// All randomness flows from mt19937_64 seeded per SIM via splitmix64, with
// hand-rolled distributions on top — std::uniform_int_distribution and
// friends are not bit-specified across standard libraries, and fixtures
// must reproduce everywhere.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mobility/calendar.hpp"
#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/geo.hpp"

namespace mobility {

struct SynthConfig {
    uint64_t seed = 20170401;
    int n_cells = 300;
    int n_sims = 10000;
    int days = 30;
    std::string start_date = "2017-04-01";
    std::vector<std::string> holidays = {"2017-04-14", "2017-04-17"};
    int tz_offset_min = 120;

    double center_lon = 19.05;
    double center_lat = 47.4979;
    double city_radius_km = 20.0;
    double district_radius_km = 10.0;
    int n_districts = 23;
    double agglo_radius_km = 18.0;
    int n_sectors = 6;

    double price_center = 1150000.0;  // HUF/m² at the center
    double price_edge = 250000.0;     // HUF/m² at city_radius
    double price_noise = 20000.0;     // gaussian sigma per listing
    int listings_per_cell = 30;

    double commuter_share = 0.85;
    double stationary_share = 0.05;
    double night_owl_share = 0.0;
    double excursion_noise = 0.15;   // per-record chance of a random cell
    double activity_base = 48.0;     // records per workday, Pareto-scaled
    double activity_alpha = 3.5;
    double weekend_damp = 0.5;
    double stationary_rate = 120.0;
    double stationary_chatty_share = 0.1;
    double stationary_chatty_rate = 1100.0;  // trips the 1000/day filter guard

    double work_pull_km = 3.0;       // work cells concentrate ∝ exp(-r/pull)
    double age_unknown_share = 0.15;
    double under_20_share = 0.05;    // of known ages
    double attr_conflict_share = 0.005;

    BoundingBox bbox{18.4, 19.7, 47.0, 48.0};
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 plus the hand-rolled distributions used by the generator.
class SynthRng {
public:
    explicit SynthRng(uint64_t seed) : gen_(seed) {}

    double uniform01() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    uint64_t uniform_int(uint64_t n) {  // [0, n)
        return static_cast<uint64_t>((static_cast<__uint128_t>(gen_()) * n) >> 64);
    }

    double gauss() {  // Box-Muller, one value per call pair
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double pareto(double alpha) {  // xm = 1
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return std::pow(u, -1.0 / alpha);
    }

    uint32_t poisson(double lambda) {  // Knuth, split for large lambda
        uint32_t k = 0;
        while (lambda > 500.0) {
            k += poisson_knuth(500.0);
            lambda -= 500.0;
        }
        return k + poisson_knuth(lambda);
    }

private:
    uint32_t poisson_knuth(double lambda) {
        if (lambda <= 0.0) return 0;
        double limit = std::exp(-lambda);
        double p = 1.0;
        uint32_t k = 0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

enum class SimPattern : uint8_t { commuter, homebody, stationary, night_owl };

inline const char* to_string(SimPattern p) {
    switch (p) {
        case SimPattern::commuter: return "commuter";
        case SimPattern::homebody: return "homebody";
        case SimPattern::stationary: return "stationary";
        default: return "night_owl";
    }
}

struct GroundTruthSim {
    std::string sim_id;
    SimPattern pattern = SimPattern::commuter;
    int home_cell = 0;  // index into city cells
    int work_cell = 0;
    int age = -1;       // -1 = unknown
    bool gender_male = false;
    bool business = false;
    double daily_rate = 0.0;
    bool conflicted_subscription = false;
};

struct SynthCity {
    Projection proj;
    std::vector<XY> cell_xy;
    std::vector<std::string> cell_ids;
    std::vector<GroundTruthSim> sims;
};

namespace detail {

inline std::string cell_id_of(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%04d", idx);
    return buf;
}

inline std::string sim_id_of(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%05d", idx);
    return buf;
}

inline double angle_of(XY p) {
    double a = std::atan2(p.y, p.x);
    if (a < 0) a += 2.0 * kPi;
    return a;
}

} // namespace detail

inline double synth_price_at_radius(const SynthConfig& cfg, double r_km) {
    double t = r_km / cfg.city_radius_km;
    return cfg.price_center + (cfg.price_edge - cfg.price_center) * t;
}

/// Analytic admin label of a planted point: wedge by angle inside the
/// district disc, ring sector between district and agglomeration radii,
/// outside beyond. The emitted GeoJSON approximates the same rule.
inline void synth_admin_of(const SynthConfig& cfg, XY p, std::string& kind, int& id) {
    double r_km = std::hypot(p.x, p.y) / 1000.0;
    if (r_km <= cfg.district_radius_km) {
        kind = "district";
        id = 1 + static_cast<int>(detail::angle_of(p) / (2.0 * kPi) * cfg.n_districts);
        id = std::min(id, cfg.n_districts);
    } else if (r_km <= cfg.agglo_radius_km) {
        kind = "agglomeration_sector";
        id = 1 + static_cast<int>(detail::angle_of(p) / (2.0 * kPi) * cfg.n_sectors);
        id = std::min(id, cfg.n_sectors);
    } else {
        kind = "outside";
        id = 0;
    }
}

/// Lays out cells and plants the population. Cells, listings, regions and
/// the CDR stream are all derived deterministically from cfg.seed.
inline SynthCity generate_city(const SynthConfig& cfg) {
    if (cfg.n_cells < 1 || cfg.n_sims < 1 || cfg.days < 1)
        throw InputError("synth config counts must be positive");
    if (cfg.commuter_share + cfg.stationary_share + cfg.night_owl_share > 1.0 + 1e-9)
        throw InputError("synth population shares must sum to at most 1");

    SynthCity city;
    city.proj = Projection({cfg.center_lon, cfg.center_lat}, cfg.bbox);

    SynthRng rng(splitmix64(cfg.seed ^ 0xC17Cu));
    double R = cfg.city_radius_km * 1000.0;
    city.cell_xy.reserve(static_cast<size_t>(cfg.n_cells));
    city.cell_ids.reserve(static_cast<size_t>(cfg.n_cells));
    for (int i = 0; i < cfg.n_cells; ++i) {
        double r;
        if (rng.uniform01() < 0.6) {
            do {
                r = -4000.0 * std::log(1.0 - rng.uniform01());
            } while (r > R);
        } else {
            r = R * std::sqrt(rng.uniform01());
        }
        double a = rng.uniform01() * 2.0 * kPi;
        city.cell_xy.push_back({r * std::cos(a), r * std::sin(a)});
        city.cell_ids.push_back(detail::cell_id_of(i));
    }

    // work cells pull toward the center; cumulative weights for sampling
    std::vector<double> work_cum(static_cast<size_t>(cfg.n_cells));
    double cum = 0.0;
    for (int i = 0; i < cfg.n_cells; ++i) {
        double r_km = std::hypot(city.cell_xy[static_cast<size_t>(i)].x,
                                 city.cell_xy[static_cast<size_t>(i)].y) /
                      1000.0;
        cum += std::exp(-r_km / cfg.work_pull_km);
        work_cum[static_cast<size_t>(i)] = cum;
    }

    city.sims.reserve(static_cast<size_t>(cfg.n_sims));
    for (int i = 0; i < cfg.n_sims; ++i) {
        SynthRng srng(splitmix64(cfg.seed ^ splitmix64(static_cast<uint64_t>(i) + 1)));
        GroundTruthSim s;
        s.sim_id = detail::sim_id_of(i);
        double u = srng.uniform01();
        if (u < cfg.commuter_share) s.pattern = SimPattern::commuter;
        else if (u < cfg.commuter_share + cfg.stationary_share) s.pattern = SimPattern::stationary;
        else if (u < cfg.commuter_share + cfg.stationary_share + cfg.night_owl_share)
            s.pattern = SimPattern::night_owl;
        else s.pattern = SimPattern::homebody;

        s.home_cell = static_cast<int>(srng.uniform_int(static_cast<uint64_t>(cfg.n_cells)));
        if (s.pattern == SimPattern::commuter || s.pattern == SimPattern::night_owl) {
            double pick = srng.uniform01() * cum;
            s.work_cell = static_cast<int>(
                std::lower_bound(work_cum.begin(), work_cum.end(), pick) - work_cum.begin());
            s.work_cell = std::min(s.work_cell, cfg.n_cells - 1);
        } else {
            s.work_cell = s.home_cell;
        }

        if (s.pattern == SimPattern::stationary) {
            s.business = true;
            s.age = -1;
            s.daily_rate = srng.uniform01() < cfg.stationary_chatty_share
                               ? cfg.stationary_chatty_rate
                               : cfg.stationary_rate;
        } else {
            s.business = false;
            if (srng.uniform01() >= cfg.age_unknown_share) {
                if (srng.uniform01() < cfg.under_20_share)
                    s.age = 10 + static_cast<int>(srng.uniform_int(10));
                else
                    s.age = 20 + static_cast<int>(srng.uniform_int(60));
            }
            s.daily_rate = cfg.activity_base * srng.pareto(cfg.activity_alpha);
        }
        s.gender_male = srng.uniform01() < 0.5;
        s.conflicted_subscription = srng.uniform01() < cfg.attr_conflict_share;
        city.sims.push_back(std::move(s));
    }
    return city;
}

inline void write_cells_csv(const SynthCity& city, const std::string& path,
                            const SynthConfig& cfg) {
    CsvWriter w(path);
    w.row({"cell_id", "centroid_lon", "centroid_lat", "base_lon", "base_lat", "area_m2"});
    double mean_area = kPi * cfg.city_radius_km * cfg.city_radius_km * 1e6 / cfg.n_cells;
    SynthRng rng(splitmix64(cfg.seed ^ 0xBA5Eu));
    for (size_t i = 0; i < city.cell_xy.size(); ++i) {
        LonLat c = city.proj.inverse(city.cell_xy[i]);
        XY base{city.cell_xy[i].x + (rng.uniform01() - 0.5) * 200.0,
                city.cell_xy[i].y + (rng.uniform01() - 0.5) * 200.0};
        LonLat b = city.proj.inverse(base);
        w.field(city.cell_ids[i]);
        w.field(c.lon, 6);
        w.field(c.lat, 6);
        w.field(b.lon, 6);
        w.field(b.lat, 6);
        w.field(mean_area, 1);
        w.end_row();
    }
}

inline void write_listings_csv(const SynthCity& city, const std::string& path,
                               const SynthConfig& cfg) {
    CsvWriter w(path);
    w.row({"listing_id", "lon", "lat", "price_huf", "floor_m2"});
    SynthRng rng(splitmix64(cfg.seed ^ 0x11573u));
    int id = 0;
    for (size_t i = 0; i < city.cell_xy.size(); ++i) {
        for (int j = 0; j < cfg.listings_per_cell; ++j, ++id) {
            XY p{city.cell_xy[i].x + (rng.uniform01() - 0.5) * 800.0,
                 city.cell_xy[i].y + (rng.uniform01() - 0.5) * 800.0};
            double r_km = std::hypot(p.x, p.y) / 1000.0;
            double ppm2 = synth_price_at_radius(cfg, r_km);
            if (cfg.price_noise > 0.0) ppm2 += rng.gauss() * cfg.price_noise;
            double floor = 25.0 + rng.uniform01() * 95.0;
            LonLat ll = city.proj.inverse(p);
            char lid[16];
            std::snprintf(lid, sizeof(lid), "l%06d", id);
            w.field(std::string_view(lid));
            w.field(ll.lon, 6);
            w.field(ll.lat, 6);
            w.field(ppm2 * floor, 0);
            w.field(floor, 1);
            w.end_row();
        }
    }
}

/// Districts: wedges of the inner disc. Sectors: wedges of the ring out to
/// the agglomeration radius. Arcs are discretized at ~2 degrees.
inline void write_admin_geojson(const SynthCity& city, const std::string& path,
                                const SynthConfig& cfg) {
    nlohmann::json features = nlohmann::json::array();
    auto arc_points = [&](double r_m, double a0, double a1) {
        std::vector<XY> pts;
        int steps = std::max(2, static_cast<int>(std::ceil((a1 - a0) / (kPi / 90.0))));
        for (int i = 0; i <= steps; ++i) {
            double a = a0 + (a1 - a0) * i / steps;
            pts.push_back({r_m * std::cos(a), r_m * std::sin(a)});
        }
        return pts;
    };
    auto ring_to_json = [&](const std::vector<XY>& ring) {
        nlohmann::json coords = nlohmann::json::array();
        for (const XY& p : ring) {
            LonLat ll = city.proj.inverse(p);
            coords.push_back({ll.lon, ll.lat});
        }
        LonLat first = city.proj.inverse(ring.front());
        coords.push_back({first.lon, first.lat});
        return nlohmann::json::array({coords});
    };
    auto add_feature = [&](const std::string& kind, int id, const std::vector<XY>& ring) {
        nlohmann::json f;
        f["type"] = "Feature";
        f["properties"] = {{"unit_id", id}, {"kind", kind}, {"name", kind + " " + std::to_string(id)}};
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", ring_to_json(ring)}};
        features.push_back(std::move(f));
    };

    double rd = cfg.district_radius_km * 1000.0;
    for (int d = 0; d < cfg.n_districts; ++d) {
        double a0 = 2.0 * kPi * d / cfg.n_districts;
        double a1 = 2.0 * kPi * (d + 1) / cfg.n_districts;
        std::vector<XY> ring{{0.0, 0.0}};
        auto arc = arc_points(rd, a0, a1);
        ring.insert(ring.end(), arc.begin(), arc.end());
        add_feature("district", d + 1, ring);
    }
    double ra = cfg.agglo_radius_km * 1000.0;
    for (int s = 0; s < cfg.n_sectors; ++s) {
        double a0 = 2.0 * kPi * s / cfg.n_sectors;
        double a1 = 2.0 * kPi * (s + 1) / cfg.n_sectors;
        auto outer = arc_points(ra, a0, a1);
        auto inner = arc_points(rd, a0, a1);
        std::reverse(inner.begin(), inner.end());
        std::vector<XY> ring = outer;
        ring.insert(ring.end(), inner.begin(), inner.end());
        add_feature("agglomeration_sector", s + 1, ring);
    }

    nlohmann::json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw InputError("cannot open file for writing: " + path);
    std::string text = doc.dump();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

namespace detail {

struct SynthEvent {
    int64_t ts;
    int cell;
};

// local window second pickers; all windows are [lo, hi) local seconds
inline int pick_second(SynthRng& rng, int lo_h, int hi_h) {
    return lo_h * 3600 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>((hi_h - lo_h) * 3600)));
}

} // namespace detail

/// Event stream generator: workday records split across the work window (at
/// the work cell), night window and shoulder hours (mostly at home),
/// weekends and holidays entirely from home; every record can be diverted to
/// a random cell with probability excursion_noise. Stationary devices emit
/// around the clock from one cell and are never diverted. Calls
/// sink(sim_index, events) once per SIM with events sorted by (ts, cell).
template <typename Sink>
inline void generate_events(const SynthConfig& cfg, const SynthCity& city, Sink&& sink) {
    HolidayCalendar cal;
    cal.tz_offset_min = cfg.tz_offset_min;
    for (const std::string& h : cfg.holidays) cal.add_holiday(h);
    int32_t day0 = parse_date(cfg.start_date);
    int64_t tz_s = int64_t{cfg.tz_offset_min} * 60;

    std::vector<detail::SynthEvent> events;
    for (size_t si = 0; si < city.sims.size(); ++si) {
        const GroundTruthSim& s = city.sims[si];
        SynthRng rng(splitmix64(cfg.seed ^ splitmix64(static_cast<uint64_t>(si) + 0x5151u)));
        events.clear();

        for (int d = 0; d < cfg.days; ++d) {
            int32_t day = day0 + d;
            bool workday = cal.day_type(day) == DayType::workday;
            int64_t day_utc0 = int64_t{day} * kSecondsPerDay - tz_s;

            double rate = s.daily_rate;
            if (s.pattern != SimPattern::stationary && !workday) rate *= cfg.weekend_damp;
            uint32_t n = rng.poisson(rate);
            for (uint32_t k = 0; k < n; ++k) {
                int sec;
                int cell;
                if (s.pattern == SimPattern::stationary) {
                    sec = detail::pick_second(rng, 0, 24);
                    cell = s.home_cell;
                } else if (!workday) {
                    sec = detail::pick_second(rng, 8, 22);
                    cell = s.home_cell;
                } else {
                    int home_anchor = s.home_cell, work_anchor = s.work_cell;
                    if (s.pattern == SimPattern::night_owl) std::swap(home_anchor, work_anchor);
                    double u = rng.uniform01();
                    if (u < 0.55) {
                        sec = detail::pick_second(rng, 9, 16);
                        cell = work_anchor;
                    } else if (u < 0.75) {
                        sec = detail::pick_second(rng, 22, 30);  // wraps past midnight
                        if (sec >= 24 * 3600) sec -= 24 * 3600;
                        cell = home_anchor;
                    } else {
                        sec = rng.uniform01() < 0.5 ? detail::pick_second(rng, 6, 9)
                                                    : detail::pick_second(rng, 16, 22);
                        cell = rng.uniform01() < 0.7 ? home_anchor : work_anchor;
                    }
                }
                if (s.pattern != SimPattern::stationary && cfg.excursion_noise > 0.0 &&
                    rng.uniform01() < cfg.excursion_noise)
                    cell = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(cfg.n_cells)));
                int64_t ts = day_utc0 + sec;
                events.push_back({ts - ts % 10, cell});
            }
        }
        std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
            if (a.ts != b.ts) return a.ts < b.ts;
            return a.cell < b.cell;
        });
        sink(si, static_cast<const std::vector<detail::SynthEvent>&>(events));
    }
}

/// Streams the wide-format CDR CSV from generate_events.
inline uint64_t generate_cdr(const SynthConfig& cfg, const SynthCity& city,
                             const std::string& path) {
    uint64_t rows = 0;
    CsvWriter w(path);
    w.row({"sim_id", "timestamp", "cell_id", "customer_type", "subscription_type", "age", "gender",
           "tac"});
    char age_buf[8];
    generate_events(cfg, city, [&](size_t si, const std::vector<detail::SynthEvent>& events) {
        const GroundTruthSim& s = city.sims[si];
        const char* customer = s.business ? "business" : "consumer";
        bool postpaid = splitmix64(cfg.seed ^ (static_cast<uint64_t>(si) * 77u)) & 1u;
        const char* gender = s.business ? "unknown" : (s.gender_male ? "male" : "female");
        std::string_view age_sv = "unknown";
        if (s.age >= 0) {
            int len = std::snprintf(age_buf, sizeof(age_buf), "%d", s.age);
            age_sv = std::string_view(age_buf, static_cast<size_t>(len));
        }
        char tac_buf[16];
        std::snprintf(tac_buf, sizeof(tac_buf), "tac%03d",
                      static_cast<int>(splitmix64(cfg.seed ^ (static_cast<uint64_t>(si) + 99u)) % 500));

        for (size_t e = 0; e < events.size(); ++e) {
            w.field(s.sim_id);
            w.field(events[e].ts);
            w.field(city.cell_ids[static_cast<size_t>(events[e].cell)]);
            w.field(std::string_view(customer));
            // a planted conflict: subscription flips on the second half of the stream
            const char* subscription =
                s.conflicted_subscription && e >= events.size() / 2
                    ? (postpaid ? "prepaid" : "postpaid")
                    : (postpaid ? "postpaid" : "prepaid");
            w.field(std::string_view(subscription));
            w.field(age_sv);
            w.field(std::string_view(gender));
            w.field(std::string_view(tac_buf));
            w.end_row();
            ++rows;
        }
    });
    return rows;
}

inline void write_ground_truth(const SynthCity& city, const std::string& path) {
    CsvWriter w(path);
    w.row({"sim_id", "pattern", "home_cell_id", "work_cell_id", "age", "gender", "customer_type",
           "daily_rate"});
    for (const GroundTruthSim& s : city.sims) {
        w.field(s.sim_id);
        w.field(std::string_view(to_string(s.pattern)));
        w.field(city.cell_ids[static_cast<size_t>(s.home_cell)]);
        w.field(city.cell_ids[static_cast<size_t>(s.work_cell)]);
        if (s.age >= 0) w.field(static_cast<int64_t>(s.age));
        else w.field(std::string_view("unknown"));
        w.field(std::string_view(s.business ? "unknown" : (s.gender_male ? "male" : "female")));
        w.field(std::string_view(s.business ? "business" : "consumer"));
        w.field(s.daily_rate, 3);
        w.end_row();
    }
}

/// Census tables computed from the planted truth over the whole population:
/// what a perfect observer would report.
inline void write_census(const SynthCity& city, const SynthConfig& cfg,
                         const std::string& district_path, const std::string& age_path) {
    std::map<int, std::array<uint64_t, 4>> district_counts;
    std::map<int, std::array<uint64_t, 5>> age_counts;
    for (const GroundTruthSim& s : city.sims) {
        std::string hk, wk;
        int hid, wid;
        synth_admin_of(cfg, city.cell_xy[static_cast<size_t>(s.home_cell)], hk, hid);
        synth_admin_of(cfg, city.cell_xy[static_cast<size_t>(s.work_cell)], wk, wid);
        if (wk != "district") continue;
        auto& dc = district_counts[wid];
        if (hk == "district") ++dc[hid == wid ? 0 : 1];
        else if (hk == "agglomeration_sector") ++dc[2];
        else ++dc[3];
        if (hk == "agglomeration_sector" && s.age >= 20 && s.age < 100) {
            size_t b = s.age < 30 ? 0 : s.age < 40 ? 1 : s.age < 50 ? 2 : s.age < 60 ? 3 : 4;
            ++age_counts[hid][b];
        }
    }
    {
        CsvWriter w(district_path);
        w.row({"district", "same", "other_bp", "agglo", "outside"});
        for (const auto& [d, arr] : district_counts) {
            uint64_t total = arr[0] + arr[1] + arr[2] + arr[3];
            if (!total) continue;
            w.field(d);
            for (uint64_t c : arr) w.field(100.0 * static_cast<double>(c) / static_cast<double>(total), 4);
            w.end_row();
        }
    }
    {
        CsvWriter w(age_path);
        w.row({"sector", "a20_29", "a30_39", "a40_49", "a50_59", "a60p"});
        for (const auto& [s, arr] : age_counts) {
            uint64_t total = 0;
            for (uint64_t c : arr) total += c;
            if (!total) continue;
            w.field(s);
            for (uint64_t c : arr) w.field(100.0 * static_cast<double>(c) / static_cast<double>(total), 4);
            w.end_row();
        }
    }
}

} // namespace mobility
