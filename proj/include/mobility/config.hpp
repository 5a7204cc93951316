#pragma once

// Flat key=value run configuration shared by every subcommand. Command-line
// flags are applied through the same `set` entry point, so flags win simply
// by being applied last.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mobility/activity.hpp"
#include "mobility/calendar.hpp"
#include "mobility/error.hpp"
#include "mobility/geo.hpp"

namespace mobility {

struct RunConfig {
    // inputs and outputs
    std::string cdr;
    std::string cells;
    std::string listings;
    std::string admin;
    std::string outdir = "out";
    std::string census_district;  // optional census reference tables
    std::string census_age;

    // geometry
    double center_lon = 19.05;
    double center_lat = 47.4979;
    BoundingBox bbox{18.4, 19.7, 47.0, 48.0};
    double merge_eps_m = 100.0;
    double boundary_radius_km = 25.0;  // voronoi clip circle about the center
    uint32_t min_listings = 1;

    // calendar
    int tz_offset_min = 120;
    std::vector<std::string> holidays;

    // analysis knobs
    ActivityCriteria criteria;
    uint32_t rg_k = 2;
    int strata_q = 10;
    uint32_t diversity_k = 2;
    bool diversity_directed = true;

    int threads = 1;

    Projection projection() const { return Projection({center_lon, center_lat}, bbox); }

    HolidayCalendar calendar() const {
        HolidayCalendar cal;
        cal.tz_offset_min = tz_offset_min;
        for (const std::string& h : holidays) cal.add_holiday(h);
        return cal;
    }

    void set(const std::string& key, const std::string& value) {
        auto as_double = [&]() {
            double v;
            if (!parse_double(value, v))
                throw InputError("config key " + key + ": bad number '" + value + "'");
            return v;
        };
        auto as_int = [&]() {
            int64_t v;
            if (!parse_i64(value, v))
                throw InputError("config key " + key + ": bad integer '" + value + "'");
            return v;
        };
        if (key == "cdr") cdr = value;
        else if (key == "cells") cells = value;
        else if (key == "listings") listings = value;
        else if (key == "admin") admin = value;
        else if (key == "outdir") outdir = value;
        else if (key == "census_district") census_district = value;
        else if (key == "census_age") census_age = value;
        else if (key == "center_lon") center_lon = as_double();
        else if (key == "center_lat") center_lat = as_double();
        else if (key == "bbox_lon_min") bbox.lon_min = as_double();
        else if (key == "bbox_lon_max") bbox.lon_max = as_double();
        else if (key == "bbox_lat_min") bbox.lat_min = as_double();
        else if (key == "bbox_lat_max") bbox.lat_max = as_double();
        else if (key == "merge_eps_m") merge_eps_m = as_double();
        else if (key == "boundary_radius_km") boundary_radius_km = as_double();
        else if (key == "min_listings") min_listings = static_cast<uint32_t>(as_int());
        else if (key == "tz_offset_min") tz_offset_min = static_cast<int>(as_int());
        else if (key == "holidays") {
            holidays.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) holidays.push_back(item);
        } else if (key == "min_active_days") criteria.min_days = static_cast<uint32_t>(as_int());
        else if (key == "min_weekday_mean") criteria.min_weekday_mean = as_double();
        else if (key == "min_weekend_mean") criteria.min_weekend_mean = as_double();
        else if (key == "max_daily_mean") criteria.max_daily_mean = as_double();
        else if (key == "rg_k") rg_k = static_cast<uint32_t>(as_int());
        else if (key == "strata_q") strata_q = static_cast<int>(as_int());
        else if (key == "diversity_k") diversity_k = static_cast<uint32_t>(as_int());
        else if (key == "diversity_directed") diversity_directed = as_int() != 0;
        else if (key == "threads") threads = static_cast<int>(as_int());
        else throw InputError("unknown config key: " + key);

        if (merge_eps_m <= 0 || boundary_radius_km <= 0 || rg_k < 1 || strata_q < 1 ||
            diversity_k < 1 || threads < 1)
            throw InputError("config key " + key + ": value out of range");
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open config file: " + path);
        RunConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            size_t start = line.find_first_not_of(" \t");
            if (start == std::string::npos || line[start] == '#') continue;
            size_t eq = line.find('=', start);
            if (eq == std::string::npos)
                throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
            std::string key = line.substr(start, eq - start);
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            std::string value = line.substr(eq + 1);
            size_t vs = value.find_first_not_of(" \t");
            value = vs == std::string::npos ? std::string{} : value.substr(vs);
            while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
            cfg.set(key, value);
        }
        return cfg;
    }
};

} // namespace mobility
