#pragma once

// Socioeconomic stratification: price categories, equal-sum strata, work
// price quartile groups, per-category indicator statistics, the stationary
// filter, and commuting tables with census comparison.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mobility/calendar.hpp"
#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/spatial.hpp"

namespace mobility {

inline constexpr double kPriceCatMin = 200000.0;   // HUF/m²
inline constexpr double kPriceCatMax = 1200000.0;
inline constexpr double kPriceCatWidth = 100000.0;
inline constexpr int kPriceCatCount = 10;

/// Ten 0.1M-wide bins over [0.2M, 1.2M]; bin i is [lo+(i-1)w, lo+iw), the
/// last closed above. 0 = unassigned (outside the residential price range).
inline int price_category(double v) {
    if (!(v >= kPriceCatMin) || v > kPriceCatMax) return 0;
    if (v == kPriceCatMax) return kPriceCatCount;
    int cat = static_cast<int>((v - kPriceCatMin) / kPriceCatWidth) + 1;
    return std::min(cat, kPriceCatCount);
}

/// Equal-sum strata: sort ascending (ties by sim_id), grow the current
/// stratum until its sum reaches remaining_sum / remaining_strata, always
/// leaving at least one element for every stratum still to come. With
/// non-decreasing values the poorest strata are the largest.
inline std::map<std::string, int> stratify_equal_sum(
    std::vector<std::pair<std::string, double>> values, int q) {
    if (q < 1) throw InputError("stratum count must be >= 1");
    if (static_cast<size_t>(q) > values.size())
        throw InputError("stratum count exceeds population: q=" + std::to_string(q) +
                         " > n=" + std::to_string(values.size()));
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    double remaining_sum = 0.0;
    for (const auto& [sim, v] : values) remaining_sum += v;

    std::map<std::string, int> out;
    size_t i = 0, n = values.size();
    for (int s = 1; s <= q; ++s) {
        if (s == q) {
            for (; i < n; ++i) out[values[i].first] = s;
            break;
        }
        size_t need_later = static_cast<size_t>(q - s);
        double target = remaining_sum / (q - s + 1);
        double running = 0.0;
        do {
            out[values[i].first] = s;
            running += values[i].second;
            ++i;
        } while (i < n && (n - i) > need_later && running < target);
        remaining_sum -= running;
    }
    return out;
}

/// Linear interpolation between order statistics ("type 7"): quantile p of
/// a sorted sample.
inline double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (sorted.size() == 1) return sorted[0];
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    size_t lo = static_cast<size_t>(h);
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

enum class QuartileGroup : uint8_t { minQ1, Q1Q3, Q3max };

inline const char* to_string(QuartileGroup g) {
    switch (g) {
        case QuartileGroup::minQ1: return "minQ1";
        case QuartileGroup::Q3max: return "Q3max";
        default: return "Q1Q3";
    }
}

inline bool parse_quartile_group(std::string_view s, QuartileGroup& out) {
    if (s == "minQ1") out = QuartileGroup::minQ1;
    else if (s == "Q1Q3") out = QuartileGroup::Q1Q3;
    else if (s == "Q3max") out = QuartileGroup::Q3max;
    else return false;
    return true;
}

/// Splits SIMs of one home price category by work-cell price: below Q1,
/// inside [Q1, Q3], above Q3. Fewer than 4 SIMs → everyone Q1Q3.
inline std::map<std::string, QuartileGroup> quartile_groups(
    const std::vector<std::pair<std::string, double>>& work_prices) {
    std::map<std::string, QuartileGroup> out;
    if (work_prices.size() < 4) {
        for (const auto& [sim, v] : work_prices) out[sim] = QuartileGroup::Q1Q3;
        return out;
    }
    std::vector<double> sorted;
    sorted.reserve(work_prices.size());
    for (const auto& [sim, v] : work_prices) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());
    double q1 = quantile_type7(sorted, 0.25);
    double q3 = quantile_type7(sorted, 0.75);
    for (const auto& [sim, v] : work_prices) {
        if (v < q1) out[sim] = QuartileGroup::minQ1;
        else if (v > q3) out[sim] = QuartileGroup::Q3max;
        else out[sim] = QuartileGroup::Q1Q3;
    }
    return out;
}

struct SummaryStats {
    size_t count = 0;
    double mean = 0.0, min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline SummaryStats summarize(std::vector<double> v) {
    SummaryStats s;
    s.count = v.size();
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    s.min = v.front();
    s.max = v.back();
    s.q1 = quantile_type7(v, 0.25);
    s.median = quantile_type7(v, 0.50);
    s.q3 = quantile_type7(v, 0.75);
    return s;
}

/// Descriptive statistics of one indicator per (price category, day type).
inline std::map<std::pair<int, DayType>, SummaryStats> aggregate_by_category(
    const std::vector<std::tuple<int, DayType, double>>& rows) {
    std::map<std::pair<int, DayType>, std::vector<double>> groups;
    for (const auto& [cat, dt, value] : rows) groups[{cat, dt}].push_back(value);
    std::map<std::pair<int, DayType>, SummaryStats> out;
    for (auto& [key, values] : groups) out.emplace(key, summarize(std::move(values)));
    return out;
}

/// Devices that barely move are left out of the SES analyses: radius of
/// gyration or home-work distance strictly below 1 km. A missing home-work
/// distance is not evidence of stationarity.
inline bool is_stationary(double rg_km, double home_work_km) {
    if (rg_km < 1.0) return true;
    return home_work_km == home_work_km && home_work_km < 1.0;
}

// ---- commuting tables ----

struct CommuterRow {
    AdminLabel home;
    AdminLabel work;
    int age = -1;  // -1 = unknown
};

inline constexpr int kDistrictOriginCols = 4;  // same, other_bp, agglo, outside
inline constexpr int kAgeCols = 5;             // 20-29 .. 60+

inline const char* district_origin_name(int i) {
    static const char* names[kDistrictOriginCols] = {"same", "other_bp", "agglo", "outside"};
    return names[i];
}
inline const char* age_col_name(int i) {
    static const char* names[kAgeCols] = {"a20_29", "a30_39", "a40_49", "a50_59", "a60p"};
    return names[i];
}

/// Bucket index for the commuting age table; -1 = excluded (unknown, under
/// 20 or 100+).
inline int age_bucket(int age) {
    if (age < 20 || age >= 100) return -1;
    if (age < 30) return 0;
    if (age < 40) return 1;
    if (age < 50) return 2;
    if (age < 60) return 3;
    return 4;
}

struct CommuteTables {
    // work district → % of workers by home origin, with supporting counts
    std::map<int, std::array<double, kDistrictOriginCols>> district;
    std::map<int, std::array<uint64_t, kDistrictOriginCols>> district_counts;
    // home agglomeration sector (workers commuting into Budapest) → % by age
    std::map<int, std::array<double, kAgeCols>> age;
    std::map<int, std::array<uint64_t, kAgeCols>> age_counts;
};

/// Restricted to SIMs working in a Budapest district. Each district row
/// splits workers by home origin; each sector row splits in-commuters from
/// that sector by age (unknown ages dropped from the age table).
inline CommuteTables commuting_tables(const std::vector<CommuterRow>& rows) {
    CommuteTables t;
    for (const CommuterRow& r : rows) {
        if (r.work.kind != AdminKind::district) continue;
        auto& dc = t.district_counts[r.work.id];
        if (r.home.kind == AdminKind::district)
            ++dc[r.home.id == r.work.id ? 0 : 1];
        else if (r.home.kind == AdminKind::agglomeration_sector)
            ++dc[2];
        else
            ++dc[3];
        if (r.home.kind == AdminKind::agglomeration_sector) {
            int b = age_bucket(r.age);
            if (b >= 0) ++t.age_counts[r.home.id][static_cast<size_t>(b)];
        }
    }
    auto to_percent = [](const auto& counts, auto& out) {
        for (const auto& [key, arr] : counts) {
            uint64_t total = 0;
            for (uint64_t c : arr) total += c;
            if (total == 0) continue;
            auto& row = out[key];
            for (size_t i = 0; i < arr.size(); ++i)
                row[i] = 100.0 * static_cast<double>(arr[i]) / static_cast<double>(total);
        }
    };
    to_percent(t.district_counts, t.district);
    to_percent(t.age_counts, t.age);
    return t;
}

template <size_t K>
struct CensusComparison {
    std::map<int, std::array<double, K>> abs_diff;
    std::map<int, std::array<double, K>> rel_diff;  // abs/census, NaN where census = 0
    double mean_abs_diff = 0.0;
};

/// Reads a census reference table: integer key column then K percentage
/// columns, header checked verbatim.
template <size_t K>
inline std::map<int, std::array<double, K>> parse_census_csv(
    const std::string& path, const std::vector<std::string>& expected_header) {
    std::map<int, std::array<double, K>> out;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& header) {
            bool ok = header.size() == K + 1;
            for (size_t i = 0; ok && i <= K; ++i) ok = header[i] == expected_header[i];
            if (!ok) {
                std::string want;
                for (const auto& h : expected_header) {
                    if (!want.empty()) want += ',';
                    want += h;
                }
                throw InputError("bad census header in " + path + " (expected " + want + ")");
            }
        },
        [&](const std::vector<std::string_view>& f) {
            int64_t key;
            std::array<double, K> row;
            if (f.size() != K + 1 || !parse_i64(f[0], key))
                throw InputError("malformed census row in " + path);
            for (size_t i = 0; i < K; ++i)
                if (!parse_double(f[i + 1], row[i]))
                    throw InputError("malformed census row in " + path);
            if (!out.emplace(static_cast<int>(key), row).second)
                throw InputError("duplicate census key in " + path + ": " + std::to_string(key));
        });
    return out;
}

template <size_t K>
inline CensusComparison<K> compare_to_census(const std::map<int, std::array<double, K>>& cdr,
                                             const std::map<int, std::array<double, K>>& census) {
    std::string missing;
    for (const auto& [key, row] : cdr)
        if (!census.count(key)) missing += " cdr:" + std::to_string(key);
    for (const auto& [key, row] : census)
        if (!cdr.count(key)) missing += " census:" + std::to_string(key);
    if (!missing.empty()) throw InputError("census key mismatch:" + missing);

    CensusComparison<K> cmp;
    double total = 0.0;
    size_t cells = 0;
    for (const auto& [key, cdr_row] : cdr) {
        const auto& cen_row = census.at(key);
        auto& abs_row = cmp.abs_diff[key];
        auto& rel_row = cmp.rel_diff[key];
        for (size_t i = 0; i < K; ++i) {
            abs_row[i] = std::fabs(cdr_row[i] - cen_row[i]);
            rel_row[i] = cen_row[i] != 0.0 ? abs_row[i] / cen_row[i]
                                           : std::numeric_limits<double>::quiet_NaN();
            total += abs_row[i];
            ++cells;
        }
    }
    cmp.mean_abs_diff = cells ? total / static_cast<double>(cells) : 0.0;
    return cmp;
}

} // namespace mobility
