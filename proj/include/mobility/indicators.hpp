#pragma once

// Per-SIM mobility indicators: radius of gyration, k-radius, normalized
// location entropy, travel diversity, and daily series. All positions are
// projected meters; results are km or dimensionless. Sums run in merged-id
// order so repeated runs are bit-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "mobility/calendar.hpp"
#include "mobility/geo.hpp"

namespace mobility {

struct Visit {
    uint32_t cell = 0;  // merged-cell index (ascending = merged_id ascending)
    XY pos;
    uint32_t count = 0;
};

using VisitHistogram = std::vector<Visit>;  // sorted by cell ascending

enum class MobilityClass : uint8_t { returner, explorer, undefined };

inline const char* to_string(MobilityClass c) {
    switch (c) {
        case MobilityClass::returner: return "returner";
        case MobilityClass::explorer: return "explorer";
        default: return "undefined";
    }
}

namespace detail {

// center of mass then spread, over the listed entries in list order
inline double rg_km_indexed(const VisitHistogram& h, const std::vector<uint32_t>& idx) {
    if (idx.size() <= 1) return 0.0;
    double n = 0.0, cx = 0.0, cy = 0.0;
    for (uint32_t i : idx) {
        const Visit& v = h[i];
        n += v.count;
        cx += static_cast<double>(v.count) * v.pos.x;
        cy += static_cast<double>(v.count) * v.pos.y;
    }
    cx /= n;
    cy /= n;
    double s = 0.0;
    for (uint32_t i : idx) {
        const Visit& v = h[i];
        double dx = v.pos.x - cx, dy = v.pos.y - cy;
        s += static_cast<double>(v.count) * (dx * dx + dy * dy);
    }
    return std::sqrt(s / n) / 1000.0;
}

} // namespace detail

inline double radius_of_gyration_km(const VisitHistogram& h) {
    std::vector<uint32_t> idx(h.size());
    std::iota(idx.begin(), idx.end(), 0u);
    return detail::rg_km_indexed(h, idx);
}

/// Radius of gyration over the k most visited locations only (ties broken
/// toward the smaller merged id); center of mass and total are recomputed on
/// the subset. With k >= |L| this follows the identical code path as the
/// full radius, so the two agree bit for bit.
inline double k_radius_km(const VisitHistogram& h, uint32_t k) {
    if (h.empty() || k == 0) return 0.0;
    std::vector<uint32_t> idx(h.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        if (h[a].count != h[b].count) return h[a].count > h[b].count;
        return h[a].cell < h[b].cell;
    });
    if (idx.size() > k) idx.resize(k);
    std::sort(idx.begin(), idx.end(),
              [&](uint32_t a, uint32_t b) { return h[a].cell < h[b].cell; });
    return detail::rg_km_indexed(h, idx);
}

/// Normalized entropy of a count distribution: -sum p ln p / ln N with
/// N = sum of counts; 0 when there is a single class or a single event.
/// Clamped to [0,1] against last-ulp drift in the uniform case.
template <typename Counts>
inline double normalized_entropy(const Counts& counts) {
    uint64_t n_total = 0;
    size_t classes = 0;
    for (auto c : counts) {
        n_total += static_cast<uint64_t>(c);
        ++classes;
    }
    if (classes <= 1 || n_total <= 1) return 0.0;
    double s = 0.0;
    for (auto c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(n_total);
        s -= p * std::log(p);
    }
    double e = s / std::log(static_cast<double>(n_total));
    return std::min(1.0, std::max(0.0, e));
}

inline double location_entropy(const VisitHistogram& h) {
    std::vector<uint64_t> counts;
    counts.reserve(h.size());
    for (const Visit& v : h) counts.push_back(v.count);
    return normalized_entropy(counts);
}

/// Returner iff rg_k > rg/2, explorer iff rg_k < rg/2; rg = 0 or the exact
/// boundary stays unclassified.
inline MobilityClass classify_mobility(double rg_km, double rg_k_km) {
    if (rg_km <= 0.0) return MobilityClass::undefined;
    if (rg_k_km > rg_km / 2.0) return MobilityClass::returner;
    if (rg_k_km < rg_km / 2.0) return MobilityClass::explorer;
    return MobilityClass::undefined;
}

/// Entropy over k-grams of the self-transition-collapsed location sequence.
/// Undirected mode sorts each k-gram, folding both directions of a travel
/// into one class. k=1 reproduces the location entropy of the collapsed
/// sequence.
inline double travel_diversity(const std::vector<uint32_t>& seq, uint32_t k, bool directed) {
    if (k == 0 || seq.empty()) return 0.0;
    std::vector<uint32_t> collapsed;
    collapsed.reserve(seq.size());
    for (uint32_t cell : seq)
        if (collapsed.empty() || collapsed.back() != cell) collapsed.push_back(cell);
    if (collapsed.size() < k) return 0.0;

    std::map<std::vector<uint32_t>, uint64_t> grams;
    std::vector<uint32_t> gram(k);
    for (size_t i = 0; i + k <= collapsed.size(); ++i) {
        std::copy(collapsed.begin() + static_cast<long>(i),
                  collapsed.begin() + static_cast<long>(i + k), gram.begin());
        if (!directed) std::sort(gram.begin(), gram.end());
        ++grams[gram];
    }
    std::vector<uint64_t> counts;
    counts.reserve(grams.size());
    for (const auto& [g, c] : grams) counts.push_back(c);
    return normalized_entropy(counts);
}

struct MobilityIndicators {
    double rg_km = 0.0;
    double rg_k_km = 0.0;
    double entropy = 0.0;
    MobilityClass mobility_class = MobilityClass::undefined;
    uint32_t location_count = 0;
};

inline MobilityIndicators compute_indicators(const VisitHistogram& h, uint32_t k = 2) {
    MobilityIndicators m;
    m.rg_km = radius_of_gyration_km(h);
    m.rg_k_km = k_radius_km(h, k);
    m.entropy = location_entropy(h);
    m.mobility_class = classify_mobility(m.rg_km, m.rg_k_km);
    m.location_count = static_cast<uint32_t>(h.size());
    return m;
}

struct DailyIndicators {
    int32_t day = 0;
    DayType day_type = DayType::workday;
    double rg_km = 0.0;
    double entropy = 0.0;
    uint32_t location_count = 0;
};

/// Indicators per local calendar day from that day's records only.
inline std::vector<DailyIndicators> daily_series(
    const std::vector<std::pair<int64_t, uint32_t>>& events,  // (timestamp, merged index)
    const std::vector<XY>& cell_pos, const HolidayCalendar& cal) {
    std::map<int32_t, std::map<uint32_t, uint32_t>> per_day;
    for (const auto& [ts, cell] : events) ++per_day[cal.local_day(ts)][cell];
    std::vector<DailyIndicators> out;
    out.reserve(per_day.size());
    for (const auto& [day, counts] : per_day) {
        VisitHistogram h;
        h.reserve(counts.size());
        for (const auto& [cell, count] : counts)
            h.push_back(Visit{cell, cell_pos[cell], count});
        DailyIndicators d;
        d.day = day;
        d.day_type = cal.day_type(day);
        d.rg_km = radius_of_gyration_km(h);
        d.entropy = location_entropy(h);
        d.location_count = static_cast<uint32_t>(h.size());
        out.push_back(d);
    }
    return out;
}

} // namespace mobility
