#pragma once

// Home/work anchor estimation from time-window activity counts. All cell
// references here are merged-cell indices into the sorted merged-cell table;
// the CSV layer maps them back to merged ids.

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobility/calendar.hpp"
#include "mobility/spatial.hpp"

namespace mobility {

enum class SlotClass : uint8_t { work_window, home_window, neither };

/// Clock-time window classification. Workday 09:00:00-15:59:59 is the work
/// window; workday 22:00:00-05:59:59 the home window; every second of a
/// weekend or holiday is home window. Stateless: a night record belongs to
/// its own day's type regardless of when the evening began.
inline SlotClass classify_slot(int64_t ts, const HolidayCalendar& cal) {
    if (cal.day_type_of(ts) == DayType::holiday) return SlotClass::home_window;
    int s = cal.local_second_of_day(ts);
    if (s >= 9 * 3600 && s < 16 * 3600) return SlotClass::work_window;
    if (s >= 22 * 3600 || s < 6 * 3600) return SlotClass::home_window;
    return SlotClass::neither;
}

struct AnchorEstimate {
    int32_t home_cell = -1;  // merged-cell index, -1 = absent
    int32_t work_cell = -1;
    uint32_t home_count = 0;
    uint32_t work_count = 0;
    double home_work_km = std::numeric_limits<double>::quiet_NaN();

    bool has_home() const { return home_cell >= 0; }
    bool has_work() const { return work_cell >= 0; }
    bool has_distance() const { return home_work_km == home_work_km; }
};

/// Per-SIM window counters keyed by merged-cell index.
struct AnchorCounts {
    std::unordered_map<uint32_t, uint32_t> home;
    std::unordered_map<uint32_t, uint32_t> work;

    void add(uint32_t cell_idx, int64_t ts, const HolidayCalendar& cal) {
        switch (classify_slot(ts, cal)) {
            case SlotClass::work_window: ++work[cell_idx]; break;
            case SlotClass::home_window: ++home[cell_idx]; break;
            case SlotClass::neither: break;
        }
    }
};

namespace detail {

// argmax by count, ties to the smallest index; merged cells are sorted by
// merged_id so smallest index = smallest merged_id
inline void pick_anchor(const std::unordered_map<uint32_t, uint32_t>& counts, int32_t& cell,
                        uint32_t& count) {
    cell = -1;
    count = 0;
    for (const auto& [idx, c] : counts) {
        if (cell < 0 || c > count || (c == count && static_cast<int32_t>(idx) < cell)) {
            cell = static_cast<int32_t>(idx);
            count = c;
        }
    }
}

} // namespace detail

inline AnchorEstimate estimate_anchors(const AnchorCounts& counts,
                                       const std::vector<MergedCell>& merged) {
    AnchorEstimate est;
    detail::pick_anchor(counts.home, est.home_cell, est.home_count);
    detail::pick_anchor(counts.work, est.work_cell, est.work_count);
    if (est.has_home() && est.has_work())
        est.home_work_km = distance_m(merged[static_cast<size_t>(est.home_cell)].centroid_xy,
                                      merged[static_cast<size_t>(est.work_cell)].centroid_xy) /
                           1000.0;
    return est;
}

} // namespace mobility
