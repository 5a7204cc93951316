#pragma once

// Per-SIM activity statistics, exploratory distributions, and the activity
// filter that gates the mobility analysis.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mobility/calendar.hpp"
#include "mobility/keys.hpp"

namespace mobility {

struct SimActivityStats {
    uint64_t total_records = 0;
    uint32_t active_days = 0;
    double weekday_daily_mean = 0.0;  // over active workdays only
    double weekend_daily_mean = 0.0;  // over active weekend/holiday days only
    double records_per_day_mean = 0.0;
};

struct ActivityCriteria {
    uint32_t min_days = 20;
    double min_weekday_mean = 40.0;
    double min_weekend_mean = 20.0;
    double max_daily_mean = 1000.0;
};

/// Order-insensitive per-(sim, local day) record counter.
class ActivityAccumulator {
public:
    void add(std::string_view sim_id, int64_t ts, const HolidayCalendar& cal) {
        auto it = index_.find(sim_id);
        if (it == index_.end()) {
            it = index_.emplace(std::string(sim_id), day_counts_.size()).first;
            day_counts_.emplace_back();
        }
        ++day_counts_[it->second][cal.local_day(ts)];
    }

    std::map<std::string, SimActivityStats> finalize(const HolidayCalendar& cal) const {
        std::map<std::string, SimActivityStats> out;
        for (const auto& [sim, idx] : index_) {
            const auto& days = day_counts_[idx];
            SimActivityStats s;
            uint64_t wd_sum = 0, we_sum = 0;
            uint32_t wd_days = 0, we_days = 0;
            for (const auto& [day, count] : days) {
                s.total_records += count;
                if (cal.day_type(day) == DayType::workday) {
                    wd_sum += count;
                    ++wd_days;
                } else {
                    we_sum += count;
                    ++we_days;
                }
            }
            s.active_days = static_cast<uint32_t>(days.size());
            s.weekday_daily_mean = wd_days ? static_cast<double>(wd_sum) / wd_days : 0.0;
            s.weekend_daily_mean = we_days ? static_cast<double>(we_sum) / we_days : 0.0;
            s.records_per_day_mean =
                s.active_days ? static_cast<double>(s.total_records) / s.active_days : 0.0;
            out.emplace(sim, s);
        }
        return out;
    }

private:
    StringMap<size_t> index_;
    std::vector<std::map<int32_t, uint32_t>> day_counts_;
};

/// Buckets {=1, (1,10], (10,100], (100,1000], >1000} with SIM and activity
/// shares per bucket.
struct ActivityCategories {
    static constexpr int kBuckets = 5;
    std::array<uint64_t, kBuckets> sim_count{};
    std::array<uint64_t, kBuckets> record_count{};

    static int bucket_of(uint64_t records) {
        if (records <= 1) return 0;
        if (records <= 10) return 1;
        if (records <= 100) return 2;
        if (records <= 1000) return 3;
        return 4;
    }
    static const char* bucket_name(int b) {
        static const char* names[kBuckets] = {"=1", "(1,10]", "(10,100]", "(100,1000]", ">1000"};
        return names[b];
    }

    double sim_share(int b) const {
        uint64_t total = 0;
        for (uint64_t c : sim_count) total += c;
        return total ? static_cast<double>(sim_count[b]) / total : 0.0;
    }
    double activity_share(int b) const {
        uint64_t total = 0;
        for (uint64_t c : record_count) total += c;
        return total ? static_cast<double>(record_count[b]) / total : 0.0;
    }
};

inline ActivityCategories activity_categories(const std::map<std::string, SimActivityStats>& stats) {
    ActivityCategories cats;
    for (const auto& [sim, s] : stats) {
        int b = ActivityCategories::bucket_of(s.total_records);
        ++cats.sim_count[b];
        cats.record_count[b] += s.total_records;
    }
    return cats;
}

inline bool passes_filter(const SimActivityStats& s, const ActivityCriteria& c) {
    return s.active_days >= c.min_days && s.weekday_daily_mean >= c.min_weekday_mean &&
           s.weekend_daily_mean >= c.min_weekend_mean && s.records_per_day_mean <= c.max_daily_mean;
}

inline std::vector<std::string> select_active(const std::map<std::string, SimActivityStats>& stats,
                                              const ActivityCriteria& criteria = {}) {
    std::vector<std::string> out;
    for (const auto& [sim, s] : stats)
        if (passes_filter(s, criteria)) out.push_back(sim);
    return out;  // sorted: stats is an ordered map
}

/// 7x24 grid of record counts by local day-of-week and hour.
struct DayHourMatrix {
    std::array<std::array<uint64_t, 24>, 7> counts{};

    void add(int64_t ts, const HolidayCalendar& cal) {
        int32_t day = cal.local_day(ts);
        int dow = HolidayCalendar::day_of_week(day);
        int hour = cal.local_second_of_day(ts) / 3600;
        ++counts[static_cast<size_t>(dow)][static_cast<size_t>(hour)];
    }

    uint64_t total() const {
        uint64_t t = 0;
        for (const auto& row : counts)
            for (uint64_t c : row) t += c;
        return t;
    }
};

inline std::map<uint32_t, uint32_t> active_days_histogram(
    const std::map<std::string, SimActivityStats>& stats) {
    std::map<uint32_t, uint32_t> hist;
    for (const auto& [sim, s] : stats) ++hist[s.active_days];
    return hist;
}

} // namespace mobility
