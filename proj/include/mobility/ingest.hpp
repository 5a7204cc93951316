#pragma once

// Parsing and normalization of the three input files: call-detail records,
// the cell reference table, and estate listings. Row-level problems are
// counted and skipped; unreadable files and ambiguous reference data are
// fatal.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/geo.hpp"
#include "mobility/keys.hpp"

namespace mobility {

enum class CustomerType : uint8_t { business, consumer, unknown };
enum class SubscriptionType : uint8_t { prepaid, postpaid, unknown };
enum class Gender : uint8_t { male, female, unknown };

inline constexpr int kAgeUnknown = -1;

inline const char* to_string(CustomerType v) {
    switch (v) {
        case CustomerType::business: return "business";
        case CustomerType::consumer: return "consumer";
        default: return "unknown";
    }
}
inline const char* to_string(SubscriptionType v) {
    switch (v) {
        case SubscriptionType::prepaid: return "prepaid";
        case SubscriptionType::postpaid: return "postpaid";
        default: return "unknown";
    }
}
inline const char* to_string(Gender v) {
    switch (v) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        default: return "unknown";
    }
}

struct SimAttributes {
    CustomerType customer_type = CustomerType::unknown;
    SubscriptionType subscription_type = SubscriptionType::unknown;
    int age = kAgeUnknown;  // unknown or in [0, 100)
    Gender gender = Gender::unknown;
    std::string tac;        // empty = unknown
};

struct RawCell {
    std::string cell_id;
    LonLat centroid;
    LonLat base_station;
    double area_m2 = 0.0;
};

struct EstateListing {
    std::string listing_id;
    LonLat location;
    double total_price = 0.0;   // HUF
    double floor_m2 = 0.0;
    double price_per_m2 = 0.0;  // derived: total_price / floor_m2
};

struct CdrParseReport {
    uint64_t total_rows = 0;
    uint64_t parsed = 0;
    uint64_t malformed = 0;
    uint64_t dropped_unknown_cell = 0;
};

struct CellParseReport {
    uint64_t total_rows = 0;
    uint64_t parsed = 0;
    uint64_t dropped_out_of_bbox = 0;
};

struct ListingParseReport {
    uint64_t total_rows = 0;
    uint64_t parsed = 0;
    uint64_t malformed = 0;
    uint64_t dropped_nonpositive_floor = 0;
};

namespace detail {

inline bool parse_customer(std::string_view s, CustomerType& out) {
    if (s == "business") out = CustomerType::business;
    else if (s == "consumer") out = CustomerType::consumer;
    else if (s.empty() || s == "unknown") out = CustomerType::unknown;
    else return false;
    return true;
}
inline bool parse_subscription(std::string_view s, SubscriptionType& out) {
    if (s == "prepaid") out = SubscriptionType::prepaid;
    else if (s == "postpaid") out = SubscriptionType::postpaid;
    else if (s.empty() || s == "unknown") out = SubscriptionType::unknown;
    else return false;
    return true;
}
inline bool parse_gender(std::string_view s, Gender& out) {
    if (s == "male") out = Gender::male;
    else if (s == "female") out = Gender::female;
    else if (s.empty() || s == "unknown") out = Gender::unknown;
    else return false;
    return true;
}
inline bool parse_age(std::string_view s, int& out) {
    if (s.empty() || s == "unknown") {
        out = kAgeUnknown;
        return true;
    }
    int64_t v;
    if (!parse_i64(s, v) || v < 0 || v >= 100) return false;
    out = static_cast<int>(v);
    return true;
}

} // namespace detail

/// One pass over a CDR file. Emits each valid event through `record_fn`
/// (timestamps truncated down to 10 s) and, when the file carries the wide
/// attribute columns, one attribute observation per row through `attr_fn`.
/// Rows referencing cells absent from `known_cells` are dropped and counted.
inline CdrParseReport parse_cdr(
    const std::string& path, const StringSet& known_cells,
    const std::function<void(std::string_view sim_id, int64_t ts, std::string_view cell_id)>& record_fn,
    const std::function<void(std::string_view sim_id, const SimAttributes&)>& attr_fn = nullptr) {
    CdrParseReport report;
    bool has_attrs = false;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& header) {
            bool narrow = header.size() == 3;
            bool wide = header.size() == 8 && header[3] == "customer_type" &&
                        header[4] == "subscription_type" && header[5] == "age" &&
                        header[6] == "gender" && header[7] == "tac";
            if (!(narrow || wide) || header[0] != "sim_id" || header[1] != "timestamp" ||
                header[2] != "cell_id")
                throw InputError("bad CDR header in " + path +
                                 " (expected sim_id,timestamp,cell_id[,customer_type,"
                                 "subscription_type,age,gender,tac])");
            has_attrs = wide;
        },
        [&](const std::vector<std::string_view>& f) {
            ++report.total_rows;
            if (f.size() != (has_attrs ? 8u : 3u)) {
                ++report.malformed;
                return;
            }
            int64_t ts;
            if (f[0].empty() || f[2].empty() || !parse_i64(f[1], ts) || ts < 0) {
                ++report.malformed;
                return;
            }
            SimAttributes attrs;
            if (has_attrs) {
                int age;
                if (!detail::parse_customer(f[3], attrs.customer_type) ||
                    !detail::parse_subscription(f[4], attrs.subscription_type) ||
                    !detail::parse_age(f[5], age) || !detail::parse_gender(f[6], attrs.gender)) {
                    ++report.malformed;
                    return;
                }
                attrs.age = age;
                if (f[7] != "unknown") attrs.tac = std::string(f[7]);
            }
            if (known_cells.find(f[2]) == known_cells.end()) {
                ++report.dropped_unknown_cell;
                return;
            }
            ++report.parsed;
            record_fn(f[0], ts - ts % 10, f[2]);
            if (has_attrs && attr_fn) attr_fn(f[0], attrs);
        });
    return report;
}

/// Per-field union of observed values; any field seen with two or more
/// distinct values (unknown counts as a value) collapses to unknown.
/// Order-insensitive, and a fixed point on its own output.
class AttributeReducer {
public:
    void observe(std::string_view sim_id, const SimAttributes& a) {
        State& s = states_[std::string(sim_id)];
        merge_enum(static_cast<uint8_t>(a.customer_type), static_cast<uint8_t>(CustomerType::unknown),
                   s.customer_seen, s.customer);
        merge_enum(static_cast<uint8_t>(a.subscription_type),
                   static_cast<uint8_t>(SubscriptionType::unknown), s.subscription_seen, s.subscription);
        if (!s.age_conflict) {
            if (!s.age_seen) {
                s.age = a.age;
                s.age_seen = true;
            } else if (s.age != a.age) {
                s.age_conflict = true;
            }
        }
        merge_enum(static_cast<uint8_t>(a.gender), static_cast<uint8_t>(Gender::unknown), s.gender_seen,
                   s.gender);
        if (!s.tac_conflict) {
            if (!s.tac_seen) {
                s.tac = a.tac;
                s.tac_seen = true;
            } else if (s.tac != a.tac) {
                s.tac_conflict = true;
            }
        }
    }

    std::map<std::string, SimAttributes> finalize() const {
        std::map<std::string, SimAttributes> out;
        for (const auto& [sim, s] : states_) {
            SimAttributes a;
            a.customer_type = s.customer_conflict() ? CustomerType::unknown
                                                    : static_cast<CustomerType>(s.customer);
            a.subscription_type = s.subscription_conflict()
                                      ? SubscriptionType::unknown
                                      : static_cast<SubscriptionType>(s.subscription);
            a.age = s.age_conflict ? kAgeUnknown : s.age;
            a.gender = s.gender_conflict() ? Gender::unknown : static_cast<Gender>(s.gender);
            a.tac = s.tac_conflict ? std::string{} : s.tac;
            out.emplace(sim, std::move(a));
        }
        return out;
    }

private:
    struct State {
        uint8_t customer = 2, subscription = 2, gender = 2;
        uint8_t customer_seen = 0, subscription_seen = 0, gender_seen = 0;  // bitmask over enum values
        int age = kAgeUnknown;
        bool age_seen = false, age_conflict = false;
        std::string tac;
        bool tac_seen = false, tac_conflict = false;

        static bool multi(uint8_t mask) { return (mask & (mask - 1)) != 0; }
        bool customer_conflict() const { return multi(customer_seen); }
        bool subscription_conflict() const { return multi(subscription_seen); }
        bool gender_conflict() const { return multi(gender_seen); }
    };

    static void merge_enum(uint8_t value, uint8_t /*unknown*/, uint8_t& seen_mask, uint8_t& stored) {
        seen_mask |= static_cast<uint8_t>(1u << value);
        stored = value;
    }

    std::unordered_map<std::string, State> states_;
};

inline std::map<std::string, SimAttributes> normalize_attributes(
    const std::vector<std::pair<std::string, SimAttributes>>& observations) {
    AttributeReducer reducer;
    for (const auto& [sim, a] : observations) reducer.observe(sim, a);
    return reducer.finalize();
}

/// Loads the cell reference table. Duplicate cell ids are fatal; centroids
/// outside the bounding box are dropped and counted. Malformed rows are
/// fatal too: this is reference data, not a bulk dump.
inline std::vector<RawCell> parse_cells(const std::string& path, const BoundingBox& bbox,
                                        CellParseReport* report_out = nullptr) {
    std::vector<RawCell> cells;
    std::unordered_set<std::string> seen;
    CellParseReport report;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& header) {
            if (header.size() != 6 || header[0] != "cell_id")
                throw InputError("bad cell table header in " + path +
                                 " (expected cell_id,centroid_lon,centroid_lat,base_lon,base_lat,area_m2)");
        },
        [&](const std::vector<std::string_view>& f) {
            ++report.total_rows;
            RawCell c;
            if (f.size() != 6 || f[0].empty() || !parse_double(f[1], c.centroid.lon) ||
                !parse_double(f[2], c.centroid.lat) || !parse_double(f[3], c.base_station.lon) ||
                !parse_double(f[4], c.base_station.lat) || !parse_double(f[5], c.area_m2))
                throw InputError("malformed cell row " + std::to_string(report.total_rows) + " in " + path);
            c.cell_id = std::string(f[0]);
            if (!seen.insert(c.cell_id).second)
                throw InputError("duplicate cell_id in " + path + ": " + c.cell_id);
            if (!bbox.contains(c.centroid)) {
                ++report.dropped_out_of_bbox;
                return;
            }
            ++report.parsed;
            cells.push_back(std::move(c));
        });
    if (report_out) *report_out = report;
    return cells;
}

/// Loads estate listings and derives price per square meter. Rows with
/// non-positive floor space are dropped and counted; otherwise-broken rows
/// are skipped as malformed (scraped data).
inline std::vector<EstateListing> parse_listings(const std::string& path,
                                                 ListingParseReport* report_out = nullptr) {
    std::vector<EstateListing> listings;
    ListingParseReport report;
    CsvReader::read(
        path,
        [&](const std::vector<std::string_view>& header) {
            if (header.size() != 5 || header[0] != "listing_id")
                throw InputError("bad listings header in " + path +
                                 " (expected listing_id,lon,lat,price_huf,floor_m2)");
        },
        [&](const std::vector<std::string_view>& f) {
            ++report.total_rows;
            EstateListing l;
            if (f.size() != 5 || f[0].empty() || !parse_double(f[1], l.location.lon) ||
                !parse_double(f[2], l.location.lat) || !parse_double(f[3], l.total_price) ||
                !parse_double(f[4], l.floor_m2)) {
                ++report.malformed;
                return;
            }
            if (l.floor_m2 <= 0.0) {
                ++report.dropped_nonpositive_floor;
                return;
            }
            l.listing_id = std::string(f[0]);
            l.price_per_m2 = l.total_price / l.floor_m2;
            ++report.parsed;
            listings.push_back(std::move(l));
        });
    if (report_out) *report_out = report;
    return listings;
}

} // namespace mobility
