#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mobility/error.hpp"
#include "mobility/ses.hpp"
#include "test_util.hpp"

using namespace mobility;

namespace {

std::vector<std::pair<std::string, double>> named(const std::vector<double>& vals) {
    std::vector<std::pair<std::string, double>> out;
    char buf[8];
    for (size_t i = 0; i < vals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "s%03zu", i);
        out.emplace_back(buf, vals[i]);
    }
    return out;
}

std::map<int, double> stratum_sums(const std::map<std::string, int>& strata,
                                   const std::vector<std::pair<std::string, double>>& values) {
    std::map<std::string, double> by_sim(values.begin(), values.end());
    std::map<int, double> sums;
    for (const auto& [sim, s] : strata) sums[s] += by_sim.at(sim);
    return sums;
}

} // namespace

TEST(PriceCategory, BinEdges) {
    EXPECT_EQ(price_category(std::numeric_limits<double>::quiet_NaN()), 0);
    EXPECT_EQ(price_category(0.0), 0);
    EXPECT_EQ(price_category(199999.99), 0);
    EXPECT_EQ(price_category(200000.0), 1);
    EXPECT_EQ(price_category(299999.99), 1);
    EXPECT_EQ(price_category(300000.0), 2);
    EXPECT_EQ(price_category(650000.0), 5);
    EXPECT_EQ(price_category(1100000.0), 10);
    EXPECT_EQ(price_category(1199999.99), 10);
    EXPECT_EQ(price_category(1200000.0), 10);
    EXPECT_EQ(price_category(1200000.01), 0);
    EXPECT_EQ(price_category(-5.0), 0);
}

TEST(StratifyEqualSum, HandFixture) {
    auto values = named({1, 1, 1, 1, 2, 2, 4});
    auto strata = stratify_equal_sum(values, 3);
    ASSERT_EQ(strata.size(), 7u);

    std::map<int, int> sizes;
    for (const auto& [sim, s] : strata) ++sizes[s];
    EXPECT_EQ(sizes.at(1), 4);
    EXPECT_EQ(sizes.at(2), 2);
    EXPECT_EQ(sizes.at(3), 1);

    auto sums = stratum_sums(strata, values);
    EXPECT_DOUBLE_EQ(sums.at(1), 4.0);
    EXPECT_DOUBLE_EQ(sums.at(2), 4.0);
    EXPECT_DOUBLE_EQ(sums.at(3), 4.0);

    // ascending: the four 1s are stratum 1, the 4 is the top stratum
    EXPECT_EQ(strata.at("s000"), 1);
    EXPECT_EQ(strata.at("s003"), 1);
    EXPECT_EQ(strata.at("s004"), 2);
    EXPECT_EQ(strata.at("s006"), 3);
}

TEST(StratifyEqualSum, RandomizedSumBalanceAndContiguity) {
    std::mt19937 rng(2088);
    std::uniform_int_distribution<int> n_dist(8, 120);
    std::uniform_int_distribution<int> q_dist(2, 8);
    std::uniform_real_distribution<double> val(1.0, 500.0);
    for (int trial = 0; trial < 300; ++trial) {
        int n = n_dist(rng);
        int q = std::min(q_dist(rng), n);
        std::vector<double> vals;
        double total = 0.0, vmax = 0.0;
        for (int i = 0; i < n; ++i) {
            vals.push_back(val(rng));
            total += vals.back();
            vmax = std::max(vmax, vals.back());
        }
        auto values = named(vals);
        auto strata = stratify_equal_sum(values, q);
        ASSERT_EQ(strata.size(), static_cast<size_t>(n));

        auto sums = stratum_sums(strata, values);
        ASSERT_EQ(sums.size(), static_cast<size_t>(q));
        // each stratum lands within one element of its target share, where the
        // target is the equal split of what was still unassigned when the
        // stratum was formed
        double remaining = total;
        for (int s = 1; s <= q; ++s) {
            ASSERT_TRUE(sums.count(s)) << "stratum " << s << " empty, trial " << trial;
            double target = remaining / (q - s + 1);
            EXPECT_LE(std::fabs(sums.at(s) - target), vmax)
                << "trial " << trial << " stratum " << s;
            remaining -= sums.at(s);
        }

        // value ranges of consecutive strata may touch but not overlap
        std::map<int, std::pair<double, double>> range;
        std::map<std::string, double> by_sim(values.begin(), values.end());
        for (const auto& [sim, s] : strata) {
            double v = by_sim.at(sim);
            auto it = range.find(s);
            if (it == range.end()) range[s] = {v, v};
            else {
                it->second.first = std::min(it->second.first, v);
                it->second.second = std::max(it->second.second, v);
            }
        }
        for (int s = 1; s < q; ++s) EXPECT_LE(range.at(s).second, range.at(s + 1).first);
    }
}

TEST(StratifyEqualSum, PermutationInvariant) {
    std::mt19937 rng(9);
    auto values = named({50, 3, 3, 8, 21, 13, 1, 34, 5, 2});
    auto base = stratify_equal_sum(values, 4);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(values.begin(), values.end(), rng);
        EXPECT_EQ(stratify_equal_sum(values, 4), base);
    }
}

TEST(StratifyEqualSum, DegenerateInputs) {
    auto values = named({5, 1, 3});
    auto one = stratify_equal_sum(values, 1);
    for (const auto& [sim, s] : one) EXPECT_EQ(s, 1);

    auto each = stratify_equal_sum(values, 3);
    EXPECT_EQ(each.at("s001"), 1);  // value 1
    EXPECT_EQ(each.at("s002"), 2);  // value 3
    EXPECT_EQ(each.at("s000"), 3);  // value 5

    EXPECT_THROW(stratify_equal_sum(values, 4), InputError);
    EXPECT_THROW(stratify_equal_sum(values, 0), InputError);
    EXPECT_THROW(stratify_equal_sum({}, 1), InputError);
}

TEST(QuantileType7, InterpolatesOrderStatistics) {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 2.75);
    EXPECT_DOUBLE_EQ(quantile_type7(v, 0.50), 4.5);
    EXPECT_DOUBLE_EQ(quantile_type7(v, 0.75), 6.25);
    EXPECT_DOUBLE_EQ(quantile_type7(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_type7(v, 1.0), 8.0);
    EXPECT_DOUBLE_EQ(quantile_type7({42.0}, 0.31), 42.0);
    EXPECT_TRUE(std::isnan(quantile_type7({}, 0.5)));
}

TEST(QuartileGroups, SplitsBelowQ1InsideAboveQ3) {
    auto groups = quartile_groups(named({1, 2, 3, 4, 5, 6, 7, 8}));
    EXPECT_EQ(groups.at("s000"), QuartileGroup::minQ1);  // 1 < 2.75
    EXPECT_EQ(groups.at("s001"), QuartileGroup::minQ1);  // 2 < 2.75
    EXPECT_EQ(groups.at("s002"), QuartileGroup::Q1Q3);   // 3
    EXPECT_EQ(groups.at("s005"), QuartileGroup::Q1Q3);   // 6
    EXPECT_EQ(groups.at("s006"), QuartileGroup::Q3max);  // 7 > 6.25
    EXPECT_EQ(groups.at("s007"), QuartileGroup::Q3max);
}

TEST(QuartileGroups, TinyPopulationsStayInTheMiddle) {
    auto groups = quartile_groups(named({10, 20, 30}));
    ASSERT_EQ(groups.size(), 3u);
    for (const auto& [sim, g] : groups) EXPECT_EQ(g, QuartileGroup::Q1Q3);
    EXPECT_TRUE(quartile_groups({}).empty());
}

TEST(QuartileGroups, NamesRoundTrip) {
    for (QuartileGroup g : {QuartileGroup::minQ1, QuartileGroup::Q1Q3, QuartileGroup::Q3max}) {
        QuartileGroup back;
        ASSERT_TRUE(parse_quartile_group(to_string(g), back));
        EXPECT_EQ(back, g);
    }
    QuartileGroup sink;
    EXPECT_FALSE(parse_quartile_group("median", sink));
}

TEST(Summarize, HandFixture) {
    SummaryStats s = summarize({4, 2, 1, 3});
    EXPECT_EQ(s.count, 4u);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.min, 1.0);
    EXPECT_DOUBLE_EQ(s.q1, 1.75);
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.q3, 3.25);
    EXPECT_DOUBLE_EQ(s.max, 4.0);
    EXPECT_EQ(summarize({}).count, 0u);
}

TEST(AggregateByCategory, GroupsByCategoryAndDayType) {
    std::vector<std::tuple<int, DayType, double>> rows{
        {1, DayType::workday, 2.0},
        {1, DayType::workday, 4.0},
        {1, DayType::holiday, 10.0},
        {2, DayType::workday, 7.0},
    };
    auto agg = aggregate_by_category(rows);
    EXPECT_EQ(agg.size(), 3u);
    EXPECT_DOUBLE_EQ(agg.at({1, DayType::workday}).mean, 3.0);
    EXPECT_EQ(agg.at({1, DayType::holiday}).count, 1u);
    EXPECT_DOUBLE_EQ(agg.at({2, DayType::workday}).max, 7.0);
}

TEST(IsStationary, StrictKilometerThresholds) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(is_stationary(0.5, 20.0));
    EXPECT_TRUE(is_stationary(0.999, nan));
    EXPECT_TRUE(is_stationary(5.0, 0.2));
    EXPECT_FALSE(is_stationary(5.0, 8.0));
    EXPECT_FALSE(is_stationary(1.0, 1.0));   // boundary is strict
    EXPECT_FALSE(is_stationary(2.0, nan));   // missing distance is not evidence
    EXPECT_TRUE(is_stationary(0.0, nan));
}

TEST(AgeBucket, DecadeEdges) {
    EXPECT_EQ(age_bucket(19), -1);
    EXPECT_EQ(age_bucket(20), 0);
    EXPECT_EQ(age_bucket(29), 0);
    EXPECT_EQ(age_bucket(30), 1);
    EXPECT_EQ(age_bucket(49), 2);
    EXPECT_EQ(age_bucket(59), 3);
    EXPECT_EQ(age_bucket(60), 4);
    EXPECT_EQ(age_bucket(99), 4);
    EXPECT_EQ(age_bucket(100), -1);
    EXPECT_EQ(age_bucket(-1), -1);
}

namespace {

CommuterRow row(AdminKind hk, int hid, AdminKind wk, int wid, int age = -1) {
    CommuterRow r;
    r.home = AdminLabel{hk, hid};
    r.work = AdminLabel{wk, wid};
    r.age = age;
    return r;
}

} // namespace

TEST(CommutingTables, DistrictOriginsAndSectorAges) {
    std::vector<CommuterRow> rows{
        row(AdminKind::district, 5, AdminKind::district, 5),
        row(AdminKind::district, 3, AdminKind::district, 5),
        row(AdminKind::agglomeration_sector, 2, AdminKind::district, 5, 25),
        row(AdminKind::outside, 0, AdminKind::district, 5),
        row(AdminKind::agglomeration_sector, 2, AdminKind::district, 7, 35),
        row(AdminKind::agglomeration_sector, 2, AdminKind::district, 7, 38),
        row(AdminKind::agglomeration_sector, 2, AdminKind::district, 7),   // unknown age
        row(AdminKind::district, 1, AdminKind::agglomeration_sector, 4),   // not a district job
        row(AdminKind::district, 1, AdminKind::outside, 0),
    };
    CommuteTables t = commuting_tables(rows);

    ASSERT_EQ(t.district.size(), 2u);
    const auto& d5 = t.district.at(5);
    for (int i = 0; i < kDistrictOriginCols; ++i) EXPECT_DOUBLE_EQ(d5[i], 25.0);
    const auto& d7 = t.district.at(7);
    EXPECT_DOUBLE_EQ(d7[2], 100.0);

    ASSERT_EQ(t.age.size(), 1u);
    const auto& s2 = t.age.at(2);
    EXPECT_DOUBLE_EQ(s2[0], 100.0 / 3.0);  // the 25-year-old
    EXPECT_DOUBLE_EQ(s2[1], 200.0 / 3.0);  // 35 and 38
    EXPECT_DOUBLE_EQ(s2[2], 0.0);
    EXPECT_EQ(t.age_counts.at(2)[0] + t.age_counts.at(2)[1], 3u);  // unknown age dropped
}

TEST(CommutingTables, RowsSumToOneHundred) {
    std::mt19937 rng(55);
    std::vector<CommuterRow> rows;
    std::uniform_int_distribution<int> district(1, 23), sector(1, 6), age(15, 80), kind(0, 2);
    for (int i = 0; i < 2000; ++i) {
        AdminKind hk = kind(rng) == 0   ? AdminKind::district
                       : kind(rng) == 1 ? AdminKind::agglomeration_sector
                                        : AdminKind::outside;
        int hid = hk == AdminKind::district ? district(rng)
                  : hk == AdminKind::agglomeration_sector ? sector(rng) : 0;
        rows.push_back(row(hk, hid, AdminKind::district, district(rng), age(rng)));
    }
    CommuteTables t = commuting_tables(rows);
    EXPECT_FALSE(t.district.empty());
    for (const auto& [d, arr] : t.district) {
        double sum = 0.0;
        for (double v : arr) sum += v;
        EXPECT_NEAR(sum, 100.0, 0.01) << "district " << d;
    }
    for (const auto& [s, arr] : t.age) {
        double sum = 0.0;
        for (double v : arr) sum += v;
        EXPECT_NEAR(sum, 100.0, 0.01) << "sector " << s;
    }
}

namespace {

const std::vector<std::string> kDistrictHeader{"district", "same", "other_bp", "agglo", "outside"};

} // namespace

TEST(Census, ParseAndCompare) {
    testutil::TempDir dir;
    std::string path = dir.file("census.csv");
    testutil::write_file(path,
                         "district,same,other_bp,agglo,outside\n"
                         "1,40,30,20,10\n"
                         "2,25,25,25,25\n");
    auto census = parse_census_csv<4>(path, kDistrictHeader);
    ASSERT_EQ(census.size(), 2u);
    EXPECT_DOUBLE_EQ(census.at(1)[0], 40.0);
    EXPECT_DOUBLE_EQ(census.at(2)[3], 25.0);

    auto cdr = census;
    auto same = compare_to_census<4>(cdr, census);
    EXPECT_DOUBLE_EQ(same.mean_abs_diff, 0.0);

    cdr.at(1)[0] = 50.0;  // +10
    cdr.at(1)[1] = 20.0;  // -10
    auto moved = compare_to_census<4>(cdr, census);
    EXPECT_DOUBLE_EQ(moved.abs_diff.at(1)[0], 10.0);
    EXPECT_DOUBLE_EQ(moved.rel_diff.at(1)[0], 0.25);
    EXPECT_DOUBLE_EQ(moved.mean_abs_diff, 20.0 / 8.0);
}

TEST(Census, RelativeDiffUndefinedAtZero) {
    std::map<int, std::array<double, 4>> census{{1, {0, 50, 25, 25}}};
    std::map<int, std::array<double, 4>> cdr{{1, {5, 45, 25, 25}}};
    auto cmp = compare_to_census<4>(cdr, census);
    EXPECT_TRUE(std::isnan(cmp.rel_diff.at(1)[0]));
    EXPECT_DOUBLE_EQ(cmp.rel_diff.at(1)[1], 0.1);
}

TEST(Census, KeyMismatchNamesBothSides) {
    std::map<int, std::array<double, 4>> census{{7, {25, 25, 25, 25}}};
    std::map<int, std::array<double, 4>> cdr{{9, {25, 25, 25, 25}}};
    try {
        compare_to_census<4>(cdr, census);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("cdr:9"), std::string::npos) << msg;
        EXPECT_NE(msg.find("census:7"), std::string::npos) << msg;
    }
}

TEST(Census, MalformedInputsThrow) {
    testutil::TempDir dir;
    auto bad = [&](const char* name, const std::string& body) {
        std::string p = dir.file(name);
        testutil::write_file(p, body);
        EXPECT_THROW((parse_census_csv<4>(p, kDistrictHeader)), InputError) << name;
    };
    bad("header.csv", "region,same,other_bp,agglo,outside\n1,40,30,20,10\n");
    bad("short.csv", "district,same,other_bp,agglo,outside\n1,40,30\n");
    bad("nonnum.csv", "district,same,other_bp,agglo,outside\n1,x,30,20,10\n");
    bad("dup.csv", "district,same,other_bp,agglo,outside\n1,40,30,20,10\n1,40,30,20,10\n");
    EXPECT_THROW((parse_census_csv<4>(dir.file("nofile.csv"), kDistrictHeader)), InputError);
}
