// Command-line front end: each pipeline stage as a subcommand over a shared
// run directory, plus the synthetic-city generator. Configuration comes from
// an optional key=value file; command-line flags override it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobility/mobility.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // applied in order
    std::vector<std::string> sets;                               // --set key=value
    std::string report_json;
};

void add_config_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "key=value configuration file");
    auto forward = [cmd, &st](const char* flag, const char* key, const char* help) {
        cmd->add_option_function<std::string>(
            flag, [key, &st](const std::string& v) { st.overrides.emplace_back(key, v); }, help);
    };
    forward("--cdr", "cdr", "call-detail record CSV");
    forward("--cells", "cells", "cell reference CSV");
    forward("--listings", "listings", "estate listing CSV");
    forward("--admin", "admin", "admin region GeoJSON");
    forward("--outdir", "outdir", "run directory for stage artifacts");
    forward("--census-district", "census_district", "census commuting reference CSV");
    forward("--census-age", "census_age", "census age-mix reference CSV");
    forward("--threads", "threads", "worker thread cap (output is thread-count independent)");
    forward("--rg-k", "rg_k", "k for the k-radius of gyration");
    forward("--strata-q", "strata_q", "number of equal-sum SES strata");
    forward("--merge-eps", "merge_eps_m", "cell merge radius in meters");
    forward("--min-listings", "min_listings", "listings required to price a merged cell");
    cmd->add_option("--set", st.sets, "any config key as key=value (repeatable, wins last)");
    cmd->add_option("--report-json", st.report_json,
                    "write the run report as JSON to this path instead of stderr");
}

mobility::RunConfig make_config(const CliState& st) {
    mobility::RunConfig cfg;
    if (!st.config_path.empty()) cfg = mobility::RunConfig::load(st.config_path);
    for (const auto& [key, value] : st.overrides) cfg.set(key, value);
    for (const std::string& kv : st.sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw mobility::InputError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void emit_report(const mobility::KvReport& report, const std::string& json_path) {
    if (json_path.empty()) {
        for (const auto& [k, v] : report) std::cerr << k << "=" << v << "\n";
        return;
    }
    nlohmann::ordered_json doc;
    for (const auto& [k, v] : report) {
        int64_t i;
        double d;
        if (mobility::parse_i64(v, i)) doc[k] = i;
        else if (mobility::parse_double(v, d)) doc[k] = d;
        else doc[k] = v;
    }
    std::ofstream out(json_path);
    if (!out) throw mobility::InputError("cannot open report file for writing: " + json_path);
    out << doc.dump(2) << "\n";
}

struct SynthOpts {
    std::string outdir = "synth";
    mobility::SynthConfig cfg;
};

mobility::KvReport run_synth(const SynthOpts& so) {
    namespace fs = std::filesystem;
    fs::create_directories(so.outdir);
    auto path = [&](const char* name) { return so.outdir + "/" + name; };

    mobility::SynthCity city = mobility::generate_city(so.cfg);
    mobility::write_cells_csv(city, path("cells.csv"), so.cfg);
    mobility::write_listings_csv(city, path("listings.csv"), so.cfg);
    mobility::write_admin_geojson(city, path("admin.geojson"), so.cfg);
    mobility::write_ground_truth(city, path("ground_truth.csv"));
    mobility::write_census(city, so.cfg, path("census_district.csv"), path("census_age.csv"));
    uint64_t rows = mobility::generate_cdr(so.cfg, city, path("cdr.csv"));

    {
        std::ofstream conf(path("run.conf"));
        if (!conf) throw mobility::InputError("cannot write " + path("run.conf"));
        conf << "cdr=" << path("cdr.csv") << "\n";
        conf << "cells=" << path("cells.csv") << "\n";
        conf << "listings=" << path("listings.csv") << "\n";
        conf << "admin=" << path("admin.geojson") << "\n";
        conf << "outdir=" << so.outdir << "/out\n";
        conf << "center_lon=" << mobility::format_double(so.cfg.center_lon) << "\n";
        conf << "center_lat=" << mobility::format_double(so.cfg.center_lat) << "\n";
        conf << "bbox_lon_min=" << mobility::format_double(so.cfg.bbox.lon_min) << "\n";
        conf << "bbox_lon_max=" << mobility::format_double(so.cfg.bbox.lon_max) << "\n";
        conf << "bbox_lat_min=" << mobility::format_double(so.cfg.bbox.lat_min) << "\n";
        conf << "bbox_lat_max=" << mobility::format_double(so.cfg.bbox.lat_max) << "\n";
        conf << "tz_offset_min=" << so.cfg.tz_offset_min << "\n";
        conf << "holidays=";
        for (size_t i = 0; i < so.cfg.holidays.size(); ++i)
            conf << (i ? "," : "") << so.cfg.holidays[i];
        conf << "\n";
        conf << "# reference tables from the generator's planted population:\n";
        conf << "# census_district=" << path("census_district.csv") << "\n";
        conf << "# census_age=" << path("census_age.csv") << "\n";
    }

    mobility::KvReport r;
    r.emplace_back("outdir", so.outdir);
    r.emplace_back("sims", std::to_string(so.cfg.n_sims));
    r.emplace_back("cells", std::to_string(so.cfg.n_cells));
    r.emplace_back("days", std::to_string(so.cfg.days));
    r.emplace_back("cdr_rows", std::to_string(rows));
    r.emplace_back("config", path("run.conf"));
    return r;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CDR mobility pipeline: SES stratification from phone activity"};
    app.require_subcommand(1);

    CliState st;
    SynthOpts so;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic city and CDR stream");
    synth->add_option("--outdir", so.outdir, "directory for the generated files");
    synth->add_option("--seed", so.cfg.seed, "RNG seed");
    synth->add_option("--sims", so.cfg.n_sims, "number of SIMs");
    synth->add_option("--cells", so.cfg.n_cells, "number of cells");
    synth->add_option("--days", so.cfg.days, "number of days");
    synth->add_option("--noise", so.cfg.excursion_noise, "per-record random-cell probability");
    synth->add_option("--report-json", st.report_json, "write the run report as JSON");

    const char* stage_names[] = {"ingest", "cells",      "stats", "filter", "anchors",
                                 "indicators", "ses",    "pca",   "commute"};
    const char* stage_help[] = {
        "normalize SIM attributes and count per-cell volume",
        "merge cells, tessellate, attach listing prices, label admin units",
        "per-SIM activity statistics and exploration tables",
        "apply the consumer activity criteria",
        "estimate home and work cells per active SIM",
        "radius of gyration, entropy and mobility classes",
        "SES categories, strata and work-price quartile groups",
        "binned feature matrix and principal components",
        "commuting tables and optional census comparison",
    };
    mobility::KvReport (*stage_fns[])(const mobility::RunConfig&) = {
        mobility::stage_ingest,  mobility::stage_cells,      mobility::stage_stats,
        mobility::stage_filter,  mobility::stage_anchors,    mobility::stage_indicators,
        mobility::stage_ses,     mobility::stage_pca,        mobility::stage_commute,
    };
    constexpr size_t kStageCount = sizeof(stage_names) / sizeof(stage_names[0]);
    CLI::App* stage_cmds[kStageCount];
    for (size_t i = 0; i < kStageCount; ++i) {
        stage_cmds[i] = app.add_subcommand(stage_names[i], stage_help[i]);
        add_config_options(stage_cmds[i], st);
    }

    CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage in order");
    add_config_options(pipeline, st);

    CLI::App* report = app.add_subcommand("report", "print a summary of a completed run");
    add_config_options(report, st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            emit_report(run_synth(so), st.report_json);
            return 0;
        }
        mobility::RunConfig cfg = make_config(st);
        if (pipeline->parsed()) {
            emit_report(mobility::run_pipeline(cfg), st.report_json);
            return 0;
        }
        if (report->parsed()) {
            std::cout << mobility::run_report(cfg);
            return 0;
        }
        for (size_t i = 0; i < kStageCount; ++i) {
            if (stage_cmds[i]->parsed()) {
                emit_report(stage_fns[i](cfg), st.report_json);
                return 0;
            }
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const mobility::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
