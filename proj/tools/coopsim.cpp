// coopsim: run a cooperative-perception scenario and emit metric and track
// dumps for offline analysis.
#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "coop/coop.hpp"

namespace {

std::string tracks_jsonl(const coop::pipeline::SimulationResult& result, int ego_id) {
    std::ostringstream os;
    auto dump_list = [](const coop::tracker::TrackList& tl) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& tr : tl.tracks) {
            const char* status = "tentative";
            if (tr.status == coop::tracker::TrackStatus::Confirmed) status = "confirmed";
            if (tr.status == coop::tracker::TrackStatus::Coasted) status = "coasted";
            nlohmann::json jt = {{"id", tr.track_id},
                                 {"x", tr.state.position().x()},
                                 {"y", tr.state.position().y()},
                                 {"vx", tr.state.velocity().x()},
                                 {"vy", tr.state.velocity().y()},
                                 {"status", status}};
            if (tr.source_temp_id) jt["temp_id"] = *tr.source_temp_id;
            arr.push_back(jt);
        }
        return arr;
    };
    for (const auto& f : result.frames) {
        nlohmann::json j;
        j["t"] = f.t;
        j["truth"] = nlohmann::json::array();
        for (const auto& s : f.truth) {
            j["truth"].push_back({{"id", s.actor_id},
                                  {"x", s.position.x_m},
                                  {"y", s.position.y_m},
                                  {"heading_rad", s.heading_rad},
                                  {"ego", s.actor_id == ego_id}});
        }
        j["local"] = dump_list(f.local);
        j["v2v"] = dump_list(f.v2v);
        j["priority"] = dump_list(f.priority);
        os << j.dump() << "\n";
    }
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"V2V-enabled track management simulation"};

    std::string scenario_path;
    std::string builtin_name;
    std::string out_dir = ".";
    std::string spoof_preset;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double channel_drop = -1.0;
    int channel_latency = -1;
    double gospa_c = -1.0;
    double gospa_p = -1.0;
    bool disable_v2v = false;
    bool disable_local = false;
    bool capture = false;

    auto* opt_scn = app.add_option("--scenario", scenario_path, "Scenario JSON file");
    auto* opt_builtin =
        app.add_option("--builtin", builtin_name, "Built-in scenario (unprotected-left)");
    opt_scn->excludes(opt_builtin);
    app.add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--channel-drop", channel_drop, "Override BSM drop probability");
    app.add_option("--channel-latency", channel_latency, "Override channel latency [ticks]");
    app.add_option("--spoof", spoof_preset, "Spoof preset (ghost-vehicle)");
    app.add_option("--gospa-c", gospa_c, "GOSPA cutoff distance [m]");
    app.add_option("--gospa-p", gospa_p, "GOSPA order");
    app.add_flag("--disable-v2v", disable_v2v, "Run without V2V input");
    app.add_flag("--disable-local", disable_local, "Run without local sensors");
    app.add_flag("--capture", capture, "Write raw BSM records to bsm.capture");
    std::string emit_path;
    app.add_option("--emit-scenario", emit_path,
                   "Write the resolved scenario as JSON to FILE and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        coop::scenario::ScenarioConfig cfg;
        if (!scenario_path.empty()) {
            std::ifstream in(scenario_path);
            if (!in) throw std::runtime_error("cannot open scenario file " + scenario_path);
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = coop::scenario::load_scenario(ss.str());
        } else if (builtin_name == "unprotected-left") {
            cfg = coop::scenario::build_unprotected_left_scenario();
        } else {
            std::cerr << "error: need --scenario PATH or --builtin unprotected-left\n";
            return 2;
        }

        if (seed_set) cfg.rng_seed = seed;
        if (channel_drop >= 0.0) cfg.channel.drop_prob = channel_drop;
        if (channel_latency >= 0) cfg.channel.latency_ticks = channel_latency;
        if (gospa_c > 0.0) cfg.gospa_params.c = gospa_c;
        if (gospa_p >= 1.0) cfg.gospa_params.p = gospa_p;
        if (!spoof_preset.empty()) {
            if (spoof_preset != "ghost-vehicle")
                throw std::runtime_error("unknown spoof preset: " + spoof_preset);
            cfg.channel.spoof_injections.push_back(coop::scenario::ghost_vehicle_preset());
        }

        if (!emit_path.empty()) {
            write_file(emit_path, coop::scenario::to_json(cfg) + "\n");
            return 0;
        }

        coop::pipeline::SimOptions opts;
        opts.disable_v2v = disable_v2v;
        opts.disable_local = disable_local;
        opts.capture_bsms = capture;
        const auto result = coop::pipeline::run_simulation(cfg, opts);

        std::filesystem::create_directories(out_dir);
        const std::filesystem::path out(out_dir);
        write_file(out / "metrics.csv", coop::metrics::report_csv(result.report));

        std::ostringstream summary;
        summary << "scenario: " << cfg.name << "\nseed: " << cfg.rng_seed << "\n";
        summary << coop::metrics::report_summary(result.report);
        if (!result.spoofed_temp_ids.empty()) {
            int spoofed_priority = 0;
            for (const auto& f : result.frames) {
                for (const auto& tr : f.priority.tracks) {
                    if (tr.source_temp_id && result.spoofed_temp_ids.count(*tr.source_temp_id))
                        ++spoofed_priority;
                }
            }
            summary << "priority tracks from spoofed temp_ids: " << spoofed_priority << "\n";
        }
        write_file(out / "summary.txt", summary.str());
        write_file(out / "tracks.jsonl", tracks_jsonl(result, cfg.ego_id));

        if (capture) {
            std::ofstream cap(out / "bsm.capture", std::ios::binary);
            for (const auto& rec : result.bsm_capture) {
                const std::uint8_t hdr[4] = {static_cast<std::uint8_t>(rec.tick >> 24),
                                             static_cast<std::uint8_t>(rec.tick >> 16),
                                             static_cast<std::uint8_t>(rec.tick >> 8),
                                             static_cast<std::uint8_t>(rec.tick)};
                cap.write(reinterpret_cast<const char*>(hdr), 4);
                cap.write(reinterpret_cast<const char*>(rec.record.data()),
                          static_cast<std::streamsize>(rec.record.size()));
            }
        }
        std::cout << summary.str();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
