#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cardioresp/errors.hpp"
#include "cardioresp/nodes.hpp"
#include "cardioresp/pipeline_io.hpp"
#include "cardioresp/scenario_io.hpp"

using namespace cardioresp;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kOutOfRange = 1;
constexpr int kError = 2;

void setup_logging() {
    auto logger = spdlog::stderr_logger_st("cardioresp");
    logger->set_pattern("%l: %v");
    logger->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CARDIORESP_LOG")) logger->set_level(spdlog::level::from_str(env));
    spdlog::set_default_logger(logger);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

PipelineConfig pipeline_config(const std::string& path) {
    if (path.empty()) return PipelineConfig{};
    return load_config(path);
}

int exit_for(const std::vector<VitalsReport>& reports) {
    for (const auto& r : reports)
        if (r.status == VitalsStatus::OutOfRange) return kOutOfRange;
    return kOk;
}

struct SimulateArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out;
};

int simulate(const SimulateArgs& a) {
    auto sc = load_scenario(a.scenario);
    auto result = synthesize_trace(sc, a.seed);
    fs::create_directories(a.out);

    std::ostringstream trace, truth;
    write_trace_csv(trace, result.trace);
    write_events_jsonl(truth, result.truth);
    write_file(fs::path(a.out) / "trace.csv", trace.str());
    write_file(fs::path(a.out) / "truth.jsonl", truth.str());
    spdlog::info("wrote {} samples and {} truth events to {}", result.trace.size(), result.truth.size(), a.out);
    return kOk;
}

struct AnalyzeArgs {
    std::string trace;
    std::string config;
    std::string out;
};

int analyze(const AnalyzeArgs& a) {
    auto cfg = pipeline_config(a.config);
    auto trace = load_trace_csv(a.trace);
    if (trace.empty()) throw DataError(a.trace + ": no samples");
    auto result = run_pipeline(trace, cfg);

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        std::ostringstream reports, events;
        for (const auto& r : result.reports) reports << report_to_json(r).dump() << "\n";
        write_events_jsonl(events, detected_marks(result.events));
        write_file(fs::path(a.out) / "reports.jsonl", reports.str());
        write_file(fs::path(a.out) / "events.jsonl", events.str());
    }
    for (const auto& r : result.reports) std::cout << summary_line(r) << "\n";
    if (result.reports.empty()) spdlog::warn("trace shorter than one {} s window", cfg.window);
    return exit_for(result.reports);
}

struct RunArgs {
    std::string scenario;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    double loss = 0.0;
    double bitflip = 0.0;
    std::uint64_t link_seed = 0;
    std::size_t batch = 16;
};

std::string stats_line(const LinkStats& s, const ImpairmentLog& log) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "link: sent=%zu dropped=%zu corrupted=%zu ok=%llu crc_rejected=%llu malformed=%llu gaps=%llu "
                  "samples=%llu",
                  log.frames_sent, log.dropped(), log.corrupted(), static_cast<unsigned long long>(s.frames_ok),
                  static_cast<unsigned long long>(s.frames_crc_rejected),
                  static_cast<unsigned long long>(s.frames_malformed),
                  static_cast<unsigned long long>(s.gaps_detected),
                  static_cast<unsigned long long>(s.samples_delivered));
    return buf;
}

int run(const RunArgs& a) {
    auto sc = load_scenario(a.scenario);
    auto cfg = pipeline_config(a.config);
    LinkConfig link{a.loss, a.bitflip, a.link_seed};
    validate(link);

    auto frames = sensor_node_run(sc, a.batch, a.seed);
    auto impaired = impair_link(frames, link);

    SessionConfig session;
    session.sample_rate = sc.sample_rate;
    session.pipeline = cfg;
    session.scenario_digest = digest_hex(scenario_to_text(sc));
    session.config_digest = digest_hex(config_to_text(cfg));
    session.session_id = digest_hex(session.scenario_digest + session.config_digest + std::to_string(a.seed) + "/" +
                                    std::to_string(a.link_seed) + "/" + std::to_string(a.loss) + "/" +
                                    std::to_string(a.bitflip) + "/" + std::to_string(a.batch));
    auto rec = central_node_run(impaired.bytes, session);

    save_session(rec, a.out);
    write_capture(fs::path(a.out) / "capture.bin", impaired.bytes);

    std::cout << stats_line(rec.stats, impaired.log) << "\n";
    for (const auto& r : rec.reports) std::cout << summary_line(r) << "\n";
    if (rec.reports.empty()) std::cout << "warning: no complete analysis window was received\n";
    return exit_for(rec.reports);
}

std::string hrr_cell(const VitalsReport& r) {
    if (!r.hrr) return "HRR undefined";
    return "HRR " + std::to_string(r.hr_count) + "/" + std::to_string(r.rr_count) + " = " + format_hrr(r.hrr);
}

int report(const std::string& dir) {
    auto rec = load_session(dir);
    const auto& s = rec.stats;
    std::cout << "session " << rec.session_id << "\n"
              << "scenario " << rec.scenario_digest << "\n"
              << "config " << rec.config_digest << "\n"
              << "sample rate " << rec.sample_rate << " Hz\n"
              << "link: ok=" << s.frames_ok << " crc_rejected=" << s.frames_crc_rejected
              << " malformed=" << s.frames_malformed << " gaps=" << s.gaps_detected
              << " samples=" << s.samples_delivered << "\n"
              << rec.segments.size() << " segments\n";
    for (const auto& seg : rec.segments) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "  [%.2f-%.2f] %zu samples, %zu interpolated\n", seg.start, seg.end,
                      seg.samples, seg.interpolated);
        std::cout << buf;
    }
    std::cout << rec.reports.size() << " windows\n";
    for (const auto& r : rec.reports) {
        char head[64];
        std::snprintf(head, sizeof head, "  [%.2f-%.2f] HR=%ld RR=%ld ", r.window_start, r.window_end, r.hr_count,
                      r.rr_count);
        std::cout << head << hrr_cell(r) << " " << to_string(r.status) << "\n";
    }
    std::cout << rec.alerts.size() << " alerts\n";
    for (const auto& al : rec.alerts) {
        char head[64];
        std::snprintf(head, sizeof head, "  [%.2f-%.2f] ", al.window_start, al.window_end);
        std::cout << head << to_string(al.status) << " HRR=" << format_hrr(al.hrr) << "\n";
    }
    return exit_for(rec.reports);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Cardio-respiratory monitoring toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Synthesize a trace and its truth events");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario file")->required();
    sim_cmd->add_option("--seed", sim.seed, "Noise seed");
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();

    AnalyzeArgs ana;
    auto* ana_cmd = app.add_subcommand("analyze", "Run the pipeline on a trace CSV");
    ana_cmd->add_option("trace", ana.trace, "Trace CSV")->required();
    ana_cmd->add_option("--config", ana.config, "Pipeline config file");
    ana_cmd->add_option("--out", ana.out, "Output directory for reports.jsonl and events.jsonl");

    RunArgs runa;
    auto* run_cmd = app.add_subcommand("run", "Simulate sensor node, link and collector end to end");
    run_cmd->add_option("--scenario", runa.scenario, "Scenario file")->required();
    run_cmd->add_option("--config", runa.config, "Pipeline config file");
    run_cmd->add_option("--out", runa.out, "Session directory")->required();
    run_cmd->add_option("--seed", runa.seed, "Noise seed");
    run_cmd->add_option("--loss", runa.loss, "Frame loss probability");
    run_cmd->add_option("--bitflip", runa.bitflip, "Per-frame single-bit corruption probability");
    run_cmd->add_option("--link-seed", runa.link_seed, "Link impairment seed");
    run_cmd->add_option("--batch", runa.batch, "Samples per frame (1-16)");

    std::string report_dir;
    auto* rep_cmd = app.add_subcommand("report", "Summarize a session directory");
    rep_cmd->add_option("session", report_dir, "Session directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    try {
        if (*sim_cmd) return simulate(sim);
        if (*ana_cmd) return analyze(ana);
        if (*run_cmd) return run(runa);
        if (*rep_cmd) return report(report_dir);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        std::cerr.flush();
        return kError;
    }
    return kError;
}
