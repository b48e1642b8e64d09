#include <doctest.h>

#include <sstream>

#include "cardioresp/errors.hpp"
#include "cardioresp/keyvalue.hpp"
#include "cardioresp/pipeline_io.hpp"
#include "cardioresp/scenario_io.hpp"
#include "support.hpp"

using namespace cardioresp;

namespace {

std::size_t parse_error_line(const std::string& text) {
    try {
        KvDocument::parse(text, "doc");
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("key-value documents accept comments and multi-line arrays") {
    auto doc = KvDocument::parse(
        "# header\n"
        "a = 1.5   # trailing\n"
        "\n"
        "name = \"x # not a comment\"\n"
        "list = [1,\n"
        "        2,  # two\n"
        "        3]\n"
        "flag = false\n",
        "doc");
    REQUIRE(doc.entries().size() == 4);
    CHECK(doc.number(*doc.find("a")) == 1.5);
    CHECK(doc.string(*doc.find("name")) == "x # not a comment");
    CHECK(doc.find("list")->value == nlohmann::json::array({1, 2, 3}));
    CHECK(doc.find("list")->line == 5);
    CHECK_FALSE(doc.boolean(*doc.find("flag")));
    CHECK(doc.find("missing") == nullptr);
}

TEST_CASE("key-value errors carry the line number") {
    CHECK(parse_error_line("a = 1\nb\n") == 2);
    CHECK(parse_error_line("a = 1\n\n[section]\n") == 3);
    CHECK(parse_error_line("a = 1\na = 2\n") == 2);
    CHECK(parse_error_line("1a = 1\n") == 1);
    CHECK(parse_error_line("a =\n") == 1);
    CHECK(parse_error_line("a = 1\nb = [1,\n2\n") == 2);
    CHECK(parse_error_line("a = 1\nb = nope\n") == 2);

    auto doc = KvDocument::parse("x = \"s\"\n", "doc");
    CHECK_THROWS_AS(doc.number(*doc.find("x")), ParseError);
    CHECK_THROWS_WITH_AS(doc.boolean(*doc.find("x")), doctest::Contains("doc:1"), ParseError);
}

TEST_CASE("presets load and validate") {
    auto rest = support::preset("rest");
    CHECK(rest.duration == 7.2);
    CHECK(rest.heart_rate == doctest::Approx(5.0 / 9.0));
    auto hold = support::preset("breath_hold");
    REQUIRE(hold.events.size() == 1);
    CHECK(hold.events[0] == EventMark{EventKind::BreathHold, 4.5, 4.5});
    auto cough = support::preset("cough");
    REQUIRE(cough.events.size() == 1);
    CHECK(cough.events[0].kind == EventKind::Cough);
    CHECK(support::preset("running").heart_phase.has_value());
    CHECK(support::config("breath_hold").window == 4.5);
}

TEST_CASE("scenario text round trips") {
    for (const char* name : {"rest", "breath_hold", "running", "cough"}) {
        auto sc = support::preset(name);
        auto text = scenario_to_text(sc);
        auto back = scenario_from_document(KvDocument::parse(text));
        CHECK(scenario_to_text(back) == text);
        CHECK(back.events == sc.events);
        CHECK(back.heart_phase == sc.heart_phase);
        CHECK(back.orientation == sc.orientation);
    }
}

TEST_CASE("scenario documents reject bad input") {
    CHECK_THROWS_AS(scenario_from_document(KvDocument::parse("colour = 1\n")), ParseError);
    CHECK_THROWS_AS(scenario_from_document(KvDocument::parse("duration = \"long\"\n")), ParseError);
    CHECK_THROWS_AS(scenario_from_document(KvDocument::parse("orientation = [0, 1]\n")), ParseError);
    CHECK_THROWS_AS(scenario_from_document(KvDocument::parse("events = [[\"sneeze\", 1.0]]\n")), ParseError);
    CHECK_THROWS_AS(scenario_from_document(KvDocument::parse("duration = -2\n")), ParameterError);
    CHECK_THROWS_AS(load_scenario(support::source_path("scenarios/nope.toml")), DataError);
}

TEST_CASE("config text round trips") {
    for (const char* name : {"default", "breath_hold"}) {
        auto cfg = support::config(name);
        auto text = config_to_text(cfg);
        CHECK(config_to_text(config_from_document(KvDocument::parse(text))) == text);
    }
    CHECK_THROWS_AS(config_from_document(KvDocument::parse("split_order = 2.5\n")), ParseError);
    CHECK_THROWS_AS(config_from_document(KvDocument::parse("heart_band = [10, 0.7]\n")), ParameterError);
    CHECK_THROWS_AS(config_from_document(KvDocument::parse("bogus = 1\n")), ParseError);
}

TEST_CASE("trace CSV round trips to nine significant digits") {
    auto trace = synthesize_trace(support::preset("running"), 4).trace;
    std::stringstream io;
    write_trace_csv(io, trace);
    auto back = read_trace_csv(io);
    REQUIRE(back.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(back[i].t == doctest::Approx(trace[i].t).epsilon(1e-8));
        CHECK(back[i].az == doctest::Approx(trace[i].az).epsilon(1e-8));
        CHECK(back[i].skin_temp.has_value());
    }
    std::stringstream again;
    write_trace_csv(again, back);
    std::stringstream first;
    write_trace_csv(first, trace);
    CHECK(again.str() == first.str());
}

TEST_CASE("trace CSV errors") {
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_trace_csv(in, "t.csv");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("time,x,y,z\n") == 1);
    CHECK(line_of("t,ax,ay,az,temp,pressure\n0,1,2,3,,\n0.01,1,2\n") == 3);
    CHECK(line_of("t,ax,ay,az,temp,pressure\n0,1,2,abc,,\n") == 2);
    CHECK(line_of("t,ax,ay,az,temp,pressure\n0.02,0,0,0,,\n0.01,0,0,0,,\n") == 3);
    CHECK(line_of("t,ax,ay,az,temp,pressure\n0,nan,0,0,,\n") == 2);

    std::istringstream ok("t,ax,ay,az,temp,pressure\r\n0,1,2,3,,101325\r\n");
    auto trace = read_trace_csv(ok);
    REQUIRE(trace.size() == 1);
    CHECK_FALSE(trace[0].skin_temp.has_value());
    CHECK(trace[0].pressure == 101325.0);
}

TEST_CASE("report JSON round trips") {
    auto result = run_pipeline(synthesize_trace(support::preset("breath_hold"), 0).trace, support::config("breath_hold"));
    REQUIRE(result.reports.size() == 3);
    for (const auto& r : result.reports) CHECK(report_from_json(nlohmann::json::parse(report_to_json(r).dump())) == r);

    auto j = report_to_json(result.reports[1]);
    CHECK(j["hrr"] == "undefined");
    CHECK(j["status"] == "indeterminate");
    j["hrr"] = 3.0;
    CHECK_THROWS_AS(report_from_json(j), DataError);
    j.erase("hr_count");
    CHECK_THROWS_AS(report_from_json(j), DataError);
}

TEST_CASE("summary line format") {
    VitalsReport r;
    r.window_start = 0.0;
    r.window_end = 7.2;
    r.hr_count = 4;
    r.rr_count = 1;
    r.hrr = Ratio::of(4, 1);
    r.status = VitalsStatus::HealthyRange;
    CHECK(summary_line(r) == "[0.00-7.20] HR=4 RR=1 HRR=4 healthy_range");
    r.rr_count = 0;
    r.hrr.reset();
    r.status = VitalsStatus::Indeterminate;
    CHECK(summary_line(r) == "[0.00-7.20] HR=4 RR=0 HRR=undefined indeterminate");
    r.rr_count = 3;
    r.hrr = Ratio::of(4, 3);
    r.status = VitalsStatus::OutOfRange;
    CHECK(summary_line(r) == "[0.00-7.20] HR=4 RR=3 HRR=1.33333 out_of_range");
}

TEST_CASE("detected marks are merged in time order") {
    DetectedEvents ev;
    ev.beats = {0.5, 2.0};
    ev.breaths = {1.0};
    ev.coughs = {1.5};
    auto marks = detected_marks(ev);
    REQUIRE(marks.size() == 4);
    CHECK(marks[0].kind == EventKind::HeartBeat);
    CHECK(marks[1].kind == EventKind::Breath);
    CHECK(marks[2].kind == EventKind::Cough);
    CHECK(marks[3].start == 2.0);
    std::ostringstream out;
    write_events_jsonl(out, marks);
    CHECK(out.str().starts_with("{\"duration\":0.0,\"kind\":\"heart_beat\",\"start\":0.5}\n"));
}
