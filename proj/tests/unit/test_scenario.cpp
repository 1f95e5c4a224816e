#include <guadasim/error.hpp>
#include <guadasim/scenario.hpp>

#include <doctest.h>

#include <algorithm>
#include <filesystem>

using namespace guadasim;
using nlohmann::json;

namespace {

const std::filesystem::path kData{GUADASIM_TEST_DATA_DIR};

json minimal(const std::string& kind) {
    return {{"schema_version", 1}, {"id", "t"}, {"run", {{"kind", kind}}}};
}

std::vector<std::string> problems_of(const json& doc) {
    try {
        (void)parse_scenario(doc, kData);
    } catch (const ValidationError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

} // namespace

TEST_CASE("every bundled fixture scenario parses and runs") {
    for (const auto& entry : std::filesystem::directory_iterator(fixture_dir())) {
        const auto name = entry.path().stem().string();
        if (name == "omap4") continue;
        CAPTURE(name);
        const ScenarioConfig c = load_fixture_scenario(name);
        CHECK(c.id == name);
        CHECK_NOTHROW((void)run_scenario(c));
    }
}

TEST_CASE("validation lists every problem") {
    json doc = minimal("load");
    doc["schema_version"] = 7;
    doc["id"] = 3;
    doc["pods"] = {{{"service", "rendering"}, {"group", "nope"}}};
    const auto problems = problems_of(doc);
    CHECK(mentions(problems, "schema_version"));
    CHECK(mentions(problems, "id: must be a string"));
    CHECK(mentions(problems, "network"));
    CHECK(mentions(problems, "page.resources"));
    CHECK(mentions(problems, "pods[0].group"));
    CHECK(problems.size() >= 5);
}

TEST_CASE("load run without a network is rejected") {
    json doc = minimal("load");
    doc["page"] = {{"resources", {{{"url", "i"}, {"kind", "MainHtml"}, {"size_bytes", 10}}}}};
    const auto problems = problems_of(doc);
    REQUIRE(problems.size() == 1);
    CHECK(mentions(problems, "network"));
}

TEST_CASE("unknown run kinds, keywords and browsers are reported") {
    CHECK(mentions(problems_of(minimal("dance")), "unknown run kind"));
    json doc = minimal("render");
    doc["page"] = {{"render", {{"requirement_keywords", {"Sparkle"}}}}};
    doc["run"]["browsers"] = {"netscape"};
    const auto problems = problems_of(doc);
    CHECK(mentions(problems, "unknown keyword"));
    CHECK(mentions(problems, "unknown built-in browser"));
}

TEST_CASE("referenced paths must exist") {
    json doc = minimal("analyze_only");
    doc["page"] = {{"paths", {"ten_pages", "missing_dir"}}};
    const auto problems = problems_of(doc);
    REQUIRE(problems.size() == 1);
    CHECK(mentions(problems, "missing_dir"));
}

TEST_CASE("resource cycles are a validation error") {
    json doc = minimal("load");
    doc["network"] = {{"first_packet_latency_ms", 1}, {"rtt_ms", 1}, {"bandwidth_mbps", 1}};
    doc["page"] = {{"resources",
                    {{{"url", "i"}, {"kind", "MainHtml"}, {"size_bytes", 1}},
                     {{"url", "a"}, {"kind", "Css"}, {"size_bytes", 1}, {"discovered_by", "b"}},
                     {{"url", "b"}, {"kind", "Css"}, {"size_bytes", 1}, {"discovered_by", "a"}}}}};
    CHECK(mentions(problems_of(doc), "cycle"));
}

TEST_CASE("inline hardware definitions") {
    json doc = minimal("energy_table");
    doc["hardware"] = hardware_to_json(omap4_fixture());
    doc["run"]["rows"] = {{{"weak_unit", "cortex-m3"}, {"weak_clock_mhz", 34.7}}};
    const SimReport r = run_scenario(parse_scenario(doc, kData));
    CHECK(r.metric("energy_reduction.cortex-m3@34.7") == doctest::Approx(0.5645).epsilon(0.001));

    doc["hardware"]["units"][0]["clock_points"] = json::array();
    CHECK(mentions(problems_of(doc), "clock_points"));
}

TEST_CASE("hardware file round trip") {
    const HardwareFixture from_file = load_hardware_file(fixture_dir() / "omap4.json");
    const HardwareFixture builtin = omap4_fixture();
    CHECK(hardware_to_json(from_file) == hardware_to_json(builtin));
    CHECK(hardware_to_json(parse_hardware(hardware_to_json(builtin), "x")) == hardware_to_json(builtin));
}

TEST_CASE("serialized configs re-parse into an identical run") {
    for (const auto& entry : std::filesystem::directory_iterator(fixture_dir())) {
        const auto name = entry.path().stem().string();
        if (name == "omap4") continue;
        CAPTURE(name);
        const ScenarioConfig c = load_fixture_scenario(name);
        const ScenarioConfig again = parse_scenario(scenario_to_json(c), c.base_dir);
        CHECK(scenario_to_json(again) == scenario_to_json(c));
        CHECK(to_json(run_scenario(again)) == to_json(run_scenario(c)));
    }
}

TEST_CASE("render scenario compares browsers") {
    const SimReport r = run_scenario(load_fixture_scenario("rendering"));
    CHECK(r.metric("guadalupe.fps") == 30.0);
    CHECK(r.metric("chrome.fps") == 60.0);
    CHECK(r.metric("utilization_reduction.guadalupe_vs_chrome") == 0.75);
    CHECK(r.metric("system_energy_saving.guadalupe_vs_chrome") == doctest::Approx(0.047).epsilon(0.01));
}

TEST_CASE("render scenario can take its requirement from an html file") {
    json doc = minimal("render");
    doc["page"] = {{"render", {{"source", "ten_pages/with_canvas.html"}}}};
    doc["run"]["browsers"] = {"guadalupe"};
    const SimReport r = run_scenario(parse_scenario(doc, kData));
    CHECK(r.metric("guadalupe.three_d") == 1.0);
    CHECK(r.metric("guadalupe.switch_count") == 1.0);
}

TEST_CASE("energy table flags the non-derivable reference") {
    const ScenarioConfig c = load_fixture_scenario("energy-table");
    const auto rows = energy_table(omap4_fixture(), c);
    REQUIRE(rows.size() == 3);
    CHECK_FALSE(rows[0].flagged);
    CHECK(rows[1].flagged);
    CHECK_FALSE(rows[2].flagged);
    const std::string text = format_energy_table(rows);
    CHECK(text.find("36.0% ") != std::string::npos);
    CHECK(text.find("[1]") != std::string::npos);
    CHECK(text.find("39.3%") != std::string::npos);
}

TEST_CASE("analyze over a directory of ten pages") {
    const AnalyzeResult r = analyze_paths({(kData / "ten_pages").string()});
    REQUIRE(r.stats);
    CHECK(r.stats->total == 10);
    CHECK(r.stats->two_d_count == 9);
    CHECK(r.files.size() == 10);
    CHECK_FALSE(r.partial_failure());
    const SimReport rep = analyze_report(r);
    CHECK(rep.metric("two_d_fraction") == doctest::Approx(0.9));
}

TEST_CASE("analyze keeps going past unreadable files") {
    const AnalyzeResult r =
        analyze_paths({(kData / "missing.html").string(), (kData / "ten_pages" / "plain_0.html").string()});
    REQUIRE(r.files.size() == 2);
    CHECK_FALSE(r.files[0].error.empty());
    CHECK(r.files[1].requirement->kind() == RenderKind::TwoD);
    CHECK(r.partial_failure());
    REQUIRE(r.stats);
    CHECK(r.stats->total == 1);
}

TEST_CASE("missing references become warnings") {
    std::vector<std::string> warnings;
    const PageSource src = load_page_source(kData / "corpus" / "005_plain_missing_refs.html", warnings);
    CHECK(src.stylesheets.empty());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("does_not_exist.css") != std::string::npos);
    warnings.clear();
    const PageSource ext = load_page_source(kData / "corpus" / "004_plain_external.html", warnings);
    CHECK(warnings.empty());
    CHECK(ext.stylesheets.size() == 1);
    CHECK(ext.scripts.size() == 1);
}
