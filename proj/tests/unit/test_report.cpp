#include <guadasim/error.hpp>
#include <guadasim/report.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace guadasim;

namespace {

SimReport sample() {
    SimReport r("demo");
    r.set_seed(3);
    r.add_event(Millis{0.0}, "start");
    r.add_event(Millis{1.5}, "tick", "a");
    r.set_metric("z_last", 1.0 / 3.0, "fraction");
    r.set_metric("a_first", 1234567.0, "count");
    r.add_warning("careful");
    r.table().columns = {"name", "value"};
    r.table().rows = {{std::string{"x"}, 1.0}, {std::string{"y, z"}, 2.5}};
    return r;
}

} // namespace

TEST_CASE("number formatting uses six significant digits") {
    CHECK(format_number(1.0 / 3.0) == "0.333333");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(30.0) == "30");
    CHECK(format_number(std::nan("")) == "null");
}

TEST_CASE("events must be in time order and metrics need units") {
    SimReport r;
    r.add_event(Millis{5.0}, "a");
    CHECK_THROWS_AS(r.add_event(Millis{4.0}, "b"), InputError);
    CHECK_NOTHROW(r.add_event(Millis{5.0}, "c"));
    CHECK_THROWS_AS(r.set_metric("m", 1.0, ""), InputError);
    CHECK_THROWS_AS((void)r.metric("missing"), InputError);
}

TEST_CASE("json output is sorted, parseable and stable") {
    const std::string a = to_json(sample());
    const std::string b = to_json(sample());
    CHECK(a == b);
    const auto doc = nlohmann::json::parse(a);
    CHECK(doc["scenario_id"] == "demo");
    CHECK(doc["seed"] == 3);
    CHECK(doc["events"].size() == 2);
    CHECK(doc["metrics"]["z_last"]["unit"] == "fraction");
    CHECK(a.find("\"a_first\"") < a.find("\"z_last\""));
    CHECK(a.find("\"events\"") < a.find("\"metrics\""));
    CHECK(a.find("0.333333") != std::string::npos);
}

TEST_CASE("csv output has a header and one row per table row") {
    const std::string csv = to_csv(sample());
    CHECK(csv == "name,value\nx,1\n\"y, z\",2.5\n");
    SimReport events_only;
    events_only.add_event(Millis{0.0}, "start");
    events_only.add_event(Millis{2.0}, "end", "done");
    CHECK(to_csv(events_only) == "t_ms,kind,detail\n0,start,\n2,end,done\n");
}

TEST_CASE("merge prefixes metrics and keeps events ordered") {
    SimReport a("a");
    a.add_event(Millis{0.0}, "x");
    a.add_event(Millis{10.0}, "y");
    SimReport b("b");
    b.add_event(Millis{5.0}, "z");
    b.set_metric("fps", 30.0, "fps");
    a.merge(b, "guest");
    REQUIRE(a.events().size() == 3);
    CHECK(a.events()[1].timestamp == Millis{5.0});
    CHECK(a.events()[1].kind == "guest.z");
    CHECK(a.metric("guest.fps") == 30.0);
}

TEST_CASE("emit to file and to an unwritable destination") {
    const auto path = std::filesystem::temp_directory_path() / "guadasim_report_test.json";
    emit_report(sample(), ReportFormat::Json, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == to_json(sample()));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit_report(sample(), ReportFormat::Csv, std::string{"/nonexistent-dir/x/y.csv"}), Error);
    std::ostringstream out;
    emit_report(sample(), ReportFormat::Csv, out);
    CHECK(out.str() == to_csv(sample()));
}
