#include <guadasim/error.hpp>
#include <guadasim/rendering_sim.hpp>

#include <doctest.h>

#include <random>
#include <variant>

using namespace guadasim;

namespace {

RenderPage page_with(double composite, double other) {
    RenderPage p;
    p.composite_latency_2d = Millis{composite};
    p.composite_latency_3d = Millis{composite};
    p.other_frame_work = Millis{other};
    return p;
}

RenderPage three_d_page() {
    RenderPage p;
    p.requirement.reasons.push_back({RequirementCategory::HtmlTag, Keyword::Canvas, {"index.html", 0}});
    return p;
}

MappingPod graphics_pod() {
    return create_pod("rendering", omap4_fixture().group("graphics"), true);
}

double cell(const Cell& c) { return std::get<double>(c); }

} // namespace

TEST_CASE("frame rate quantizes to vsync") {
    CHECK(frame_rate(page_with(12.6, 5.0), true) == 30.0);
    CHECK(frame_rate(page_with(1.0, 1.0), true) == 60.0);
    CHECK(frame_rate(page_with(40.0, 12.0), true) == 15.0);
    CHECK(frame_rate(page_with(12.6, 20.8), true) == 30.0);
    CHECK(frame_rate(page_with(12.6, 20.9), true) == 20.0);
    CHECK(frame_rate(page_with(12.6, 4.0), true) == 60.0);
}

TEST_CASE("frame rate errors") {
    CHECK_THROWS_AS((void)frame_rate(three_d_page(), true), CapabilityError);
    CHECK_NOTHROW((void)frame_rate(three_d_page(), false));
    CHECK_THROWS_AS((void)frame_rate(page_with(1.0, 1.0), true, Millis{0.0}), DomainError);
    RenderPage bad = page_with(1.0, 1.0);
    bad.layer_count = 0;
    CHECK_THROWS_AS((void)frame_rate(bad, true), InputError);
}

TEST_CASE("frame rate divides the refresh rate") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ms(0.1, 200.0);
    for (int i = 0; i < 2000; ++i) {
        const double fps = frame_rate(page_with(ms(rng), ms(rng)), true);
        CHECK(fps <= 60.0);
        CHECK(60.0 / fps == doctest::Approx(std::round(60.0 / fps)));
    }
}

TEST_CASE("accelerator utilization") {
    const auto g = accel_utilization(guadalupe_browser(), 30.0);
    const auto c = accel_utilization(chrome_browser(), 60.0);
    CHECK(g.activities_per_s == 30.0);
    CHECK(c.activities_per_s == 120.0);
    CHECK(g.busy_per_s.count() == doctest::Approx(30.0 * 4.39));
    CHECK(c.busy_per_s.count() == doctest::Approx(900.0));
    CHECK(utilization_reduction(g, c) == 0.75);
    CHECK(utilization_reduction(accel_utilization(guadalupe_browser(), 45.0),
                                accel_utilization(chrome_browser(), 45.0)) == 0.5);
    CHECK_THROWS_AS((void)accel_utilization(chrome_browser(), 0.0), DomainError);
}

TEST_CASE("contention anchors") {
    const BackgroundApp bg;
    CHECK(contention(guadalupe_browser(), 30.0, bg) == 52);
    CHECK(contention(chrome_browser(), 60.0, bg) == 6);
    CHECK(contention(chrome_browser_30fps(), 30.0, bg) == 44);
    // One linear budget cannot give all three: the 15 ms fit at 30 fps.
    CHECK(contention(chrome_browser(), 30.0, bg) == 33);
    CHECK(contention(guadalupe_browser(), 0.0, bg) == 60);
    BrowserConfig hog{"hog", false, Millis{20.0}, Millis{20.0}, 60.0};
    CHECK(contention(hog, 60.0, bg) == 0);
    CHECK(std::string(kContentionAnchorNote).find("8.84") != std::string::npos);
}

TEST_CASE("contention is monotone in browser demand") {
    const BackgroundApp bg;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> cost(0.0, 20.0);
    for (int i = 0; i < 500; ++i) {
        BrowserConfig b{"b", false, Millis{cost(rng)}, Millis{cost(rng)}, 60.0};
        int prev = contention(b, 0.0, bg);
        for (double fps = 1.0; fps <= 60.0; fps += 1.0) {
            const int now = contention(b, fps, bg);
            CHECK(now <= prev);
            prev = now;
        }
        BrowserConfig heavier = b;
        heavier.app_draw_cost_3d += Millis{1.0};
        CHECK(contention(heavier, 30.0, bg) <= contention(b, 30.0, bg));
    }
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(BrowserConfig({"x", false, Millis{-1.0}, Millis{0.0}, 60.0}).validate(), InputError);
    CHECK_THROWS_AS(BrowserConfig({"x", false, Millis{1.0}, Millis{0.0}, 61.0}).validate(), InputError);
    CHECK_THROWS_AS(BrowserConfig({"x", false, Millis{1.0}, Millis{0.0}, 0.0}).validate(), InputError);
    CHECK_THROWS_AS(BackgroundApp({Millis{20.0}, Millis{6.7}, 60.0}).validate(), InputError);
    CHECK_NOTHROW(BackgroundApp({Millis{10.0}, Millis{6.7}, 60.0}).validate());
}

TEST_CASE("energy ratios") {
    CHECK(composition_efficiency_ratio(12.0, 2.0) == 6.0);
    CHECK(composition_efficiency_ratio(1.0, 1.0) == 1.0);
    CHECK(composition_efficiency_ratio(12.0, 1.0) == 12.0);
    CHECK_THROWS_AS((void)composition_efficiency_ratio(0.0, 1.0), DomainError);
    CHECK(system_energy_saving(80.0, Milliwatts{1700.0}) == doctest::Approx(0.047).epsilon(0.01));
    CHECK(system_energy_saving(0.0, Milliwatts{1700.0}) == 0.0);
    CHECK(system_energy_saving(170.0, Milliwatts{1700.0}) == doctest::Approx(0.10));
    CHECK_THROWS_AS((void)system_energy_saving(1.0, Milliwatts{0.0}), DomainError);
}

TEST_CASE("scrolling a 2D page with the 2D compositor") {
    MappingPod pod = graphics_pod();
    ScrollScenario sc;
    sc.browser = guadalupe_browser();
    const SimReport r = simulate_scroll(sc, pod);
    CHECK(r.metric("fps") == 30.0);
    CHECK(r.metric("frames") == 150.0);
    CHECK(r.metric("switch_count") == 0.0);
    CHECK(r.metric("accel3d_activities_per_s") == doctest::Approx(30.0));
    CHECK(r.metric("prepared_memory_bytes") == 4'500'000.0);
    CHECK(pod.state() == PodState::WeakActive);
}

TEST_CASE("a scripted 3D mutation switches once") {
    MappingPod pod = graphics_pod();
    ScrollScenario sc;
    sc.browser = guadalupe_browser();
    sc.page.layer_count = 2;
    sc.mutations = {{Millis{2000.0}, Mutation::Kind::AddCssDeclaration, "transform"},
                    {Millis{3000.0}, Mutation::Kind::AddElement, "video"}};
    const SimReport r = simulate_scroll(sc, pod);
    CHECK(r.metric("switch_count") == 1.0);
    CHECK(r.metric("switch_latency_ms") == 4.5);
    CHECK(r.metric("three_d") == 1.0);
    CHECK(r.metric("fps") == 60.0);
    bool saw_switch = false;
    for (const auto& e : r.events()) {
        if (e.kind == "switch_start") {
            CHECK(e.timestamp == Millis{2000.0});
            saw_switch = true;
        }
    }
    CHECK(saw_switch);
    // Frames before the switch ran on the 2D unit, after it on the 3D unit.
    for (const auto& row : r.table().rows) {
        const double t = cell(row[1]);
        CHECK(std::get<std::string>(row[2]) == (t < 2000.0 ? "gc320" : "sgx544"));
    }
}

TEST_CASE("legacy browser composites on the 3D unit with no switches") {
    MappingPod pod = graphics_pod();
    ScrollScenario sc;
    sc.browser = chrome_browser();
    sc.page = three_d_page();
    const SimReport r = simulate_scroll(sc, pod);
    CHECK(r.metric("switch_count") == 0.0);
    CHECK(r.metric("fps") == 60.0);
    CHECK(r.metric("accel3d_activities_per_s") == doctest::Approx(120.0));
}

TEST_CASE("scroll energy equals the sum of per-frame energies") {
    MappingPod pod = graphics_pod();
    ScrollScenario sc;
    sc.browser = guadalupe_browser();
    sc.mutations = {{Millis{1234.0}, Mutation::Kind::ScriptCall, "getContext('webgl')"}};
    const SimReport r = simulate_scroll(sc, pod);
    double sum = 0.0;
    for (const auto& row : r.table().rows) sum += cell(row[5]) + cell(row[6]);
    CHECK(r.metric("total_energy_mJ") == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("scroll input errors") {
    ScrollScenario sc;
    MappingPod cpu = create_pod("rendering", omap4_fixture().group("cpu"), true);
    CHECK_THROWS_AS((void)simulate_scroll(sc, cpu), InputError);
    MappingPod pod = graphics_pod();
    sc.duration = Seconds{0.0};
    CHECK_THROWS_AS((void)simulate_scroll(sc, pod), DomainError);
}
