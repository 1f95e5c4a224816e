#include <guadasim/error.hpp>
#include <guadasim/pod_scheduler.hpp>

#include <doctest.h>
#include <json.hpp>

#include <random>
#include <sstream>

using namespace guadasim;

namespace {

MappingPod rendering_pod(bool prep = true) {
    return create_pod("rendering", omap4_fixture().group("graphics"), prep);
}

} // namespace

TEST_CASE("new pods start on the weak unit") {
    const auto hw = omap4_fixture();
    const MappingPod r = create_pod("rendering", hw.group("graphics"), true);
    CHECK(r.state() == PodState::WeakActive);
    CHECK(r.active_unit().id() == "gc320");
    CHECK(r.switch_count_this_page() == 0);
    CHECK(r.event_log().empty());
    CHECK(r.base_switch_latency() == kRenderingSwitchLatency);

    const MappingPod l = create_pod("resource_loading", hw.group("cpu"), true);
    CHECK(l.active_unit().id() == "cortex-m3");
    CHECK(l.base_switch_latency() == Millis{2.025});

    MappingPod x = create_pod("x", hw.group("cpu"), false);
    CHECK(x.prepared_strong_bytes() == 0);
    CHECK_THROWS_AS((void)create_pod("", hw.group("cpu"), true), InputError);
}

TEST_CASE("need-strong switches once and never downgrades mid-page") {
    MappingPod pod = rendering_pod();
    CHECK(pod.on_event(RequirementEvent::need_strong(Millis{1.0}, "css transform")) == Decision::Switch);
    CHECK(pod.state() == PodState::SwitchPending);
    const SwitchRecord rec = pod.perform_switch(Millis{1.0}, Millis{120.0});
    CHECK(rec.latency == Millis{4.5});
    CHECK(rec.completed_at == Millis{5.5});
    CHECK(pod.state() == PodState::StrongActive);
    CHECK(pod.active_unit().id() == "sgx544");
    CHECK(pod.on_event(RequirementEvent::below_capacity(Millis{2.0})) == Decision::Stay);
    CHECK(pod.on_event(RequirementEvent::need_strong(Millis{3.0}, "again")) == Decision::Stay);
    CHECK(pod.on_event(RequirementEvent::above_capacity(Millis{3.0})) == Decision::Stay);
    CHECK(pod.state() == PodState::StrongActive);
    CHECK(pod.switch_count_this_page() == 1);

    CHECK(pod.on_event(RequirementEvent::page_open(Millis{4.0})) == Decision::Reset);
    CHECK(pod.state() == PodState::WeakActive);
    CHECK(pod.switch_count_this_page() == 0);
}

TEST_CASE("switch latency without redundant preparation adds the prep cost") {
    MappingPod pod = rendering_pod(false);
    REQUIRE(pod.on_event(RequirementEvent::above_capacity(Millis{0.0})) == Decision::Switch);
    CHECK(pod.perform_switch(Millis{0.0}, Millis{120.0}).latency.count() == doctest::Approx(124.5));
}

TEST_CASE("perform_switch outside SwitchPending is illegal") {
    MappingPod pod = rendering_pod();
    CHECK_THROWS_AS((void)pod.perform_switch(Millis{0.0}, Millis{0.0}), IllegalTransition);
    (void)pod.on_event(RequirementEvent::need_strong(Millis{0.0}, "canvas"));
    (void)pod.perform_switch(Millis{0.0}, Millis{0.0});
    CHECK_THROWS_AS((void)pod.perform_switch(Millis{1.0}, Millis{0.0}), IllegalTransition);
}

TEST_CASE("events must not go back in time") {
    MappingPod pod = rendering_pod();
    (void)pod.on_event(RequirementEvent::below_capacity(Millis{10.0}));
    CHECK_THROWS_AS((void)pod.on_event(RequirementEvent::below_capacity(Millis{9.0})), OrderingError);
    CHECK_NOTHROW((void)pod.on_event(RequirementEvent::below_capacity(Millis{10.0})));
    CHECK_THROWS_AS(RequirementEvent::need_strong(Millis{0.0}, ""), InputError);
}

TEST_CASE("redundant preparation memory") {
    MappingPod pod = rendering_pod();
    CHECK(pod.redundant_prep_memory(1, kGraphicsLayerBytes) == 4'500'000);
    CHECK(pod.redundant_prep_memory(3, kGraphicsLayerBytes) == 13'500'000);
    CHECK(pod.prepared_strong_bytes() == 13'500'000);
    CHECK_FALSE(pod.preparation_stopped());
    CHECK(pod.redundant_prep_memory(100, kGraphicsLayerBytes) == pod.memory_limit());
    CHECK(pod.preparation_stopped());
    CHECK_THROWS_AS((void)pod.redundant_prep_memory(0, kGraphicsLayerBytes), DomainError);
    CHECK_THROWS_AS((void)pod.redundant_prep_memory(1, 0), DomainError);

    MappingPod off = rendering_pod(false);
    CHECK(off.redundant_prep_memory(3, kGraphicsLayerBytes) == 0);

    MappingPod loading = create_pod("resource_loading", omap4_fixture().group("cpu"), true);
    CHECK(loading.redundant_prep_memory(3, kGraphicsLayerBytes) == 0);
}

TEST_CASE("preparation stopped at the cap makes the switch pay the prep cost") {
    MappingPod pod = rendering_pod();
    (void)pod.redundant_prep_memory(1000, kGraphicsLayerBytes);
    REQUIRE(pod.preparation_stopped());
    (void)pod.on_event(RequirementEvent::need_strong(Millis{0.0}, "video"));
    CHECK(pod.perform_switch(Millis{0.0}, Millis{40.0}).latency.count() == doctest::Approx(44.5));
}

TEST_CASE("page open clears preparation state") {
    MappingPod pod = rendering_pod();
    (void)pod.redundant_prep_memory(1000, kGraphicsLayerBytes);
    (void)pod.on_event(RequirementEvent::page_open(Millis{1.0}));
    CHECK(pod.prepared_strong_bytes() == 0);
    CHECK_FALSE(pod.preparation_stopped());
    CHECK(pod.redundant_prep_memory(2, kGraphicsLayerBytes) == 9'000'000);
}

TEST_CASE("canonical order puts page open first on ties") {
    const auto ordered = canonical_order({RequirementEvent::need_strong(Millis{5.0}, "a"),
                                          RequirementEvent::page_open(Millis{5.0}),
                                          RequirementEvent::below_capacity(Millis{1.0})});
    REQUIRE(ordered.size() == 3);
    CHECK(ordered[0].kind == RequirementEvent::Kind::WorkloadBelowWeakCapacity);
    CHECK(ordered[1].kind == RequirementEvent::Kind::PageOpen);
    CHECK(ordered[2].kind == RequirementEvent::Kind::NeedStrong);
}

TEST_CASE("event log serializes as JSON lines") {
    MappingPod pod = rendering_pod();
    (void)pod.on_event(RequirementEvent::page_open(Millis{0.0}));
    (void)pod.on_event(RequirementEvent::need_strong(Millis{2.0}, "canvas"));
    (void)pod.perform_switch(Millis{2.0}, Millis{0.0});
    std::istringstream in(pod.event_log_jsonl());
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1]["pod"] == "rendering");
    CHECK(rows[1]["before"] == "WeakActive");
    CHECK(rows[1]["after"] == "SwitchPending");
    CHECK(rows[2]["after"] == "StrongActive");
    CHECK(rows[1]["t_ms"].get<double>() == 2.0);
}

TEST_CASE("replaying a sequence gives an identical log") {
    std::mt19937_64 rng(42);
    for (int seq = 0; seq < 50; ++seq) {
        std::vector<RequirementEvent> events;
        double t = 0.0;
        for (int i = 0; i < 60; ++i) {
            t += static_cast<double>(rng() % 3);
            switch (rng() % 4) {
            case 0: events.push_back(RequirementEvent::page_open(Millis{t})); break;
            case 1: events.push_back(RequirementEvent::need_strong(Millis{t}, "x")); break;
            case 2: events.push_back(RequirementEvent::below_capacity(Millis{t})); break;
            default: events.push_back(RequirementEvent::above_capacity(Millis{t})); break;
            }
        }
        auto replay = [&] {
            MappingPod pod = rendering_pod();
            for (const auto& e : events) {
                if (pod.on_event(e) == Decision::Switch) (void)pod.perform_switch(e.timestamp, Millis{10.0});
            }
            return pod.event_log();
        };
        CHECK(replay() == replay());
    }
}
