#include <guadasim/rendering_sim.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace guadasim {

const char* const kContentionAnchorNote =
    "contention anchors 52/6/44 fps are not jointly consistent under one linear budget: the Chrome cost "
    "fitted to 6 fps at 60 fps (15 ms/frame) gives 33 fps at 30 fps; the 44 fps case uses a separate "
    "8.84 ms/frame fit";

namespace {

// Quantization slack so that work landing exactly on a vsync multiple does
// not spill into the next interval through rounding noise.
constexpr double kQuantumSlack = 1e-9;

int refresh_rate(Millis vsync) {
    return static_cast<int>(std::lround(1000.0 / vsync.count()));
}

} // namespace

void RenderPage::validate() const {
    if (layer_count < 1) {
        throw InputError("render page needs at least one layer");
    }
    if (!(composite_latency_2d.count() > 0.0) || !(composite_latency_3d.count() > 0.0)) {
        throw InputError("composition latencies must be positive");
    }
    if (other_frame_work.count() < 0.0) {
        throw InputError("other_frame_work must be non-negative");
    }
}

void BrowserConfig::validate() const {
    if (app_draw_cost_3d.count() < 0.0 || page_composite_cost_3d.count() < 0.0) {
        throw InputError(fmt::format("browser '{}': 3D costs must be non-negative", name));
    }
    if (!(target_fps_cap > 0.0) || target_fps_cap > 60.0) {
        throw InputError(fmt::format("browser '{}': fps cap must be in (0, 60]", name));
    }
}

void BackgroundApp::validate() const {
    if (draw_cost_3d.count() < 0.0 || compositor_cost_3d.count() < 0.0 || !(standalone_fps > 0.0)) {
        throw InputError("background app: costs must be non-negative and standalone fps positive");
    }
    const double per_frame = (draw_cost_3d + compositor_cost_3d).count();
    // A 16.7 ms frame is how a 60 Hz refresh interval is usually quoted, so
    // the budget check works at whole-frame granularity.
    if (per_frame > 0.0 && std::round(1000.0 / per_frame) < standalone_fps) {
        throw InputError(fmt::format("background app: {} ms per frame cannot sustain {} fps", per_frame,
                                     standalone_fps));
    }
}

BrowserConfig guadalupe_browser() {
    return BrowserConfig{"guadalupe", true, Millis{4.39}, Millis{0.0}, 60.0};
}

BrowserConfig chrome_browser() {
    return BrowserConfig{"chrome", false, Millis{4.39}, Millis{10.61}, 60.0};
}

BrowserConfig chrome_browser_30fps() {
    return BrowserConfig{"chrome-30", false, Millis{4.39}, Millis{4.45}, 30.0};
}

double frame_rate(const RenderPage& page, bool use_2d, Millis vsync) {
    page.validate();
    if (!(vsync.count() > 0.0)) {
        throw DomainError("vsync interval must be positive");
    }
    if (use_2d && page.requirement.kind() == RenderKind::ThreeD) {
        throw CapabilityError("2D accelerator cannot composite a page with 3D requirements");
    }
    const Millis work = (use_2d ? page.composite_latency_2d : page.composite_latency_3d) + page.other_frame_work;
    const double intervals = std::max(1.0, std::ceil(work / vsync - kQuantumSlack));
    const double refresh = refresh_rate(vsync);
    return std::min(refresh, refresh / intervals);
}

AccelUtilization accel_utilization(const BrowserConfig& browser, double fps) {
    if (!(fps > 0.0)) {
        throw DomainError(fmt::format("browser '{}': fps must be positive", browser.name));
    }
    const double per_frame_activities = browser.uses_2d_compositor ? 1.0 : 2.0;
    return AccelUtilization{fps * per_frame_activities, browser.per_frame_3d_cost() * fps};
}

double utilization_reduction(const AccelUtilization& candidate, const AccelUtilization& baseline) {
    if (!(baseline.activities_per_s > 0.0)) {
        throw DomainError("baseline utilization must be positive");
    }
    return 1.0 - candidate.activities_per_s / baseline.activities_per_s;
}

int contention(const BrowserConfig& browser, double browser_fps, const BackgroundApp& bg) {
    browser.validate();
    bg.validate();
    if (browser_fps < 0.0) {
        throw DomainError("browser fps must be non-negative");
    }
    const double demand = browser.per_frame_3d_cost().count() * browser_fps;
    const double remaining = 1000.0 - demand;
    const double bg_frame = (bg.draw_cost_3d + bg.compositor_cost_3d).count();
    if (remaining <= 0.0) {
        return 0;
    }
    const int standalone = static_cast<int>(std::lround(bg.standalone_fps));
    if (bg_frame <= 0.0) {
        return standalone;
    }
    // Whole frames, rounded to nearest (see BackgroundApp::validate).
    const double frames = std::round(remaining / bg_frame);
    return std::min(standalone, static_cast<int>(frames));
}

double composition_efficiency_ratio(double power_ratio_3d_over_2d, double latency_ratio_2d_over_3d) {
    if (!(power_ratio_3d_over_2d > 0.0) || !(latency_ratio_2d_over_3d > 0.0)) {
        throw DomainError("ratios must be positive");
    }
    return power_ratio_3d_over_2d / latency_ratio_2d_over_3d;
}

double system_energy_saving(double saving_mj_per_s, Milliwatts system_power) {
    if (!(system_power.value() > 0.0)) {
        throw DomainError("system power must be positive");
    }
    return saving_mj_per_s / system_power.value();
}

SimReport simulate_scroll(const ScrollScenario& sc, MappingPod& pod) {
    sc.page.validate();
    sc.browser.validate();
    if (!(sc.duration.count() > 0.0)) {
        throw DomainError("scroll duration must be positive");
    }
    if (pod.service() != "rendering" || pod.group().specialization().kind() != Specialization::Kind::GraphicsAccel) {
        throw InputError(fmt::format("pod '{}' is not a rendering pod on graphics accelerators", pod.service()));
    }

    SimReport report(fmt::format("scroll/{}", sc.browser.name));
    const bool managed = sc.browser.uses_2d_compositor;
    const ProcessingUnit& weak = pod.group().weak();
    const ProcessingUnit& strong = pod.group().strong();
    const Milliwatts weak_power = power_at_clock(weak, weak.max_clock());
    const Milliwatts strong_power = power_at_clock(strong, strong.max_clock());

    RenderPage page = sc.page;
    const Millis repaint_cost = sc.repaint_cost_per_layer * static_cast<double>(page.layer_count);
    Millis frames_blocked_until{0.0};
    int switches = 0;
    Millis switch_latency{0.0};
    Bytes prepared = 0;

    auto request_strong = [&](Millis t, const std::string& reason) {
        if (pod.on_event(RequirementEvent::need_strong(t, reason)) != Decision::Switch) {
            return;
        }
        report.add_event(t, "need_strong", reason);
        const SwitchRecord rec = pod.perform_switch(t, repaint_cost);
        ++switches;
        switch_latency = rec.latency;
        frames_blocked_until = std::max(frames_blocked_until, rec.completed_at);
        report.add_event(t, "switch_start", fmt::format("{} -> {}", weak.id(), strong.id()));
        report.add_event(rec.completed_at, "switch_complete", fmt::format("latency_ms={}", format_number(rec.latency.count())));
    };
    auto first_reason = [](const RenderingRequirement& req, std::size_t from) {
        const auto& r = req.reasons.at(from);
        return fmt::format("{}:{}", to_string(r.category), to_string(r.keyword));
    };

    if (managed) {
        pod.on_event(RequirementEvent::page_open(Millis{0.0}));
        report.add_event(Millis{0.0}, "page_open");
        prepared = pod.redundant_prep_memory(static_cast<std::size_t>(page.layer_count), sc.bytes_per_layer);
        if (page.requirement.kind() == RenderKind::ThreeD) {
            request_strong(Millis{0.0}, first_reason(page.requirement, 0));
        }
    }

    std::vector<Mutation> mutations = sc.mutations;
    std::stable_sort(mutations.begin(), mutations.end(),
                     [](const Mutation& a, const Mutation& b) { return a.timestamp < b.timestamp; });
    std::size_t next_mutation = 0;

    Table& table = report.table();
    table.columns = {"frame", "t_ms", "compositor", "fps", "composite_ms", "composite_energy_mJ", "draw_energy_mJ"};

    const Millis end = std::chrono::duration_cast<Millis>(sc.duration);
    Millis t{0.0};
    long frames = 0;
    double activities = 0.0;
    Millis busy_3d{0.0};
    Millijoules composite_energy{0.0};
    Millijoules draw_energy{0.0};
    double fps = 0.0;

    while (true) {
        // Mutations take effect at the first frame boundary at or after them.
        while (next_mutation < mutations.size() && mutations[next_mutation].timestamp <= t) {
            const Mutation& m = mutations[next_mutation++];
            const std::size_t before = page.requirement.reasons.size();
            page.requirement = apply_mutation(std::move(page.requirement), m);
            report.add_event(std::max(m.timestamp, report.events().empty() ? Millis{0.0} : report.events().back().timestamp),
                             "mutation", fmt::format("{}({})", to_string(m.kind), m.value));
            if (managed && page.requirement.reasons.size() > before) {
                request_strong(m.timestamp, first_reason(page.requirement, before));
            }
        }
        t = std::max(t, frames_blocked_until);
        // Slack absorbs drift from accumulating 1000/fps frame periods.
        if (t >= end - Millis{1e-6}) {
            break;
        }

        const bool use_2d = managed && pod.state() != PodState::StrongActive;
        if (use_2d && page.requirement.kind() == RenderKind::ThreeD) {
            throw CapabilityError(fmt::format("pod '{}' stayed on {} with 3D requirements", pod.service(), weak.id()));
        }
        fps = std::min(frame_rate(page, use_2d, sc.vsync), sc.browser.target_fps_cap);
        const Millis composite = use_2d ? page.composite_latency_2d : page.composite_latency_3d;
        const Millijoules e_comp = energy(use_2d ? weak_power : strong_power, composite);
        const Millijoules e_draw = energy(strong_power, sc.browser.app_draw_cost_3d);

        composite_energy += e_comp;
        draw_energy += e_draw;
        activities += use_2d ? 1.0 : 2.0;
        busy_3d += sc.browser.app_draw_cost_3d + (use_2d ? Millis{0.0} : composite);
        table.rows.push_back({static_cast<double>(frames), t.count(), use_2d ? weak.id() : strong.id(), fps,
                              composite.count(), e_comp.value(), e_draw.value()});
        ++frames;
        t += Millis{1000.0 / fps};
    }

    const double seconds = sc.duration.count();
    report.add_event(std::max(end, report.events().empty() ? Millis{0.0} : report.events().back().timestamp),
                     "scroll_end");
    report.set_metric("frames", static_cast<double>(frames), "count");
    report.set_metric("fps", fps, "fps");
    report.set_metric("mean_fps", static_cast<double>(frames) / seconds, "fps");
    report.set_metric("accel3d_activities_per_s", activities / seconds, "1/s");
    report.set_metric("accel3d_busy_ms_per_s", busy_3d.count() / seconds, "ms/s");
    report.set_metric("composite_energy_mJ", composite_energy.value(), "mJ");
    report.set_metric("draw_energy_mJ", draw_energy.value(), "mJ");
    report.set_metric("total_energy_mJ", (composite_energy + draw_energy).value(), "mJ");
    report.set_metric("composite_energy_mJ_per_s", composite_energy.value() / seconds, "mJ/s");
    report.set_metric("prepared_memory_bytes", static_cast<double>(prepared), "bytes");
    report.set_metric("preparation_stopped", pod.preparation_stopped() ? 1.0 : 0.0, "bool");
    report.set_metric("switch_count", switches, "count");
    report.set_metric("switch_latency_ms", switch_latency.count(), "ms");
    report.set_metric("three_d", page.requirement.kind() == RenderKind::ThreeD ? 1.0 : 0.0, "bool");
    return report;
}

} // namespace guadasim
