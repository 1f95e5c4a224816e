#include <guadasim/loading_sim.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace guadasim {

std::string_view to_string(Resource::Kind k) noexcept {
    switch (k) {
    case Resource::Kind::MainHtml: return "MainHtml";
    case Resource::Kind::Css: return "Css";
    case Resource::Kind::Script: return "Script";
    case Resource::Kind::Image: return "Image";
    case Resource::Kind::Other: return "Other";
    }
    return "?";
}

Resource::Kind resource_kind_from_string(std::string_view name) {
    if (name == "MainHtml") return Resource::Kind::MainHtml;
    if (name == "Css") return Resource::Kind::Css;
    if (name == "Script") return Resource::Kind::Script;
    if (name == "Image") return Resource::Kind::Image;
    if (name == "Other") return Resource::Kind::Other;
    throw InputError(fmt::format("unknown resource kind '{}'", name));
}

void NetworkModel::validate() const {
    if (!(first_packet_latency.count() > 0.0) || !(rtt.count() > 0.0) || !(bandwidth.value() > 0.0)) {
        throw InputError("network model: first_packet_latency, rtt and bandwidth must all be positive");
    }
}

void StackPerfModel::validate() const {
    if (anchors.empty()) {
        throw InputError("stack model needs at least one anchor");
    }
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (!(anchors[i].clock.value() > 0.0) || !(anchors[i].throughput.value() > 0.0)) {
            throw InputError("stack model anchors must be positive");
        }
        if (i > 0 && (!(anchors[i].clock > anchors[i - 1].clock) ||
                      !(anchors[i].throughput > anchors[i - 1].throughput))) {
            throw InputError("stack model anchors must be strictly increasing in clock and throughput");
        }
    }
    if (!(per_packet_overhead.count() > 0.0)) {
        throw InputError("stack model per-packet overhead must be positive");
    }
}

StackPerfModel m3_stack_model() {
    return StackPerfModel{{{Megahertz{50.0}, Mbps{10.0}}, {Megahertz{200.0}, Mbps{38.1}}}, Micros{300.0}};
}

void CacheFlushModel::validate() const {
    if (!(cache_size_kb > 0.0) || !(flush_cycles > 0.0)) {
        throw InputError("cache flush model: cache size and flush cycles must be positive");
    }
}

Mbps stack_throughput(const StackPerfModel& model, Megahertz clock) {
    model.validate();
    if (!(clock.value() > 0.0)) {
        throw DomainError("stack_throughput: clock must be positive");
    }
    const auto& a = model.anchors;
    if (a.size() == 1) {
        // One anchor: throughput proportional to clock.
        return Mbps{a[0].throughput.value() * clock.value() / a[0].clock.value()};
    }
    std::size_t lo = 0;
    while (lo + 2 < a.size() && clock > a[lo + 1].clock) {
        ++lo;
    }
    const ThroughputAnchor& p = a[lo];
    const ThroughputAnchor& q = a[lo + 1];
    if (clock == p.clock) return p.throughput;
    if (clock == q.clock) return q.throughput;
    const double slope = (q.throughput - p.throughput).value() / (q.clock - p.clock).value();
    return Mbps{std::max(0.0, p.throughput.value() + slope * (clock - p.clock).value())};
}

Feasibility weak_core_feasible(const StackPerfModel& model, Megahertz clock, const NetworkModel& net) {
    net.validate();
    const Mbps tp = stack_throughput(model, clock);
    return Feasibility{tp >= net.bandwidth, tp - net.bandwidth,
                       std::chrono::duration_cast<Millis>(model.per_packet_overhead) / net.rtt};
}

Micros cache_flush_cost(const CacheFlushModel& model, Megahertz clock) {
    model.validate();
    if (!(clock.value() > 0.0)) {
        throw DomainError("cache_flush_cost: clock must be positive");
    }
    return Micros{model.flush_cycles / clock.value()};
}

Micros loading_switch_overhead(const ProcessingUnit& strong, const CacheFlushModel& flush, Megahertz weak_clock) {
    return wake_transition_cost(strong) + cache_flush_cost(flush, weak_clock);
}

MappingPod make_loading_pod(const SpecializationGroup& group, const CacheFlushModel& flush, Megahertz weak_clock) {
    const Millis base = loading_switch_overhead(group.strong(), flush, weak_clock);
    return create_pod("resource_loading", group, true, base);
}

void validate_resources(const std::vector<Resource>& resources) {
    std::map<std::string, const Resource*> by_url;
    int mains = 0;
    for (const auto& r : resources) {
        if (r.url.empty()) {
            throw InputError("resource url must not be empty");
        }
        if (!by_url.emplace(r.url, &r).second) {
            throw InputError(fmt::format("duplicate resource url '{}'", r.url));
        }
        if (r.kind == Resource::Kind::MainHtml) {
            ++mains;
            if (r.discovered_by) {
                throw InputError(fmt::format("main resource '{}' cannot be discovered by another", r.url));
            }
        } else if (!r.discovered_by) {
            throw InputError(fmt::format("subresource '{}' has no discovered_by", r.url));
        }
    }
    if (mains != 1) {
        throw InputError(fmt::format("expected exactly one MainHtml resource, found {}", mains));
    }
    for (const auto& r : resources) {
        if (r.discovered_by && !by_url.contains(*r.discovered_by)) {
            throw InputError(fmt::format("resource '{}' discovered by unknown '{}'", r.url, *r.discovered_by));
        }
    }
    // Every chain of discovered_by links must reach the main resource.
    for (const auto& r : resources) {
        std::set<std::string> seen;
        const Resource* cur = &r;
        while (cur->discovered_by) {
            if (!seen.insert(cur->url).second) {
                throw InputError(fmt::format("dependency cycle through '{}'", cur->url));
            }
            cur = by_url.at(*cur->discovered_by);
        }
    }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double packets(Bytes size) {
    return std::ceil(static_cast<double>(size) / 1000.0);
}

} // namespace

LoadRun run_load_policy(const LoadScenario& sc, const SpecializationGroup& hw, LoadPolicy policy, MappingPod* pod) {
    sc.net.validate();
    sc.weak_stack.validate();
    if (sc.strong_stack) sc.strong_stack->validate();
    sc.flush.validate();
    validate_resources(sc.resources);

    const ProcessingUnit& weak = hw.weak();
    const ProcessingUnit& strong = hw.strong();
    const bool two_phase = policy == LoadPolicy::WeakThenStrong;

    const Mbps weak_tp = stack_throughput(sc.weak_stack, sc.weak_clock);
    const Mbps strong_tp = sc.strong_stack ? stack_throughput(*sc.strong_stack, sc.strong_clock) : Mbps{kInf};
    // Same stack code on either core: the cycle count per bit is what the
    // weak core needs at its clock.
    const double megacycles_per_byte = 8.0 * sc.weak_clock.value() / (weak_tp.value() * 1e6);
    auto work_for = [&](Bytes size) { return Megacycles{static_cast<double>(size) * megacycles_per_byte}; };
    auto extra_latency = [&](Bytes size) {
        return sc.per_packet_latency
                   ? std::chrono::duration_cast<Millis>(sc.weak_stack.per_packet_overhead) * packets(size)
                   : Millis{0.0};
    };

    LoadRun run;
    std::vector<ReportEvent> events;
    auto emit = [&](Millis t, std::string kind, std::string detail = {}) {
        events.push_back(ReportEvent{t, std::move(kind), std::move(detail)});
    };

    const auto main_it = std::find_if(sc.resources.begin(), sc.resources.end(),
                                      [](const Resource& r) { return r.kind == Resource::Kind::MainHtml; });
    const Resource& main = *main_it;

    if (pod) {
        pod->on_event(RequirementEvent::page_open(Millis{0.0}));
    }
    emit(Millis{0.0}, "page_open", main.url);

    // Phase 1: main resource.
    const ProcessingUnit& p1_core = two_phase ? weak : strong;
    const Megahertz p1_clock = two_phase ? sc.weak_clock : sc.strong_clock;
    const Mbps p1_rate = std::min(sc.net.bandwidth, two_phase ? weak_tp : strong_tp);
    const Millis first_packet = sc.net.first_packet_latency;
    const Millis main_done = first_packet + extra_latency(main.size) +
                             transfer_time(static_cast<double>(main.size), p1_rate);
    emit(first_packet, "first_packet", main.url);
    emit(main_done, "resource_complete", main.url);
    run.transfers.push_back({main.url, Millis{0.0}, first_packet, main_done, p1_core.id()});

    run.phase1 = main_done;
    const Megacycles main_work = work_for(main.size);
    run.phase1_compute_energy = energy_for_work(p1_core, main_work, p1_clock);
    const Millis p1_active = std::chrono::duration_cast<Millis>(execution_time(main_work, p1_clock));
    run.phase1_idle_energy = idle_energy(p1_core, std::max(Millis{0.0}, main_done - p1_active));

    Millis phase2_start = main_done;
    if (two_phase) {
        Millis latency = std::chrono::duration_cast<Millis>(loading_switch_overhead(strong, sc.flush, sc.weak_clock));
        if (pod) {
            pod->on_event(RequirementEvent::above_capacity(main_done));
            const SwitchRecord rec = pod->perform_switch(main_done, Millis{0.0});
            latency = rec.latency;
        }
        emit(main_done, "switch_start", fmt::format("{} -> {}", weak.id(), strong.id()));
        emit(main_done + latency, "switch_complete");
        run.switch_overhead = latency;
        run.switch_count = 1;
        const Megacycles flush_work{sc.flush.flush_cycles / 1e6};
        run.switch_energy = energy_for_work(weak, flush_work, sc.weak_clock) + idle_energy(strong, latency);
        phase2_start = main_done + latency;
    }

    // Phase 2: subresources under processor sharing.
    const Mbps p2_rate = std::min(sc.net.bandwidth, strong_tp);
    std::map<std::string, std::vector<std::size_t>> children;
    for (std::size_t i = 0; i < sc.resources.size(); ++i) {
        if (sc.resources[i].discovered_by) {
            children[*sc.resources[i].discovered_by].push_back(i);
        }
    }

    struct Pending {
        Millis start;
        std::size_t index;
        bool operator<(const Pending& o) const { return start != o.start ? start < o.start : index < o.index; }
    };
    std::set<Pending> pending;
    std::map<std::size_t, double> active; // index -> remaining bits
    std::map<std::size_t, std::size_t> transfer_slot;

    auto discover = [&](const std::string& parent, Millis t) {
        auto it = children.find(parent);
        if (it == children.end()) return;
        for (std::size_t idx : it->second) {
            const Resource& r = sc.resources[idx];
            emit(t, "request", r.url);
            const Millis start = t + sc.net.rtt + extra_latency(r.size);
            pending.insert(Pending{start, idx});
            transfer_slot[idx] = run.transfers.size();
            run.transfers.push_back({r.url, t, start, Millis{0.0}, strong.id()});
        }
    };

    discover(main.url, phase2_start);
    Millis now = phase2_start;
    Millis last_complete = phase2_start;
    Bytes phase2_bytes = 0;
    while (!pending.empty() || !active.empty()) {
        const double share_mbps = active.empty() ? 0.0 : p2_rate.value() / static_cast<double>(active.size());
        double min_remaining = kInf;
        for (const auto& [idx, bits] : active) min_remaining = std::min(min_remaining, bits);
        const Millis next_completion =
            active.empty() ? Millis{kInf} : now + Millis{min_remaining / (share_mbps * 1000.0)};
        const Millis next_start = pending.empty() ? Millis{kInf} : pending.begin()->start;

        const Millis step_to = std::min(next_completion, next_start);
        const bool completing = next_completion <= next_start;
        const double progressed_bits = completing ? min_remaining : share_mbps * 1000.0 * (step_to - now).count();
        now = step_to;

        // Completions first, then starts at the same instant.
        std::vector<std::size_t> done;
        for (auto& [idx, bits] : active) {
            bits -= progressed_bits;
            if (completing && bits <= 1e-9 * std::max(1.0, min_remaining)) {
                done.push_back(idx);
            }
        }
        for (std::size_t idx : done) {
            active.erase(idx);
            const Resource& r = sc.resources[idx];
            run.transfers[transfer_slot[idx]].complete = now;
            emit(now, "resource_complete", r.url);
            last_complete = std::max(last_complete, now);
            phase2_bytes += r.size;
            discover(r.url, now);
        }
        while (!pending.empty() && pending.begin()->start <= now) {
            const std::size_t idx = pending.begin()->index;
            pending.erase(pending.begin());
            active[idx] = static_cast<double>(sc.resources[idx].size) * 8.0;
        }
    }

    run.total = last_complete;
    run.phase2 = run.total - phase2_start;
    const Megacycles p2_work = work_for(phase2_bytes);
    run.phase2_energy = energy_for_work(strong, p2_work, sc.strong_clock);
    const Millis p2_active = std::chrono::duration_cast<Millis>(execution_time(p2_work, sc.strong_clock));
    run.phase2_energy += idle_energy(strong, std::max(Millis{0.0}, run.phase2 - p2_active));
    run.total_energy = run.phase1_compute_energy + run.phase1_idle_energy + run.switch_energy + run.phase2_energy;

    emit(run.total, "load_complete");
    std::stable_sort(events.begin(), events.end(),
                     [](const ReportEvent& a, const ReportEvent& b) { return a.timestamp < b.timestamp; });
    run.timeline = std::move(events);
    return run;
}

SimReport simulate_page_load(const LoadScenario& sc, const SpecializationGroup& hw, MappingPod& pod) {
    if (pod.service() != "resource_loading") {
        throw InputError(fmt::format("pod '{}' is not a resource_loading pod", pod.service()));
    }
    if (pod.state() != PodState::WeakActive) {
        throw IllegalTransition(fmt::format("pod '{}' must start in WeakActive, is {}", pod.service(),
                                            to_string(pod.state())));
    }

    const LoadRun g = run_load_policy(sc, hw, LoadPolicy::WeakThenStrong, &pod);
    const LoadRun b = run_load_policy(sc, hw, LoadPolicy::StrongPinned, nullptr);

    SimReport report("load");
    for (const auto& e : g.timeline) {
        report.add_event(e.timestamp, e.kind, e.detail);
    }

    const Feasibility feas = weak_core_feasible(sc.weak_stack, sc.weak_clock, sc.net);
    if (!feas.feasible) {
        report.add_warning(fmt::format("weak core stack throughput is below link bandwidth by {} Mbps",
                                       format_number(-feas.margin.value())));
    }

    report.set_metric("total_load_ms", g.total.count(), "ms");
    report.set_metric("phase1_ms", g.phase1.count(), "ms");
    report.set_metric("phase2_ms", g.phase2.count(), "ms");
    report.set_metric("switch_overhead_us", std::chrono::duration_cast<Micros>(g.switch_overhead).count(), "us");
    report.set_metric("switch_count", g.switch_count, "count");
    report.set_metric("energy_mJ", g.total_energy.value(), "mJ");
    report.set_metric("phase1_compute_energy_mJ", g.phase1_compute_energy.value(), "mJ");
    report.set_metric("phase1_idle_energy_mJ", g.phase1_idle_energy.value(), "mJ");
    report.set_metric("switch_energy_mJ", g.switch_energy.value(), "mJ");
    report.set_metric("phase2_energy_mJ", g.phase2_energy.value(), "mJ");
    report.set_metric("baseline.total_load_ms", b.total.count(), "ms");
    report.set_metric("baseline.energy_mJ", b.total_energy.value(), "mJ");
    report.set_metric("baseline.phase1_compute_energy_mJ", b.phase1_compute_energy.value(), "mJ");
    report.set_metric("baseline.phase1_idle_energy_mJ", b.phase1_idle_energy.value(), "mJ");
    report.set_metric("baseline.switch_count", b.switch_count, "count");
    report.set_metric("load_time_delta_ms", (g.total - b.total).count(), "ms");
    report.set_metric("energy_reduction", 1.0 - g.total_energy / b.total_energy, "fraction");
    report.set_metric("phase1_compute_energy_reduction", 1.0 - g.phase1_compute_energy / b.phase1_compute_energy,
                      "fraction");
    report.set_metric("weak_stack_throughput_Mbps", stack_throughput(sc.weak_stack, sc.weak_clock).value(), "Mbps");
    report.set_metric("weak_margin_Mbps", feas.margin.value(), "Mbps");
    report.set_metric("weak_feasible", feas.feasible ? 1.0 : 0.0, "bool");
    report.set_metric("per_packet_fraction_of_rtt", feas.latency_fraction_of_rtt, "fraction");

    Table& table = report.table();
    table.columns = {"url", "kind", "size_bytes", "available_ms", "start_ms", "complete_ms", "core"};
    for (const auto& t : g.transfers) {
        const auto it = std::find_if(sc.resources.begin(), sc.resources.end(),
                                     [&](const Resource& r) { return r.url == t.url; });
        table.rows.push_back({t.url, std::string{to_string(it->kind)}, static_cast<double>(it->size),
                              t.available.count(), t.start.count(), t.complete.count(), t.core});
    }
    return report;
}

} // namespace guadasim
