#include <guadasim/pod_scheduler.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>

namespace guadasim {

std::string_view to_string(PodState state) noexcept {
    switch (state) {
    case PodState::WeakActive: return "WeakActive";
    case PodState::SwitchPending: return "SwitchPending";
    case PodState::StrongActive: return "StrongActive";
    }
    return "?";
}

std::string_view to_string(RequirementEvent::Kind kind) noexcept {
    using K = RequirementEvent::Kind;
    switch (kind) {
    case K::PageOpen: return "PageOpen";
    case K::NeedStrong: return "NeedStrong";
    case K::WorkloadBelowWeakCapacity: return "WorkloadBelowWeakCapacity";
    case K::WorkloadAboveWeakCapacity: return "WorkloadAboveWeakCapacity";
    }
    return "?";
}

std::string_view to_string(Decision d) noexcept {
    switch (d) {
    case Decision::Stay: return "Stay";
    case Decision::Switch: return "Switch";
    case Decision::Reset: return "Reset";
    }
    return "?";
}

RequirementEvent RequirementEvent::need_strong(Millis t, std::string reason) {
    if (reason.empty()) {
        throw InputError("NeedStrong requires a non-empty reason");
    }
    return {t, Kind::NeedStrong, std::move(reason)};
}

std::vector<RequirementEvent> canonical_order(std::vector<RequirementEvent> events) {
    std::stable_sort(events.begin(), events.end(), [](const RequirementEvent& a, const RequirementEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        const bool a_open = a.kind == RequirementEvent::Kind::PageOpen;
        const bool b_open = b.kind == RequirementEvent::Kind::PageOpen;
        return a_open && !b_open;
    });
    return events;
}

MappingPod::MappingPod(std::string service, SpecializationGroup group, PodOptions options)
    : service_(std::move(service)), group_(std::move(group)), options_(options) {
    if (service_.empty()) {
        throw InputError("mapping pod service name must not be empty");
    }
    if (options_.base_switch_latency.count() < 0.0) {
        throw InputError(fmt::format("pod '{}': base switch latency must be non-negative", service_));
    }
}

const ProcessingUnit& MappingPod::active_unit() const noexcept {
    return state_ == PodState::StrongActive ? group_.strong() : group_.weak();
}

void MappingPod::check_order(Millis t) const {
    if (!log_.empty() && t < log_.back().timestamp) {
        throw OrderingError(fmt::format("pod '{}': event at {} ms precedes last logged event at {} ms", service_,
                                        t.count(), log_.back().timestamp.count()));
    }
}

void MappingPod::log(Millis t, std::string event, std::string detail, PodState before) {
    log_.push_back(PodLogEntry{t, std::move(event), std::move(detail), before, state_});
}

Decision MappingPod::on_event(const RequirementEvent& ev) {
    using K = RequirementEvent::Kind;
    check_order(ev.timestamp);
    if (ev.kind == K::NeedStrong && ev.reason.empty()) {
        throw InputError("NeedStrong requires a non-empty reason");
    }

    const PodState before = state_;
    Decision d = Decision::Stay;
    switch (ev.kind) {
    case K::PageOpen:
        state_ = PodState::WeakActive;
        prepared_bytes_ = 0;
        prep_stopped_ = false;
        switch_count_ = 0;
        d = Decision::Reset;
        break;
    case K::NeedStrong:
    case K::WorkloadAboveWeakCapacity:
        if (state_ == PodState::WeakActive) {
            state_ = PodState::SwitchPending;
            d = Decision::Switch;
        }
        break;
    case K::WorkloadBelowWeakCapacity:
        break;
    }
    log(ev.timestamp, std::string{to_string(ev.kind)}, ev.reason, before);
    return d;
}

SwitchRecord MappingPod::perform_switch(Millis now, Millis prep_cost_if_unprepared) {
    if (state_ != PodState::SwitchPending) {
        throw IllegalTransition(fmt::format("pod '{}': perform_switch requires SwitchPending, state is {}", service_,
                                            to_string(state_)));
    }
    if (prep_cost_if_unprepared.count() < 0.0) {
        throw DomainError("preparation cost must be non-negative");
    }
    check_order(now);

    const bool prepared = options_.redundant_prep && !prep_stopped_;
    const Millis latency = prepared ? options_.base_switch_latency
                                    : options_.base_switch_latency + prep_cost_if_unprepared;
    const PodState before = state_;
    state_ = PodState::StrongActive;
    switch_count_ = 1;
    log(now, "Switch", fmt::format("latency_ms={}", latency.count()), before);
    return SwitchRecord{latency, now + latency};
}

Bytes MappingPod::redundant_prep_memory(std::size_t layer_count, Bytes bytes_per_layer) {
    if (service_ != "rendering") {
        // Loading pods prepare URLs only.
        return 0;
    }
    if (layer_count < 1 || bytes_per_layer == 0) {
        throw DomainError(fmt::format("pod '{}': need at least one layer and a positive layer size", service_));
    }
    if (!options_.redundant_prep || state_ != PodState::WeakActive) {
        return 0;
    }
    const Bytes wanted = static_cast<Bytes>(layer_count) * bytes_per_layer;
    if (wanted > options_.memory_limit) {
        prepared_bytes_ = options_.memory_limit;
        prep_stopped_ = true;
    } else {
        prepared_bytes_ = wanted;
        prep_stopped_ = false;
    }
    return prepared_bytes_;
}

std::string MappingPod::event_log_jsonl() const {
    std::string out;
    for (const auto& e : log_) {
        nlohmann::json j = {
            {"t_ms", e.timestamp.count()},
            {"pod", service_},
            {"event", e.event},
            {"before", to_string(e.before)},
            {"after", to_string(e.after)},
        };
        if (!e.detail.empty()) {
            j["detail"] = e.detail;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

MappingPod create_pod(std::string service, SpecializationGroup group, bool redundant_prep,
                      std::optional<Millis> base_switch_latency) {
    Millis base = base_switch_latency.value_or(
        service == "rendering" ? kRenderingSwitchLatency
                               : std::chrono::duration_cast<Millis>(wake_transition_cost(group.strong())));
    return MappingPod{std::move(service), std::move(group), PodOptions{redundant_prep, base}};
}

} // namespace guadasim
