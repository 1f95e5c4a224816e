#pragma once

#include <guadasim/hardware_model.hpp>
#include <guadasim/units.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace guadasim {

enum class PodState { WeakActive, SwitchPending, StrongActive };

[[nodiscard]] std::string_view to_string(PodState state) noexcept;

/// Application-state change observed by a pod.
struct RequirementEvent {
    enum class Kind { PageOpen, NeedStrong, WorkloadBelowWeakCapacity, WorkloadAboveWeakCapacity };

    Millis timestamp{0.0};
    Kind kind = Kind::PageOpen;
    std::string reason; // NeedStrong only, must be non-empty

    static RequirementEvent page_open(Millis t) { return {t, Kind::PageOpen, {}}; }
    static RequirementEvent need_strong(Millis t, std::string reason);
    static RequirementEvent below_capacity(Millis t) { return {t, Kind::WorkloadBelowWeakCapacity, {}}; }
    static RequirementEvent above_capacity(Millis t) { return {t, Kind::WorkloadAboveWeakCapacity, {}}; }
};

[[nodiscard]] std::string_view to_string(RequirementEvent::Kind kind) noexcept;

/// Stable sort by timestamp; at equal timestamps PageOpen goes first so a new
/// page supersedes requirements left over from the previous one.
[[nodiscard]] std::vector<RequirementEvent> canonical_order(std::vector<RequirementEvent> events);

enum class Decision { Stay, Switch, Reset };

[[nodiscard]] std::string_view to_string(Decision d) noexcept;

struct SwitchRecord {
    Millis latency{0.0};
    Millis completed_at{0.0};
};

struct PodLogEntry {
    Millis timestamp{0.0};
    std::string event;
    std::string detail;
    PodState before = PodState::WeakActive;
    PodState after = PodState::WeakActive;

    friend bool operator==(const PodLogEntry&, const PodLogEntry&) = default;
};

struct PodOptions {
    bool redundant_prep = true;
    Millis base_switch_latency{0.0};
    Bytes memory_limit = 256 * kMegabyte;
};

inline constexpr Millis kRenderingSwitchLatency{4.5};
inline constexpr Bytes kGraphicsLayerBytes = 4'500'000;

/// A browser service statically bound to one specialization group. Starts
/// every page on the weak unit and moves to the strong unit at most once per
/// page; only a PageOpen brings it back.
///
/// Single-owner mutable state: move it between threads freely, but never
/// mutate one pod concurrently.
class MappingPod {
public:
    MappingPod(std::string service, SpecializationGroup group, PodOptions options);

    /// PageOpen resets to WeakActive. A strong trigger while WeakActive moves
    /// to SwitchPending. Everything else is Stay; in particular a drop in
    /// workload never causes a downgrade mid-page. Throws OrderingError if
    /// `ev` is older than the last logged entry.
    Decision on_event(const RequirementEvent& ev);

    /// Completes a pending switch. With redundant preparation the latency is
    /// the base switch latency; otherwise (or when preparation was stopped at
    /// the memory limit) the unprepared structures are built on demand and
    /// `prep_cost_if_unprepared` is added.
    SwitchRecord perform_switch(Millis now, Millis prep_cost_if_unprepared);

    /// Records redundant preparation of strong-unit structures for the current
    /// page and returns the bytes held. Zero unless redundant_prep is set and
    /// the pod is still WeakActive. Capped at the memory limit, in which case
    /// preparation_stopped() becomes true.
    Bytes redundant_prep_memory(std::size_t layer_count, Bytes bytes_per_layer);

    [[nodiscard]] const std::string& service() const noexcept { return service_; }
    [[nodiscard]] const SpecializationGroup& group() const noexcept { return group_; }
    [[nodiscard]] PodState state() const noexcept { return state_; }
    [[nodiscard]] const ProcessingUnit& active_unit() const noexcept;
    [[nodiscard]] bool redundant_prep() const noexcept { return options_.redundant_prep; }
    [[nodiscard]] Millis base_switch_latency() const noexcept { return options_.base_switch_latency; }
    [[nodiscard]] Bytes memory_limit() const noexcept { return options_.memory_limit; }
    [[nodiscard]] Bytes prepared_strong_bytes() const noexcept { return prepared_bytes_; }
    [[nodiscard]] bool preparation_stopped() const noexcept { return prep_stopped_; }
    [[nodiscard]] int switch_count_this_page() const noexcept { return switch_count_; }
    [[nodiscard]] const std::vector<PodLogEntry>& event_log() const noexcept { return log_; }

    /// One JSON object per log entry, newline-terminated.
    [[nodiscard]] std::string event_log_jsonl() const;

private:
    void check_order(Millis t) const;
    void log(Millis t, std::string event, std::string detail, PodState before);

    std::string service_;
    SpecializationGroup group_;
    PodOptions options_;
    PodState state_ = PodState::WeakActive;
    Bytes prepared_bytes_ = 0;
    bool prep_stopped_ = false;
    int switch_count_ = 0;
    std::vector<PodLogEntry> log_;
};

/// Builds a pod with the per-service default switch latency: 4.5 ms for
/// "rendering", the strong unit's wake cost for anything else. Loading pods
/// that must also pay a cache flush get theirs from make_loading_pod().
[[nodiscard]] MappingPod create_pod(std::string service, SpecializationGroup group, bool redundant_prep,
                                    std::optional<Millis> base_switch_latency = std::nullopt);

} // namespace guadasim
