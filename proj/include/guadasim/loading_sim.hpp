#pragma once

#include <guadasim/hardware_model.hpp>
#include <guadasim/pod_scheduler.hpp>
#include <guadasim/report.hpp>
#include <guadasim/units.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace guadasim {

struct Resource {
    enum class Kind { MainHtml, Css, Script, Image, Other };

    std::string url;
    Kind kind = Kind::Other;
    Bytes size = 0;
    std::optional<std::string> discovered_by;
};

[[nodiscard]] std::string_view to_string(Resource::Kind k) noexcept;
[[nodiscard]] Resource::Kind resource_kind_from_string(std::string_view name);

struct NetworkModel {
    Millis first_packet_latency{2000.0};
    Millis rtt{200.0};
    Mbps bandwidth{2.0};

    void validate() const;
};

struct ThroughputAnchor {
    Megahertz clock;
    Mbps throughput;
};

/// Network stack throughput as a function of core clock.
struct StackPerfModel {
    std::vector<ThroughputAnchor> anchors;
    Micros per_packet_overhead{300.0};

    void validate() const;
};

/// lwIP on a Cortex-M3: 10 Mbps at 50 MHz, 38.1 Mbps at 200 MHz.
[[nodiscard]] StackPerfModel m3_stack_model();

struct CacheFlushModel {
    double cache_size_kb = 32.0;
    double flush_cycles = 3000.0;

    void validate() const;
};

/// Linear between anchors, linearly extrapolated past either end with the
/// adjacent segment's slope, never negative.
[[nodiscard]] Mbps stack_throughput(const StackPerfModel& model, Megahertz clock);

struct Feasibility {
    bool feasible = false;
    Mbps margin{0.0};
    double latency_fraction_of_rtt = 0.0;
};

/// Whether a weak core at `clock` keeps up with the network.
[[nodiscard]] Feasibility weak_core_feasible(const StackPerfModel& model, Megahertz clock, const NetworkModel& net);

[[nodiscard]] Micros cache_flush_cost(const CacheFlushModel& model, Megahertz clock);

/// Waking the strong core plus flushing the weak core's cache (no coherence
/// between the two).
[[nodiscard]] Micros loading_switch_overhead(const ProcessingUnit& strong, const CacheFlushModel& flush,
                                             Megahertz weak_clock);

/// Resource-loading pod whose base switch latency is loading_switch_overhead.
[[nodiscard]] MappingPod make_loading_pod(const SpecializationGroup& group, const CacheFlushModel& flush,
                                          Megahertz weak_clock);

struct LoadScenario {
    std::vector<Resource> resources;
    NetworkModel net;
    StackPerfModel weak_stack = m3_stack_model();
    /// Stack model for the strong core; unset means it never limits the link.
    std::optional<StackPerfModel> strong_stack;
    CacheFlushModel flush;
    Megahertz weak_clock{200.0};
    Megahertz strong_clock{200.0};
    /// Adds per_packet_overhead for every 1000-byte packet of each transfer.
    bool per_packet_latency = false;
};

/// Per-policy outcome, kept numeric for direct inspection.
struct LoadRun {
    Millis total{0.0};
    Millis phase1{0.0};
    Millis phase2{0.0};
    Millis switch_overhead{0.0};
    int switch_count = 0;
    Millijoules phase1_compute_energy{0.0};
    Millijoules phase1_idle_energy{0.0};
    Millijoules switch_energy{0.0};
    Millijoules phase2_energy{0.0};
    Millijoules total_energy{0.0};
    std::vector<ReportEvent> timeline;
    struct Transfer {
        std::string url;
        Millis available{0.0};
        Millis start{0.0};
        Millis complete{0.0};
        std::string core;
    };
    std::vector<Transfer> transfers;
};

enum class LoadPolicy { WeakThenStrong, StrongPinned };

/// Validates the resource DAG (exactly one MainHtml at the root, known
/// parents, no cycles); throws InputError otherwise.
void validate_resources(const std::vector<Resource>& resources);

/// Discrete-event run of one policy. Phase 1 fetches the main resource;
/// phase 2 fetches subresources as their parents complete, active transfers
/// sharing the link equally. Each subresource request costs one RTT before
/// data flows. Under WeakThenStrong the pod is opened, phase 1 runs on the
/// weak core with the strong core asleep, and main-resource completion
/// triggers the single switch.
[[nodiscard]] LoadRun run_load_policy(const LoadScenario& sc, const SpecializationGroup& hw, LoadPolicy policy,
                                      MappingPod* pod);

/// Both policies side by side. Requires a resource_loading pod in WeakActive.
[[nodiscard]] SimReport simulate_page_load(const LoadScenario& sc, const SpecializationGroup& hw, MappingPod& pod);

} // namespace guadasim
