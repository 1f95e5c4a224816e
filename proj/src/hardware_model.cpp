#include <guadasim/hardware_model.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace guadasim {

Specialization Specialization::other(std::string name) {
    if (name.empty()) {
        throw InputError("specialization name must not be empty");
    }
    return Specialization{Kind::Other, std::move(name)};
}

Specialization Specialization::from_name(std::string_view name) {
    if (name == "GeneralPurpose") return general_purpose();
    if (name == "GraphicsAccel") return graphics_accel();
    if (name == "Dsp") return dsp();
    return other(std::string{name});
}

std::string_view to_string(CapabilityTier tier) noexcept {
    return tier == CapabilityTier::Weak ? "Weak" : "Strong";
}

CapabilityTier tier_from_string(std::string_view name) {
    if (name == "Weak") return CapabilityTier::Weak;
    if (name == "Strong") return CapabilityTier::Strong;
    throw InputError(fmt::format("unknown capability tier '{}'", name));
}

ProcessingUnit::ProcessingUnit(Params params) : p_(std::move(params)) {
    if (p_.id.empty()) {
        throw InputError("processing unit id must not be empty");
    }
    const auto& pts = p_.clock_points;
    if (pts.empty()) {
        throw InputError(fmt::format("unit '{}': clock_points must not be empty", p_.id));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].clock.value() > 0.0) || !(pts[i].active_power.value() > 0.0)) {
            throw InputError(fmt::format("unit '{}': clock points must be positive", p_.id));
        }
        if (i > 0 && !(pts[i].clock > pts[i - 1].clock)) {
            throw InputError(fmt::format("unit '{}': clock points must be strictly increasing in clock", p_.id));
        }
        if (i > 0 && !(pts[i].active_power > pts[i - 1].active_power)) {
            throw InputError(fmt::format("unit '{}': active power must be strictly increasing in clock", p_.id));
        }
    }
    if (p_.idle_power.value() < 0.0 || !(p_.idle_power < pts.front().active_power)) {
        throw InputError(fmt::format("unit '{}': idle power must be in [0, min active power)", p_.id));
    }
    if (p_.wake_latency.count() < 0.0 || p_.ipi_latency.count() < 0.0) {
        throw InputError(fmt::format("unit '{}': latencies must be non-negative", p_.id));
    }
}

SpecializationGroup::SpecializationGroup(ProcessingUnit weak, ProcessingUnit strong)
    : weak_(std::move(weak)), strong_(std::move(strong)) {
    if (weak_.tier() != CapabilityTier::Weak || strong_.tier() != CapabilityTier::Strong) {
        throw InputError(fmt::format("group ({}, {}): expected one Weak and one Strong unit",
                                     weak_.id(), strong_.id()));
    }
    if (!(weak_.specialization() == strong_.specialization())) {
        throw InputError(fmt::format("group ({}, {}): specializations differ ({} vs {})", weak_.id(),
                                     strong_.id(), weak_.specialization().name(),
                                     strong_.specialization().name()));
    }
}

Milliwatts power_at_clock(const ProcessingUnit& unit, Megahertz clock) {
    const double f = clock.value();
    if (!(f > 0.0)) {
        throw DomainError(fmt::format("unit '{}': clock must be positive, got {}", unit.id(), f));
    }
    if (f < unit.min_clock().value() * 0.1 || f > unit.max_clock().value() * 10.0) {
        throw DomainError(fmt::format("unit '{}': clock {} MHz outside modeled range [{}, {}]", unit.id(), f,
                                      unit.min_clock().value() * 0.1, unit.max_clock().value() * 10.0));
    }

    const auto pts = unit.clock_points();
    auto exact = std::find_if(pts.begin(), pts.end(), [&](const ClockPoint& p) { return p.clock.value() == f; });
    if (exact != pts.end()) {
        return exact->active_power;
    }

    if (pts.size() == 1) {
        return Milliwatts{pts[0].active_power.value() * f / pts[0].clock.value()};
    }

    // Segment [lo, lo+1] that brackets f, or the end segment for extrapolation.
    std::size_t lo = 0;
    while (lo + 2 < pts.size() && f > pts[lo + 1].clock.value()) {
        ++lo;
    }
    const ClockPoint& a = pts[lo];
    const ClockPoint& b = pts[lo + 1];
    const double slope = std::log(b.active_power.value() / a.active_power.value()) /
                         std::log(b.clock.value() / a.clock.value());
    return Milliwatts{a.active_power.value() * std::pow(f / a.clock.value(), slope)};
}

Millijoules energy_for_work(const ProcessingUnit& unit, Megacycles work, Megahertz clock) {
    const Milliwatts p = power_at_clock(unit, clock);
    if (work.value() < 0.0) {
        throw DomainError(fmt::format("unit '{}': work must be non-negative", unit.id()));
    }
    return energy(p, execution_time(work, clock));
}

double energy_reduction(UnitConfig weak, UnitConfig strong, Megacycles work) {
    if (!(work.value() > 0.0)) {
        throw DomainError("energy_reduction: work must be positive");
    }
    const Millijoules ew = energy_for_work(weak.unit, work, weak.clock);
    const Millijoules es = energy_for_work(strong.unit, work, strong.clock);
    return 1.0 - ew / es;
}

Millijoules idle_energy(const ProcessingUnit& unit, Millis duration) {
    if (duration.count() < 0.0) {
        throw DomainError(fmt::format("unit '{}': idle duration must be non-negative", unit.id()));
    }
    return energy(unit.idle_power(), duration);
}

Micros wake_transition_cost(const ProcessingUnit& unit) {
    return unit.ipi_latency() + unit.wake_latency();
}

const ProcessingUnit& HardwareFixture::unit(std::string_view id) const {
    auto it = std::find_if(units.begin(), units.end(), [&](const ProcessingUnit& u) { return u.id() == id; });
    if (it == units.end()) {
        throw InputError(fmt::format("hardware '{}': no unit named '{}'", name, id));
    }
    return *it;
}

const SpecializationGroup& HardwareFixture::group(std::string_view group_name) const {
    auto it = groups.find(std::string{group_name});
    if (it == groups.end()) {
        throw InputError(fmt::format("hardware '{}': no group named '{}'", name, group_name));
    }
    return it->second;
}

HardwareFixture omap4_fixture() {
    using P = ProcessingUnit::Params;
    // A9: 250 mW at 1 GHz typical, scaled to 22.5 mW at its 200 MHz floor.
    ProcessingUnit a9{P{
        .id = "cortex-a9",
        .specialization = Specialization::general_purpose(),
        .tier = CapabilityTier::Strong,
        .clock_points = {{Megahertz{200.0}, Milliwatts{22.5}}, {Megahertz{1000.0}, Milliwatts{250.0}}},
        .idle_power = Milliwatts{11.0},
        .wake_latency = Micros{2000.0},
        .ipi_latency = Micros{25.0},
    }};
    // M3 idles below 1 mW; modeled as 1 mW.
    ProcessingUnit m3{P{
        .id = "cortex-m3",
        .specialization = Specialization::general_purpose(),
        .tier = CapabilityTier::Weak,
        .clock_points = {{Megahertz{34.7}, Milliwatts{1.7}},
                         {Megahertz{100.0}, Milliwatts{7.2}},
                         {Megahertz{200.0}, Milliwatts{19.0}}},
        .idle_power = Milliwatts{1.0},
        .wake_latency = Micros{0.0},
        .ipi_latency = Micros{25.0},
    }};
    // Accelerator powers keep the 12x 3D/2D ratio and are scaled so that 2D
    // composition at 30 fps saves 80 mJ/s against 3D composition at 60 fps.
    ProcessingUnit gc320{P{
        .id = "gc320",
        .specialization = Specialization::graphics_accel(),
        .tier = CapabilityTier::Weak,
        .clock_points = {{Megahertz{154.0}, Milliwatts{19.24}}},
        .idle_power = Milliwatts{1.0},
        .wake_latency = Micros{0.0},
        .ipi_latency = Micros{0.0},
    }};
    ProcessingUnit sgx544{P{
        .id = "sgx544",
        .specialization = Specialization::graphics_accel(),
        .tier = CapabilityTier::Strong,
        .clock_points = {{Megahertz{307.0}, Milliwatts{230.88}}},
        .idle_power = Milliwatts{10.0},
        .wake_latency = Micros{0.0},
        .ipi_latency = Micros{0.0},
    }};

    HardwareFixture hw;
    hw.name = "omap4";
    hw.units = {a9, m3, gc320, sgx544};
    hw.groups.emplace("cpu", SpecializationGroup{m3, a9});
    hw.groups.emplace("graphics", SpecializationGroup{gc320, sgx544});
    return hw;
}

} // namespace guadasim
