#pragma once

#include <guadasim/units.hpp>

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace guadasim {

/// What a unit is specialized for (the horizontal axis of heterogeneity).
/// Two specializations are equal iff their names are equal.
class Specialization {
public:
    enum class Kind { GeneralPurpose, GraphicsAccel, Dsp, Other };

    static Specialization general_purpose() { return Specialization{Kind::GeneralPurpose, "GeneralPurpose"}; }
    static Specialization graphics_accel() { return Specialization{Kind::GraphicsAccel, "GraphicsAccel"}; }
    static Specialization dsp() { return Specialization{Kind::Dsp, "Dsp"}; }
    static Specialization other(std::string name);

    /// Parses one of the built-in names, anything else becomes Other(name).
    static Specialization from_name(std::string_view name);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    friend bool operator==(const Specialization& a, const Specialization& b) { return a.name_ == b.name_; }

private:
    Specialization(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
};

/// The capability axis: within one specialization group, exactly one unit is
/// weak and one is strong.
enum class CapabilityTier { Weak, Strong };

[[nodiscard]] std::string_view to_string(CapabilityTier tier) noexcept;
[[nodiscard]] CapabilityTier tier_from_string(std::string_view name);

struct ClockPoint {
    Megahertz clock;
    Milliwatts active_power;
};

/// One hardware unit with its DVFS power curve. Immutable once constructed;
/// the constructor enforces the curve invariants (non-empty, strictly
/// increasing clocks and powers, idle below the lowest active power).
class ProcessingUnit {
public:
    struct Params {
        std::string id;
        Specialization specialization = Specialization::general_purpose();
        CapabilityTier tier = CapabilityTier::Weak;
        std::vector<ClockPoint> clock_points;
        Milliwatts idle_power{0.0};
        Micros wake_latency{0.0};
        Micros ipi_latency{0.0};
    };

    explicit ProcessingUnit(Params params);

    [[nodiscard]] const std::string& id() const noexcept { return p_.id; }
    [[nodiscard]] const Specialization& specialization() const noexcept { return p_.specialization; }
    [[nodiscard]] CapabilityTier tier() const noexcept { return p_.tier; }
    [[nodiscard]] std::span<const ClockPoint> clock_points() const noexcept { return p_.clock_points; }
    [[nodiscard]] Milliwatts idle_power() const noexcept { return p_.idle_power; }
    [[nodiscard]] Micros wake_latency() const noexcept { return p_.wake_latency; }
    [[nodiscard]] Micros ipi_latency() const noexcept { return p_.ipi_latency; }

    [[nodiscard]] Megahertz min_clock() const noexcept { return p_.clock_points.front().clock; }
    [[nodiscard]] Megahertz max_clock() const noexcept { return p_.clock_points.back().clock; }

    [[nodiscard]] const Params& params() const noexcept { return p_; }

private:
    Params p_;
};

/// A weak/strong pair sharing one specialization.
class SpecializationGroup {
public:
    /// Throws InputError when the tiers are not (Weak, Strong) or the two
    /// units have different specializations.
    SpecializationGroup(ProcessingUnit weak, ProcessingUnit strong);

    [[nodiscard]] const Specialization& specialization() const noexcept { return weak_.specialization(); }
    [[nodiscard]] const ProcessingUnit& weak() const noexcept { return weak_; }
    [[nodiscard]] const ProcessingUnit& strong() const noexcept { return strong_; }
    [[nodiscard]] const ProcessingUnit& unit(CapabilityTier tier) const noexcept {
        return tier == CapabilityTier::Weak ? weak_ : strong_;
    }

private:
    ProcessingUnit weak_;
    ProcessingUnit strong_;
};

/// A unit running at a fixed clock.
struct UnitConfig {
    const ProcessingUnit& unit;
    Megahertz clock;
};

/// Active power at `clock`. Exact at listed clock points, log-log linear
/// between them, and extrapolated with the nearest segment's slope up to a
/// decade beyond either end. A single-point curve extrapolates with slope 1
/// (constant energy per cycle).
[[nodiscard]] Milliwatts power_at_clock(const ProcessingUnit& unit, Megahertz clock);

/// Energy to execute `work` at `clock`: power x work / clock.
[[nodiscard]] Millijoules energy_for_work(const ProcessingUnit& unit, Megacycles work, Megahertz clock);

/// 1 - E(weak) / E(strong) for the same work. Negative when the weak
/// configuration is less efficient; not clamped.
[[nodiscard]] double energy_reduction(UnitConfig weak, UnitConfig strong, Megacycles work);

[[nodiscard]] Millijoules idle_energy(const ProcessingUnit& unit, Millis duration);

/// Inter-processor interrupt plus power-state wake latency.
[[nodiscard]] Micros wake_transition_cost(const ProcessingUnit& unit);

/// A named collection of units and groups, as loaded from a hardware file.
struct HardwareFixture {
    std::string name;
    std::vector<ProcessingUnit> units;
    std::map<std::string, SpecializationGroup> groups;

    [[nodiscard]] const ProcessingUnit& unit(std::string_view id) const;
    [[nodiscard]] const SpecializationGroup& group(std::string_view name) const;
};

/// OMAP4-class SoC: Cortex-A9/M3 asymmetric CPUs and SGX544/GC320 graphics
/// accelerators. Groups are "cpu" and "graphics".
[[nodiscard]] HardwareFixture omap4_fixture();

} // namespace guadasim
