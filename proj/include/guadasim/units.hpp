#pragma once

#include <chrono>
#include <compare>
#include <cstdint>

namespace guadasim {

/// A double-valued physical quantity tagged with its unit so that clocks,
/// powers and energies cannot be mixed up silently. Conversions between
/// units are spelled out by the free functions below.
template <typename Tag>
class Quantity {
public:
    constexpr Quantity() = default;
    constexpr explicit Quantity(double value) : value_(value) {}

    [[nodiscard]] constexpr double value() const noexcept { return value_; }

    constexpr Quantity& operator+=(Quantity rhs) noexcept { value_ += rhs.value_; return *this; }
    constexpr Quantity& operator-=(Quantity rhs) noexcept { value_ -= rhs.value_; return *this; }

    friend constexpr Quantity operator+(Quantity a, Quantity b) noexcept { return Quantity{a.value_ + b.value_}; }
    friend constexpr Quantity operator-(Quantity a, Quantity b) noexcept { return Quantity{a.value_ - b.value_}; }
    friend constexpr Quantity operator*(Quantity a, double k) noexcept { return Quantity{a.value_ * k}; }
    friend constexpr Quantity operator*(double k, Quantity a) noexcept { return Quantity{a.value_ * k}; }
    friend constexpr Quantity operator/(Quantity a, double k) noexcept { return Quantity{a.value_ / k}; }
    friend constexpr double operator/(Quantity a, Quantity b) noexcept { return a.value_ / b.value_; }

    friend constexpr auto operator<=>(Quantity, Quantity) = default;

private:
    double value_ = 0.0;
};

using Megahertz = Quantity<struct MegahertzTag>;
using Megacycles = Quantity<struct MegacyclesTag>;
using Milliwatts = Quantity<struct MilliwattsTag>;
using Millijoules = Quantity<struct MillijoulesTag>;
using Mbps = Quantity<struct MbpsTag>;

using Millis = std::chrono::duration<double, std::milli>;
using Micros = std::chrono::duration<double, std::micro>;
using Seconds = std::chrono::duration<double>;

using Bytes = std::uint64_t;

inline constexpr Bytes kMegabyte = 1'000'000;

/// mW sustained for a duration: mW x s = mJ.
[[nodiscard]] constexpr Millijoules energy(Milliwatts power, Seconds duration) noexcept {
    return Millijoules{power.value() * duration.count()};
}

/// Time to execute `work` megacycles at `clock` MHz.
[[nodiscard]] constexpr Seconds execution_time(Megacycles work, Megahertz clock) noexcept {
    return Seconds{work.value() / clock.value()};
}

/// Time to move `size` bytes at `rate` megabits per second.
[[nodiscard]] constexpr Millis transfer_time(double size_bytes, Mbps rate) noexcept {
    return Millis{size_bytes * 8.0 / (rate.value() * 1000.0)};
}

} // namespace guadasim
