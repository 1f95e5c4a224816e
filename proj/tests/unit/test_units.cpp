#include <guadasim/units.hpp>

#include <doctest.h>

using namespace guadasim;

TEST_CASE("energy is power times time") {
    CHECK(energy(Milliwatts{22.5}, Seconds{1.0}).value() == doctest::Approx(22.5));
    CHECK(energy(Milliwatts{11.0}, Millis{500.0}).value() == doctest::Approx(5.5));
    CHECK(energy(Milliwatts{5.0}, Seconds{0.0}).value() == 0.0);
}

TEST_CASE("execution time and transfer time") {
    CHECK(execution_time(Megacycles{200.0}, Megahertz{200.0}).count() == doctest::Approx(1.0));
    // 40 KB at 2 Mbps: 320000 bits / 2e6 bit/s = 160 ms.
    CHECK(transfer_time(40000.0, Mbps{2.0}).count() == doctest::Approx(160.0));
}

TEST_CASE("quantities compare and scale") {
    CHECK(Megahertz{100.0} < Megahertz{200.0});
    CHECK((Milliwatts{2.0} * 3.0).value() == 6.0);
    CHECK(Mbps{38.1} / Mbps{10.0} == doctest::Approx(3.81));
}
