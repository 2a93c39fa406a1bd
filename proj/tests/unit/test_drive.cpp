#include <doctest.h>

#include <sstream>

#include "xfmr/drive.hpp"
#include "xfmr/errors.hpp"

using namespace xfmr;

TEST_CASE("drive series validation") {
    CHECK_THROWS_AS(DriveSeries({0.0}, {1.0}, {2.0}, {0.5}), ArgumentError);
    CHECK_THROWS_AS(DriveSeries({0.0, 1.0}, {1.0}, {2.0, 3.0}, {0.5, 0.5}), ArgumentError);
    CHECK_THROWS_AS(DriveSeries({0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {0.5, 0.5}), ArgumentError);
    CHECK_THROWS_AS(DriveSeries({0.0, 1.0}, {1.0, 1.0}, {2.0, 2.0}, {0.5, -0.1}), ArgumentError);
}

TEST_CASE("drive interpolation") {
    const DriveSeries d({0.0, 1.0, 3.0}, {10.0, 20.0, 0.0}, {40.0, 50.0, 60.0}, {0.5, 1.0, 0.6});
    const auto s = d.at(1.0);
    CHECK(s.ta == 20.0);
    CHECK(s.to == 50.0);
    CHECK(s.kf == 1.0);
    const auto m = d.at(0.5);
    CHECK(m.ta == 15.0);
    CHECK(m.to == 45.0);
    CHECK(m.kf == 0.75);
    CHECK(m.tav == (m.ta + m.to) / 2.0);
    CHECK(d.at(2.0).ta == doctest::Approx(10.0));
    CHECK(drive_at(d, 3.0).to == 60.0);
    CHECK_THROWS_AS(d.at(4.0), RangeError);
    CHECK_THROWS_AS(d.at(-1e-9), RangeError);
}

TEST_CASE("synthetic drive") {
    const auto a = synth_drive(1, 100);
    const auto b = synth_drive(1, 100);
    CHECK(a == b);
    CHECK(a.size() == 101);
    CHECK(a.t().front() == 0.0);
    CHECK(a.t().back() == 100.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.kf()[i] >= 0.4);
        CHECK(a.kf()[i] <= 1.0);
        CHECK(a.ta()[i] >= 0.0);
        CHECK(a.ta()[i] <= 15.0);
        CHECK(a.to()[i] > a.ta()[i]);
        CHECK(a.to()[i] == doctest::Approx(a.ta()[i] + 30.0 + 15.0 * a.kf()[i]));
        CHECK(a.at(a.t()[i]).ta == a.ta()[i]);
    }
    CHECK_FALSE(synth_drive(2, 100) == a);
    CHECK_THROWS_AS(synth_drive(1, 1), ArgumentError);
}

TEST_CASE("drive csv round trip") {
    const auto a = synth_drive(7, 30);
    std::stringstream ss;
    write_drive_csv(ss, a);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "t_hours,ta_c,to_c,k_pu");
    ss.seekg(0);
    CHECK(read_drive_csv(ss) == a);

    std::stringstream bad("t_hours,ta_c,to_c,k_pu\n0,1,2,0.5\n1,1,x,0.5\n");
    CHECK_THROWS(read_drive_csv(bad));
    std::stringstream wrong_header("t,ta,to,k\n0,1,2,0.5\n1,1,2,0.5\n");
    CHECK_THROWS(read_drive_csv(wrong_header));
}
