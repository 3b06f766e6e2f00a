#include <cmath>
#include <random>

#include "doctest.h"
#include "georank/geodesy.hpp"

using namespace georank;

TEST_CASE("identity distance is zero") {
    GeoCoordinate p(48.85, 2.35);
    CHECK(geodesic_km(p, p) == 0.0);
}

TEST_CASE("antipodal pair spans half the circumference") {
    const double d = geodesic_km(GeoCoordinate(0, 0), GeoCoordinate(0, 180));
    CHECK(d == doctest::Approx(3.14159265358979323846 * kEarthRadiusKm).epsilon(1e-9));
}

TEST_CASE("paris to london within 0.5% of reference") {
    // reference: haversine on R=6371.0088 computed independently
    const double d = geodesic_km(GeoCoordinate(48.8566, 2.3522), GeoCoordinate(51.5074, -0.1278));
    CHECK(d == doctest::Approx(343.5).epsilon(0.005));
}

TEST_CASE("construction validates inputs") {
    CHECK_THROWS_AS(GeoCoordinate(91.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoCoordinate(std::nan(""), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoCoordinate(0.0, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("longitude normalized into (-180, 180]") {
    CHECK(GeoCoordinate(0.0, -180.0).lon == 180.0);
    CHECK(GeoCoordinate(0.0, 540.0).lon == 180.0);
    CHECK(GeoCoordinate(0.0, -190.0).lon == 170.0);
    CHECK(GeoCoordinate(10.0, 360.0).lon == 0.0);
}

TEST_CASE("symmetry, bound and triangle inequality on random pairs") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
    for (int i = 0; i < 300; ++i) {
        GeoCoordinate a(lat(rng), lon(rng)), b(lat(rng), lon(rng)), c(lat(rng), lon(rng));
        const double ab = geodesic_km(a, b);
        CHECK(ab == geodesic_km(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 3.14159265358979323846 * kEarthRadiusKm + 1e-9);
        CHECK(ab <= geodesic_km(a, c) + geodesic_km(c, b) + 1e-6);
    }
}

TEST_CASE("threshold membership") {
    ThresholdSet t;
    CHECK(within_thresholds(0.5, t) == std::vector<bool>{true, true, true, true, true});
    CHECK(within_thresholds(3000, t) == std::vector<bool>{false, false, false, false, false});
    CHECK(within_thresholds(10, t) == std::vector<bool>{false, true, true, true, true});
    CHECK(within_thresholds(100, t) == std::vector<bool>{false, false, true, true, true});
}

TEST_CASE("threshold membership is monotone") {
    ThresholdSet t;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> err(0.0, 4000.0);
    for (int i = 0; i < 200; ++i) {
        const auto mem = within_thresholds(err(rng), t);
        for (size_t j = 1; j < mem.size(); ++j)
            CHECK(mem[j] >= mem[j - 1]);
    }
}

TEST_CASE("threshold set validation") {
    CHECK_THROWS_AS(ThresholdSet(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(ThresholdSet({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ThresholdSet({-1.0, 5.0}), std::invalid_argument);
    CHECK_THROWS_AS(within_thresholds(-1.0, ThresholdSet{}), std::invalid_argument);
}
