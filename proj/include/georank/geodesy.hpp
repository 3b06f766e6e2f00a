#pragma once

#include <stdexcept>
#include <vector>

namespace georank {

// Mean-radius sphere used for every distance in the pipeline.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoCoordinate {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, (-180, 180]

    GeoCoordinate() = default;
    GeoCoordinate(double lat_deg, double lon_deg);

    bool operator==(const GeoCoordinate& o) const { return lat == o.lat && lon == o.lon; }
};

// Normalizes an arbitrary finite longitude into (-180, 180].
double normalize_lon(double lon_deg);

// Great-circle distance in km (haversine, stable near antipodes).
double geodesic_km(const GeoCoordinate& a, const GeoCoordinate& b);

struct ThresholdSet {
    std::vector<double> thresholds_km;

    ThresholdSet() : thresholds_km{1.0, 25.0, 200.0, 750.0, 2500.0} {}
    explicit ThresholdSet(std::vector<double> t);

    // Thresholds scaled by a positive factor (synthetic-world analogs).
    ThresholdSet scaled(double factor) const;
};

// membership[i] = err_km <= thresholds_km[i]
std::vector<bool> within_thresholds(double err_km, const ThresholdSet& t);

}  // namespace georank
