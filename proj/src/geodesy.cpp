#include "georank/geodesy.hpp"

#include <algorithm>
#include <cmath>

namespace georank {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

double normalize_lon(double lon_deg) {
    double l = std::fmod(lon_deg, 360.0);
    if (l <= -180.0) l += 360.0;
    if (l > 180.0) l -= 360.0;
    // fmod can return -0.0; canonicalize
    if (l == 0.0) l = 0.0;
    return l;
}

GeoCoordinate::GeoCoordinate(double lat_deg, double lon_deg) {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
        throw std::invalid_argument("GeoCoordinate: non-finite input");
    if (lat_deg < -90.0 || lat_deg > 90.0)
        throw std::invalid_argument("GeoCoordinate: latitude out of [-90, 90]");
    lat = lat_deg;
    lon = normalize_lon(lon_deg);
}

double geodesic_km(const GeoCoordinate& a, const GeoCoordinate& b) {
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;

    const double sh_lat = std::sin(dlat / 2.0);
    const double sh_lon = std::sin(dlon / 2.0);
    double h = sh_lat * sh_lat + std::cos(lat1) * std::cos(lat2) * sh_lon * sh_lon;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

ThresholdSet::ThresholdSet(std::vector<double> t) : thresholds_km(std::move(t)) {
    if (thresholds_km.empty())
        throw std::invalid_argument("ThresholdSet: empty threshold list");
    double prev = 0.0;
    for (double v : thresholds_km) {
        if (!(v > prev))
            throw std::invalid_argument("ThresholdSet: thresholds must be positive and strictly ascending");
        prev = v;
    }
}

ThresholdSet ThresholdSet::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("ThresholdSet::scaled: factor must be positive");
    std::vector<double> t = thresholds_km;
    for (double& v : t) v *= factor;
    return ThresholdSet(std::move(t));
}

std::vector<bool> within_thresholds(double err_km, const ThresholdSet& t) {
    if (err_km < 0.0) throw std::invalid_argument("within_thresholds: negative error");
    std::vector<bool> out(t.thresholds_km.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = err_km <= t.thresholds_km[i];
    return out;
}

}  // namespace georank
