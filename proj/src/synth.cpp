#include "georank/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

namespace georank {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kKmPerDegLat = kPi * kEarthRadiusKm / 180.0;

// Uniform point on the sphere via a normalized 3D Gaussian (no pole bias).
GeoCoordinate sphere_uniform(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    double x = n(rng), y = n(rng), z = n(rng);
    const double r = std::sqrt(x * x + y * y + z * z);
    x /= r; y /= r; z /= r;
    const double lat = std::asin(std::clamp(z, -1.0, 1.0)) * 180.0 / kPi;
    const double lon = std::atan2(y, x) * 180.0 / kPi;
    return GeoCoordinate(lat, lon);
}

GeoCoordinate offset_km(const GeoCoordinate& g, double sigma_km, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double dlat = n(rng) * sigma_km / kKmPerDegLat;
    const double coslat = std::max(0.05, std::cos(g.lat * kPi / 180.0));
    const double dlon = n(rng) * sigma_km / (kKmPerDegLat * coslat);
    const double lat = std::clamp(g.lat + dlat, -90.0, 90.0);
    return GeoCoordinate(lat, g.lon + dlon);
}

}  // namespace

WorldSpec WorldSpec::from_json(const nlohmann::json& j) {
    WorldSpec s;
    if (j.contains("seed")) s.seed = j.at("seed").get<uint64_t>();
    if (j.contains("n_candidates")) s.n_candidates = j.at("n_candidates").get<uint32_t>();
    if (j.contains("n_queries")) s.n_queries = j.at("n_queries").get<uint32_t>();
    if (j.contains("n_clusters")) s.n_clusters = j.at("n_clusters").get<uint32_t>();
    if (j.contains("cluster_spread_km")) s.cluster_spread_km = j.at("cluster_spread_km").get<double>();
    if (j.contains("feature_noise_sigma")) s.feature_noise_sigma = j.at("feature_noise_sigma").get<double>();
    if (j.contains("dim_gps")) s.dim_gps = j.at("dim_gps").get<uint32_t>();
    if (j.contains("dim_text")) s.dim_text = j.at("dim_text").get<uint32_t>();
    if (j.contains("dim_img")) s.dim_img = j.at("dim_img").get<uint32_t>();
    if (j.contains("query_offset_km")) s.query_offset_km = j.at("query_offset_km").get<double>();
    return s;
}

nlohmann::json WorldSpec::to_json() const {
    return {{"seed", seed},
            {"n_candidates", n_candidates},
            {"n_queries", n_queries},
            {"n_clusters", n_clusters},
            {"cluster_spread_km", cluster_spread_km},
            {"feature_noise_sigma", feature_noise_sigma},
            {"dim_gps", dim_gps},
            {"dim_text", dim_text},
            {"dim_img", dim_img},
            {"query_offset_km", query_offset_km}};
}

World generate_world(const WorldSpec& spec) {
    if (spec.n_candidates == 0 || spec.n_queries == 0 || spec.n_clusters == 0)
        throw std::invalid_argument("generate_world: counts must be positive");
    if (spec.cluster_spread_km <= 0.0 || spec.feature_noise_sigma < 0.0)
        throw std::invalid_argument("generate_world: invalid spread or noise");
    if (spec.dim_text == 0 || spec.dim_img == 0 || spec.dim_gps == 0)
        throw std::invalid_argument("generate_world: dims must be positive");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Fixed Fourier map GPS -> image embedding so location is linearly
    // recoverable at sigma = 0.
    const GpsEncoder img_map = GpsEncoder::make(spec.dim_img, spec.seed ^ 0x9e3779b97f4a7c15ull);

    std::vector<GeoCoordinate> centers;
    for (uint32_t c = 0; c < spec.n_clusters; ++c) centers.push_back(sphere_uniform(rng));

    World w;
    w.spec = spec;
    std::uniform_int_distribution<uint32_t> pick_cluster(0, spec.n_clusters - 1);
    for (uint32_t i = 0; i < spec.n_candidates; ++i) {
        const uint32_t c = pick_cluster(rng);
        CandidateRecord rec;
        rec.id = "c" + std::to_string(i);
        rec.gps = offset_km(centers[c], spec.cluster_spread_km, rng);
        rec.text = {{"city", "cluster-" + std::to_string(c)},
                    {"country", "region-" + std::to_string(c / 4)}};
        rec.emb_text.assign(spec.dim_text, 0.0f);
        rec.emb_text[c % spec.dim_text] = 1.0f;
        rec.emb_img = img_map.encode(rec.gps);
        for (float& v : rec.emb_img)
            v += static_cast<float>(noise(rng) * spec.feature_noise_sigma);
        w.candidates.push_back(std::move(rec));
    }

    std::uniform_int_distribution<uint32_t> pick_cand(0, spec.n_candidates - 1);
    for (uint32_t i = 0; i < spec.n_queries; ++i) {
        const CandidateRecord& anchor = w.candidates[pick_cand(rng)];
        QueryRecord q;
        q.id = "q" + std::to_string(i);
        q.has_gps = true;
        q.gps = offset_km(anchor.gps, spec.query_offset_km, rng);
        q.emb_img = img_map.encode(q.gps);
        for (float& v : q.emb_img)
            v += static_cast<float>(noise(rng) * spec.feature_noise_sigma);
        w.queries.push_back(std::move(q));
    }
    return w;
}

void export_world(const World& world, const std::string& dir) {
    if (world.candidates.empty() || world.queries.empty())
        throw std::invalid_argument("export_world: empty world");
    std::filesystem::create_directories(dir);

    std::vector<nlohmann::json> cand_meta;
    EmbeddingMatrix text{static_cast<uint32_t>(world.candidates.size()), world.spec.dim_text, {}};
    EmbeddingMatrix img{static_cast<uint32_t>(world.candidates.size()), world.spec.dim_img, {}};
    for (const auto& c : world.candidates) {
        cand_meta.push_back({{"id", c.id}, {"lat", c.gps.lat}, {"lon", c.gps.lon}, {"text", c.text}});
        text.data.insert(text.data.end(), c.emb_text.begin(), c.emb_text.end());
        img.data.insert(img.data.end(), c.emb_img.begin(), c.emb_img.end());
    }
    write_jsonl(dir + "/candidates.jsonl", cand_meta);
    write_embeddings(dir + "/candidates_text.bin", text);
    write_embeddings(dir + "/candidates_img.bin", img);

    std::vector<nlohmann::json> query_meta;
    EmbeddingMatrix qimg{static_cast<uint32_t>(world.queries.size()), world.spec.dim_img, {}};
    for (const auto& q : world.queries) {
        query_meta.push_back({{"id", q.id}, {"lat", q.gps.lat}, {"lon", q.gps.lon}});
        qimg.data.insert(qimg.data.end(), q.emb_img.begin(), q.emb_img.end());
    }
    write_jsonl(dir + "/queries.jsonl", query_meta);
    write_embeddings(dir + "/queries_img.bin", qimg);

    write_text_file(dir + "/world.json", world.spec.to_json().dump(2) + "\n");
}

}  // namespace georank
