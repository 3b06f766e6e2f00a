#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "georank/vector_store.hpp"

namespace georank {

// Deterministic synthetic geolocalization world: clustered GPS points with
// location-correlated embeddings.
struct WorldSpec {
    uint64_t seed = 0;
    uint32_t n_candidates = 1000;
    uint32_t n_queries = 100;
    uint32_t n_clusters = 20;
    double cluster_spread_km = 50.0;
    double feature_noise_sigma = 0.1;
    uint32_t dim_gps = 32;
    uint32_t dim_text = 32;
    uint32_t dim_img = 64;
    // Query placement: offset from a sampled candidate, km scale.
    double query_offset_km = 0.1;

    static WorldSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct World {
    WorldSpec spec;
    std::vector<CandidateRecord> candidates;  // emb_gps left empty; filled at ingestion
    std::vector<QueryRecord> queries;         // with ground truth
};

World generate_world(const WorldSpec& spec);

// Emits exactly the vector_store ingestion formats into dir:
// candidates.jsonl, candidates_text.bin, candidates_img.bin,
// queries.jsonl, queries_img.bin, world.json.
void export_world(const World& world, const std::string& dir);

}  // namespace georank
