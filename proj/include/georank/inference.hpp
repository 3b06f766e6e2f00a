#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "georank/ranking.hpp"

namespace georank {

// Inference pool: retrieved store candidates plus GPS-only generated ones.
struct CandidatePool {
    std::vector<const CandidateRecord*> retrieved;
    std::vector<GeoCoordinate> generated;

    size_t size() const { return retrieved.size() + generated.size(); }
};

enum class CandidateSource { kRetrieved, kGenerated };

struct Prediction {
    GeoCoordinate chosen;
    CandidateSource chosen_source = CandidateSource::kRetrieved;
    uint32_t chosen_index = 0;  // index into retrieved ++ generated
    std::vector<double> scores; // one per pool member, same order
};

struct EvalReport {
    std::vector<double> thresholds_km;
    std::vector<double> per_threshold_accuracy;  // percentages
    std::vector<double> per_sample_error_km;
    size_t sample_count = 0;
    nlohmann::json config_snapshot;

    nlohmann::json to_json() const;
    std::string to_table() const;  // aligned-column text, 2-decimal percentages
};

// Scores every pool member (generated candidates GPS-only) and picks the
// argmax; ties favor retrieved candidates, then the lowest index.
Prediction predict(const ScorerState& state, const FeatureVector& query_emb,
                   const CandidatePool& pool, const std::vector<GeoCoordinate>& negatives,
                   const GpsEncoder& enc, const AblationFlags& flags = {},
                   uint32_t n_workers = 1);

EvalReport evaluate(const std::vector<std::pair<Prediction, GeoCoordinate>>& predictions,
                    const ThresholdSet& t);

// Per-sample error = min over pool; upper-bounds any ranker over the same pools.
EvalReport oracle_best_in_pool(const std::vector<CandidatePool>& pools,
                               const std::vector<GeoCoordinate>& truths, const ThresholdSet& t);

Prediction baseline_random(const CandidatePool& pool, uint64_t seed);
Prediction baseline_top1(const VectorStore& store, const RetrievalResult& result);

// Generated-candidates ingestion: JSON-lines {query_id, lat, lon}.
struct GeneratedCandidate {
    std::string query_id;
    GeoCoordinate gps;
};
std::vector<GeneratedCandidate> load_generated(const std::string& path);
void write_generated(const std::vector<GeneratedCandidate>& gens, const std::string& path);

// Built-in stub: perturbs ground truth by an isotropic offset of noise_km scale.
std::vector<GeneratedCandidate> stub_generate(const std::vector<QueryRecord>& queries,
                                              uint32_t per_query, double noise_km, uint64_t seed);

}  // namespace georank
