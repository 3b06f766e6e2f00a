#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "georank/vector_store.hpp"

namespace georank {

struct TripletCandidate {
    std::string id;
    GeoCoordinate gps;
    std::map<std::string, std::string> text;
    double dist_km = 0.0;  // geodesic query -> candidate
};

struct NegativeInfo {
    GeoCoordinate gps;
    std::map<std::string, std::string> text;
};

// One training sample {query, ranking candidates, negatives}.
struct RankingTriplet {
    std::string query_id;
    GeoCoordinate query_gps;
    FeatureVector query_emb;  // resolved from sidecars; may be empty on load
    std::vector<TripletCandidate> ranking;   // top-k1 of C', similarity order
    std::vector<NegativeInfo> negatives;     // bottom-k2 of C', GPS + text only
};

struct PromptTemplate {
    std::string template_text;
    static PromptTemplate default_template();
};

RankingTriplet build_triplet(const VectorStore& store, const RetrievalResult& result,
                             const std::string& query_id, const GeoCoordinate& query_gps,
                             uint32_t k1, uint32_t k2);

// Byte-exact render for one ranking candidate; coordinates at 6 decimals,
// images as "<image:ID>" reference tokens.
std::string render_prompt(const RankingTriplet& t, uint32_t candidate_index,
                          const PromptTemplate& tpl = PromptTemplate::default_template());

// Candidate-generation request prompt for an external generator.
std::string render_generation_prompt(const std::string& query_id);

void write_dataset(const std::vector<RankingTriplet>& triplets, const std::string& path);
std::vector<RankingTriplet> load_dataset(const std::string& path);

// Fixed 6-decimal coordinate formatting shared by prompts.
std::string format_coord(double v);

}  // namespace georank
