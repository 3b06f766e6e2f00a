#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "georank/dataset.hpp"
#include "georank/vector_store.hpp"

namespace georank {

// Segment offsets of an assembled feature vector:
// query || candidate-gps || candidate-text || candidate-img || negatives-gps-mean || mask(3)
struct FeatureLayout {
    uint32_t query_dim = 0;
    uint32_t gps_dim = 0;
    uint32_t text_dim = 0;
    uint32_t img_dim = 0;

    uint32_t total() const { return query_dim + 2 * gps_dim + text_dim + img_dim + 3; }
    uint32_t off_query() const { return 0; }
    uint32_t off_gps() const { return query_dim; }
    uint32_t off_text() const { return query_dim + gps_dim; }
    uint32_t off_img() const { return query_dim + gps_dim + text_dim; }
    uint32_t off_neg() const { return query_dim + gps_dim + text_dim + img_dim; }
    uint32_t off_mask() const { return query_dim + gps_dim + text_dim + img_dim + gps_dim; }
};

struct AblationFlags {
    bool no_second_order = false;  // forces lambda = 1
    bool no_negatives = false;     // k2 = 0, negatives slice zeroed
    bool no_text = false;          // text segment + mask bit zeroed
    bool no_img = false;           // img segment + mask bit zeroed
    bool no_generated = false;     // empty C_g at inference
};

// Numeric stand-in for the rendered prompt. Absent modalities leave a zeroed
// slice and a 0 mask bit (GPS-only generated candidates carry gps alone).
FeatureVector assemble_features(const FeatureVector& query_emb, const GeoCoordinate& cand_gps,
                                const FeatureVector* emb_text, const FeatureVector* emb_img,
                                const std::vector<GeoCoordinate>& negatives,
                                const GpsEncoder& enc, const FeatureLayout& layout,
                                const AblationFlags& flags = {});

// --- scorer ------------------------------------------------------------------

// Feed-forward backbone (tanh hidden layers) with a bias-free linear value head.
struct ScorerState {
    FeatureLayout layout;
    std::vector<uint32_t> hidden_dims;   // empty -> identity backbone
    std::vector<LinearMap> weights;      // one per hidden layer
    std::vector<std::vector<float>> biases;
    std::vector<float> value_head_w;     // dim of h_final, no bias

    static ScorerState make(const FeatureLayout& layout, std::vector<uint32_t> hidden_dims,
                            uint64_t seed);
    uint32_t head_dim() const { return hidden_dims.empty() ? layout.total() : hidden_dims.back(); }
};

double score(const ScorerState& state, const FeatureVector& features);

// Checkpoint: magic "GRSC", u32 version, layout + hidden dims, float32 blocks.
void save_checkpoint(const ScorerState& state, const std::string& path);
ScorerState load_checkpoint(const std::string& path);

// --- multi-order distance objective -------------------------------------------

struct LossConfig {
    double lambda = 0.7;
    uint32_t K1 = 1;

    uint32_t k2_pairs(uint32_t k1) const {  // K^(2) = ((k1-1)+(k1-K1)) * K1 / 2
        return ((k1 - 1) + (k1 - K1)) * K1 / 2;
    }
};

struct DistanceLabels {
    std::vector<double> d;
    std::vector<uint32_t> pi;                          // ascending d, ties by index
    std::vector<std::pair<uint32_t, uint32_t>> pairs;  // sorted-position pairs (i, j), i < j
    std::vector<double> delta_d;                       // d[pi[i]] - d[pi[j]], all <= 0
    std::vector<uint32_t> pair_order;                  // ascending delta_d (largest gap first)
};

DistanceLabels make_distance_labels(const std::vector<double>& d);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // w.r.t. the unsorted scores
};

LossGrad loss_first_order(const std::vector<double>& scores, const DistanceLabels& labels,
                          const LossConfig& cfg);
LossGrad loss_second_order(const std::vector<double>& scores, const DistanceLabels& labels,
                           const LossConfig& cfg);

struct TotalLoss {
    double loss = 0.0;
    double loss1 = 0.0;
    double loss2 = 0.0;
    std::vector<double> grad;
};

TotalLoss loss_total(const std::vector<double>& scores, const DistanceLabels& labels,
                     const LossConfig& cfg);

// --- training ------------------------------------------------------------------

struct TrainOptions {
    double lr = 1e-4;
    uint32_t batch = 4;
    uint32_t epochs = 1;
    double weight_decay = 0.01;
    uint64_t seed = 0;
    bool shuffle = true;
    // Probability of scoring a training candidate GPS-only (text/img segments
    // and mask bits zeroed). Inference pools mix full-modality retrieved
    // candidates with GPS-only generated ones; dropout closes that gap.
    double modality_dropout = 0.0;
};

struct TrainStep {
    uint32_t step = 0;
    double loss = 0.0;
    double loss1 = 0.0;
    double loss2 = 0.0;
};

struct TrainResult {
    ScorerState state;
    std::vector<TrainStep> curve;
};

// Resolves candidate embeddings by id; the synthetic path and the real path
// both go through a VectorStore.
TrainResult train(const std::vector<RankingTriplet>& dataset, const VectorStore& store,
                  ScorerState state, const LossConfig& cfg, const TrainOptions& opt,
                  const AblationFlags& flags = {});

void write_loss_curve_csv(const std::vector<TrainStep>& curve, const std::string& path);

}  // namespace georank
