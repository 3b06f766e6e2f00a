#pragma once

#include <string>
#include <vector>

#include "georank/inference.hpp"
#include "georank/ranking.hpp"
#include "georank/synth.hpp"

namespace georank {

// Full run configuration; serialized into every EvalReport so a report can be
// regenerated from its config plus the referenced input files.
struct RunConfig {
    // paths
    std::string store_dir;
    std::string dataset_path;
    std::string checkpoint_path;
    std::string adapters_path;
    std::string report_path;
    std::string generated_path;  // optional external generated candidates
    std::string loss_curve_path;

    // retrieval / triplet construction
    uint32_t N = 20;
    uint32_t k1 = 7;
    uint32_t k2 = 5;

    // loss
    double lambda = 0.7;
    uint32_t K1 = 1;

    // training
    double lr = 1e-4;
    uint32_t batch = 4;
    uint32_t epochs = 1;
    uint64_t seed = 0;

    // scorer backbone
    std::vector<uint32_t> hidden_dims = {256};

    // gps encoder
    uint32_t gps_dim = 32;
    uint64_t gps_seed = 7;
    std::vector<double> gps_frequencies = GpsEncoder::default_frequencies();

    // adapter alignment
    uint32_t adapter_steps = 200;
    double adapter_lr = 0.05;
    double adapter_temperature = 0.07;

    // inference
    uint32_t n_retrieved = 12;
    uint32_t n_generated = 3;
    std::string profile;  // "", "im2gps3k" (12/3) or "yfcc4k" (14/5)
    double stub_noise_km = 25.0;

    // evaluation
    std::vector<double> thresholds_km = {1.0, 25.0, 200.0, 750.0, 2500.0};

    AblationFlags ablation;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static RunConfig load(const std::string& path);

    void apply_profile();  // resolves profile into n_retrieved / n_generated
    void validate() const;

    GpsEncoder make_gps_encoder() const;
};

void save_adapters(const AdapterPair& adapters, const std::string& path);
AdapterPair load_adapters(const std::string& path);

// InfoNCE alignment fitted on the store's own records (image embedding vs the
// record's gps/text segments).
AdapterPair fit_adapters(const VectorStore& store, const RunConfig& cfg);

// Retrieval + triplet construction for every ground-truth query.
std::vector<RankingTriplet> build_dataset(const VectorStore& store,
                                          const std::vector<QueryRecord>& queries,
                                          const AdapterPair& adapters, const RunConfig& cfg);

// Attaches query embeddings (by id) to triplets loaded from disk.
void attach_query_embeddings(std::vector<RankingTriplet>& triplets,
                             const std::vector<QueryRecord>& queries);

struct RankOutcome {
    Prediction prediction;
    RetrievalResult retrieval;
};

// Inference for one query: pool = top n_retrieved ++ generated, negatives
// re-derived from the retrieval tail with the training k2.
RankOutcome rank_query(const VectorStore& store, const ScorerState& scorer,
                       const AdapterPair& adapters, const FeatureVector& query_img_emb,
                       const std::vector<GeoCoordinate>& generated, const RunConfig& cfg,
                       uint32_t n_workers = 1);

struct EvalOutcome {
    EvalReport report;
    EvalReport oracle;
    EvalReport random_baseline;
    EvalReport top1_baseline;
};

// Full evaluation over queries with ground truth; generated candidates come
// from cfg.generated_path when set, else from the built-in stub.
EvalOutcome run_eval(const VectorStore& store, const ScorerState& scorer,
                     const AdapterPair& adapters, const std::vector<QueryRecord>& queries,
                     const RunConfig& cfg);

}  // namespace georank
