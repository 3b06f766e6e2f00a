#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "georank/geodesy.hpp"
#include "georank/io.hpp"

namespace georank {

using FeatureVector = std::vector<float>;

// Dense row-major linear map, bias-free.
struct LinearMap {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<float> w;  // rows * cols

    LinearMap() = default;
    LinearMap(uint32_t r, uint32_t c) : rows(r), cols(c), w(static_cast<size_t>(r) * c, 0.0f) {}

    static LinearMap identity(uint32_t n);
    static LinearMap random(uint32_t r, uint32_t c, uint64_t seed);

    FeatureVector apply(const FeatureVector& x) const;
    float& at(uint32_t r, uint32_t c) { return w[static_cast<size_t>(r) * cols + c]; }
    float at(uint32_t r, uint32_t c) const { return w[static_cast<size_t>(r) * cols + c]; }
};

// Deterministic sinusoidal multi-frequency GPS features with a seeded
// projection; stands in for a learned coordinate encoder.
struct GpsEncoder {
    std::vector<double> frequencies;
    LinearMap projection;  // out_dim x (4 * frequencies.size())
    uint32_t out_dim = 0;
    uint64_t seed = 0;

    static GpsEncoder make(uint32_t out_dim, uint64_t seed,
                           std::vector<double> frequencies = default_frequencies());
    // out_dim == 4 * frequencies.size(), projection = identity.
    static GpsEncoder make_identity(std::vector<double> frequencies);
    static std::vector<double> default_frequencies();

    FeatureVector encode(const GeoCoordinate& g) const;  // unit-norm
};

// Raw sin/cos features of (lat, lon) radians at each frequency, pre-projection.
std::vector<double> gps_fourier_features(const std::vector<double>& frequencies,
                                         const GeoCoordinate& g);

struct CandidateRecord {
    std::string id;
    GeoCoordinate gps;
    std::map<std::string, std::string> text;  // descriptor name -> value
    FeatureVector emb_text;
    FeatureVector emb_img;
    FeatureVector emb_gps;
};

struct StoreDims {
    uint32_t gps = 0;
    uint32_t text = 0;
    uint32_t img = 0;
    uint32_t total() const { return gps + text + img; }
};

// gps || text || img, the fixed candidate segment order.
FeatureVector concat_candidate(const CandidateRecord& rec, const StoreDims& dims);

struct AdapterPair {
    LinearMap to_gps;   // img-dim -> gps-dim
    LinearMap to_text;  // img-dim -> text-dim
    double temperature = 0.07;
};

// adapter_gps(img) || adapter_text(img) || img
FeatureVector encode_query(const FeatureVector& img_emb, const AdapterPair& adapters);

struct RetrievalResult {
    std::vector<std::pair<uint32_t, double>> hits;  // (store index, cosine), descending
    uint32_t n_requested = 0;
};

class VectorStore {
public:
    VectorStore(StoreDims dims, GpsEncoder gps_encoder);

    void add(CandidateRecord rec);  // validates dims + id uniqueness
    size_t size() const { return records_.size(); }
    const CandidateRecord& record(uint32_t i) const { return records_.at(i); }
    const StoreDims& dims() const { return dims_; }
    const GpsEncoder& gps_encoder() const { return gps_encoder_; }
    const FeatureVector& concat(uint32_t i) const { return concat_.at(i); }
    // Index of a candidate id, or -1 when absent.
    int find(const std::string& id) const;

    // Exact top-N by cosine over the full concatenation; ties by ascending id.
    RetrievalResult retrieve(const FeatureVector& v_q, uint32_t n) const;

private:
    StoreDims dims_;
    GpsEncoder gps_encoder_;
    std::vector<CandidateRecord> records_;
    std::vector<FeatureVector> concat_;
    std::map<std::string, uint32_t> ids_;
};

double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

struct AdapterTrainOptions {
    uint32_t steps = 200;
    double lr = 0.05;
    uint32_t batch_size = 256;
    uint64_t seed = 0;
};

struct AdapterTrainResult {
    AdapterPair adapters;
    std::vector<double> loss_per_step;
};

// InfoNCE alignment of image embeddings against matching candidate gps/text
// segments with in-batch negatives. Needs at least 2 pairs.
AdapterTrainResult train_adapters(
    const std::vector<std::pair<FeatureVector, const CandidateRecord*>>& pairs,
    AdapterPair adapters, const AdapterTrainOptions& opt);

// --- ingestion -------------------------------------------------------------

struct QueryRecord {
    std::string id;
    bool has_gps = false;
    GeoCoordinate gps;  // valid only when has_gps
    FeatureVector emb_img;
};

// candidates.jsonl {id, lat, lon, text:{...}} + candidates_text.bin + candidates_img.bin
VectorStore load_store(const std::string& dir, const GpsEncoder& enc);

// queries.jsonl {id, lat?, lon?} + queries_img.bin
std::vector<QueryRecord> load_queries(const std::string& dir);

}  // namespace georank
