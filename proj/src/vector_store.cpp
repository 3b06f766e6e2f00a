#include "georank/vector_store.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace georank {

LinearMap LinearMap::identity(uint32_t n) {
    LinearMap m(n, n);
    for (uint32_t i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
}

LinearMap LinearMap::random(uint32_t r, uint32_t c, uint64_t seed) {
    LinearMap m(r, c);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(c)));
    for (auto& v : m.w) v = static_cast<float>(dist(rng));
    return m;
}

FeatureVector LinearMap::apply(const FeatureVector& x) const {
    if (x.size() != cols)
        throw std::invalid_argument("LinearMap::apply: dimension mismatch, expected " +
                                    std::to_string(cols) + " got " + std::to_string(x.size()));
    FeatureVector y(rows, 0.0f);
    for (uint32_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const float* wr = w.data() + static_cast<size_t>(i) * cols;
        for (uint32_t j = 0; j < cols; ++j) acc += static_cast<double>(wr[j]) * x[j];
        y[i] = static_cast<float>(acc);
    }
    return y;
}

std::vector<double> GpsEncoder::default_frequencies() {
    return {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
}

std::vector<double> gps_fourier_features(const std::vector<double>& frequencies,
                                         const GeoCoordinate& g) {
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    const double lat = g.lat * kDegToRad;
    const double lon = g.lon * kDegToRad;
    std::vector<double> f;
    f.reserve(frequencies.size() * 4);
    for (double fr : frequencies) {
        f.push_back(std::sin(fr * lat));
        f.push_back(std::cos(fr * lat));
        f.push_back(std::sin(fr * lon));
        f.push_back(std::cos(fr * lon));
    }
    return f;
}

GpsEncoder GpsEncoder::make(uint32_t out_dim, uint64_t seed, std::vector<double> frequencies) {
    if (out_dim == 0 || frequencies.empty())
        throw std::invalid_argument("GpsEncoder: out_dim and frequencies must be non-empty");
    for (double fr : frequencies)
        if (!(fr > 0.0)) throw std::invalid_argument("GpsEncoder: frequencies must be positive");
    GpsEncoder e;
    e.frequencies = std::move(frequencies);
    e.out_dim = out_dim;
    e.seed = seed;
    e.projection = LinearMap::random(out_dim, static_cast<uint32_t>(e.frequencies.size() * 4), seed);
    return e;
}

GpsEncoder GpsEncoder::make_identity(std::vector<double> frequencies) {
    GpsEncoder e;
    e.out_dim = static_cast<uint32_t>(frequencies.size() * 4);
    e.frequencies = std::move(frequencies);
    e.seed = 0;
    e.projection = LinearMap::identity(e.out_dim);
    return e;
}

FeatureVector GpsEncoder::encode(const GeoCoordinate& g) const {
    const std::vector<double> base = gps_fourier_features(frequencies, g);
    FeatureVector bf(base.begin(), base.end());
    FeatureVector y = projection.apply(bf);
    double norm = 0.0;
    for (float v : y) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (float& v : y) v = static_cast<float>(v / norm);
    return y;
}

FeatureVector concat_candidate(const CandidateRecord& rec, const StoreDims& dims) {
    if (rec.emb_gps.size() != dims.gps || rec.emb_text.size() != dims.text ||
        rec.emb_img.size() != dims.img)
        throw std::invalid_argument("concat_candidate: segment dimension mismatch for id " + rec.id);
    FeatureVector v;
    v.reserve(dims.total());
    v.insert(v.end(), rec.emb_gps.begin(), rec.emb_gps.end());
    v.insert(v.end(), rec.emb_text.begin(), rec.emb_text.end());
    v.insert(v.end(), rec.emb_img.begin(), rec.emb_img.end());
    return v;
}

FeatureVector encode_query(const FeatureVector& img_emb, const AdapterPair& adapters) {
    FeatureVector g = adapters.to_gps.apply(img_emb);
    FeatureVector t = adapters.to_text.apply(img_emb);
    FeatureVector v;
    v.reserve(g.size() + t.size() + img_emb.size());
    v.insert(v.end(), g.begin(), g.end());
    v.insert(v.end(), t.begin(), t.end());
    v.insert(v.end(), img_emb.begin(), img_emb.end());
    return v;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_similarity: zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

VectorStore::VectorStore(StoreDims dims, GpsEncoder gps_encoder)
    : dims_(dims), gps_encoder_(std::move(gps_encoder)) {
    if (gps_encoder_.out_dim != dims_.gps)
        throw std::invalid_argument("VectorStore: gps encoder out_dim does not match store gps dim");
}

void VectorStore::add(CandidateRecord rec) {
    for (float v : rec.emb_text)
        if (!std::isfinite(v)) throw std::invalid_argument("VectorStore::add: non-finite text embedding in " + rec.id);
    for (float v : rec.emb_img)
        if (!std::isfinite(v)) throw std::invalid_argument("VectorStore::add: non-finite image embedding in " + rec.id);
    if (rec.emb_gps.empty()) rec.emb_gps = gps_encoder_.encode(rec.gps);
    if (!ids_.emplace(rec.id, static_cast<uint32_t>(records_.size())).second)
        throw std::invalid_argument("VectorStore::add: duplicate id " + rec.id);
    FeatureVector cv = concat_candidate(rec, dims_);
    records_.push_back(std::move(rec));
    concat_.push_back(std::move(cv));
}

int VectorStore::find(const std::string& id) const {
    auto it = ids_.find(id);
    return it == ids_.end() ? -1 : static_cast<int>(it->second);
}

RetrievalResult VectorStore::retrieve(const FeatureVector& v_q, uint32_t n) const {
    if (n == 0) throw std::invalid_argument("retrieve: n must be >= 1");
    if (v_q.size() != dims_.total())
        throw std::invalid_argument("retrieve: query dim " + std::to_string(v_q.size()) +
                                    " != store dim " + std::to_string(dims_.total()));
    double qn = 0.0;
    for (float v : v_q) qn += static_cast<double>(v) * v;
    if (qn == 0.0) throw std::invalid_argument("retrieve: zero-norm query");

    std::vector<std::pair<uint32_t, double>> scored(records_.size());
    for (uint32_t i = 0; i < records_.size(); ++i)
        scored[i] = {i, cosine_similarity(v_q, concat_[i])};
    const auto better = [this](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return records_[a.first].id < records_[b.first].id;
    };
    const size_t keep = std::min<size_t>(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), better);
    scored.resize(keep);

    RetrievalResult res;
    res.n_requested = n;
    res.hits = std::move(scored);
    return res;
}

namespace {

struct SegmentGrad {
    double loss = 0.0;
    LinearMap grad;
};

// InfoNCE over one projected segment with in-batch negatives.
SegmentGrad infonce_segment(const LinearMap& adapter,
                            const std::vector<const FeatureVector*>& imgs,
                            const std::vector<const FeatureVector*>& targets,
                            double temperature) {
    const size_t b = imgs.size();
    SegmentGrad out;
    out.grad = LinearMap(adapter.rows, adapter.cols);

    std::vector<FeatureVector> proj(b);
    std::vector<double> pnorm(b), tnorm(b);
    for (size_t i = 0; i < b; ++i) {
        proj[i] = adapter.apply(*imgs[i]);
        double n = 0.0;
        for (float v : proj[i]) n += static_cast<double>(v) * v;
        pnorm[i] = std::sqrt(n);
        n = 0.0;
        for (float v : *targets[i]) n += static_cast<double>(v) * v;
        tnorm[i] = std::sqrt(n);
        if (pnorm[i] == 0.0 || tnorm[i] == 0.0)
            throw std::runtime_error("train_adapters: zero-norm vector in batch");
    }

    const double inv_t = 1.0 / temperature;
    for (size_t i = 0; i < b; ++i) {
        std::vector<double> cos(b), logits(b);
        double mx = -1e300;
        for (size_t j = 0; j < b; ++j) {
            double dot = 0.0;
            for (size_t d = 0; d < proj[i].size(); ++d)
                dot += static_cast<double>(proj[i][d]) * (*targets[j])[d];
            cos[j] = dot / (pnorm[i] * tnorm[j]);
            logits[j] = cos[j] * inv_t;
            mx = std::max(mx, logits[j]);
        }
        double denom = 0.0;
        for (size_t j = 0; j < b; ++j) denom += std::exp(logits[j] - mx);
        out.loss += -(logits[i] - mx - std::log(denom));

        // dL/d proj_i accumulated across columns j of row i
        std::vector<double> dp(proj[i].size(), 0.0);
        for (size_t j = 0; j < b; ++j) {
            const double soft = std::exp(logits[j] - mx) / denom;
            const double coef = (soft - (i == j ? 1.0 : 0.0)) * inv_t / static_cast<double>(b);
            // d cos(p, t)/dp = t/(|p||t|) - cos * p/|p|^2
            for (size_t d = 0; d < dp.size(); ++d) {
                const double dcos = (*targets[j])[d] / (pnorm[i] * tnorm[j]) -
                                    cos[j] * proj[i][d] / (pnorm[i] * pnorm[i]);
                dp[d] += coef * dcos;
            }
        }
        for (uint32_t r = 0; r < out.grad.rows; ++r)
            for (uint32_t c = 0; c < out.grad.cols; ++c)
                out.grad.at(r, c) += static_cast<float>(dp[r] * (*imgs[i])[c]);
    }
    out.loss /= static_cast<double>(b);
    return out;
}

}  // namespace

AdapterTrainResult train_adapters(
    const std::vector<std::pair<FeatureVector, const CandidateRecord*>>& pairs,
    AdapterPair adapters, const AdapterTrainOptions& opt) {
    if (pairs.size() < 2)
        throw std::invalid_argument("train_adapters: need at least 2 pairs for in-batch negatives");

    std::mt19937_64 rng(opt.seed);
    AdapterTrainResult res;
    res.loss_per_step.reserve(opt.steps);

    for (uint32_t step = 0; step < opt.steps; ++step) {
        std::vector<size_t> idx(pairs.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (pairs.size() > opt.batch_size) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(opt.batch_size);
        }
        std::vector<const FeatureVector*> imgs, tgt_gps, tgt_text;
        for (size_t i : idx) {
            imgs.push_back(&pairs[i].first);
            tgt_gps.push_back(&pairs[i].second->emb_gps);
            tgt_text.push_back(&pairs[i].second->emb_text);
        }

        SegmentGrad g = infonce_segment(adapters.to_gps, imgs, tgt_gps, adapters.temperature);
        SegmentGrad t = infonce_segment(adapters.to_text, imgs, tgt_text, adapters.temperature);
        res.loss_per_step.push_back((g.loss + t.loss) / 2.0);

        for (size_t k = 0; k < adapters.to_gps.w.size(); ++k)
            adapters.to_gps.w[k] -= static_cast<float>(opt.lr * g.grad.w[k]);
        for (size_t k = 0; k < adapters.to_text.w.size(); ++k)
            adapters.to_text.w[k] -= static_cast<float>(opt.lr * t.grad.w[k]);
    }
    res.adapters = std::move(adapters);
    return res;
}

VectorStore load_store(const std::string& dir, const GpsEncoder& enc) {
    const auto meta = read_jsonl(dir + "/candidates.jsonl");
    const EmbeddingMatrix text = read_embeddings(dir + "/candidates_text.bin");
    const EmbeddingMatrix img = read_embeddings(dir + "/candidates_img.bin");
    if (text.count != meta.size() || img.count != meta.size())
        throw std::runtime_error("load_store: sidecar row count does not match candidates.jsonl");

    VectorStore store({enc.out_dim, text.dim, img.dim}, enc);
    for (size_t i = 0; i < meta.size(); ++i) {
        const auto& j = meta[i];
        for (const char* f : {"id", "lat", "lon"})
            if (!j.contains(f))
                throw std::runtime_error("load_store: candidates.jsonl line " + std::to_string(i + 1) +
                                         " missing field " + f);
        CandidateRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.gps = GeoCoordinate(j.at("lat").get<double>(), j.at("lon").get<double>());
        if (j.contains("text"))
            for (const auto& [k, v] : j.at("text").items()) rec.text[k] = v.get<std::string>();
        rec.emb_text = text.row_vec(static_cast<uint32_t>(i));
        rec.emb_img = img.row_vec(static_cast<uint32_t>(i));
        store.add(std::move(rec));
    }
    return store;
}

std::vector<QueryRecord> load_queries(const std::string& dir) {
    const auto meta = read_jsonl(dir + "/queries.jsonl");
    const EmbeddingMatrix img = read_embeddings(dir + "/queries_img.bin");
    if (img.count != meta.size())
        throw std::runtime_error("load_queries: sidecar row count does not match queries.jsonl");
    std::vector<QueryRecord> out;
    out.reserve(meta.size());
    for (size_t i = 0; i < meta.size(); ++i) {
        const auto& j = meta[i];
        if (!j.contains("id"))
            throw std::runtime_error("load_queries: queries.jsonl line " + std::to_string(i + 1) +
                                     " missing field id");
        QueryRecord q;
        q.id = j.at("id").get<std::string>();
        if (j.contains("lat") && j.contains("lon")) {
            q.has_gps = true;
            q.gps = GeoCoordinate(j.at("lat").get<double>(), j.at("lon").get<double>());
        }
        q.emb_img = img.row_vec(static_cast<uint32_t>(i));
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace georank
