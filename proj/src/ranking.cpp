#include "georank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace georank {

FeatureVector assemble_features(const FeatureVector& query_emb, const GeoCoordinate& cand_gps,
                                const FeatureVector* emb_text, const FeatureVector* emb_img,
                                const std::vector<GeoCoordinate>& negatives,
                                const GpsEncoder& enc, const FeatureLayout& layout,
                                const AblationFlags& flags) {
    if (query_emb.empty()) throw std::invalid_argument("assemble_features: query embedding missing");
    if (query_emb.size() != layout.query_dim)
        throw std::invalid_argument("assemble_features: query dim mismatch");
    if (enc.out_dim != layout.gps_dim)
        throw std::invalid_argument("assemble_features: gps encoder dim mismatch");

    FeatureVector f(layout.total(), 0.0f);
    std::copy(query_emb.begin(), query_emb.end(), f.begin() + layout.off_query());

    const FeatureVector g = enc.encode(cand_gps);
    std::copy(g.begin(), g.end(), f.begin() + layout.off_gps());

    const bool use_text = emb_text != nullptr && !flags.no_text;
    const bool use_img = emb_img != nullptr && !flags.no_img;
    if (use_text) {
        if (emb_text->size() != layout.text_dim)
            throw std::invalid_argument("assemble_features: text dim mismatch");
        std::copy(emb_text->begin(), emb_text->end(), f.begin() + layout.off_text());
    }
    if (use_img) {
        if (emb_img->size() != layout.img_dim)
            throw std::invalid_argument("assemble_features: img dim mismatch");
        std::copy(emb_img->begin(), emb_img->end(), f.begin() + layout.off_img());
    }

    if (!negatives.empty() && !flags.no_negatives) {
        std::vector<double> mean(layout.gps_dim, 0.0);
        for (const auto& n : negatives) {
            const FeatureVector ng = enc.encode(n);
            for (uint32_t d = 0; d < layout.gps_dim; ++d) mean[d] += ng[d];
        }
        for (uint32_t d = 0; d < layout.gps_dim; ++d)
            f[layout.off_neg() + d] = static_cast<float>(mean[d] / negatives.size());
    }

    f[layout.off_mask() + 0] = 1.0f;  // gps always present
    f[layout.off_mask() + 1] = use_text ? 1.0f : 0.0f;
    f[layout.off_mask() + 2] = use_img ? 1.0f : 0.0f;
    return f;
}

// --- scorer ------------------------------------------------------------------

ScorerState ScorerState::make(const FeatureLayout& layout, std::vector<uint32_t> hidden_dims,
                              uint64_t seed) {
    ScorerState s;
    s.layout = layout;
    s.hidden_dims = std::move(hidden_dims);
    std::mt19937_64 rng(seed);
    uint32_t in = layout.total();
    for (uint32_t h : s.hidden_dims) {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
        LinearMap w(h, in);
        for (auto& v : w.w) v = static_cast<float>(dist(rng));
        s.weights.push_back(std::move(w));
        s.biases.emplace_back(h, 0.0f);
        in = h;
    }
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
    s.value_head_w.resize(in);
    for (auto& v : s.value_head_w) v = static_cast<float>(dist(rng));
    return s;
}

namespace {

// Forward pass keeping per-layer activations for backprop.
struct ForwardCache {
    std::vector<FeatureVector> activations;  // activations[0] = input, last = h_final
    double score = 0.0;
};

ForwardCache forward(const ScorerState& st, const FeatureVector& x) {
    ForwardCache c;
    c.activations.push_back(x);
    for (size_t l = 0; l < st.weights.size(); ++l) {
        FeatureVector a = st.weights[l].apply(c.activations.back());
        for (uint32_t i = 0; i < a.size(); ++i)
            a[i] = std::tanh(a[i] + st.biases[l][i]);
        c.activations.push_back(std::move(a));
    }
    const FeatureVector& h = c.activations.back();
    double s = 0.0;
    for (size_t i = 0; i < h.size(); ++i) s += static_cast<double>(st.value_head_w[i]) * h[i];
    c.score = s;
    return c;
}

}  // namespace

double score(const ScorerState& state, const FeatureVector& features) {
    if (features.size() != state.layout.total())
        throw std::invalid_argument("score: feature dim mismatch");
    const double s = forward(state, features).score;
    if (!std::isfinite(s)) throw std::runtime_error("score: non-finite output");
    return s;
}

// --- distance labels -----------------------------------------------------------

DistanceLabels make_distance_labels(const std::vector<double>& d) {
    if (d.empty()) throw std::invalid_argument("make_distance_labels: empty distances");
    for (double v : d)
        if (!std::isfinite(v)) throw std::invalid_argument("make_distance_labels: non-finite distance");
    DistanceLabels lab;
    lab.d = d;
    const uint32_t k1 = static_cast<uint32_t>(d.size());
    lab.pi.resize(k1);
    std::iota(lab.pi.begin(), lab.pi.end(), 0u);
    std::stable_sort(lab.pi.begin(), lab.pi.end(),
                     [&](uint32_t a, uint32_t b) { return d[a] < d[b]; });
    for (uint32_t i = 0; i + 1 < k1; ++i)
        for (uint32_t j = i + 1; j < k1; ++j) {
            lab.pairs.emplace_back(i, j);
            lab.delta_d.push_back(d[lab.pi[i]] - d[lab.pi[j]]);
        }
    lab.pair_order.resize(lab.pairs.size());
    std::iota(lab.pair_order.begin(), lab.pair_order.end(), 0u);
    std::stable_sort(lab.pair_order.begin(), lab.pair_order.end(),
                     [&](uint32_t a, uint32_t b) { return lab.delta_d[a] < lab.delta_d[b]; });
    return lab;
}

// --- losses ----------------------------------------------------------------------

namespace {

void check_scores(const std::vector<double>& scores, const DistanceLabels& labels,
                  const LossConfig& cfg) {
    if (scores.size() != labels.d.size())
        throw std::invalid_argument("loss: score/label length mismatch");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("loss: non-finite score");
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
        throw std::invalid_argument("loss: lambda outside [0, 1]");
    if (cfg.K1 < 1 || cfg.K1 > scores.size())
        throw std::invalid_argument("loss: K1 must satisfy 1 <= K1 <= k1");
}

// Partial PL over an ordered sequence x: -(1/K) sum_{i<K} log softmax_i(x[i])
// where softmax_i runs over the suffix x[i..]. Returns loss and grad w.r.t. x.
LossGrad partial_pl(const std::vector<double>& x, uint32_t K) {
    const size_t n = x.size();
    LossGrad out;
    out.grad.assign(n, 0.0);
    for (uint32_t i = 0; i < K; ++i) {
        double mx = x[i];
        for (size_t j = i; j < n; ++j) mx = std::max(mx, x[j]);
        double denom = 0.0;
        for (size_t j = i; j < n; ++j) denom += std::exp(x[j] - mx);
        const double lse = mx + std::log(denom);
        out.loss += lse - x[i];
        for (size_t j = i; j < n; ++j)
            out.grad[j] += std::exp(x[j] - lse);
        out.grad[i] -= 1.0;
    }
    out.loss /= K;
    for (double& g : out.grad) g /= K;
    return out;
}

}  // namespace

LossGrad loss_first_order(const std::vector<double>& scores, const DistanceLabels& labels,
                          const LossConfig& cfg) {
    check_scores(scores, labels, cfg);
    const uint32_t k1 = static_cast<uint32_t>(scores.size());
    std::vector<double> sorted(k1);
    for (uint32_t i = 0; i < k1; ++i) sorted[i] = scores[labels.pi[i]];
    LossGrad pl = partial_pl(sorted, cfg.K1);
    LossGrad out;
    out.loss = pl.loss;
    out.grad.assign(k1, 0.0);
    for (uint32_t i = 0; i < k1; ++i) out.grad[labels.pi[i]] = pl.grad[i];
    return out;
}

LossGrad loss_second_order(const std::vector<double>& scores, const DistanceLabels& labels,
                           const LossConfig& cfg) {
    check_scores(scores, labels, cfg);
    const uint32_t k1 = static_cast<uint32_t>(scores.size());
    if (k1 < 2) throw std::invalid_argument("loss_second_order: k1 < 2, no pairs");
    const uint32_t K2 = cfg.k2_pairs(k1);

    std::vector<double> sorted(k1);
    for (uint32_t i = 0; i < k1; ++i) sorted[i] = scores[labels.pi[i]];

    const size_t P = labels.pairs.size();
    std::vector<double> ds(P);
    for (size_t p = 0; p < P; ++p) {
        ds[p] = sorted[labels.pairs[labels.pair_order[p]].first] -
                sorted[labels.pairs[labels.pair_order[p]].second];
    }
    LossGrad pl = partial_pl(ds, K2);

    LossGrad out;
    out.loss = pl.loss;
    out.grad.assign(k1, 0.0);
    std::vector<double> gsorted(k1, 0.0);
    for (size_t p = 0; p < P; ++p) {
        const auto& [a, b] = labels.pairs[labels.pair_order[p]];
        gsorted[a] += pl.grad[p];
        gsorted[b] -= pl.grad[p];
    }
    for (uint32_t i = 0; i < k1; ++i) out.grad[labels.pi[i]] = gsorted[i];
    return out;
}

TotalLoss loss_total(const std::vector<double>& scores, const DistanceLabels& labels,
                     const LossConfig& cfg) {
    check_scores(scores, labels, cfg);
    TotalLoss out;
    if (cfg.lambda == 1.0) {
        LossGrad l1 = loss_first_order(scores, labels, cfg);
        out.loss = l1.loss;
        out.loss1 = l1.loss;
        out.loss2 = 0.0;
        out.grad = std::move(l1.grad);
        return out;
    }
    if (cfg.lambda == 0.0) {
        LossGrad l2 = loss_second_order(scores, labels, cfg);
        out.loss = l2.loss;
        out.loss1 = 0.0;
        out.loss2 = l2.loss;
        out.grad = std::move(l2.grad);
        return out;
    }
    LossGrad l1 = loss_first_order(scores, labels, cfg);
    LossGrad l2 = loss_second_order(scores, labels, cfg);
    out.loss1 = l1.loss;
    out.loss2 = l2.loss;
    out.loss = cfg.lambda * l1.loss + (1.0 - cfg.lambda) * l2.loss;
    out.grad.resize(scores.size());
    for (size_t i = 0; i < scores.size(); ++i)
        out.grad[i] = cfg.lambda * l1.grad[i] + (1.0 - cfg.lambda) * l2.grad[i];
    return out;
}

// --- training ----------------------------------------------------------------------

namespace {

struct Grads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> value_head;

    explicit Grads(const ScorerState& st) {
        for (size_t l = 0; l < st.weights.size(); ++l) {
            weights.emplace_back(st.weights[l].w.size(), 0.0);
            biases.emplace_back(st.biases[l].size(), 0.0);
        }
        value_head.assign(st.value_head_w.size(), 0.0);
    }
};

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(score).
void backward(const ScorerState& st, const ForwardCache& cache, double dscore, Grads& g) {
    const FeatureVector& h = cache.activations.back();
    std::vector<double> dh(h.size());
    for (size_t i = 0; i < h.size(); ++i) {
        g.value_head[i] += dscore * h[i];
        dh[i] = dscore * st.value_head_w[i];
    }
    for (size_t l = st.weights.size(); l-- > 0;) {
        const FeatureVector& out = cache.activations[l + 1];
        const FeatureVector& in = cache.activations[l];
        const LinearMap& w = st.weights[l];
        std::vector<double> da(out.size());
        for (size_t i = 0; i < out.size(); ++i) {
            const double t = static_cast<double>(out[i]);
            da[i] = dh[i] * (1.0 - t * t);
            g.biases[l][i] += da[i];
        }
        std::vector<double> din(in.size(), 0.0);
        for (size_t i = 0; i < out.size(); ++i) {
            const size_t row = i * w.cols;
            for (size_t j = 0; j < in.size(); ++j) {
                g.weights[l][row + j] += da[i] * in[j];
                din[j] += static_cast<double>(w.w[row + j]) * da[i];
            }
        }
        dh = std::move(din);
    }
}

struct AdamSlot {
    std::vector<double> m, v;
    explicit AdamSlot(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adamw_update(std::vector<float>& params, const std::vector<double>& grad, AdamSlot& slot,
                  double lr, double wd, uint64_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
        slot.m[i] = b1 * slot.m[i] + (1.0 - b1) * grad[i];
        slot.v[i] = b2 * slot.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = slot.m[i] / bc1;
        const double vhat = slot.v[i] / bc2;
        double p = static_cast<double>(params[i]);
        p -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * p);
        params[i] = static_cast<float>(p);
    }
}

}  // namespace

TrainResult train(const std::vector<RankingTriplet>& dataset, const VectorStore& store,
                  ScorerState state, const LossConfig& cfg, const TrainOptions& opt,
                  const AblationFlags& flags) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const size_t k1 = dataset.front().ranking.size();
    for (const auto& t : dataset) {
        if (t.ranking.size() != k1)
            throw std::invalid_argument("train: triplets must share k1");
        if (t.query_emb.empty())
            throw std::invalid_argument("train: triplet " + t.query_id + " has no query embedding");
    }
    LossConfig effective = cfg;
    if (flags.no_second_order) effective.lambda = 1.0;

    const GpsEncoder& enc = store.gps_encoder();

    // Per-layer Adam state
    std::vector<AdamSlot> w_slots, b_slots;
    for (size_t l = 0; l < state.weights.size(); ++l) {
        w_slots.emplace_back(state.weights[l].w.size());
        b_slots.emplace_back(state.biases[l].size());
    }
    AdamSlot head_slot(state.value_head_w.size());

    std::mt19937_64 rng(opt.seed);
    std::bernoulli_distribution drop_modalities(
        std::clamp(opt.modality_dropout, 0.0, 1.0));
    TrainResult res;
    uint64_t adam_t = 0;
    uint32_t step = 0;

    for (uint32_t epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), size_t{0});
        if (opt.shuffle) std::shuffle(order.begin(), order.end(), rng);

        for (size_t b0 = 0; b0 < order.size(); b0 += opt.batch) {
            const size_t bend = std::min(order.size(), b0 + opt.batch);
            Grads grads(state);
            double batch_loss = 0.0, batch_l1 = 0.0, batch_l2 = 0.0;

            for (size_t bi = b0; bi < bend; ++bi) {
                const RankingTriplet& t = dataset[order[bi]];
                std::vector<GeoCoordinate> neg_gps;
                for (const auto& n : t.negatives) neg_gps.push_back(n.gps);

                std::vector<ForwardCache> caches;
                std::vector<double> scores;
                std::vector<double> dists;
                for (const auto& c : t.ranking) {
                    const int idx = store.find(c.id);
                    const FeatureVector* et = nullptr;
                    const FeatureVector* ei = nullptr;
                    if (idx >= 0) {
                        et = &store.record(static_cast<uint32_t>(idx)).emb_text;
                        ei = &store.record(static_cast<uint32_t>(idx)).emb_img;
                    }
                    AblationFlags cand_flags = flags;
                    if (opt.modality_dropout > 0.0 && drop_modalities(rng)) {
                        cand_flags.no_text = true;
                        cand_flags.no_img = true;
                    }
                    FeatureVector f = assemble_features(t.query_emb, c.gps, et, ei, neg_gps, enc,
                                                        state.layout, cand_flags);
                    caches.push_back(forward(state, f));
                    scores.push_back(caches.back().score);
                    dists.push_back(c.dist_km);
                }
                const DistanceLabels labels = make_distance_labels(dists);
                const TotalLoss tl = loss_total(scores, labels, effective);
                if (!std::isfinite(tl.loss))
                    throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
                batch_loss += tl.loss;
                batch_l1 += tl.loss1;
                batch_l2 += tl.loss2;
                const double scale = 1.0 / static_cast<double>(bend - b0);
                for (size_t c = 0; c < caches.size(); ++c)
                    backward(state, caches[c], tl.grad[c] * scale, grads);
            }

            ++adam_t;
            for (size_t l = 0; l < state.weights.size(); ++l) {
                adamw_update(state.weights[l].w, grads.weights[l], w_slots[l], opt.lr,
                             opt.weight_decay, adam_t);
                // no weight decay on biases
                adamw_update(state.biases[l], grads.biases[l], b_slots[l], opt.lr, 0.0, adam_t);
            }
            adamw_update(state.value_head_w, grads.value_head, head_slot, opt.lr,
                         opt.weight_decay, adam_t);

            const double n = static_cast<double>(bend - b0);
            res.curve.push_back({step, batch_loss / n, batch_l1 / n, batch_l2 / n});
            ++step;
        }
    }
    res.state = std::move(state);
    return res;
}

void write_loss_curve_csv(const std::vector<TrainStep>& curve, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_loss_curve_csv: cannot open " + path);
    os << "step,loss,loss1,loss2\n";
    for (const auto& s : curve)
        os << s.step << ',' << s.loss << ',' << s.loss1 << ',' << s.loss2 << '\n';
}

// --- checkpoint ------------------------------------------------------------------

namespace {
constexpr char kCkptMagic[4] = {'G', 'R', 'S', 'C'};
constexpr uint32_t kCkptVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_floats(std::ostream& os, const std::vector<float>& v) {
    put_u32(os, static_cast<uint32_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> get_floats(std::istream& is) {
    const uint32_t n = get_u32(is);
    std::vector<float> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
    return v;
}
}  // namespace

void save_checkpoint(const ScorerState& state, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kCkptMagic, 4);
    put_u32(os, kCkptVersion);
    put_u32(os, state.layout.query_dim);
    put_u32(os, state.layout.gps_dim);
    put_u32(os, state.layout.text_dim);
    put_u32(os, state.layout.img_dim);
    put_u32(os, static_cast<uint32_t>(state.hidden_dims.size()));
    for (uint32_t h : state.hidden_dims) put_u32(os, h);
    for (size_t l = 0; l < state.weights.size(); ++l) {
        put_floats(os, state.weights[l].w);
        put_floats(os, state.biases[l]);
    }
    put_floats(os, state.value_head_w);
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ScorerState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    const uint32_t version = get_u32(is);
    if (version != kCkptVersion)
        throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
    ScorerState st;
    st.layout.query_dim = get_u32(is);
    st.layout.gps_dim = get_u32(is);
    st.layout.text_dim = get_u32(is);
    st.layout.img_dim = get_u32(is);
    const uint32_t nl = get_u32(is);
    st.hidden_dims.resize(nl);
    for (uint32_t& h : st.hidden_dims) h = get_u32(is);
    uint32_t in = st.layout.total();
    for (uint32_t h : st.hidden_dims) {
        LinearMap w(h, in);
        w.w = get_floats(is);
        if (w.w.size() != static_cast<size_t>(h) * in)
            throw std::runtime_error("load_checkpoint: weight block size mismatch in " + path);
        st.weights.push_back(std::move(w));
        st.biases.push_back(get_floats(is));
        in = h;
    }
    st.value_head_w = get_floats(is);
    if (!is || st.value_head_w.size() != in)
        throw std::runtime_error("load_checkpoint: truncated or inconsistent file " + path);
    return st;
}

}  // namespace georank
