#include "georank/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace georank {

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    const auto opt = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("store_dir", c.store_dir);
    opt("dataset_path", c.dataset_path);
    opt("checkpoint_path", c.checkpoint_path);
    opt("adapters_path", c.adapters_path);
    opt("report_path", c.report_path);
    opt("generated_path", c.generated_path);
    opt("loss_curve_path", c.loss_curve_path);
    opt("N", c.N);
    opt("k1", c.k1);
    opt("k2", c.k2);
    opt("lambda", c.lambda);
    opt("K1", c.K1);
    opt("lr", c.lr);
    opt("batch", c.batch);
    opt("epochs", c.epochs);
    opt("seed", c.seed);
    opt("hidden_dims", c.hidden_dims);
    opt("gps_dim", c.gps_dim);
    opt("gps_seed", c.gps_seed);
    opt("gps_frequencies", c.gps_frequencies);
    opt("adapter_steps", c.adapter_steps);
    opt("adapter_lr", c.adapter_lr);
    opt("adapter_temperature", c.adapter_temperature);
    opt("n_retrieved", c.n_retrieved);
    opt("n_generated", c.n_generated);
    opt("profile", c.profile);
    opt("stub_noise_km", c.stub_noise_km);
    opt("thresholds_km", c.thresholds_km);
    if (j.contains("ablation")) {
        const auto& a = j.at("ablation");
        if (a.contains("no_second_order")) c.ablation.no_second_order = a.at("no_second_order").get<bool>();
        if (a.contains("no_negatives")) c.ablation.no_negatives = a.at("no_negatives").get<bool>();
        if (a.contains("no_text")) c.ablation.no_text = a.at("no_text").get<bool>();
        if (a.contains("no_img")) c.ablation.no_img = a.at("no_img").get<bool>();
        if (a.contains("no_generated")) c.ablation.no_generated = a.at("no_generated").get<bool>();
    }
    c.apply_profile();
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["schema"] = "georank.run_config.v1";
    j["store_dir"] = store_dir;
    j["dataset_path"] = dataset_path;
    j["checkpoint_path"] = checkpoint_path;
    j["adapters_path"] = adapters_path;
    j["report_path"] = report_path;
    j["generated_path"] = generated_path;
    j["loss_curve_path"] = loss_curve_path;
    j["N"] = N;
    j["k1"] = k1;
    j["k2"] = k2;
    j["lambda"] = lambda;
    j["K1"] = K1;
    j["lr"] = lr;
    j["batch"] = batch;
    j["epochs"] = epochs;
    j["seed"] = seed;
    j["hidden_dims"] = hidden_dims;
    j["gps_dim"] = gps_dim;
    j["gps_seed"] = gps_seed;
    j["gps_frequencies"] = gps_frequencies;
    j["adapter_steps"] = adapter_steps;
    j["adapter_lr"] = adapter_lr;
    j["adapter_temperature"] = adapter_temperature;
    j["n_retrieved"] = n_retrieved;
    j["n_generated"] = n_generated;
    j["profile"] = profile;
    j["stub_noise_km"] = stub_noise_km;
    j["thresholds_km"] = thresholds_km;
    j["ablation"] = {{"no_second_order", ablation.no_second_order},
                     {"no_negatives", ablation.no_negatives},
                     {"no_text", ablation.no_text},
                     {"no_img", ablation.no_img},
                     {"no_generated", ablation.no_generated}};
    return j;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("RunConfig::load: cannot open " + path);
    nlohmann::json j;
    is >> j;
    return from_json(j);
}

void RunConfig::apply_profile() {
    if (profile.empty()) return;
    if (profile == "im2gps3k") {
        n_retrieved = 12;
        n_generated = 3;
    } else if (profile == "yfcc4k") {
        n_retrieved = 14;
        n_generated = 5;
    } else {
        throw std::invalid_argument("RunConfig: unknown profile " + profile);
    }
}

void RunConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("RunConfig: lambda must be in [0, 1]");
    if (k1 == 0) throw std::invalid_argument("RunConfig: k1 must be >= 1");
    if (K1 < 1 || K1 > k1) throw std::invalid_argument("RunConfig: K1 must satisfy 1 <= K1 <= k1");
    if (N < k1 + k2) throw std::invalid_argument("RunConfig: N must be >= k1 + k2");
    if (batch == 0 || epochs == 0) throw std::invalid_argument("RunConfig: batch and epochs must be >= 1");
    if (!(lr > 0.0) && lr != 0.0) throw std::invalid_argument("RunConfig: lr must be >= 0");
}

GpsEncoder RunConfig::make_gps_encoder() const {
    return GpsEncoder::make(gps_dim, gps_seed, gps_frequencies);
}

namespace {
constexpr char kAdapterMagic[4] = {'G', 'R', 'A', 'P'};

void put_u32(std::ostream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_map(std::ostream& os, const LinearMap& m) {
    put_u32(os, m.rows);
    put_u32(os, m.cols);
    os.write(reinterpret_cast<const char*>(m.w.data()),
             static_cast<std::streamsize>(m.w.size() * sizeof(float)));
}
LinearMap get_map(std::istream& is) {
    uint32_t r = 0, c = 0;
    is.read(reinterpret_cast<char*>(&r), 4);
    is.read(reinterpret_cast<char*>(&c), 4);
    LinearMap m(r, c);
    is.read(reinterpret_cast<char*>(m.w.data()),
            static_cast<std::streamsize>(m.w.size() * sizeof(float)));
    return m;
}
}  // namespace

void save_adapters(const AdapterPair& adapters, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_adapters: cannot open " + path);
    os.write(kAdapterMagic, 4);
    put_map(os, adapters.to_gps);
    put_map(os, adapters.to_text);
    os.write(reinterpret_cast<const char*>(&adapters.temperature), sizeof(double));
    if (!os) throw std::runtime_error("save_adapters: write failed for " + path);
}

AdapterPair load_adapters(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_adapters: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kAdapterMagic, 4) != 0)
        throw std::runtime_error("load_adapters: bad magic in " + path);
    AdapterPair a;
    a.to_gps = get_map(is);
    a.to_text = get_map(is);
    is.read(reinterpret_cast<char*>(&a.temperature), sizeof(double));
    if (!is) throw std::runtime_error("load_adapters: truncated file " + path);
    return a;
}

AdapterPair fit_adapters(const VectorStore& store, const RunConfig& cfg) {
    if (store.size() < 2) throw std::invalid_argument("fit_adapters: store too small");
    const StoreDims& d = store.dims();
    AdapterPair adapters;
    adapters.to_gps = LinearMap::random(d.gps, d.img, cfg.seed + 11);
    adapters.to_text = LinearMap::random(d.text, d.img, cfg.seed + 13);
    adapters.temperature = cfg.adapter_temperature;

    std::vector<std::pair<FeatureVector, const CandidateRecord*>> pairs;
    pairs.reserve(store.size());
    for (uint32_t i = 0; i < store.size(); ++i)
        pairs.emplace_back(store.record(i).emb_img, &store.record(i));

    AdapterTrainOptions opt;
    opt.steps = cfg.adapter_steps;
    opt.lr = cfg.adapter_lr;
    opt.seed = cfg.seed;
    return train_adapters(pairs, std::move(adapters), opt).adapters;
}

std::vector<RankingTriplet> build_dataset(const VectorStore& store,
                                          const std::vector<QueryRecord>& queries,
                                          const AdapterPair& adapters, const RunConfig& cfg) {
    const uint32_t k2 = cfg.ablation.no_negatives ? 0 : cfg.k2;
    std::vector<RankingTriplet> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        if (!q.has_gps)
            throw std::invalid_argument("build_dataset: query " + q.id + " has no ground truth");
        const FeatureVector v_q = encode_query(q.emb_img, adapters);
        const RetrievalResult res = store.retrieve(v_q, cfg.N);
        RankingTriplet t = build_triplet(store, res, q.id, q.gps, cfg.k1, k2);
        t.query_emb = q.emb_img;
        out.push_back(std::move(t));
    }
    return out;
}

void attach_query_embeddings(std::vector<RankingTriplet>& triplets,
                             const std::vector<QueryRecord>& queries) {
    std::map<std::string, const QueryRecord*> by_id;
    for (const auto& q : queries) by_id[q.id] = &q;
    for (auto& t : triplets) {
        auto it = by_id.find(t.query_id);
        if (it == by_id.end())
            throw std::runtime_error("attach_query_embeddings: no query embedding for " + t.query_id);
        t.query_emb = it->second->emb_img;
    }
}

RankOutcome rank_query(const VectorStore& store, const ScorerState& scorer,
                       const AdapterPair& adapters, const FeatureVector& query_img_emb,
                       const std::vector<GeoCoordinate>& generated, const RunConfig& cfg,
                       uint32_t n_workers) {
    const FeatureVector v_q = encode_query(query_img_emb, adapters);
    const uint32_t tail = cfg.ablation.no_negatives ? 0 : cfg.k2;
    const RetrievalResult res = store.retrieve(v_q, std::max(cfg.n_retrieved + tail, 1u));

    RankOutcome out;
    out.retrieval = res;
    CandidatePool pool;
    const size_t n_ret = std::min<size_t>(cfg.n_retrieved, res.hits.size());
    for (size_t i = 0; i < n_ret; ++i)
        pool.retrieved.push_back(&store.record(res.hits[i].first));
    pool.generated = generated;

    // negatives re-derived from the retrieval tail, training-style
    std::vector<GeoCoordinate> negatives;
    if (tail > 0 && res.hits.size() > n_ret) {
        const size_t start = res.hits.size() >= tail ? res.hits.size() - tail : n_ret;
        for (size_t i = std::max(start, n_ret); i < res.hits.size(); ++i)
            negatives.push_back(store.record(res.hits[i].first).gps);
    }

    out.prediction = predict(scorer, query_img_emb, pool, negatives, store.gps_encoder(),
                             cfg.ablation, n_workers);
    return out;
}

EvalOutcome run_eval(const VectorStore& store, const ScorerState& scorer,
                     const AdapterPair& adapters, const std::vector<QueryRecord>& queries,
                     const RunConfig& cfg) {
    if (queries.empty()) throw std::invalid_argument("run_eval: no queries");

    // generated candidates grouped by query id
    std::map<std::string, std::vector<GeoCoordinate>> generated;
    if (!cfg.ablation.no_generated && cfg.n_generated > 0) {
        std::vector<GeneratedCandidate> gens;
        if (!cfg.generated_path.empty())
            gens = load_generated(cfg.generated_path);
        else
            gens = stub_generate(queries, cfg.n_generated, cfg.stub_noise_km, cfg.seed + 101);
        for (const auto& g : gens) generated[g.query_id].push_back(g.gps);
    }

    const ThresholdSet thresholds{cfg.thresholds_km};
    std::vector<std::pair<Prediction, GeoCoordinate>> preds, rand_preds, top1_preds;
    std::vector<CandidatePool> pools;
    std::vector<GeoCoordinate> truths;

    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const QueryRecord& q = queries[qi];
        if (!q.has_gps) throw std::invalid_argument("run_eval: query " + q.id + " has no ground truth");
        std::vector<GeoCoordinate> gen;
        if (auto it = generated.find(q.id); it != generated.end()) gen = it->second;

        RankOutcome out = rank_query(store, scorer, adapters, q.emb_img, gen, cfg);
        CandidatePool pool;
        const size_t n_ret = std::min<size_t>(cfg.n_retrieved, out.retrieval.hits.size());
        for (size_t i = 0; i < n_ret; ++i)
            pool.retrieved.push_back(&store.record(out.retrieval.hits[i].first));
        pool.generated = cfg.ablation.no_generated ? std::vector<GeoCoordinate>{} : gen;

        rand_preds.emplace_back(baseline_random(pool, cfg.seed * 1000003ull + qi), q.gps);
        top1_preds.emplace_back(baseline_top1(store, out.retrieval), q.gps);
        preds.emplace_back(std::move(out.prediction), q.gps);
        pools.push_back(std::move(pool));
        truths.push_back(q.gps);
    }

    EvalOutcome eo;
    eo.report = evaluate(preds, thresholds);
    eo.report.config_snapshot = cfg.to_json();
    eo.oracle = oracle_best_in_pool(pools, truths, thresholds);
    eo.oracle.config_snapshot = cfg.to_json();
    eo.random_baseline = evaluate(rand_preds, thresholds);
    eo.random_baseline.config_snapshot = cfg.to_json();
    eo.top1_baseline = evaluate(top1_preds, thresholds);
    eo.top1_baseline.config_snapshot = cfg.to_json();
    return eo;
}

}  // namespace georank
