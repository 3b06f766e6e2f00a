// Acceptance gate: one pass/fail line per criterion, exit 0 only if all hard
// criteria hold. Criterion 10 is directional and reported without gating.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include "georank/pipeline.hpp"

using namespace georank;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail = "") {
    std::printf("criterion %2d %-28s %s%s%s\n", idx, name, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : "  ", detail.c_str());
    if (!ok) ++g_failures;
}

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// Direct transcription of the ranking objective, independent of src/ranking.cpp.
double pl_reference(const std::vector<double>& x, uint32_t K) {
    double total = 0.0;
    for (uint32_t i = 0; i < K; ++i) {
        double denom = 0.0;
        for (size_t j = i; j < x.size(); ++j) denom += std::exp(x[j]);
        total += std::log(std::exp(x[i]) / denom);
    }
    return -total / K;
}

std::vector<uint32_t> distance_order(const std::vector<double>& d) {
    std::vector<uint32_t> pi(d.size());
    std::iota(pi.begin(), pi.end(), 0);
    std::stable_sort(pi.begin(), pi.end(), [&](uint32_t a, uint32_t b) { return d[a] < d[b]; });
    return pi;
}

double loss1_ref(const std::vector<double>& s, const std::vector<double>& d, uint32_t K1) {
    std::vector<double> x;
    for (uint32_t p : distance_order(d)) x.push_back(s[p]);
    return pl_reference(x, K1);
}

double loss2_ref(const std::vector<double>& s, const std::vector<double>& d, uint32_t K1) {
    const auto pi = distance_order(d);
    struct Gap { double dd, ds; };
    std::vector<Gap> gaps;
    for (size_t i = 0; i + 1 < pi.size(); ++i)
        for (size_t j = i + 1; j < pi.size(); ++j)
            gaps.push_back({d[pi[i]] - d[pi[j]], s[pi[i]] - s[pi[j]]});
    std::stable_sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.dd < b.dd; });
    std::vector<double> x;
    for (const auto& g : gaps) x.push_back(g.ds);
    const uint32_t k1 = static_cast<uint32_t>(s.size());
    return pl_reference(x, ((k1 - 1) + (k1 - K1)) * K1 / 2);
}

std::vector<double> randn(std::mt19937_64& rng, size_t n, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

// --- criteria --------------------------------------------------------------

void criterion_1_loss_oracle() {
    const double t0 = now_s();
    bool ok = true;
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const uint32_t k1 = 2 + rng() % 7;
        LossConfig cfg;
        cfg.K1 = 1 + rng() % k1;
        const auto scores = randn(rng, k1, 2.0);
        auto d = randn(rng, k1, 200.0);
        for (auto& x : d) x = std::abs(x);
        const auto labels = make_distance_labels(d);
        const double l1 = loss_first_order(scores, labels, cfg).loss;
        const double l2 = loss_second_order(scores, labels, cfg).loss;
        const double r1 = loss1_ref(scores, d, cfg.K1);
        const double r2 = loss2_ref(scores, d, cfg.K1);
        ok = ok && std::abs(l1 - r1) <= 1e-9 * std::max(1.0, std::abs(r1));
        ok = ok && std::abs(l2 - r2) <= 1e-9 * std::max(1.0, std::abs(r2));
    }
    // pinned fixture: scores (3,2,0), distances (1,5,20), K1=1 -> chain of 2 terms
    LossConfig cfg;
    cfg.K1 = 1;
    const double fixture =
        loss_second_order({3, 2, 0}, make_distance_labels({1, 5, 20}), cfg).loss;
    const double oracle =
        (-std::log(std::exp(3.0) / (std::exp(3.0) + std::exp(2.0) + std::exp(1.0))) -
         std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0)))) / 2.0;
    ok = ok && std::abs(fixture - oracle) <= 1e-12;
    ok = ok && std::abs(fixture - 0.3605) <= 5e-4;
    const double dt = now_s() - t0;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "(fixture %.5f, %.2fs)", fixture, dt);
    report(1, "loss-formula oracle", ok && dt < 5.0, detail);
}

void criterion_2_gradients() {
    const double t0 = now_s();
    const double h = 1e-5;
    std::mt19937_64 rng(1002);
    int checked = 0;
    bool ok = true;
    const auto check_grad = [&](auto&& lossfn, const std::vector<double>& scores,
                                const DistanceLabels& labels, const LossConfig& cfg,
                                const std::vector<double>& grad) {
        for (size_t i = 0; i < scores.size(); ++i) {
            auto sp = scores, sm = scores;
            sp[i] += h;
            sm[i] -= h;
            const double num = (lossfn(sp, labels, cfg) - lossfn(sm, labels, cfg)) / (2 * h);
            const double denom = std::max({std::abs(num), std::abs(grad[i]), 1e-8});
            if (std::abs(grad[i] - num) / denom > 1e-4) ok = false;
        }
        ++checked;
    };
    for (int trial = 0; trial < 110; ++trial) {
        const uint32_t k1 = 2 + rng() % 7;
        LossConfig cfg;
        cfg.K1 = 1 + rng() % k1;
        cfg.lambda = 0.2 + 0.3 * (trial % 3);
        const auto scores = randn(rng, k1, 1.0);
        auto d = randn(rng, k1, 50.0);
        for (auto& x : d) x = std::abs(x) + 0.01;
        const auto labels = make_distance_labels(d);
        check_grad([](auto& s, auto& l, auto& c) { return loss_first_order(s, l, c).loss; },
                   scores, labels, cfg, loss_first_order(scores, labels, cfg).grad);
        check_grad([](auto& s, auto& l, auto& c) { return loss_second_order(s, l, c).loss; },
                   scores, labels, cfg, loss_second_order(scores, labels, cfg).grad);
        check_grad([](auto& s, auto& l, auto& c) { return loss_total(s, l, c).loss; },
                   scores, labels, cfg, loss_total(scores, labels, cfg).grad);
    }
    const double dt = now_s() - t0;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "(%d instances, %.2fs)", checked, dt);
    report(2, "gradient checks", ok && checked >= 300 && dt < 30.0, detail);
}

void criterion_3_permutation_optimality() {
    // With K1 = 1 the first-order loss depends on which score sits at the
    // nearest-distance position: the anti-monotone assignment attains the
    // minimum, every assignment with a different score there is strictly worse,
    // and assignments sharing the top score tie exactly.
    bool ok = true;
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> ud(0.1, 10.0);
    LossConfig cfg;
    cfg.K1 = 1;
    for (int fixture = 0; fixture < 50 && ok; ++fixture) {
        const uint32_t k1 = 2 + fixture % 4;  // 2..5 exhaustive
        std::vector<double> d, scores;
        for (uint32_t i = 0; i < k1; ++i) {
            d.push_back(ud(rng) + 20.0 * i);       // distinct distances
            scores.push_back(ud(rng) + 20.0 * i);  // distinct scores
        }
        const auto labels = make_distance_labels(d);
        const auto pi = distance_order(d);
        std::vector<double> sorted_scores = scores;
        std::sort(sorted_scores.begin(), sorted_scores.end(), std::greater<>());
        std::vector<double> aligned(k1);
        for (uint32_t r = 0; r < k1; ++r) aligned[pi[r]] = sorted_scores[r];
        const double best = loss_first_order(aligned, labels, cfg).loss;
        const double top = sorted_scores.front();
        std::vector<double> perm = scores;
        std::sort(perm.begin(), perm.end());
        const double eps = 1e-12 * std::max(1.0, std::abs(best));
        do {
            const double l = loss_first_order(perm, labels, cfg).loss;
            if (l < best - eps) ok = false;
            if (perm[pi[0]] != top && !(l > best + eps)) ok = false;
            if (perm[pi[0]] == top && std::abs(l - best) > eps) ok = false;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    report(3, "permutation optimality", ok);
}

void criterion_4_pair_count() {
    bool ok = true;
    for (uint32_t k1 = 1; k1 <= 20; ++k1) {
        const auto labels = make_distance_labels(std::vector<double>(k1, 1.0));
        if (labels.pairs.size() != static_cast<size_t>(k1) * (k1 - 1) / 2) ok = false;
        for (uint32_t K1 = 1; K1 <= k1; ++K1) {
            // enumerate: pairs (i, j) with sorted position i < j and i < K1
            uint32_t count = 0;
            for (uint32_t i = 0; i < K1; ++i)
                for (uint32_t j = i + 1; j < k1; ++j) ++count;
            LossConfig cfg;
            cfg.K1 = K1;
            if (cfg.k2_pairs(k1) != count) ok = false;
        }
    }
    report(4, "pair-count identity", ok);
}

void criterion_5_shift_invariance() {
    bool ok = true;
    std::mt19937_64 rng(1005);
    for (int fixture = 0; fixture < 100 && ok; ++fixture) {
        const uint32_t k1 = 2 + rng() % 7;
        LossConfig cfg;
        cfg.K1 = 1 + rng() % k1;
        const auto scores = randn(rng, k1, 2.0);
        auto d = randn(rng, k1, 100.0);
        for (auto& x : d) x = std::abs(x);
        const auto labels = make_distance_labels(d);
        const double l1 = loss_first_order(scores, labels, cfg).loss;
        const double l2 = loss_second_order(scores, labels, cfg).loss;
        for (double c : {-100.0, 3.7, 1e6}) {
            auto shifted = scores;
            for (auto& s : shifted) s += c;
            const double s1 = loss_first_order(shifted, labels, cfg).loss;
            const double s2 = loss_second_order(shifted, labels, cfg).loss;
            if (std::abs(s1 - l1) > 1e-9 * std::max(1.0, std::abs(l1))) ok = false;
            if (std::abs(s2 - l2) > 1e-9 * std::max(1.0, std::abs(l2))) ok = false;
        }
    }
    report(5, "shift invariance", ok);
}

void criterion_6_retrieval_exactness() {
    bool ok = true;
    for (uint64_t seed = 1; seed <= 50 && ok; ++seed) {
        StoreDims dims{8, 8, 16};
        VectorStore store(dims, GpsEncoder::make(8, seed));
        std::mt19937_64 rng(seed);
        std::normal_distribution<float> nd;
        std::uniform_real_distribution<double> lat(-80, 80), lon(-179, 179);
        for (uint32_t i = 0; i < 1000; ++i) {
            CandidateRecord rec;
            rec.id = "c" + std::to_string(i);
            rec.gps = GeoCoordinate(lat(rng), lon(rng));
            rec.emb_text.resize(8);
            rec.emb_img.resize(16);
            for (auto& v : rec.emb_text) v = nd(rng);
            for (auto& v : rec.emb_img) v = nd(rng);
            store.add(std::move(rec));
        }
        FeatureVector q(dims.total());
        for (auto& v : q) v = nd(rng);
        const uint32_t n = 20;
        const RetrievalResult res = store.retrieve(q, n);
        // brute force: full scan, full sort, same tie rule
        std::vector<std::pair<uint32_t, double>> all;
        for (uint32_t i = 0; i < store.size(); ++i)
            all.emplace_back(i, cosine_similarity(q, store.concat(i)));
        std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return store.record(a.first).id < store.record(b.first).id;
        });
        if (res.hits.size() != n) ok = false;
        for (uint32_t i = 0; i < n && ok; ++i) {
            if (res.hits[i].first != all[i].first) ok = false;
            if (res.hits[i].second != all[i].second) ok = false;
        }
    }
    report(6, "retrieval exactness", ok);
}

void criterion_7_geodesy() {
    bool ok = true;
    // references computed on the same mean-radius sphere (R = 6371.0088 km)
    struct Ref { GeoCoordinate a, b; double km; };
    const std::vector<Ref> refs{
        {{48.8566, 2.3522}, {51.5074, -0.1278}, 343.47},    // Paris - London
        {{40.7128, -74.0060}, {51.5074, -0.1278}, 5570.2},  // New York - London
        {{35.6895, 139.6917}, {-33.8688, 151.2093}, 7822.0},// Tokyo - Sydney
        {{-22.9068, -43.1729}, {55.7558, 37.6173}, 11553.0},// Rio - Moscow
    };
    for (const auto& r : refs) {
        const double got = geodesic_km(r.a, r.b);
        if (std::abs(got - r.km) / r.km > 0.005) ok = false;
    }
    const GeoCoordinate p(12.34, 56.78);
    if (std::abs(geodesic_km(p, p)) > 1e-6) ok = false;
    const double anti = geodesic_km({0.0, 0.0}, {0.0, 180.0});
    if (std::abs(anti - 3.14159265358979323846 * kEarthRadiusKm) > 1e-6) ok = false;
    report(7, "geodesy references", ok);
}

void criterion_8_oracle_dominance() {
    bool ok = true;
    for (uint64_t seed = 1; seed <= 20 && ok; ++seed) {
        WorldSpec spec;
        spec.seed = seed;
        spec.n_candidates = 300;
        spec.n_queries = 40;
        spec.n_clusters = 8;
        spec.dim_gps = 16;
        spec.dim_text = 8;
        spec.dim_img = 32;
        const World w = generate_world(spec);
        const fs::path dir = fs::temp_directory_path() / ("georank_acc8_" + std::to_string(seed));
        fs::remove_all(dir);
        export_world(w, dir.string());

        RunConfig cfg;
        cfg.seed = seed;
        cfg.gps_dim = spec.dim_gps;
        cfg.adapter_steps = 20;
        cfg.hidden_dims = {16};
        cfg.n_retrieved = 8;
        cfg.n_generated = 2;
        const GpsEncoder enc = cfg.make_gps_encoder();
        const VectorStore store = load_store(dir.string(), enc);
        const auto queries = load_queries(dir.string());
        const AdapterPair adapters = fit_adapters(store, cfg);
        FeatureLayout layout{spec.dim_img, cfg.gps_dim, spec.dim_text, spec.dim_img};
        const ScorerState scorer = ScorerState::make(layout, cfg.hidden_dims, seed);
        const EvalOutcome eo = run_eval(store, scorer, adapters, queries, cfg);
        for (size_t i = 0; i < eo.report.per_threshold_accuracy.size(); ++i)
            if (eo.report.per_threshold_accuracy[i] > eo.oracle.per_threshold_accuracy[i])
                ok = false;
        fs::remove_all(dir);
    }
    report(8, "oracle dominance", ok);
}

struct SeedOutcome {
    bool beats_baselines = false;
    bool near_oracle = false;
    std::vector<double> model, oracle, coarse_cmp;  // coarse_cmp: {acc@coarse lambda .7, lambda 1.0}
};

SeedOutcome run_synthetic_seed(uint64_t seed, bool with_ablation) {
    WorldSpec spec;
    spec.seed = seed;
    spec.n_candidates = 1000;
    spec.n_queries = 7000;  // 2000 train, 5000 eval per the gate
    spec.n_clusters = 50;
    spec.cluster_spread_km = 200.0;
    spec.feature_noise_sigma = 0.1;
    spec.dim_img = 16;
    spec.query_offset_km = 0.1;
    const World w = generate_world(spec);
    const fs::path dir = fs::temp_directory_path() / ("georank_acc9_" + std::to_string(seed));
    fs::remove_all(dir);
    export_world(w, dir.string());

    RunConfig cfg;
    cfg.seed = seed;
    // match the gps encoder to the world's image feature map so candidate gps
    // encodings live in the same space as query embeddings
    cfg.gps_dim = spec.dim_img;
    cfg.gps_seed = spec.seed ^ 0x9e3779b97f4a7c15ull;
    cfg.hidden_dims = {256};
    cfg.adapter_steps = 300;
    cfg.lr = 1e-2;
    cfg.epochs = 60;
    cfg.n_retrieved = 3;
    // thresholds rescaled to the world's cluster spread (spread / 200 factor)
    const double factor = spec.cluster_spread_km / 200.0;
    cfg.thresholds_km.clear();
    for (double t : {1.0, 25.0, 200.0, 750.0, 2500.0}) cfg.thresholds_km.push_back(t * factor);
    cfg.stub_noise_km = 0.05;

    const GpsEncoder enc = cfg.make_gps_encoder();
    const VectorStore store = load_store(dir.string(), enc);
    auto queries = load_queries(dir.string());
    const AdapterPair adapters = fit_adapters(store, cfg);

    std::vector<QueryRecord> train_q(queries.begin(), queries.begin() + 2000);
    std::vector<QueryRecord> eval_q(queries.begin() + 2000, queries.end());
    const auto dataset = build_dataset(store, train_q, adapters, cfg);

    FeatureLayout layout{spec.dim_img, cfg.gps_dim, spec.dim_text, spec.dim_img};
    LossConfig loss_cfg;
    loss_cfg.lambda = cfg.lambda;
    loss_cfg.K1 = cfg.K1;
    TrainOptions opt;
    opt.lr = cfg.lr;
    opt.batch = cfg.batch;
    opt.epochs = cfg.epochs;
    opt.seed = cfg.seed;
    const TrainResult tr =
        train(dataset, store, ScorerState::make(layout, cfg.hidden_dims, cfg.seed), loss_cfg, opt);
    const EvalOutcome eo = run_eval(store, tr.state, adapters, eval_q, cfg);

    SeedOutcome out;
    out.model = eo.report.per_threshold_accuracy;
    out.oracle = eo.oracle.per_threshold_accuracy;
    out.beats_baselines = true;
    for (size_t i = 0; i < out.model.size(); ++i) {
        if (out.model[i] <= eo.random_baseline.per_threshold_accuracy[i]) out.beats_baselines = false;
        if (out.model[i] <= eo.top1_baseline.per_threshold_accuracy[i]) out.beats_baselines = false;
    }
    // 200 km-analog threshold = index 2
    out.near_oracle = out.model[2] >= 0.9 * out.oracle[2];

    // criterion 10: lambda 0.7 vs 1.0 at the coarse (2500 km-analog) threshold
    if (with_ablation) {
        LossConfig first_only = loss_cfg;
        first_only.lambda = 1.0;
        const TrainResult tr1 = train(
            dataset, store, ScorerState::make(layout, cfg.hidden_dims, cfg.seed), first_only, opt);
        const EvalOutcome eo1 = run_eval(store, tr1.state, adapters, eval_q, cfg);
        out.coarse_cmp = {eo.report.per_threshold_accuracy[4], eo1.report.per_threshold_accuracy[4]};
    }

    fs::remove_all(dir);
    return out;
}

void criteria_9_and_10() {
    const double t0 = now_s();
    int pass_count = 0;
    int n_ablation = 0;
    double sum_full = 0.0, sum_first = 0.0;
    std::printf("synthetic end-to-end runs (5 seeds):\n");
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const bool with_ablation = seed <= 2;  // lambda ablation retrains on two seeds
        const SeedOutcome o = run_synthetic_seed(seed, with_ablation);
        const bool pass = o.beats_baselines && o.near_oracle;
        if (pass) ++pass_count;
        std::printf("  seed %llu: model@200km-analog %.2f%% oracle %.2f%% "
                    "beats-baselines=%s near-oracle=%s",
                    static_cast<unsigned long long>(seed), o.model[2], o.oracle[2],
                    o.beats_baselines ? "yes" : "no", o.near_oracle ? "yes" : "no");
        if (with_ablation) {
            ++n_ablation;
            sum_full += o.coarse_cmp[0];
            sum_first += o.coarse_cmp[1];
            std::printf(" | coarse full %.2f%% first-only %.2f%%", o.coarse_cmp[0],
                        o.coarse_cmp[1]);
        }
        std::printf("\n");
    }
    const double dt = now_s() - t0;
    char detail[80];
    std::snprintf(detail, sizeof(detail), "(%d/5 seeds, %.0fs)", pass_count, dt);
    report(9, "end-to-end learning", pass_count >= 3 && dt < 600.0, detail);

    std::snprintf(detail, sizeof(detail), "(mean coarse acc: full %.2f%% vs first-only %.2f%%)",
                  sum_full / n_ablation, sum_first / n_ablation);
    // soft criterion: direction logged, not gated
    std::printf("criterion 10 ranking-objective ablation   %s %s\n",
                sum_full >= sum_first ? "PASS" : "SOFT-FAIL", detail);
}

void criterion_11_determinism() {
    bool ok = true;
    const fs::path tmp = fs::temp_directory_path();

    // dataset round-trip bit-identical
    {
        WorldSpec spec;
        spec.seed = 77;
        spec.n_candidates = 150;
        spec.n_queries = 20;
        spec.n_clusters = 5;
        spec.dim_gps = 16;
        spec.dim_text = 8;
        spec.dim_img = 16;
        const World w = generate_world(spec);
        const fs::path dir = tmp / "georank_acc11";
        fs::remove_all(dir);
        export_world(w, dir.string());
        RunConfig cfg;
        cfg.gps_dim = spec.dim_gps;
        cfg.adapter_steps = 10;
        const GpsEncoder enc = cfg.make_gps_encoder();
        const VectorStore store = load_store(dir.string(), enc);
        const auto queries = load_queries(dir.string());
        const AdapterPair adapters = fit_adapters(store, cfg);
        const auto triplets = build_dataset(store, queries, adapters, cfg);
        const auto p1 = (dir / "d1.jsonl").string(), p2 = (dir / "d2.jsonl").string();
        write_dataset(triplets, p1);
        write_dataset(load_dataset(p1), p2);
        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        const std::string s1((std::istreambuf_iterator<char>(f1)), {});
        const std::string s2((std::istreambuf_iterator<char>(f2)), {});
        if (s1 != s2 || s1.empty()) ok = false;
        fs::remove_all(dir);
    }

    // checkpoint round-trip bit-identical
    {
        FeatureLayout layout{16, 16, 8, 16};
        const ScorerState s = ScorerState::make(layout, {32, 16}, 3);
        const auto path = (tmp / "georank_acc11_ckpt.bin").string();
        save_checkpoint(s, path);
        const ScorerState r = load_checkpoint(path);
        if (r.value_head_w != s.value_head_w) ok = false;
        for (size_t i = 0; i < s.weights.size(); ++i)
            if (r.weights[i].w != s.weights[i].w || r.biases[i] != s.biases[i]) ok = false;
        fs::remove(path);
    }

    // golden prompt files, byte for byte
    {
        RankingTriplet t;
        t.query_id = "q42";
        t.query_gps = GeoCoordinate(48.8566, 2.3522);
        t.ranking.push_back({"c7", GeoCoordinate(51.5074, -0.1278),
                             {{"city", "London"}, {"country", "UK"}}, 0.0});
        t.negatives.push_back({GeoCoordinate(35.6895, 139.6917),
                               {{"city", "Tokyo"}, {"country", "Japan"}}});
        t.negatives.push_back({GeoCoordinate(-33.8688, 151.2093),
                               {{"city", "Sydney"}, {"country", "Australia"}}});
        const std::string base = GEORANK_TEST_DATA_DIR;
        if (render_prompt(t, 0) != read_text_file(base + "/golden/prompt_triplet.txt")) ok = false;
        if (render_generation_prompt("q42") != read_text_file(base + "/golden/prompt_generation.txt"))
            ok = false;
    }

    // parallel == sequential chosen_index over 1000 pools
    {
        StoreDims dims{8, 4, 8};
        VectorStore store(dims, GpsEncoder::make(8, 5));
        std::mt19937_64 rng(5);
        std::normal_distribution<float> nd;
        std::uniform_real_distribution<double> lat(-80, 80), lon(-179, 179);
        for (uint32_t i = 0; i < 400; ++i) {
            CandidateRecord rec;
            rec.id = "c" + std::to_string(i);
            rec.gps = GeoCoordinate(lat(rng), lon(rng));
            rec.emb_text.resize(4);
            rec.emb_img.resize(8);
            for (auto& v : rec.emb_text) v = nd(rng);
            for (auto& v : rec.emb_img) v = nd(rng);
            store.add(std::move(rec));
        }
        FeatureLayout layout{8, 8, 4, 8};
        const ScorerState s = ScorerState::make(layout, {16}, 9);
        for (int trial = 0; trial < 1000 && ok; ++trial) {
            CandidatePool pool;
            const uint32_t n = 2 + rng() % 16;
            for (uint32_t i = 0; i < n; ++i)
                pool.retrieved.push_back(&store.record(rng() % store.size()));
            if (rng() % 2) pool.generated.push_back(GeoCoordinate(lat(rng), lon(rng)));
            FeatureVector q(8);
            for (auto& v : q) v = nd(rng);
            const Prediction a = predict(s, q, pool, {}, store.gps_encoder(), {}, 1);
            const Prediction b = predict(s, q, pool, {}, store.gps_encoder(), {}, 8);
            if (a.chosen_index != b.chosen_index || a.scores != b.scores) ok = false;
        }
    }

    report(11, "determinism & formats", ok);
}

}  // namespace

int main() {
    criterion_1_loss_oracle();
    criterion_2_gradients();
    criterion_3_permutation_optimality();
    criterion_4_pair_count();
    criterion_5_shift_invariance();
    criterion_6_retrieval_exactness();
    criterion_7_geodesy();
    criterion_8_oracle_dominance();
    criteria_9_and_10();
    criterion_11_determinism();
    if (g_failures > 0) {
        std::printf("%d criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
