#include "georank/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <thread>

namespace georank {

Prediction predict(const ScorerState& state, const FeatureVector& query_emb,
                   const CandidatePool& pool, const std::vector<GeoCoordinate>& negatives,
                   const GpsEncoder& enc, const AblationFlags& flags, uint32_t n_workers) {
    std::vector<GeoCoordinate> generated = pool.generated;
    if (flags.no_generated) generated.clear();
    const size_t n_ret = pool.retrieved.size();
    const size_t n = n_ret + generated.size();
    if (n == 0) throw std::invalid_argument("predict: empty candidate pool");

    std::vector<double> scores(n);
    const auto score_one = [&](size_t i) {
        FeatureVector f;
        if (i < n_ret) {
            const CandidateRecord* rec = pool.retrieved[i];
            f = assemble_features(query_emb, rec->gps, &rec->emb_text, &rec->emb_img, negatives,
                                  enc, state.layout, flags);
        } else {
            f = assemble_features(query_emb, generated[i - n_ret], nullptr, nullptr, negatives,
                                  enc, state.layout, flags);
        }
        scores[i] = score(state, f);
    };

    if (n_workers <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) score_one(i);
    } else {
        const uint32_t workers = std::min<uint32_t>(n_workers, static_cast<uint32_t>(n));
        std::vector<std::thread> threads;
        for (uint32_t w = 0; w < workers; ++w)
            threads.emplace_back([&, w] {
                for (size_t i = w; i < n; i += workers) score_one(i);
            });
        for (auto& t : threads) t.join();
    }

    // argmax; ties: retrieved before generated, then ascending index — which is
    // exactly first occurrence in pool order
    size_t best = 0;
    for (size_t i = 1; i < n; ++i)
        if (scores[i] > scores[best]) best = i;

    Prediction p;
    p.scores = std::move(scores);
    p.chosen_index = static_cast<uint32_t>(best);
    if (best < n_ret) {
        p.chosen = pool.retrieved[best]->gps;
        p.chosen_source = CandidateSource::kRetrieved;
    } else {
        p.chosen = generated[best - n_ret];
        p.chosen_source = CandidateSource::kGenerated;
    }
    return p;
}

EvalReport evaluate(const std::vector<std::pair<Prediction, GeoCoordinate>>& predictions,
                    const ThresholdSet& t) {
    if (predictions.empty()) throw std::invalid_argument("evaluate: empty prediction list");
    EvalReport r;
    r.thresholds_km = t.thresholds_km;
    r.sample_count = predictions.size();
    r.per_sample_error_km.reserve(predictions.size());
    std::vector<size_t> within(t.thresholds_km.size(), 0);
    for (const auto& [pred, truth] : predictions) {
        const double err = geodesic_km(pred.chosen, truth);
        r.per_sample_error_km.push_back(err);
        const auto mem = within_thresholds(err, t);
        for (size_t i = 0; i < mem.size(); ++i)
            if (mem[i]) ++within[i];
    }
    for (size_t c : within)
        r.per_threshold_accuracy.push_back(100.0 * static_cast<double>(c) / predictions.size());
    return r;
}

EvalReport oracle_best_in_pool(const std::vector<CandidatePool>& pools,
                               const std::vector<GeoCoordinate>& truths, const ThresholdSet& t) {
    if (pools.size() != truths.size())
        throw std::invalid_argument("oracle_best_in_pool: pools and truths misaligned");
    if (pools.empty()) throw std::invalid_argument("oracle_best_in_pool: empty input");
    std::vector<std::pair<Prediction, GeoCoordinate>> best;
    best.reserve(pools.size());
    for (size_t s = 0; s < pools.size(); ++s) {
        if (pools[s].size() == 0) throw std::invalid_argument("oracle_best_in_pool: empty pool");
        Prediction p;
        double best_err = -1.0;
        uint32_t idx = 0;
        for (const CandidateRecord* rec : pools[s].retrieved) {
            const double err = geodesic_km(rec->gps, truths[s]);
            if (best_err < 0.0 || err < best_err) {
                best_err = err;
                p.chosen = rec->gps;
                p.chosen_source = CandidateSource::kRetrieved;
                p.chosen_index = idx;
            }
            ++idx;
        }
        for (const GeoCoordinate& g : pools[s].generated) {
            const double err = geodesic_km(g, truths[s]);
            if (best_err < 0.0 || err < best_err) {
                best_err = err;
                p.chosen = g;
                p.chosen_source = CandidateSource::kGenerated;
                p.chosen_index = idx;
            }
            ++idx;
        }
        best.emplace_back(std::move(p), truths[s]);
    }
    return evaluate(best, t);
}

Prediction baseline_random(const CandidatePool& pool, uint64_t seed) {
    const size_t n = pool.size();
    if (n == 0) throw std::invalid_argument("baseline_random: empty pool");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> dist(0, n - 1);
    const size_t pick = dist(rng);
    Prediction p;
    p.chosen_index = static_cast<uint32_t>(pick);
    if (pick < pool.retrieved.size()) {
        p.chosen = pool.retrieved[pick]->gps;
        p.chosen_source = CandidateSource::kRetrieved;
    } else {
        p.chosen = pool.generated[pick - pool.retrieved.size()];
        p.chosen_source = CandidateSource::kGenerated;
    }
    return p;
}

Prediction baseline_top1(const VectorStore& store, const RetrievalResult& result) {
    if (result.hits.empty()) throw std::invalid_argument("baseline_top1: empty retrieval result");
    Prediction p;
    p.chosen = store.record(result.hits.front().first).gps;
    p.chosen_source = CandidateSource::kRetrieved;
    p.chosen_index = 0;
    p.scores = {result.hits.front().second};
    return p;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "georank.eval_report.v1";
    j["sample_count"] = sample_count;
    auto acc = nlohmann::json::object();
    for (size_t i = 0; i < thresholds_km.size(); ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "%g", thresholds_km[i]);
        acc[key] = per_threshold_accuracy[i];
    }
    j["thresholds_km"] = thresholds_km;
    j["per_threshold_accuracy"] = acc;
    j["per_sample_error_km"] = per_sample_error_km;
    j["config"] = config_snapshot;
    return j;
}

std::string EvalReport::to_table() const {
    std::string out;
    char buf[64];
    out += "threshold_km    accuracy_%\n";
    for (size_t i = 0; i < thresholds_km.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-15.6g %9.2f\n", thresholds_km[i],
                      per_threshold_accuracy[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "samples: %zu\n", sample_count);
    out += buf;
    return out;
}

std::vector<GeneratedCandidate> load_generated(const std::string& path) {
    const auto lines = read_jsonl(path);
    std::vector<GeneratedCandidate> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto& j = lines[i];
        for (const char* f : {"query_id", "lat", "lon"})
            if (!j.contains(f))
                throw std::runtime_error(path + " line " + std::to_string(i + 1) +
                                         ": missing field " + f);
        out.push_back({j.at("query_id").get<std::string>(),
                       GeoCoordinate(j.at("lat").get<double>(), j.at("lon").get<double>())});
    }
    return out;
}

void write_generated(const std::vector<GeneratedCandidate>& gens, const std::string& path) {
    std::vector<nlohmann::json> lines;
    lines.reserve(gens.size());
    for (const auto& g : gens)
        lines.push_back({{"query_id", g.query_id}, {"lat", g.gps.lat}, {"lon", g.gps.lon}});
    write_jsonl(path, lines);
}

std::vector<GeneratedCandidate> stub_generate(const std::vector<QueryRecord>& queries,
                                              uint32_t per_query, double noise_km, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<GeneratedCandidate> out;
    out.reserve(static_cast<size_t>(per_query) * queries.size());
    constexpr double kKmPerDegLat = 111.19492664455873;  // pi * R / 180
    for (const auto& q : queries) {
        if (!q.has_gps)
            throw std::invalid_argument("stub_generate: query " + q.id + " has no ground truth");
        for (uint32_t g = 0; g < per_query; ++g) {
            const double dlat = noise(rng) * noise_km / kKmPerDegLat;
            const double coslat = std::max(0.05, std::cos(q.gps.lat * 3.14159265358979323846 / 180.0));
            const double dlon = noise(rng) * noise_km / (kKmPerDegLat * coslat);
            const double lat = std::clamp(q.gps.lat + dlat, -90.0, 90.0);
            out.push_back({q.id, GeoCoordinate(lat, q.gps.lon + dlon)});
        }
    }
    return out;
}

}  // namespace georank
