#include "georank/dataset.hpp"

#include <cstdio>
#include <stdexcept>

namespace georank {

std::string format_coord(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

PromptTemplate PromptTemplate::default_template() {
    return {"{query image} How far is this place from latitude: {candidate latitude}, "
            "longitude: {candidate longitude}, {candidate textual descriptions}, "
            "{candidate image}? Negative examples: {negative information}."};
}

RankingTriplet build_triplet(const VectorStore& store, const RetrievalResult& result,
                             const std::string& query_id, const GeoCoordinate& query_gps,
                             uint32_t k1, uint32_t k2) {
    if (k1 == 0) throw std::invalid_argument("build_triplet: k1 must be >= 1");
    if (result.hits.size() < static_cast<size_t>(k1) + k2)
        throw std::invalid_argument("build_triplet: retrieval returned " +
                                    std::to_string(result.hits.size()) + " candidates, need k1+k2=" +
                                    std::to_string(k1 + k2));
    RankingTriplet t;
    t.query_id = query_id;
    t.query_gps = query_gps;
    for (uint32_t i = 0; i < k1; ++i) {
        const CandidateRecord& rec = store.record(result.hits[i].first);
        TripletCandidate c;
        c.id = rec.id;
        c.gps = rec.gps;
        c.text = rec.text;
        c.dist_km = geodesic_km(query_gps, rec.gps);
        t.ranking.push_back(std::move(c));
    }
    for (size_t i = result.hits.size() - k2; i < result.hits.size(); ++i) {
        const CandidateRecord& rec = store.record(result.hits[i].first);
        t.negatives.push_back({rec.gps, rec.text});
    }
    return t;
}

namespace {

std::string join_text(const std::map<std::string, std::string>& text) {
    std::string out;
    for (const auto& [k, v] : text) {
        if (!out.empty()) out += ", ";
        out += k + ": " + v;
    }
    return out;
}

std::string negative_info(const std::vector<NegativeInfo>& negs) {
    std::string out;
    for (const auto& n : negs) {
        if (!out.empty()) out += "; ";
        out += format_coord(n.gps.lat) + ", " + format_coord(n.gps.lon);
        for (const auto& [k, v] : n.text) out += ", " + v;
    }
    return out;
}

void substitute_once(std::string& s, const std::string& key, const std::string& value) {
    const size_t pos = s.find(key);
    if (pos == std::string::npos)
        throw std::invalid_argument("render_prompt: template missing placeholder " + key);
    s.replace(pos, key.size(), value);
}

}  // namespace

std::string render_prompt(const RankingTriplet& t, uint32_t candidate_index,
                          const PromptTemplate& tpl) {
    if (candidate_index >= t.ranking.size())
        throw std::out_of_range("render_prompt: candidate_index " + std::to_string(candidate_index) +
                                " out of range (k1=" + std::to_string(t.ranking.size()) + ")");
    const TripletCandidate& c = t.ranking[candidate_index];
    std::string s = tpl.template_text;
    substitute_once(s, "{query image}", "<image:" + t.query_id + ">");
    substitute_once(s, "{candidate latitude}", format_coord(c.gps.lat));
    substitute_once(s, "{candidate longitude}", format_coord(c.gps.lon));
    substitute_once(s, "{candidate textual descriptions}", join_text(c.text));
    substitute_once(s, "{candidate image}", "<image:" + c.id + ">");
    substitute_once(s, "{negative information}", negative_info(t.negatives));
    return s;
}

std::string render_generation_prompt(const std::string& query_id) {
    if (query_id.empty())
        throw std::invalid_argument("render_generation_prompt: empty query id");
    return "<image:" + query_id +
           "> Suppose you are an expert in geolocalization. You have the ability to give "
           "two number GPS coordinates given an image. Please give me the location of the "
           "given image. Your answer should be in the following JSON format without any "
           "other information: {\"latitude\": float,\"longitude\": float}.";
}

void write_dataset(const std::vector<RankingTriplet>& triplets, const std::string& path) {
    std::vector<nlohmann::json> lines;
    lines.reserve(triplets.size());
    for (const auto& t : triplets) {
        nlohmann::json j;
        j["query_id"] = t.query_id;
        j["query_gps"] = {{"lat", t.query_gps.lat}, {"lon", t.query_gps.lon}};
        auto ranking = nlohmann::json::array();
        for (const auto& c : t.ranking)
            ranking.push_back({{"id", c.id},
                               {"lat", c.gps.lat},
                               {"lon", c.gps.lon},
                               {"text", c.text},
                               {"dist_km", c.dist_km}});
        j["ranking"] = std::move(ranking);
        auto negatives = nlohmann::json::array();
        for (const auto& n : t.negatives)
            negatives.push_back({{"lat", n.gps.lat}, {"lon", n.gps.lon}, {"text", n.text}});
        j["negatives"] = std::move(negatives);
        lines.push_back(std::move(j));
    }
    write_jsonl(path, lines);
}

std::vector<RankingTriplet> load_dataset(const std::string& path) {
    const auto lines = read_jsonl(path);
    std::vector<RankingTriplet> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto& j = lines[i];
        const auto require = [&](const nlohmann::json& obj, const char* field) -> const nlohmann::json& {
            if (!obj.contains(field))
                throw std::runtime_error(path + " line " + std::to_string(i + 1) +
                                         ": missing field " + field);
            return obj.at(field);
        };
        RankingTriplet t;
        t.query_id = require(j, "query_id").get<std::string>();
        const auto& qg = require(j, "query_gps");
        t.query_gps = GeoCoordinate(require(qg, "lat").get<double>(), require(qg, "lon").get<double>());
        for (const auto& c : require(j, "ranking")) {
            TripletCandidate tc;
            tc.id = require(c, "id").get<std::string>();
            tc.gps = GeoCoordinate(require(c, "lat").get<double>(), require(c, "lon").get<double>());
            for (const auto& [k, v] : require(c, "text").items()) tc.text[k] = v.get<std::string>();
            tc.dist_km = require(c, "dist_km").get<double>();
            t.ranking.push_back(std::move(tc));
        }
        for (const auto& n : require(j, "negatives")) {
            NegativeInfo ni;
            ni.gps = GeoCoordinate(require(n, "lat").get<double>(), require(n, "lon").get<double>());
            for (const auto& [k, v] : require(n, "text").items()) ni.text[k] = v.get<std::string>();
            t.negatives.push_back(std::move(ni));
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace georank
