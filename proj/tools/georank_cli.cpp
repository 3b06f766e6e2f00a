// Operator CLI: synth | ingest | build-dataset | train | rank | eval | report | serve
//
// Exit codes: 0 success, 1 validation error, 2 IO error.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "georank/pipeline.hpp"

namespace {

using namespace georank;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig base_config() {
    RunConfig cfg;
    if (const char* env = std::getenv("GEORANK_CONFIG"); env && *env) cfg = RunConfig::load(env);
    return cfg;
}

// Missing inputs are validation errors (exit 1); read/write failures are IO (exit 2).
void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw std::invalid_argument(what + " path not set");
    if (!std::filesystem::exists(path))
        throw std::invalid_argument(what + " not found: " + path);
}

VectorStore open_store(const RunConfig& cfg) {
    require_file(cfg.store_dir + "/candidates.jsonl", "store");
    return load_store(cfg.store_dir, cfg.make_gps_encoder());
}

int cmd_synth(const RunConfig&, const WorldSpec& spec, const std::string& out_dir) {
    World w = generate_world(spec);
    export_world(w, out_dir);
    std::cout << "world: " << w.candidates.size() << " candidates, " << w.queries.size()
              << " queries -> " << out_dir << "\n";
    return 0;
}

int cmd_ingest(RunConfig cfg) {
    VectorStore store = open_store(cfg);
    require_file(cfg.store_dir + "/queries.jsonl", "queries");
    const auto queries = load_queries(cfg.store_dir);
    AdapterPair adapters = fit_adapters(store, cfg);
    const std::string out = cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin"
                                                      : cfg.adapters_path;
    save_adapters(adapters, out);
    std::cout << "store: " << store.size() << " candidates (dims gps=" << store.dims().gps
              << " text=" << store.dims().text << " img=" << store.dims().img << ")\n"
              << "queries: " << queries.size() << "\nadapters: " << out << "\n";
    return 0;
}

int cmd_build_dataset(RunConfig cfg) {
    cfg.validate();
    VectorStore store = open_store(cfg);
    const auto queries = load_queries(cfg.store_dir);
    require_file(cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin" : cfg.adapters_path,
                 "adapters");
    AdapterPair adapters = load_adapters(
        cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin" : cfg.adapters_path);
    auto triplets = build_dataset(store, queries, adapters, cfg);
    if (cfg.dataset_path.empty()) throw std::invalid_argument("dataset path not set");
    write_dataset(triplets, cfg.dataset_path);
    std::cout << "dataset: " << triplets.size() << " triplets -> " << cfg.dataset_path << "\n";
    return 0;
}

int cmd_train(RunConfig cfg) {
    cfg.validate();
    VectorStore store = open_store(cfg);
    require_file(cfg.dataset_path, "dataset");
    auto triplets = load_dataset(cfg.dataset_path);
    attach_query_embeddings(triplets, load_queries(cfg.store_dir));

    FeatureLayout layout{store.dims().img, store.dims().gps, store.dims().text, store.dims().img};
    ScorerState state = ScorerState::make(layout, cfg.hidden_dims, cfg.seed);
    LossConfig loss_cfg{cfg.lambda, cfg.K1};
    TrainOptions opt;
    opt.lr = cfg.lr;
    opt.batch = cfg.batch;
    opt.epochs = cfg.epochs;
    opt.seed = cfg.seed;
    TrainResult res = train(triplets, store, std::move(state), loss_cfg, opt, cfg.ablation);

    if (cfg.checkpoint_path.empty()) throw std::invalid_argument("checkpoint path not set");
    save_checkpoint(res.state, cfg.checkpoint_path);
    if (!cfg.loss_curve_path.empty()) write_loss_curve_csv(res.curve, cfg.loss_curve_path);
    std::cout << "trained " << res.curve.size() << " steps; first loss "
              << (res.curve.empty() ? 0.0 : res.curve.front().loss) << ", last loss "
              << (res.curve.empty() ? 0.0 : res.curve.back().loss) << "\ncheckpoint: "
              << cfg.checkpoint_path << "\n";
    return 0;
}

int cmd_rank(RunConfig cfg, const std::string& query_id) {
    cfg.validate();
    VectorStore store = open_store(cfg);
    require_file(cfg.checkpoint_path, "checkpoint");
    ScorerState scorer = load_checkpoint(cfg.checkpoint_path);
    AdapterPair adapters = load_adapters(
        cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin" : cfg.adapters_path);
    const auto queries = load_queries(cfg.store_dir);

    std::map<std::string, std::vector<GeoCoordinate>> generated;
    if (!cfg.generated_path.empty())
        for (const auto& g : load_generated(cfg.generated_path))
            generated[g.query_id].push_back(g.gps);

    for (const auto& q : queries) {
        if (!query_id.empty() && q.id != query_id) continue;
        std::vector<GeoCoordinate> gen;
        if (auto it = generated.find(q.id); it != generated.end()) gen = it->second;
        RankOutcome out = rank_query(store, scorer, adapters, q.emb_img, gen, cfg);
        nlohmann::json j = {{"query_id", q.id},
                            {"chosen", {{"lat", out.prediction.chosen.lat},
                                        {"lon", out.prediction.chosen.lon}}},
                            {"source", out.prediction.chosen_source == CandidateSource::kRetrieved
                                           ? "retrieved" : "generated"},
                            {"chosen_index", out.prediction.chosen_index},
                            {"scores", out.prediction.scores}};
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_eval(RunConfig cfg) {
    cfg.validate();
    VectorStore store = open_store(cfg);
    require_file(cfg.checkpoint_path, "checkpoint");
    ScorerState scorer = load_checkpoint(cfg.checkpoint_path);
    AdapterPair adapters = load_adapters(
        cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin" : cfg.adapters_path);
    const auto queries = load_queries(cfg.store_dir);

    EvalOutcome out = run_eval(store, scorer, adapters, queries, cfg);
    if (!cfg.report_path.empty()) {
        nlohmann::json j = out.report.to_json();
        j["oracle"] = out.oracle.to_json();
        j["baseline_random"] = out.random_baseline.to_json();
        j["baseline_top1"] = out.top1_baseline.to_json();
        write_text_file(cfg.report_path, j.dump(2) + "\n");
    }
    std::cout << "GeoRanker\n" << out.report.to_table()
              << "\nOracle (best in pool)\n" << out.oracle.to_table()
              << "\nBaseline: random\n" << out.random_baseline.to_table()
              << "\nBaseline: top-1\n" << out.top1_baseline.to_table();
    return 0;
}

int cmd_report(const std::string& report_path) {
    require_file(report_path, "report");
    const nlohmann::json j = nlohmann::json::parse(read_text_file(report_path));
    EvalReport r;
    r.thresholds_km = j.at("thresholds_km").get<std::vector<double>>();
    for (size_t i = 0; i < r.thresholds_km.size(); ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "%g", r.thresholds_km[i]);
        r.per_threshold_accuracy.push_back(j.at("per_threshold_accuracy").at(key).get<double>());
    }
    r.sample_count = j.at("sample_count").get<size_t>();
    std::cout << r.to_table();
    return 0;
}

int cmd_serve(RunConfig cfg, const std::string& host, int port) {
    cfg.validate();
    auto store = std::make_shared<VectorStore>(open_store(cfg));
    require_file(cfg.checkpoint_path, "checkpoint");
    auto scorer = std::make_shared<ScorerState>(load_checkpoint(cfg.checkpoint_path));
    auto adapters = std::make_shared<AdapterPair>(load_adapters(
        cfg.adapters_path.empty() ? cfg.store_dir + "/adapters.bin" : cfg.adapters_path));

    httplib::Server srv;
    srv.Get("/health", [=](const httplib::Request&, httplib::Response& res) {
        nlohmann::json j = {{"status", "ok"},
                            {"candidates", store->size()},
                            {"checkpoint", cfg.checkpoint_path},
                            {"dims", {{"gps", store->dims().gps},
                                      {"text", store->dims().text},
                                      {"img", store->dims().img}}}};
        res.set_content(j.dump(), "application/json");
    });
    srv.Post("/rank", [=](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error&) {
            res.status = 400;
            res.set_content(R"({"error":"body is not valid JSON"})", "application/json");
            return;
        }
        if (!body.contains("query_emb") || !body.at("query_emb").is_array()) {
            res.status = 400;
            res.set_content(R"({"error":"missing field query_emb"})", "application/json");
            return;
        }
        try {
            RunConfig rc = cfg;
            FeatureVector emb = body.at("query_emb").get<FeatureVector>();
            if (emb.size() != store->dims().img)
                throw std::invalid_argument("query_emb dim " + std::to_string(emb.size()) +
                                            " != store img dim " + std::to_string(store->dims().img));
            std::vector<GeoCoordinate> generated;
            if (body.contains("generated"))
                for (const auto& g : body.at("generated"))
                    generated.emplace_back(g.at("lat").get<double>(), g.at("lon").get<double>());
            if (body.contains("n_retrieved")) rc.n_retrieved = body.at("n_retrieved").get<uint32_t>();
            if (rc.n_retrieved == 0 && generated.empty())
                throw std::invalid_argument("empty candidate pool");

            RankOutcome out = rank_query(*store, *scorer, *adapters, emb, generated, rc);
            nlohmann::json j = {{"chosen", {{"lat", out.prediction.chosen.lat},
                                            {"lon", out.prediction.chosen.lon}}},
                                {"source", out.prediction.chosen_source == CandidateSource::kRetrieved
                                               ? "retrieved" : "generated"},
                                {"chosen_index", out.prediction.chosen_index},
                                {"scores", out.prediction.scores}};
            res.set_content(j.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 422;
            res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
        }
    });
    std::cout << "serving on " << host << ":" << port << "\n";
    srv.listen(host, port);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GeoRanker: distance-aware ranking for image geolocalization"};
    app.require_subcommand(1);

    RunConfig cfg;
    try {
        cfg = base_config();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (overrides GEORANK_CONFIG)");

    // shared flags, registered per-subcommand
    const auto add_common = [&](CLI::App* sc) {
        sc->add_option("--store", cfg.store_dir, "store directory");
        sc->add_option("--dataset", cfg.dataset_path, "dataset JSONL path");
        sc->add_option("--checkpoint", cfg.checkpoint_path, "scorer checkpoint path");
        sc->add_option("--adapters", cfg.adapters_path, "adapters file path");
        sc->add_option("--report", cfg.report_path, "eval report JSON path");
        sc->add_option("--generated", cfg.generated_path, "generated candidates JSONL");
        sc->add_option("--loss-curve", cfg.loss_curve_path, "loss curve CSV path");
        sc->add_option("-N,--n-retrieve", cfg.N, "retrieval depth for training");
        sc->add_option("--k1", cfg.k1, "ranking candidates per triplet");
        sc->add_option("--k2", cfg.k2, "negatives per triplet");
        sc->add_option("--lambda", cfg.lambda, "first-order loss weight");
        sc->add_option("--K1", cfg.K1, "top positions in first-order loss");
        sc->add_option("--lr", cfg.lr, "learning rate");
        sc->add_option("--batch", cfg.batch, "batch size");
        sc->add_option("--epochs", cfg.epochs, "epochs");
        sc->add_option("--seed", cfg.seed, "random seed");
        sc->add_option("--hidden", cfg.hidden_dims, "backbone hidden dims");
        sc->add_option("--gps-dim", cfg.gps_dim, "gps encoder output dim");
        sc->add_option("--gps-seed", cfg.gps_seed, "gps encoder seed");
        sc->add_option("--adapter-steps", cfg.adapter_steps, "adapter alignment steps");
        sc->add_option("--adapter-lr", cfg.adapter_lr, "adapter alignment learning rate");
        sc->add_option("--n-retrieved", cfg.n_retrieved, "inference retrieved pool size");
        sc->add_option("--n-generated", cfg.n_generated, "inference generated pool size");
        sc->add_option("--profile", cfg.profile, "pool preset: im2gps3k or yfcc4k");
        sc->add_option("--stub-noise-km", cfg.stub_noise_km, "stub generator noise scale");
        sc->add_option("--thresholds", cfg.thresholds_km, "evaluation thresholds (km)");
        sc->add_flag("--no-second-order", cfg.ablation.no_second_order, "ablation: drop L2");
        sc->add_flag("--no-negatives", cfg.ablation.no_negatives, "ablation: drop negatives");
        sc->add_flag("--no-text", cfg.ablation.no_text, "ablation: drop text modality");
        sc->add_flag("--no-img", cfg.ablation.no_img, "ablation: drop image modality");
        sc->add_flag("--no-generated", cfg.ablation.no_generated, "ablation: drop generated");
    };

    WorldSpec spec;
    std::string out_dir, query_id, report_path, host = "127.0.0.1";
    int port = 8080;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic world");
    synth->add_option("--seed", spec.seed, "world seed");
    synth->add_option("--candidates", spec.n_candidates, "candidate count");
    synth->add_option("--queries", spec.n_queries, "query count");
    synth->add_option("--clusters", spec.n_clusters, "cluster count");
    synth->add_option("--spread-km", spec.cluster_spread_km, "cluster spread (km)");
    synth->add_option("--noise", spec.feature_noise_sigma, "feature noise sigma");
    synth->add_option("--query-offset-km", spec.query_offset_km, "query offset scale (km)");
    synth->add_option("--dim-gps", spec.dim_gps, "gps embedding dim");
    synth->add_option("--dim-text", spec.dim_text, "text embedding dim");
    synth->add_option("--dim-img", spec.dim_img, "image embedding dim");
    synth->add_option("--out", out_dir, "output directory")->required();

    CLI::App* ingest = app.add_subcommand("ingest", "validate a store and fit adapters");
    add_common(ingest);
    ingest->add_option("dir", cfg.store_dir, "store directory (positional)");

    CLI::App* build = app.add_subcommand("build-dataset", "build ranking triplets");
    add_common(build);
    CLI::App* train_sc = app.add_subcommand("train", "train the scorer");
    add_common(train_sc);
    CLI::App* rank_sc = app.add_subcommand("rank", "rank candidates for queries");
    add_common(rank_sc);
    rank_sc->add_option("--query-id", query_id, "restrict to one query id");
    CLI::App* eval_sc = app.add_subcommand("eval", "evaluate threshold accuracies");
    add_common(eval_sc);
    CLI::App* report_sc = app.add_subcommand("report", "print a saved report as a table");
    report_sc->add_option("path", report_path, "report JSON path")->required();
    CLI::App* serve_sc = app.add_subcommand("serve", "batch-scoring HTTP endpoint");
    add_common(serve_sc);
    serve_sc->add_option("--host", host, "bind host");
    serve_sc->add_option("--port", port, "bind port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) {
            cfg = RunConfig::load(config_path);
            // re-parse so explicit flags override the config file
            app.clear();
            app.parse(argc, argv);
        }
        if (*synth) return cmd_synth(cfg, spec, out_dir);
        if (*ingest) return cmd_ingest(cfg);
        if (*build) return cmd_build_dataset(cfg);
        if (*train_sc) return cmd_train(cfg);
        if (*rank_sc) return cmd_rank(cfg, query_id);
        if (*eval_sc) return cmd_eval(cfg);
        if (*report_sc) return cmd_report(report_path);
        if (*serve_sc) return cmd_serve(cfg, host, port);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
