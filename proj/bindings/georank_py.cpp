#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "georank/pipeline.hpp"

namespace py = pybind11;
using namespace georank;

PYBIND11_MODULE(_georank, m) {
    m.doc() = "Distance-aware ranking engine for image geolocalization";

    py::class_<GeoCoordinate>(m, "GeoCoordinate")
        .def(py::init<double, double>(), py::arg("lat"), py::arg("lon"))
        .def_readonly("lat", &GeoCoordinate::lat)
        .def_readonly("lon", &GeoCoordinate::lon)
        .def("__repr__", [](const GeoCoordinate& g) {
            return "GeoCoordinate(" + std::to_string(g.lat) + ", " + std::to_string(g.lon) + ")";
        });

    m.def("geodesic_km", &geodesic_km, py::arg("a"), py::arg("b"),
          "Great-circle distance in km on the mean-radius sphere");

    py::class_<ThresholdSet>(m, "ThresholdSet")
        .def(py::init<>())
        .def(py::init<std::vector<double>>(), py::arg("thresholds_km"))
        .def_readonly("thresholds_km", &ThresholdSet::thresholds_km)
        .def("scaled", &ThresholdSet::scaled, py::arg("factor"));

    m.def("within_thresholds", &within_thresholds, py::arg("err_km"), py::arg("thresholds"));

    py::class_<GpsEncoder>(m, "GpsEncoder")
        .def_static("make", &GpsEncoder::make, py::arg("out_dim"), py::arg("seed"),
                    py::arg("frequencies") = GpsEncoder::default_frequencies())
        .def("encode", &GpsEncoder::encode, py::arg("coord"))
        .def_readonly("out_dim", &GpsEncoder::out_dim);

    py::class_<CandidateRecord>(m, "CandidateRecord")
        .def(py::init<>())
        .def_readwrite("id", &CandidateRecord::id)
        .def_readwrite("gps", &CandidateRecord::gps)
        .def_readwrite("text", &CandidateRecord::text)
        .def_readwrite("emb_text", &CandidateRecord::emb_text)
        .def_readwrite("emb_img", &CandidateRecord::emb_img)
        .def_readwrite("emb_gps", &CandidateRecord::emb_gps);

    py::class_<RetrievalResult>(m, "RetrievalResult")
        .def_readonly("hits", &RetrievalResult::hits);

    py::class_<StoreDims>(m, "StoreDims")
        .def(py::init([](uint32_t gps, uint32_t text, uint32_t img) {
                 return StoreDims{gps, text, img};
             }),
             py::arg("gps"), py::arg("text"), py::arg("img"))
        .def_readonly("gps", &StoreDims::gps)
        .def_readonly("text", &StoreDims::text)
        .def_readonly("img", &StoreDims::img);

    py::class_<VectorStore>(m, "VectorStore")
        .def(py::init<StoreDims, GpsEncoder>(), py::arg("dims"), py::arg("gps_encoder"))
        .def("add", &VectorStore::add, py::arg("record"))
        .def("__len__", &VectorStore::size)
        .def("record", &VectorStore::record, py::return_value_policy::reference_internal)
        .def("retrieve", &VectorStore::retrieve, py::arg("query"), py::arg("n"));

    m.def("cosine_similarity", &cosine_similarity);
    m.def("load_store", &load_store, py::arg("dir"), py::arg("gps_encoder"));

    // losses operate on plain lists of scores and distances
    m.def(
        "loss_first_order",
        [](const std::vector<double>& scores, const std::vector<double>& dists, double lam,
           uint32_t K1) {
            LossGrad l = loss_first_order(scores, make_distance_labels(dists), {lam, K1});
            return py::make_tuple(l.loss, l.grad);
        },
        py::arg("scores"), py::arg("distances_km"), py::arg("lambda_") = 0.7, py::arg("K1") = 1);
    m.def(
        "loss_second_order",
        [](const std::vector<double>& scores, const std::vector<double>& dists, double lam,
           uint32_t K1) {
            LossGrad l = loss_second_order(scores, make_distance_labels(dists), {lam, K1});
            return py::make_tuple(l.loss, l.grad);
        },
        py::arg("scores"), py::arg("distances_km"), py::arg("lambda_") = 0.7, py::arg("K1") = 1);
    m.def(
        "loss_total",
        [](const std::vector<double>& scores, const std::vector<double>& dists, double lam,
           uint32_t K1) {
            TotalLoss l = loss_total(scores, make_distance_labels(dists), {lam, K1});
            return py::make_tuple(l.loss, l.loss1, l.loss2, l.grad);
        },
        py::arg("scores"), py::arg("distances_km"), py::arg("lambda_") = 0.7, py::arg("K1") = 1);

    py::class_<WorldSpec>(m, "WorldSpec")
        .def(py::init<>())
        .def_readwrite("seed", &WorldSpec::seed)
        .def_readwrite("n_candidates", &WorldSpec::n_candidates)
        .def_readwrite("n_queries", &WorldSpec::n_queries)
        .def_readwrite("n_clusters", &WorldSpec::n_clusters)
        .def_readwrite("cluster_spread_km", &WorldSpec::cluster_spread_km)
        .def_readwrite("feature_noise_sigma", &WorldSpec::feature_noise_sigma)
        .def_readwrite("query_offset_km", &WorldSpec::query_offset_km);

    py::class_<World>(m, "World")
        .def_readonly("candidates", &World::candidates)
        .def_readonly("queries", &World::queries);

    py::class_<QueryRecord>(m, "QueryRecord")
        .def_readonly("id", &QueryRecord::id)
        .def_readonly("gps", &QueryRecord::gps)
        .def_readonly("emb_img", &QueryRecord::emb_img);

    m.def("generate_world", &generate_world, py::arg("spec"));
    m.def("export_world", &export_world, py::arg("world"), py::arg("dir"));

    m.def("render_generation_prompt", &render_generation_prompt, py::arg("query_id"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("thresholds_km", &EvalReport::thresholds_km)
        .def_readonly("per_threshold_accuracy", &EvalReport::per_threshold_accuracy)
        .def_readonly("per_sample_error_km", &EvalReport::per_sample_error_km)
        .def_readonly("sample_count", &EvalReport::sample_count)
        .def("to_table", &EvalReport::to_table);

    py::class_<ScorerState>(m, "ScorerState")
        .def_static("load", &load_checkpoint, py::arg("path"))
        .def("save", [](const ScorerState& s, const std::string& p) { save_checkpoint(s, p); });

    m.def("score", &score, py::arg("state"), py::arg("features"));
}
