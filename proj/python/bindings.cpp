#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "rili/envs/environment.hpp"
#include "rili/harness/experiment.hpp"
#include "rili/harness/grad_check.hpp"
#include "rili/service/service.hpp"

namespace py = pybind11;
using namespace rili;

namespace {

harness::ExperimentConfig parse(const std::string& config_json) {
  auto cfg = harness::config_from_json(nlohmann::json::parse(config_json));
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_rili, m) {
  m.doc() = "Bindings for the rili C++ library (configs travel as JSON text)";

  // Library errors surface as ValueError (bad input) or RuntimeError.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const StructuralError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("default_config", [](const std::string& env) { return harness::to_json(harness::default_config(parse_env_kind(env))).dump(); },
        py::arg("env"));

  m.def("normalize_config", [](const std::string& config_json) { return harness::to_json(parse(config_json)).dump(); },
        py::arg("config_json"), "Validates a config and fills in every default.");

  m.def(
      "train",
      [](const std::string& config_json, std::uint64_t seed, const std::string& output_dir) {
        const auto cfg = parse(config_json);
        py::gil_scoped_release release;
        auto result = harness::train_changing_partners(cfg, seed, output_dir);
        std::vector<double> returns;
        for (const auto& r : result.rows) returns.push_back(r.ret);
        return returns;
      },
      py::arg("config_json"), py::arg("seed"), py::arg("output_dir") = "",
      "Trains one seed; returns the per-interaction returns. Writes metrics and checkpoint when output_dir is set.");

  m.def(
      "evaluate",
      [](const std::string& config_json, const std::string& checkpoint, std::vector<std::string> dynamics, int n,
         std::uint64_t seed) {
        const auto cfg = parse(config_json);
        const auto ck = nn::Checkpoint::load(checkpoint);
        if (dynamics.empty()) dynamics = cfg.pool;
        harness::EvalTable t;
        {
          py::gil_scoped_release release;
          t = harness::evaluate_per_dynamics(cfg, ck, dynamics, n, seed);
        }
        py::dict out;
        for (const auto& d : t.per_dynamics) out[py::str(d.dynamics_id)] = py::make_tuple(d.mean_cost, d.sem);
        out["average"] = py::make_tuple(t.average, t.average_sem);
        return out;
      },
      py::arg("config_json"), py::arg("checkpoint"), py::arg("dynamics") = std::vector<std::string>{},
      py::arg("n") = 100, py::arg("seed") = 0, "Mean cost +- SEM per dynamics and their average.");

  m.def(
      "gradient_checks",
      [](int instances, std::uint64_t seed) {
        py::list out;
        for (const auto& r : harness::run_gradient_checks(instances, seed)) {
          py::dict d;
          d["network"] = r.network;
          d["max_relative_error"] = r.max_relative_error;
          d["checked"] = r.checked;
          d["instances"] = r.instances;
          out.append(d);
        }
        return out;
      },
      py::arg("instances") = 32, py::arg("seed") = 0);

  m.def(
      "tower_reward",
      [](std::array<int, 4> target, std::array<int, 4> built) {
        return envs::tower_reward(TowerOrder{target}, TowerOrder{built});
      },
      py::arg("target"), py::arg("built"));

  py::class_<service::PartnerService>(m, "PartnerService")
      .def(py::init([](const std::string& config_json, const std::string& checkpoint, const std::string& journal_dir,
                       int max_interactions, bool reward_visible, std::uint64_t seed) {
             service::ServiceConfig c;
             c.experiment = parse(config_json);
             c.checkpoint = checkpoint;
             c.journal_dir = journal_dir;
             c.max_interactions = max_interactions;
             c.reward_visible = reward_visible;
             c.seed = seed;
             return std::make_unique<service::PartnerService>(std::move(c));
           }),
           py::arg("config_json"), py::arg("checkpoint"), py::arg("journal_dir") = "", py::arg("max_interactions") = 35,
           py::arg("reward_visible") = false, py::arg("seed") = 0)
      .def(
          "handle",
          [](service::PartnerService& s, const std::string& method, const std::string& path, const std::string& body) {
            const auto r = s.handle(method, path, body);
            return py::make_tuple(r.status, r.body, r.content_type);
          },
          py::arg("method"), py::arg("path"), py::arg("body") = "",
          "Routes one request; returns (status, body, content_type).")
      .def_property_readonly("active_sessions", &service::PartnerService::active_sessions);
}
