#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lqvrp/agent.hpp"
#include "lqvrp/bench.hpp"

namespace py = pybind11;
using namespace lqvrp;

namespace {

// dicts cross the boundary as JSON text, which keeps the C++ side the only schema
nlohmann::json from_py(const py::object& obj) {
  if (obj.is_none()) return nlohmann::json::object();
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

RoutePlan as_plan(const std::vector<std::vector<int>>& routes) { return RoutePlan{routes}; }

py::dict verdict_dict(const Verdict& v) {
  py::dict d = to_py(to_json(v));
  d["freight_cost"] = v.cost(CostWeights::freight());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Route planning with time windows and path breaks";

  py::register_exception<InstanceError>(m, "InstanceError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);
  py::register_exception<EnvError>(m, "EnvError", PyExc_ValueError);
  py::register_exception<NetError>(m, "NetError", PyExc_ValueError);
  py::register_exception<BenchError>(m, "BenchError", PyExc_RuntimeError);

  py::class_<Instance>(m, "Instance")
      .def_property_readonly("name", &Instance::name)
      .def_property_readonly("size", &Instance::size)
      .def_property_readonly("customer_count", &Instance::customer_count)
      .def_property_readonly("capacity", &Instance::capacity)
      .def_property_readonly("max_routes", &Instance::max_routes)
      .def_property_readonly("broken_edge_count", &Instance::broken_edge_count)
      .def("cost", &Instance::cost)
      .def("travel_time", &Instance::travel_time)
      .def("break_time", [](const Instance& inst, int i, int j) { return inst.edge(i, j).break_time; })
      .def("demand", [](const Instance& inst, int i) { return inst.node(i).demand; })
      .def("window", [](const Instance& inst, int i) {
        const TimeWindow& w = inst.node(i).window;
        return py::make_tuple(w.open, w.close);
      })
      .def("set_window", [](Instance& inst, int i, double a, double b) { inst.set_window(i, {a, b}); })
      .def("set_break", &Instance::set_break)
      .def("serialize", [](const Instance& inst) { return serialize(inst); })
      .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; })
      .def("__repr__", [](const Instance& inst) {
        return "<Instance " + inst.name() + " n=" + std::to_string(inst.customer_count()) + ">";
      });

  m.def("parse_vrp", [](const std::string& text) { return parse_vrp(text); }, py::arg("text"));
  m.def("deserialize", [](const std::string& text) { return deserialize(text); }, py::arg("text"));
  m.def(
      "augment",
      [](const Instance& inst, double tightness, double break_fraction, std::uint64_t seed) {
        return augment(inst, {tightness, break_fraction, seed});
      },
      py::arg("instance"), py::arg("window_tightness") = 0.25, py::arg("break_fraction") = 0.1,
      py::arg("seed") = 0);
  m.def(
      "make_synthetic", [](std::uint64_t seed, int customers) { return make_synthetic(seed, customers); },
      py::arg("seed"), py::arg("customers"));
  m.def(
      "desk_corpus", [](int count, std::uint64_t base) { return desk_corpus(count, base); },
      py::arg("count") = 10, py::arg("base_seed") = 1000);

  m.def(
      "evaluate",
      [](const Instance& inst, const std::vector<std::vector<int>>& routes, bool per_route) {
        return verdict_dict(evaluate(inst, as_plan(routes), per_route ? ClockMode::PerRoute : ClockMode::Global));
      },
      py::arg("instance"), py::arg("routes"), py::arg("per_route_clock") = false);
  m.def(
      "exact_solve",
      [](const Instance& inst, int limit, bool freight) {
        const ExactResult r =
            exact_solve(inst, limit, freight ? CostWeights::freight() : CostWeights::distance_only());
        return py::make_tuple(r.plan.routes, r.cost);
      },
      py::arg("instance"), py::arg("limit") = kDefaultOracleLimit, py::arg("freight") = false);
  m.def("gap", &gap, py::arg("plan_cost"), py::arg("optimal_cost"));
  m.def("replay_priority", &replay_priority, py::arg("td_error"), py::arg("llm"), py::arg("eps_llm") = 1.5,
        py::arg("eps_floor") = 1e-3);

  py::class_<EnvState>(m, "EnvState")
      .def_readonly("position", &EnvState::position)
      .def_readonly("remaining_capacity", &EnvState::remaining_capacity)
      .def_readonly("clock", &EnvState::clock)
      .def_readonly("routes_used", &EnvState::routes_used)
      .def_property_readonly("pending", [](const EnvState& s) {
        std::vector<int> out;
        for (size_t i = 0; i < s.pending.size(); ++i)
          if (s.pending[i]) out.push_back(static_cast<int>(i) + 1);
        return out;
      })
      .def("to_dict", [](const EnvState& s) { return to_py(to_json(s)); });

  // the env borrows its instance, so keep the Python object alive alongside it
  py::class_<Env>(m, "Env")
      .def(py::init([](const Instance& inst, bool mask_broken, bool shaping) {
             EnvConfig cfg;
             cfg.mask_broken_edges = mask_broken;
             cfg.reward.shaping = shaping;
             return Env(inst, cfg);
           }),
           py::arg("instance"), py::arg("mask_broken_edges") = true, py::arg("shaping") = true,
           py::keep_alive<1, 2>())
      .def("reset", &Env::reset)
      .def("action_space", &Env::action_space)
      .def("step", [](const Env& env, const EnvState& s, int action) {
        const StepOutcome o = env.step(s, action);
        py::dict info;
        info["distance"] = o.info.distance;
        info["dispatched"] = o.info.dispatched;
        info["arrival"] = o.info.arrival;
        info["window_violation"] = o.info.window_violation;
        info["broken_edge"] = o.info.broken_edge;
        info["deadlock"] = o.info.deadlock;
        info["shaping"] = o.info.shaping();
        info["success"] = o.success;
        return py::make_tuple(o.next, o.reward, o.done, info);
      });

  m.def(
      "train",
      [](const Instance& inst, const py::object& config, bool advisor, std::uint64_t mock_seed) {
        TrainConfig cfg = train_config_from_json(from_py(config));
        cfg.use_advisor = advisor;
        MockBackend mock(mock_seed);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(inst, cfg, advisor ? &mock : nullptr);
        }
        py::dict out;
        out["best_plan"] = r.best_plan ? py::cast(r.best_plan->routes) : py::none();
        out["best_cost"] = r.best_plan ? py::cast(r.best_cost) : py::none();
        out["best_episode"] = r.best_episode;
        out["phase_switch"] = r.phase_switch;
        out["backend_calls"] = r.backend_calls;
        py::list reports;
        for (const auto& rep : r.reports) reports.append(to_py(to_json(rep)));
        out["reports"] = reports;
        out["checkpoint"] = checkpoint_to_text(r.final_net);
        return out;
      },
      py::arg("instance"), py::arg("config") = py::none(), py::arg("advisor") = true, py::arg("mock_seed") = 0,
      "Train on one instance with the built-in mock advisor. config overlays the defaults.");

  m.def(
      "evaluate_policy",
      [](const Instance& inst, const std::string& checkpoint, int episodes) {
        const PolicyEvaluation ev = evaluate_policy(inst, checkpoint, episodes);
        py::dict out;
        out["mean_cost"] = ev.mean_cost;
        out["satisfaction_rate"] = ev.satisfaction_rate;
        out["episodes"] = ev.episodes;
        out["feasible"] = ev.feasible;
        out["last_plan"] = ev.last_plan.routes;
        return out;
      },
      py::arg("instance"), py::arg("checkpoint"), py::arg("episodes") = 1);

  m.def("default_config", [] { return to_py(to_json(TrainConfig{})); });
}
