#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmabsm/cmabsm.hpp"

namespace py = pybind11;
using namespace cmabsm;

namespace {

RewardFunction parse_fn(const std::string& name) {
  ExperimentConfig cfg;
  apply_setting(cfg, "reward-fn", name, "reward_fn");
  return cfg.reward_fn;
}

Family parse_family(const std::string& name) {
  ExperimentConfig cfg;
  apply_setting(cfg, "dist", name, "dist");
  return cfg.dist;
}

PullTargetFormula parse_formula(const std::string& name) {
  ExperimentConfig cfg;
  apply_setting(cfg, "nr-formula", name, "formula");
  return cfg.nr_formula;
}

Environment make_environment(const std::string& family, const std::vector<double>& params,
                             const std::string& reward_fn, std::size_t slate_size) {
  const Family fam = parse_family(family);
  std::vector<ArmDistribution> arms;
  for (double p : params) {
    arms.push_back(fam == Family::kBernoulli ? ArmDistribution::bernoulli(p)
                                             : ArmDistribution::transformed_exponential(p));
  }
  return Environment(std::move(arms), parse_fn(reward_fn), slate_size);
}

std::vector<ArmIndex> to_list(const Action& a) { return {a.arms().begin(), a.arms().end()}; }

py::list checkpoints_to_list(const std::vector<Checkpoint>& cps) {
  py::list out;
  for (const auto& c : cps) out.append(py::make_tuple(c.t, c.cum_regret));
  return out;
}

py::dict ledger_dict(const RegretLedger& ledger) {
  py::dict d;
  d["total_pulls"] = ledger.total_pulls();
  d["cum_regret"] = ledger.cum_regret();
  d["checkpoints"] = checkpoints_to_list(ledger.checkpoints());
  return d;
}

double optimal_mean(const Environment& env) {
  return env.exact_action_mean(env.dominance_optimal_action());
}

py::dict report_dict(const ExperimentReport& report) {
  py::dict d;
  d["arm_parameters"] = report.arm_parameters;
  d["optimal_action"] = to_list(report.optimal_action);
  d["optimal_mean"] = report.optimal_mean;
  d["wall_seconds"] = report.wall_seconds;
  py::list algos;
  for (const auto& ar : report.algos) {
    py::dict a;
    a["algo"] = std::string(to_string(ar.algo));
    a["skipped"] = ar.skipped;
    a["skip_reason"] = ar.skip_reason;
    a["summary"] = summary_line(ar);
    py::list reps;
    for (const auto& rep : ar.reps) {
      py::dict r;
      r["rep"] = rep.rep;
      r["final_action"] = to_list(rep.final_action);
      r["final_gap"] = rep.final_gap;
      r["cum_regret"] = rep.cum_regret;
      r["total_pulls"] = rep.total_pulls;
      r["exploration_pulls"] = rep.exploration_pulls;
      r["checkpoints"] = checkpoints_to_list(rep.checkpoints);
      reps.append(r);
    }
    a["reps"] = reps;
    py::list curve;
    for (const auto& pt : ar.curve) curve.append(py::make_tuple(pt.t, pt.mean, pt.std));
    a["curve"] = curve;
    algos.append(a);
  }
  d["algos"] = algos;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Combinatorial bandits with sort-and-merge exploration";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<InvalidDimensions>(m, "InvalidDimensions", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<DominanceViolation>(m, "DominanceViolation", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return uniform01(r); });

  py::class_<Environment>(m, "Environment")
      .def(py::init(&make_environment), py::arg("family"), py::arg("params"), py::arg("reward_fn"),
           py::arg("slate_size"))
      .def_property_readonly("n_arms", &Environment::n_arms)
      .def_property_readonly("slate_size", &Environment::slate_size)
      .def_property_readonly("parameters",
                             [](const Environment& e) {
                               std::vector<double> out;
                               for (const auto& a : e.arms()) out.push_back(a.parameter());
                               return out;
                             })
      .def_property_readonly("arm_means",
                             [](const Environment& e) {
                               std::vector<double> out;
                               for (const auto& a : e.arms()) out.push_back(a.mean());
                               return out;
                             })
      .def("exact_action_mean",
           [](const Environment& e, const std::vector<ArmIndex>& arms) {
             return e.exact_action_mean(Action(arms, e.n_arms()));
           })
      .def("sample_action_reward",
           [](const Environment& e, const std::vector<ArmIndex>& arms, Rng& rng) {
             return e.sample_action_reward(Action(arms, e.n_arms()), rng);
           })
      .def("fsd_order",
           [](const Environment& e, std::size_t grid_points) {
             FsdReport r = e.verify_fsd_ordering(grid_points);
             if (!r.ok()) throw DominanceViolation("arms are not strictly ordered by dominance");
             return r.order;
           },
           py::arg("grid_points") = kDefaultFsdGridPoints)
      .def("optimal_action", [](const Environment& e) { return to_list(e.dominance_optimal_action()); });

  m.def("aggregate",
        [](const std::string& fn, const std::vector<double>& rewards) {
          return aggregate(parse_fn(fn), rewards, rewards.size());
        },
        py::arg("reward_fn"), py::arg("rewards"));
  m.def("compute_lambda", &compute_lambda, py::arg("n_arms"), py::arg("horizon"),
        py::arg("lipschitz") = 1.0);
  m.def("partition_groups", &partition_groups, py::arg("n_arms"), py::arg("slate_size"));
  m.def("binomial", &binomial);
  m.def("enumerate_actions",
        [](std::size_t n, std::size_t k, std::uint64_t cap) {
          const ActionTable t = enumerate_actions(n, k, cap);
          std::vector<std::vector<ArmIndex>> out;
          for (std::size_t r = 0; r < t.size(); ++r) out.emplace_back(t.row(r).begin(), t.row(r).end());
          return out;
        },
        py::arg("n_arms"), py::arg("slate_size"), py::arg("cap") = kDefaultEnumerationCap);

  m.def("best_action_exact",
        [](const Environment& env, std::uint64_t cap) {
          const BestAction b = best_action_exact(env, cap);
          return py::make_tuple(to_list(b.action), b.mean);
        },
        py::arg("env"), py::arg("cap") = kDefaultEnumerationCap);
  m.def("action_gap",
        [](const Environment& env, const std::vector<ArmIndex>& arms, std::uint64_t cap) {
          return action_gap(env, Action(arms, env.n_arms()), cap);
        },
        py::arg("env"), py::arg("action"), py::arg("cap") = kDefaultEnumerationCap);
  m.def("mc_action_mean",
        [](const Environment& env, const std::vector<ArmIndex>& arms, std::uint64_t n, Rng& rng) {
          const MonteCarloEstimate e = mc_action_mean(env, Action(arms, env.n_arms()), n, rng);
          return py::make_tuple(e.estimate, e.half_width);
        },
        py::arg("env"), py::arg("action"), py::arg("n_samples"), py::arg("rng"));
  m.def("crossover_horizon", &crossover_horizon, py::arg("n_arms"), py::arg("slate_size"));
  m.def("log_crossover_horizon", &log_crossover_horizon, py::arg("n_arms"), py::arg("slate_size"));

  m.def("run_cmab_sm",
        [](const Environment& env, std::uint64_t horizon, std::uint64_t seed, double lipschitz,
           std::uint64_t checkpoint_interval, std::optional<double> lambda_override,
           const std::string& formula) {
          RegretLedger ledger(horizon, optimal_mean(env), checkpoint_interval);
          Rng rng(seed);
          CmabSmOptions opts;
          opts.lipschitz = lipschitz;
          opts.lambda_override = lambda_override;
          opts.formula = parse_formula(formula);
          CmabSmResult r;
          {
            py::gil_scoped_release release;
            r = run_cmab_sm(env, ledger, rng, opts);
          }
          py::dict d = ledger_dict(ledger);
          d["final_action"] = to_list(r.final_action);
          d["lambda"] = r.lambda;
          d["exploration_pulls"] = r.exploration_pulls;
          d["peak_live_estimators"] = r.peak_live_estimators;
          d["horizon_exhausted"] = r.horizon_exhausted;
          return d;
        },
        py::arg("env"), py::arg("horizon"), py::arg("seed"), py::arg("lipschitz") = 1.0,
        py::arg("checkpoint_interval") = 20000, py::arg("lambda_override") = py::none(),
        py::arg("formula") = "alg5");

  m.def("run_ucb",
        [](const Environment& env, std::uint64_t horizon, std::uint64_t seed,
           std::uint64_t checkpoint_interval, std::uint64_t cap) {
          RegretLedger ledger(horizon, optimal_mean(env), checkpoint_interval);
          Rng rng(seed);
          UcbResult r;
          {
            py::gil_scoped_release release;
            r = run_ucb(env, ledger, rng, cap);
          }
          py::dict d = ledger_dict(ledger);
          d["final_action"] = to_list(r.final_action);
          d["exploration_pulls"] = r.exploration_pulls;
          d["n_actions"] = r.n_actions;
          d["survivors"] = r.survivors;
          d["rounds"] = r.rounds;
          return d;
        },
        py::arg("env"), py::arg("horizon"), py::arg("seed"), py::arg("checkpoint_interval") = 20000,
        py::arg("cap") = kDefaultEnumerationCap);

  m.def("run_experiment",
        [](const std::map<std::string, std::string>& settings,
           std::optional<std::filesystem::path> config_path, bool write) {
          std::vector<std::pair<std::string, std::string>> overrides(settings.begin(), settings.end());
          const ExperimentConfig cfg = load_config(config_path, overrides);
          ExperimentReport report;
          {
            py::gil_scoped_release release;
            report = run_experiment(cfg);
            if (write) write_csv(report, cfg.out_path);
          }
          return report_dict(report);
        },
        py::arg("settings"), py::arg("config_path") = py::none(), py::arg("write_csv") = false,
        "Runs an experiment from flag-style settings, e.g. {'n': '12', 'k': '2', 't': '100000'}.");
}
