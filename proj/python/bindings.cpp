#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dosskit/cli.hpp"
#include "dosskit/doss.hpp"
#include "dosskit/manifest.hpp"
#include "dosskit/metrics.hpp"
#include "dosskit/sampler.hpp"
#include "dosskit/scaling.hpp"

namespace py = pybind11;
using namespace dosskit;

namespace {

using SizeMap = std::map<std::string, std::uint64_t>;
using WeightMap = std::map<std::string, double>;

DomainSizes to_sizes(const SizeMap& in) {
  DomainSizes out;
  for (const auto& [key, n] : in) out.emplace(DomainKey::parse(key), n);
  return out;
}

template <typename Value>
std::map<std::string, Value> by_name(const std::map<DomainKey, Value>& in) {
  std::map<std::string, Value> out;
  for (const auto& [key, v] : in) out.emplace(key.str(), v);
  return out;
}

WeightPlan to_weight_plan(const WeightMap& weights) {
  WeightPlan plan;
  for (const auto& [key, w] : weights) plan.weights.emplace(DomainKey::parse(key), w);
  return plan;
}

ScoreSet to_score_set(const std::string& name, const std::vector<double>& scores,
                      const std::vector<std::string>& labels) {
  if (scores.size() != labels.size()) throw validation_error("scores and labels differ in length");
  ScoreSet set{name, {}};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto label = parse_label(labels[i]);
    if (!label) throw validation_error("label must be \"real\" or \"fake\"");
    set.entries.push_back({scores[i], *label});
  }
  return set;
}

py::dict record_dict(const SampleRecord& r) {
  py::dict d;
  d["id"] = r.id;
  d["label"] = std::string(to_string(r.label));
  d["source"] = r.source;
  if (r.generator) d["generator"] = *r.generator;
  d["dataset"] = r.dataset;
  d["duration_s"] = r.duration_s;
  d["path"] = r.path;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the dosskit dataset composition toolkit";
  m.attr("__version__") = kToolVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::io: PyErr_SetString(PyExc_OSError, e.what()); break;
        case ErrorKind::validation: PyErr_SetString(PyExc_ValueError, e.what()); break;
        case ErrorKind::computation: PyErr_SetString(PyExc_ArithmeticError, e.what()); break;
      }
    }
  });

  py::class_<DossParams>(m, "DossParams")
      .def(py::init([](std::uint64_t n_cap, double rho, double tau) {
             DossParams p{n_cap, rho, tau};
             p.validate();
             return p;
           }),
           py::arg("n_cap") = 2500, py::arg("rho") = 0.25, py::arg("tau") = 1.0)
      .def_readonly("n_cap", &DossParams::n_cap)
      .def_readonly("rho", &DossParams::rho)
      .def_readonly("tau", &DossParams::tau)
      .def("__repr__", [](const DossParams& p) {
        std::ostringstream s;
        s << "DossParams(n_cap=" << p.n_cap << ", rho=" << p.rho << ", tau=" << p.tau << ")";
        return s.str();
      });

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("a", &PowerLawFit::a)
      .def_readonly("b", &PowerLawFit::b)
      .def_readonly("r_squared", &PowerLawFit::r_squared)
      .def_readonly("n_points", &PowerLawFit::n_points)
      .def_readonly("b_stderr", &PowerLawFit::b_stderr)
      .def("predict", &PowerLawFit::predict)
      .def("__repr__", &PowerLawFit::describe);

  py::class_<MetricReport>(m, "MetricReport")
      .def_property_readonly("per_set",
                             [](const MetricReport& r) {
                               std::map<std::string, std::tuple<double, double, double>> out;
                               for (const auto& [name, s] : r.per_set) out[name] = {s.eer, s.acc, s.cde};
                               return out;
                             })
      .def_property_readonly("macro",
                             [](const MetricReport& r) {
                               return std::tuple{r.macro.eer, r.macro.acc, r.macro.cde};
                             })
      .def("to_json", &MetricReport::to_json)
      .def("to_csv", &MetricReport::to_csv);

  m.def(
      "parse_manifest",
      [](const std::string& text) {
        py::list out;
        for (const auto& r : parse_manifest_text(text)) out.append(record_dict(r));
        return out;
      },
      py::arg("text"), "Parse JSON-lines manifest text into a list of record dicts.");

  m.def(
      "domain_sizes",
      [](const std::string& text) { return by_name(index_domains(parse_manifest_text(text)).sizes()); },
      py::arg("text"), "Per-domain sample counts of a manifest, keyed \"real/<s>\" / \"fake/<s>/<g>\".");

  m.def(
      "doss_select",
      [](const SizeMap& sizes, const DossParams& params) {
        return by_name(doss_select(to_sizes(sizes), params).counts);
      },
      py::arg("sizes"), py::arg("params"));

  m.def(
      "doss_weight",
      [](const SizeMap& sizes, const DossParams& params) {
        return by_name(doss_weight(to_sizes(sizes), params).weights);
      },
      py::arg("sizes"), py::arg("params"));

  m.def(
      "domain_distribution",
      [](const WeightMap& weights) {
        const auto plan = to_weight_plan(weights);
        DomainSizes sizes;
        for (const auto& [key, w] : plan.weights) sizes.emplace(key, 1);
        const auto table = domain_distribution(plan, sizes);
        std::vector<std::tuple<std::string, std::string, double>> rows;
        for (const auto* section : {&table.real, &table.fake}) {
          for (const auto& r : *section) {
            rows.emplace_back(r.domain.str(), r.domain.is_real() ? "real" : "fake", r.probability);
          }
        }
        return rows;
      },
      py::arg("weights"), "Normalized probabilities; real rows first, each section descending.");

  m.def(
      "sample_stream",
      [](const std::string& manifest_text, const WeightMap& weights, std::uint64_t seed,
         std::uint64_t length) {
        const auto index = index_domains(parse_manifest_text(manifest_text));
        SampleStreamSpec spec{to_weight_plan(weights), seed, length};
        return sample_stream(spec, index);
      },
      py::arg("manifest_text"), py::arg("weights"), py::arg("seed"), py::arg("length"));

  m.def(
      "eer",
      [](const std::vector<double>& scores, const std::vector<std::string>& labels) {
        return eer(to_score_set("set", scores, labels));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "acc",
      [](const std::vector<double>& scores, const std::vector<std::string>& labels, double threshold) {
        return acc(to_score_set("set", scores, labels), threshold);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
  m.def("cde", &cde, py::arg("eer"), py::arg("acc"));

  m.def(
      "macro_report",
      [](const std::map<std::string, std::pair<std::vector<double>, std::vector<std::string>>>& sets,
         double threshold, bool cde_of_macro) {
        std::vector<ScoreSet> parsed;
        for (const auto& [name, data] : sets) parsed.push_back(to_score_set(name, data.first, data.second));
        return macro_report(parsed, threshold,
                            cde_of_macro ? CdeAggregation::of_macro_means : CdeAggregation::mean_of_sets);
      },
      py::arg("sets"), py::arg("threshold") = 0.5, py::arg("cde_of_macro") = false);

  m.def(
      "fit_power_law",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        if (xs.size() != ys.size()) throw validation_error("x and y differ in length");
        std::vector<CurvePoint> points;
        for (std::size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], ys[i]});
        return fit_power_law(points);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "scaling_grid",
      [](const std::string& axis) {
        const auto parsed = parse_axis(axis);
        if (!parsed) throw validation_error("axis must be source or generator");
        std::vector<std::pair<std::uint64_t, double>> out;
        for (const auto& p : scaling_grid(*parsed)) out.emplace_back(p.n_units, p.usage);
        return out;
      },
      py::arg("axis"));

  m.def(
      "build_scaling_config",
      [](const SizeMap& sizes, const std::string& axis, std::uint64_t n_units, double usage,
         std::uint64_t trials, std::uint64_t trial_seed, bool strict) {
        ScalingConfig cfg;
        const auto parsed = parse_axis(axis);
        if (!parsed) throw validation_error("axis must be source or generator");
        cfg.axis = *parsed;
        cfg.n_units = n_units;
        cfg.usage = usage;
        cfg.trials = trials;
        cfg.trial_seed = trial_seed;
        cfg.strict = strict;
        py::list out;
        for (const auto& t : build_scaling_config(cfg, to_sizes(sizes))) {
          py::dict d;
          d["trial"] = t.trial;
          d["seed"] = t.seed;
          d["units"] = t.units;
          d["counts"] = by_name(t.plan.counts);
          out.append(d);
        }
        return out;
      },
      py::arg("sizes"), py::arg("axis"), py::arg("n_units"), py::arg("usage"),
      py::arg("trials") = 3, py::arg("trial_seed") = 0, py::arg("strict") = true);

  m.def(
      "aggregate_trials",
      [](const std::string& csv) {
        const auto results = parse_trial_results(csv);
        return aggregate_trials(results).to_csv();
      },
      py::arg("csv"), "Aggregate axis,n_units,usage,trial,metric,value rows into CurveTable CSV.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), kToolName);
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return std::tuple{code, out.str(), err.str()};
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
