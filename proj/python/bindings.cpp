// Copyright 2026 The phylopubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phylopubo/errors.hpp"
#include "phylopubo/model.hpp"
#include "phylopubo/quantum.hpp"
#include "phylopubo/solve.hpp"
#include "phylopubo/tree.hpp"

namespace py = pybind11;
using namespace phylopubo;

namespace {

Assignment to_bits(const std::vector<int>& v) {
    Assignment a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = v[i] ? 1 : 0;
    return a;
}

py::dict solve_dict(const SolveResult& r) {
    py::dict d;
    d["best_energy"] = r.best_energy;
    d["best_assignment"] = std::vector<int>(r.best_assignment.begin(), r.best_assignment.end());
    d["ground_count"] = r.ground_count;
    d["seed"] = r.seed;
    return d;
}

py::dict run_dict(const VariationalRun& r) {
    py::dict d;
    d["final_energy"] = r.final_energy;
    d["params"] = r.params;
    d["trace"] = r.trace;
    d["most_probable"] = r.most_probable;
    d["most_probable_probability"] = r.most_probable_probability;
    d["evaluations"] = r.evaluations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "maximum-parsimony phylogeny as binary polynomial optimization";

    auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<TooManyVariablesError>(m, "TooManyVariablesError", base.ptr());
    py::register_exception<TooManyQubitsError>(m, "TooManyQubitsError", base.ptr());
    py::register_exception<EnumerationTooLargeError>(m, "EnumerationTooLargeError", base.ptr());

    py::class_<Alignment>(m, "Alignment")
        .def(py::init<std::vector<std::string>, std::vector<std::string>>(), py::arg("taxa"), py::arg("rows"))
        .def_property_readonly("taxa", &Alignment::taxa)
        .def_property_readonly("rows", &Alignment::rows)
        .def_property_readonly("num_taxa", &Alignment::num_taxa)
        .def_property_readonly("num_sites", &Alignment::num_sites);
    m.def("parse_fasta", [](const std::string& text) { return parse_fasta(text); });
    m.def("to_fasta", [](const Alignment& a) { return to_fasta(a); });

    py::class_<StepMatrix>(m, "StepMatrix")
        .def("cost", [](const StepMatrix& s, int a, int b) { return s.cost(State(a), State(b)); })
        .def("to_json", [](const StepMatrix& s) { return step_matrix_to_json(s); })
        .def_static("uniform", &StepMatrix::uniform, py::arg("c") = 1);
    m.def("default_step_matrix", &default_step_matrix);
    m.def("load_step_matrix", [](const std::string& text) { return load_step_matrix(text); });

    py::class_<UnrootedTree>(m, "Tree")
        .def("splits", &UnrootedTree::splits)
        .def("same_topology", &UnrootedTree::same_topology)
        .def("newick", [](const UnrootedTree& t, bool annotate) { return to_newick(t, annotate); },
             py::arg("annotate") = true);
    m.def("parse_newick", [](const std::string& text) { return parse_newick(text); });
    m.def("count_topologies", &count_topologies);

    m.def(
        "exact_mp",
        [](const Alignment& a, const StepMatrix& s) {
            const auto r = exact_mp(a, s);
            py::dict d;
            d["best_score"] = r.best_score;
            d["topologies_scored"] = r.topologies_scored;
            std::vector<std::string> trees;
            for (const auto& t : r.optimal) trees.push_back(to_newick(t.tree));
            d["newick"] = trees;
            return d;
        },
        py::arg("alignment"), py::arg("steps") = default_step_matrix());

    m.def("layout_counts", [](const std::string& kind, std::size_t n, std::size_t m) {
        const VariableLayout l(parse_model_kind(kind), n, m);
        py::dict d;
        d["total"] = l.total_vars();
        for (const auto& [k, v] : l.group_counts()) d[k.c_str()] = v;
        return d;
    }, py::arg("kind"), py::arg("n"), py::arg("m") = 1);

    py::class_<PuboModel>(m, "PuboModel")
        .def_property_readonly("num_vars", &PuboModel::num_vars)
        .def_property_readonly("max_degree", &PuboModel::max_degree)
        .def("num_terms", [](const PuboModel& p) { return stats(p).num_terms; })
        .def("evaluate", [](const PuboModel& p, const std::vector<int>& bits) { return evaluate(p, to_bits(bits)); })
        .def("serialize", [](const PuboModel& p) { return serialize(p); });
    m.def("parse_pubo", [](const std::string& text) { return parse_pubo(text); });

    py::class_<CompiledModel>(m, "CompiledModel")
        .def_readonly("model", &CompiledModel::model)
        .def_property_readonly("penalty", [](const CompiledModel& c) { return c.penalty.value; })
        .def_property_readonly("kind", [](const CompiledModel& c) { return std::string(to_string(c.layout.kind())); })
        .def("variable_name", [](const CompiledModel& c, VarIndex i) { return c.layout.name(i); })
        .def("decode", [](const CompiledModel& c, const std::vector<int>& bits) {
            const auto d = decode(to_bits(bits), c);
            py::dict r;
            r["feasible"] = d.feasible;
            r["raw_parsimony"] = d.raw_parsimony;
            r["ancestral_states"] = d.ancestral_states;
            r["newick"] = d.tree ? py::cast(to_newick(*d.tree)) : py::none();
            std::vector<std::string> v;
            for (const auto& x : d.violations) v.push_back(x.constraint);
            r["violations"] = v;
            return r;
        });
    m.def(
        "compile",
        [](const Alignment& a, const std::string& kind, std::int64_t penalty, const StepMatrix& s) {
            const PenaltyWeight p = penalty > 0 ? PenaltyWeight{penalty} : default_penalty(a, s);
            return compile(parse_model_kind(kind), a, s, p);
        },
        py::arg("alignment"), py::arg("kind") = "branch", py::arg("penalty") = 0,
        py::arg("steps") = default_step_matrix());

    m.def("solve_exhaustive", [](const PuboModel& p) { return solve_dict(solve_exhaustive(p)); });
    m.def(
        "solve_anneal",
        [](const PuboModel& p, std::uint64_t seed, std::size_t sweeps, std::size_t restarts) {
            std::int64_t scale = 1;
            for (const auto& t : p.terms()) scale = std::max<std::int64_t>(scale, std::abs(t.coef));
            auto sch = AnnealSchedule::defaults(p.num_vars(), scale);
            if (sweeps) sch.sweeps = sweeps;
            if (restarts) sch.restarts = restarts;
            return solve_dict(solve_anneal(p, sch, seed));
        },
        py::arg("model"), py::arg("seed") = 1, py::arg("sweeps") = 0, py::arg("restarts") = 0);

    m.def("ground_energy", [](const PuboModel& p) { return exact_ground(to_hamiltonian(p)).energy; });
    m.def(
        "qaoa",
        [](const PuboModel& p, std::size_t layers, std::uint64_t seed, std::size_t max_evals) {
            OptimizerConfig opt;
            opt.max_evals = max_evals;
            return run_dict(qaoa_run(to_hamiltonian(p), layers, opt, seed));
        },
        py::arg("model"), py::arg("layers") = 1, py::arg("seed") = 1, py::arg("max_evals") = 4000);
    m.def(
        "vqe",
        [](const PuboModel& p, std::size_t layers, std::uint64_t seed, std::size_t max_evals) {
            OptimizerConfig opt;
            opt.max_evals = max_evals;
            return run_dict(vqe_run(to_hamiltonian(p), layers, opt, seed));
        },
        py::arg("model"), py::arg("layers") = 1, py::arg("seed") = 1, py::arg("max_evals") = 4000);
}
