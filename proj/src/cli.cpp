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

#include "phylopubo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phylopubo/errors.hpp"
#include "phylopubo/model.hpp"
#include "phylopubo/quantum.hpp"
#include "phylopubo/rng.hpp"
#include "phylopubo/solve.hpp"

namespace phylopubo::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class InputNotFound : public Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputNotFound("input not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string bitstring(std::span<const std::uint8_t> bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s += b ? '1' : '0';
    return s;
}

Json step_matrix_json(const StepMatrix& s) { return Json::parse(step_matrix_to_json(s)); }

// ---------------------------------------------------------------------------
// options shared by several subcommands

struct RunConfig {
    std::string command;
    std::string input;
    std::string layout_path;
    std::string model_kind = "branch";
    std::int64_t penalty = 0;  // 0: default
    std::string step_matrix_path;
    std::string method = "exhaustive";
    std::uint64_t seed = 1;
    std::size_t sweeps = 0;  // 0: default schedule
    std::size_t restarts = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::string algo = "vqe";
    std::size_t layers = 1;
    std::size_t shots = 1024;
    std::size_t tries = 1;
    std::size_t max_evals = 4000;
    std::size_t window = 0;
    std::size_t stride = 0;
    std::size_t site = 0;
    bool all_sites = true;
    std::size_t samples = 200;
    std::string out_dir;

    Json to_json() const {
        Json j;
        j["command"] = command;
        j["input"] = input;
        if (!layout_path.empty()) j["layout"] = layout_path;
        if (command == "build" || command == "verify") {
            j["model"] = model_kind;
            if (penalty > 0) j["penalty"] = penalty; else j["penalty"] = "default";
        }
        if (!step_matrix_path.empty()) j["step_matrix"] = step_matrix_path;
        if (command == "solve") {
            j["method"] = method;
            if (method == "anneal") {
                j["sweeps"] = sweeps;
                j["restarts"] = restarts;
                j["t_start"] = t_start;
                j["t_end"] = t_end;
            }
        }
        if (command == "quantum") {
            j["algo"] = algo;
            j["layers"] = layers;
            j["shots"] = shots;
            j["tries"] = tries;
            j["max_evals"] = max_evals;
        }
        if (command == "verify") j["samples"] = samples;
        j["seed"] = seed;
        if (window) {
            j["window"] = window;
            j["stride"] = stride;
        }
        if (!out_dir.empty()) j["out"] = out_dir;
        return j;
    }
};

StepMatrix resolve_step_matrix(const RunConfig& cfg) {
    if (cfg.step_matrix_path.empty()) return default_step_matrix();
    return load_step_matrix(read_file(cfg.step_matrix_path));
}

std::vector<Alignment> resolve_inputs(const RunConfig& cfg, std::ostream& err) {
    const auto a = parse_fasta(read_file(cfg.input));
    for (const auto& note : a.ingest_notes()) err << "note: " << note << "\n";
    if (cfg.window == 0) return {a};
    return window_fragments(a, cfg.window, cfg.stride ? cfg.stride : cfg.window);
}

// ---------------------------------------------------------------------------
// layout sidecar: everything needed to interpret a .pubo file

Json layout_json(const CompiledModel& cm) {
    Json j;
    j["model"] = std::string(to_string(cm.layout.kind()));
    j["n"] = cm.layout.n();
    j["m"] = cm.layout.m();
    j["total_vars"] = cm.layout.total_vars();
    Json groups;
    for (const auto& [k, v] : cm.layout.group_counts()) groups[k] = v;
    j["groups"] = groups;
    const auto st = stats(cm.model);
    j["num_terms"] = st.num_terms;
    j["terms_by_degree"] = st.by_degree;
    j["max_degree"] = st.max_degree;
    j["penalty"] = cm.penalty.value;
    j["taxa"] = cm.taxa;
    std::vector<std::string> rows(cm.taxa.size(), std::string(cm.layout.m(), '-'));
    for (std::size_t s = 0; s < cm.leaf_states.size(); ++s) {
        for (std::size_t t = 0; t < cm.taxa.size(); ++t) rows[t][s] = state_char(cm.leaf_states[s][t]);
    }
    j["rows"] = rows;
    j["step_matrix"] = step_matrix_json(cm.steps);
    return j;
}

CompiledModel load_compiled(const std::string& pubo_path, const std::string& layout_path) {
    auto model = parse_pubo(read_file(pubo_path));
    const std::string lpath =
        layout_path.empty() ? (fs::path(pubo_path).parent_path() / "layout.json").string() : layout_path;
    Json j;
    try {
        j = Json::parse(read_file(lpath));
        const Alignment a(j.at("taxa").get<std::vector<std::string>>(), j.at("rows").get<std::vector<std::string>>());
        const auto steps = load_step_matrix(j.at("step_matrix").dump());
        const auto kind = parse_model_kind(j.at("model").get<std::string>());
        auto cm = compile(kind, a, steps, {j.at("penalty").get<std::int64_t>()});
        if (model.num_vars() != cm.layout.total_vars()) {
            throw ParseError("pubo file has " + std::to_string(model.num_vars()) + " variables, layout expects " +
                             std::to_string(cm.layout.total_vars()));
        }
        cm.model = std::move(model);
        return cm;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed layout file " + lpath + ": " + e.what());
    }
}

// Exact minimum: plain scan when small enough, otherwise condition on the
// branch edge variables (the base variables then split per site).
SolveResult exact_minimum(const CompiledModel& cm) {
    const ExhaustiveOptions opt;
    if (cm.model.num_vars() <= opt.max_vars) return solve_exhaustive(cm.model, opt);
    if (cm.layout.kind() == ModelKind::Branch) {
        const auto pivot = branch_edge_variables(cm.layout);
        if (pivot.size() <= opt.max_vars) return solve_conditioned(cm.model, pivot, opt, branch_free_floor(cm));
    }
    throw TooManyVariablesError("no exact method for " + std::to_string(cm.model.num_vars()) + " variables");
}

Json decoded_json(const DecodedSolution& d) {
    Json j;
    j["feasible"] = d.feasible;
    j["raw_parsimony"] = d.raw_parsimony;
    Json v = Json::array();
    for (const auto& x : d.violations) v.push_back({{"constraint", x.constraint}, {"residual", x.residual}});
    j["violations"] = v;
    j["ancestral_states"] = d.ancestral_states;
    if (d.tree) j["newick"] = to_newick(*d.tree);
    return j;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_build(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto steps = resolve_step_matrix(cfg);
    const auto inputs = resolve_inputs(cfg, err);
    const auto kind = parse_model_kind(cfg.model_kind);
    Json report;
    report["config"] = cfg.to_json();
    Json models = Json::array();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto& a = inputs[k];
        const PenaltyWeight p = cfg.penalty > 0 ? PenaltyWeight{cfg.penalty} : default_penalty(a, steps);
        const auto cm = compile(kind, a, steps, p);
        auto lj = layout_json(cm);
        if (!cfg.out_dir.empty()) {
            fs::path dir = cfg.out_dir;
            if (inputs.size() > 1) dir /= "fragment_" + std::to_string(k);
            write_file(dir / "model.pubo", serialize(cm.model));
            write_file(dir / "layout.json", lj.dump(2) + "\n");
            lj["files"] = {(dir / "model.pubo").string(), (dir / "layout.json").string()};
        }
        models.push_back(std::move(lj));
    }
    report["models"] = models;
    out << report.dump(2) << "\n";
    return kOk;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto cm = load_compiled(cfg.input, cfg.layout_path);
    SolveResult res;
    RunConfig resolved = cfg;
    if (cfg.method == "exhaustive") {
        res = exact_minimum(cm);
    } else if (cfg.method == "anneal") {
        auto sch = AnnealSchedule::defaults(cm.model.num_vars(), cm.penalty.value);
        if (cfg.sweeps) sch.sweeps = cfg.sweeps;
        if (cfg.restarts) sch.restarts = cfg.restarts;
        if (cfg.t_start > 0) sch.t_start = cfg.t_start;
        if (cfg.t_end > 0) sch.t_end = cfg.t_end;
        resolved.sweeps = sch.sweeps;
        resolved.restarts = sch.restarts;
        resolved.t_start = sch.t_start;
        resolved.t_end = sch.t_end;
        res = solve_anneal(cm.model, sch, cfg.seed);
    } else if (cfg.method == "descend") {
        Rng rng(cfg.seed);
        Assignment start(cm.model.num_vars());
        for (auto& b : start) b = rng.coin() ? 1 : 0;
        res = descend(cm.model, start, cfg.seed);
    } else {
        throw ParseError("unknown method '" + cfg.method + "'");
    }
    err << "solve: " << cfg.method << " finished in " << std::fixed << std::setprecision(3) << res.wall_time << " s\n";

    const auto decoded = decode(res.best_assignment, cm);
    Json report;
    report["config"] = resolved.to_json();
    report["best_energy"] = res.best_energy;
    report["best_assignment"] = bitstring(res.best_assignment);
    if (res.ground_set) {
        report["ground_count"] = res.ground_count;
        report["ground_set_truncated"] = res.ground_set_truncated;
    }
    report["solution"] = decoded_json(decoded);
    if (!cfg.out_dir.empty()) {
        const fs::path dir = cfg.out_dir;
        write_file(dir / "trace.csv", trace_csv(res.trace));
        if (decoded.tree) write_file(dir / "tree.nwk", to_newick(*decoded.tree) + "\n");
        write_file(dir / "report.json", report.dump(2) + "\n");
    }
    out << report.dump(2) << "\n";
    return decoded.feasible ? kOk : kInfeasible;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto steps = resolve_step_matrix(cfg);
    const auto inputs = resolve_inputs(cfg, err);
    Json report;
    report["config"] = cfg.to_json();
    Json results = Json::array();
    for (const auto& a : inputs) {
        const auto res = exact_mp(a, steps);
        Json r;
        r["n"] = a.num_taxa();
        r["m"] = a.num_sites();
        r["best_score"] = res.best_score;
        r["topologies_scored"] = res.topologies_scored;
        r["co_optimal"] = res.optimal.size();
        Json trees = Json::array();
        for (const auto& st : res.optimal) trees.push_back(to_newick(st.tree));
        r["newick"] = trees;
        results.push_back(std::move(r));
    }
    report["results"] = results;
    if (!cfg.out_dir.empty()) write_file(fs::path(cfg.out_dir) / "oracle.json", report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return kOk;
}

int cmd_quantum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto model = parse_pubo(read_file(cfg.input));
    const auto h = to_hamiltonian(model);
    const auto ground = exact_ground(h);
    OptimizerConfig opt;
    opt.max_evals = cfg.max_evals;
    const bool qaoa = cfg.algo == "qaoa";
    if (!qaoa && cfg.algo != "vqe") throw ParseError("unknown algorithm '" + cfg.algo + "'");

    std::optional<VariationalRun> best;
    std::uint64_t best_seed = cfg.seed;
    for (std::size_t t = 0; t < std::max<std::size_t>(cfg.tries, 1); ++t) {
        const std::uint64_t seed = cfg.seed + t;
        auto run = qaoa ? qaoa_run(h, cfg.layers, opt, seed) : vqe_run(h, cfg.layers, opt, seed);
        if (!best || run.final_energy < best->final_energy) {
            best = std::move(run);
            best_seed = seed;
        }
    }
    const auto state = qaoa ? qaoa_state(h, best->params) : vqe_state(h.num_qubits(), cfg.layers, best->params);
    const auto hist = sample_state(state, cfg.shots, best_seed);

    Json report;
    report["config"] = cfg.to_json();
    report["qubits"] = h.num_qubits();
    report["exact_ground_energy"] = ground.energy;
    report["ground_states"] = ground.states.size();
    report["best_seed"] = best_seed;
    report["final_expectation"] = best->final_energy;
    report["gap"] = best->final_energy - ground.energy;
    report["evaluations"] = best->evaluations;
    report["converged"] = best->converged;
    report["parameters"] = best->params;
    report["most_probable"] = {
        {"index", best->most_probable},
        {"bits", bitstring(basis_to_assignment(best->most_probable, h.num_qubits()))},
        {"probability", best->most_probable_probability},
        {"energy", h[best->most_probable]},
    };
    const fs::path layout_path =
        cfg.layout_path.empty() ? fs::path(cfg.input).parent_path() / "layout.json" : fs::path(cfg.layout_path);
    if (fs::exists(layout_path)) {
        const auto cm = load_compiled(cfg.input, layout_path.string());
        report["solution"] = decoded_json(decode(basis_to_assignment(best->most_probable, h.num_qubits()), cm));
    } else {
        err << "note: no layout file at " << layout_path.string() << "; skipping decode\n";
    }
    Json hj;
    for (const auto& [idx, count] : hist) hj[bitstring(basis_to_assignment(idx, h.num_qubits()))] = count;
    if (!cfg.out_dir.empty()) {
        const fs::path dir = cfg.out_dir;
        write_file(dir / "trace.csv", variational_trace_csv(*best));
        write_file(dir / "histogram.json", hj.dump(2) + "\n");
        write_file(dir / "report.json", report.dump(2) + "\n");
    }
    report["histogram"] = hj;
    out << report.dump(2) << "\n";
    return kOk;
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto steps = resolve_step_matrix(cfg);
    const auto inputs = resolve_inputs(cfg, err);
    const auto& a = inputs.front();
    const PenaltyWeight p = cfg.penalty > 0 ? PenaltyWeight{cfg.penalty} : default_penalty(a, steps);
    auto cm = compile_branch(a, steps, p);
    std::vector<Check> checks;
    auto add = [&](std::string name, bool pass, std::string detail) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    };

    if (!cfg.layout_path.empty()) {
        // a user-supplied model file to audit against the alignment
        auto model = parse_pubo(read_file(cfg.layout_path));
        if (model.num_vars() != cm.layout.total_vars()) {
            add("model_arity", false, "model has " + std::to_string(model.num_vars()) + " variables, expected " +
                                          std::to_string(cm.layout.total_vars()));
        } else {
            cm.model = std::move(model);
        }
    }

    // energy identity on random assignments
    {
        Rng rng(cfg.seed);
        std::size_t bad = 0;
        std::string first;
        Assignment bits(cm.layout.total_vars());
        for (std::size_t k = 0; k < cfg.samples && cm.model.num_vars() == bits.size(); ++k) {
            for (auto& b : bits) b = rng.coin() ? 1 : 0;
            const auto lhs = evaluate(cm.model, bits);
            const auto rhs = objective_part(bits, cm) + p.value * penalty_residual(bits, cm.layout);
            if (lhs != rhs && bad++ == 0) first = "evaluate " + std::to_string(lhs) + " != " + std::to_string(rhs);
        }
        add("energy_identity", bad == 0 && cm.model.num_vars() == bits.size(),
            bad ? std::to_string(bad) + " mismatches; first: " + first : std::to_string(cfg.samples) + " samples");
    }

    const auto oracle = exact_mp(a, steps);
    add("oracle", true, "exact parsimony score " + std::to_string(oracle.best_score) + " over " +
                            std::to_string(oracle.topologies_scored) + " topologies");

    std::optional<SolveResult> ground;
    try {
        ground = exact_minimum(cm);
        add("branch_ground_equals_oracle", ground->best_energy == oracle.best_score,
            "ground " + std::to_string(ground->best_energy) + " vs oracle " + std::to_string(oracle.best_score));
    } catch (const TooManyVariablesError&) {
        auto sch = AnnealSchedule::defaults(cm.model.num_vars(), p.value);
        ground = solve_anneal(cm.model, sch, cfg.seed);
        add("branch_ground_equals_oracle", ground->best_energy == oracle.best_score,
            "annealed " + std::to_string(ground->best_energy) + " vs oracle " + std::to_string(oracle.best_score));
    }
    const auto decoded = decode(ground->best_assignment, cm);
    add("ground_state_feasible", decoded.feasible,
        decoded.feasible ? to_newick(*decoded.tree) : std::to_string(decoded.violations.size()) + " violations");
    if (decoded.feasible) {
        const auto table = compress_patterns(a);
        const auto rescored = parsimony_score(*decoded.tree, table, steps);
        add("decoded_tree_is_optimal", rescored == oracle.best_score && decoded.raw_parsimony == ground->best_energy,
            "Sankoff rescore " + std::to_string(rescored) + ", decoded cost " + std::to_string(decoded.raw_parsimony));
    }

    if (cm.model.num_vars() <= 20) {
        const auto h = to_hamiltonian(cm.model);
        const auto g = exact_ground(h);
        add("hamiltonian_ground_equals_oracle", g.energy == static_cast<double>(oracle.best_score),
            "E0 " + std::to_string(g.energy));
    }

    if (a.num_sites() == 1 && a.num_taxa() == 3) {
        for (auto kind : {ModelKind::Depth, ModelKind::Position}) {
            const auto other = compile(kind, a, steps, p);
            const auto r = solve_exhaustive(other.model);
            add(std::string(to_string(kind)) + "_ground_equals_branch", r.best_energy == ground->best_energy,
                std::to_string(r.best_energy) + " vs " + std::to_string(ground->best_energy));
        }
    }

    bool all = true;
    Json report;
    report["config"] = cfg.to_json();
    Json rows = Json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        rows.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        err << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(34) << c.name << c.detail << "\n";
    }
    report["checks"] = rows;
    report["all_pass"] = all;
    if (!cfg.out_dir.empty()) write_file(fs::path(cfg.out_dir) / "verify.json", report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return all ? kOk : kCheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maximum-parsimony trees from binary polynomial models"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out_dir, "output directory");
    };
    auto add_windows = [&](CLI::App* sub) {
        sub->add_option("--window", cfg.window, "sliding-window length in sites");
        sub->add_option("--stride", cfg.stride, "sliding-window stride (default: window)");
        sub->add_option("--step-matrix", cfg.step_matrix_path, "step-matrix JSON config");
    };

    auto* build = app.add_subcommand("build", "compile a FASTA alignment into a .pubo model");
    build->add_option("fasta", cfg.input, "aligned FASTA")->required();
    build->add_option("--model", cfg.model_kind, "branch, depth or position")
        ->check(CLI::IsMember({"branch", "depth", "position"}));
    build->add_option("--penalty", cfg.penalty, "penalty weight (default: 1 + (2n-3) m max S)");
    add_windows(build);
    add_common(build);

    auto* solve = app.add_subcommand("solve", "find a low-energy assignment of a .pubo model");
    solve->add_option("pubo", cfg.input, "model file")->required();
    solve->add_option("--layout", cfg.layout_path, "layout.json (default: next to the model)");
    solve->add_option("--method", cfg.method, "exhaustive, anneal or descend")
        ->check(CLI::IsMember({"exhaustive", "anneal", "descend"}));
    solve->add_option("--sweeps", cfg.sweeps, "anneal sweeps");
    solve->add_option("--restarts", cfg.restarts, "anneal restarts");
    solve->add_option("--t-start", cfg.t_start, "anneal start temperature");
    solve->add_option("--t-end", cfg.t_end, "anneal end temperature");
    add_common(solve);

    auto* oracle = app.add_subcommand("oracle", "exact maximum parsimony by topology enumeration");
    oracle->add_option("fasta", cfg.input, "aligned FASTA")->required();
    add_windows(oracle);
    add_common(oracle);

    auto* quantum = app.add_subcommand("quantum", "QAOA or VQE on the model Hamiltonian");
    quantum->add_option("pubo", cfg.input, "model file")->required();
    quantum->add_option("--layout", cfg.layout_path, "layout.json (default: next to the model)");
    quantum->add_option("--algo", cfg.algo, "qaoa or vqe")->check(CLI::IsMember({"qaoa", "vqe"}));
    quantum->add_option("--layers", cfg.layers, "circuit layers p");
    quantum->add_option("--shots", cfg.shots, "readout shots");
    quantum->add_option("--tries", cfg.tries, "independent seeds (seed, seed+1, ...); best is reported");
    quantum->add_option("--max-evals", cfg.max_evals, "optimizer evaluation budget per try");
    add_common(quantum);

    auto* verify = app.add_subcommand("verify", "cross-check oracle, model ground state and Hamiltonian");
    verify->add_option("fasta", cfg.input, "aligned FASTA")->required();
    verify->add_option("--pubo", cfg.layout_path, "audit this model file instead of a fresh compile");
    verify->add_option("--penalty", cfg.penalty, "penalty weight");
    verify->add_option("--samples", cfg.samples, "random assignments for the energy identity");
    add_windows(verify);
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        if (cfg.command == "build") return cmd_build(cfg, out, err);
        if (cfg.command == "solve") return cmd_solve(cfg, out, err);
        if (cfg.command == "oracle") return cmd_oracle(cfg, out, err);
        if (cfg.command == "quantum") return cmd_quantum(cfg, out, err);
        if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    } catch (const InputNotFound& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const EnumerationTooLargeError& e) {
        err << "error: " << e.what() << "\n";
        return kSizeBound;
    } catch (const TooManyVariablesError& e) {
        err << "error: " << e.what() << "\n";
        return kSizeBound;
    } catch (const BigCountError& e) {
        err << "error: " << e.what() << "\n";
        return kSizeBound;
    } catch (const TooManyQubitsError& e) {
        err << "error: " << e.what() << "\n";
        return kQubitBound;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace phylopubo::cli
