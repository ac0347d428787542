#include "khan/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "khan/error.hpp"
#include "khan/estimators.hpp"
#include "khan/feature_select.hpp"
#include "khan/homology.hpp"
#include "khan/io.hpp"
#include "khan/persistence.hpp"
#include "khan/simulation.hpp"

namespace khan {

namespace {

struct ModelArgs {
    std::string data;
    std::string model = "ggm";
    std::optional<double> lambda;
    double theta = 0.45;
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--data", m.data, "Sample file: CSV (n rows x d columns, no header) or .bin dump")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--model", m.model, "Estimator: ggm (debiased graphical lasso) or ising")
        ->check(CLI::IsMember({"ggm", "ising"}))
        ->capture_default_str();
    cmd->add_option("--lambda", m.lambda, "GGM penalty (default 0.5*sqrt(log d / n))");
    cmd->add_option("--theta", m.theta, "Ising threshold; edges are pairs with E[XuXv] > tanh(theta)")
        ->capture_default_str();
}

struct Estimated {
    EdgeStatistics stats;
    nlohmann::json echo;
};

Estimated estimate(const ModelArgs& m) {
    const SampleMatrix x = read_samples_file(m.data);
    Estimated e;
    e.echo = {{"data", m.data}, {"model", m.model}, {"n", x.n()}, {"d", x.d()}};
    if (m.model == "ggm") {
        GgmOptions opts;
        opts.lambda = m.lambda;
        GgmFit fit = ggm_fit(x, opts);
        e.echo["lambda"] = fit.lambda;
        e.echo["glasso_converged"] = fit.glasso_converged;
        e.echo["glasso_sweeps"] = fit.glasso_sweeps;
        e.stats = std::move(fit.stats);
    } else {
        e.echo["theta"] = m.theta;
        e.stats = ising_edge_statistics(x, m.theta);
    }
    e.echo["scenario"] = to_string(e.stats.scenario);
    return e;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

double parse_mu1(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("--mu1 must be a number or 'inf'");
    }
    if (used != s.size()) throw ConfigError("--mu1 must be a number or 'inf'");
    return v;
}

std::uint64_t default_seed() {
    if (const char* s = std::getenv("KHAN_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used == std::string(s).size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("KHAN_SEED must be a nonnegative integer");
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Graph feature and persistent homology selection with false discovery rate control", "khan"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.footer("Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical degeneracy.");

    // select
    ModelArgs sel_model;
    std::string sel_shape, sel_out;
    double sel_q = 0.0;
    std::size_t sel_cap = EnumerationOptions{}.max_candidates;
    auto* sel = app.add_subcommand("select", "Select graph features by their max edge p-value with BH control");
    add_model_flags(sel, sel_model);
    sel->add_option("--shape", sel_shape,
                    "Feature template: triangle|spider|cycle:K|clique:K|star:K|path:K|template:FILE "
                    "(FILE is a CSV edge list on vertices 0..m-1)")
        ->required();
    sel->add_option("--q", sel_q, "Target FDR level in (0,1)")->required();
    sel->add_option("--max-candidates", sel_cap, "Cap on instantiated candidates")->capture_default_str();
    sel->add_option("--out", sel_out, "Output JSON path (default: standard output)");

    // khan
    ModelArgs kh_model;
    double kh_q = 0.0, kh_mu0 = 0.0;
    int kh_k = 0;
    std::string kh_mu1 = "inf", kh_out, kh_bars;
    auto* kh = app.add_subcommand("khan", "Adaptive persistent homology selection over a filtration");
    add_model_flags(kh, kh_model);
    kh->add_option("--q", kh_q, "Target FDR level in (0,1)")->required();
    kh->add_option("--K", kh_k, "Maximum simplex dimension (>= 1)")->required();
    kh->add_option("--mu0", kh_mu0, "Lower end of the filtration range")->capture_default_str();
    kh->add_option("--mu1", kh_mu1, "Upper end of the filtration range, a number or 'inf'")->capture_default_str();
    kh->add_option("--out", kh_out, "Write the step function as JSON {mu0, mu1, steps:[{mu, rank, edges}]}");
    kh->add_option("--barcode", kh_bars, "Write the barcode as CSV birth,death,multiplicity,censored");

    // simulate
    std::string sim_config, sim_preset, sim_out, sim_csv, sim_emit, sim_truth, sim_model;
    std::vector<std::string> sim_shapes;
    std::optional<int> sim_d, sim_n, sim_reps, sim_k, sim_par;
    std::optional<double> sim_q, sim_mu0, sim_mu1, sim_lambda, sim_theta;
    std::optional<std::uint64_t> sim_seed;
    auto* sim = app.add_subcommand("simulate", "Run a synthetic FDR/power experiment");
    sim->add_option("--config", sim_config,
                    "JSON config {preset, experiment, model, design, n, q, K, mu0, mu1, reps, seed, shapes, ...}")
        ->check(CLI::ExistingFile);
    sim->add_option("--preset", sim_preset, "Design preset: table1 | table2 | homology");
    sim->add_option("--model", sim_model, "ggm or ising (for configs without a preset)");
    sim->add_option("--d", sim_d, "Dimension; table1 supports 200/250/300/350, homology 38/200");
    sim->add_option("--n", sim_n, "Samples per repetition (default 400)");
    sim->add_option("--q", sim_q, "Target FDR level (default 0.05)");
    sim->add_option("--shape", sim_shapes, "Feature template(s); repeatable");
    sim->add_option("--K", sim_k, "Maximum simplex dimension for homology experiments");
    sim->add_option("--mu0", sim_mu0, "Filtration lower end for homology experiments");
    sim->add_option("--mu1", sim_mu1, "Filtration upper end for homology experiments");
    sim->add_option("--lambda", sim_lambda, "GGM penalty");
    sim->add_option("--theta", sim_theta, "Ising threshold");
    sim->add_option("--reps", sim_reps, "Repetitions (default 1)");
    sim->add_option("--seed", sim_seed, "Base seed (default: $KHAN_SEED, else 0)");
    sim->add_option("--parallelism", sim_par, "Worker threads (default: logical cores)");
    sim->add_option("--out", sim_out, "Report JSON path (default: standard output)");
    sim->add_option("--csv", sim_csv, "Per-repetition CSV path");
    sim->add_option("--emit-sample", sim_emit,
                    "Write repetition 0's sample matrix (CSV, or binary for .bin) and skip the experiment");
    sim->add_option("--emit-truth", sim_truth, "With --emit-sample, also write the true weights as u,v,weight CSV");

    // rank
    std::string rk_edges;
    int rk_d = 0, rk_k = 0;
    bool rk_json = false;
    auto* rk = app.add_subcommand("rank", "Rank of the cycle group of an edge set's clique complex");
    rk->add_option("--edges", rk_edges, "CSV edge list u,v (header and a third column optional)")
        ->required()
        ->check(CLI::ExistingFile);
    rk->add_option("--d", rk_d, "Vertex count")->required();
    rk->add_option("--K", rk_k, "Maximum simplex dimension")->required();
    rk->add_flag("--json", rk_json, "Print JSON instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::Config);
    }

    try {
        if (*sel) {
            if (!(sel_q > 0.0 && sel_q < 1.0)) throw ConfigError("--q must lie in (0,1)");
            const FeatureShape shape = FeatureShape::parse(sel_shape);
            const Estimated est = estimate(sel_model);
            EnumerationOptions opts;
            opts.max_candidates = sel_cap;
            const SelectionResult r = select_features(est.stats, shape, sel_q, opts);
            nlohmann::json j = to_json(r);
            nlohmann::json echo = est.echo;
            echo["shape"] = shape.name();
            echo["max_candidates"] = sel_cap;
            j["config"] = echo;
            emit(sel_out, j.dump(2) + "\n", out);
            for (const auto& w : r.warnings) err << "warning: " << w << '\n';
        } else if (*kh) {
            if (!(kh_q > 0.0 && kh_q < 1.0)) throw ConfigError("--q must lie in (0,1)");
            if (kh_k < 1) throw ConfigError("--K must be at least 1");
            const double mu1 = parse_mu1(kh_mu1);
            if (!(kh_mu0 < mu1)) throw ConfigError("--mu0 must be smaller than --mu1");
            const Estimated est = estimate(kh_model);
            if (kh_k > est.stats.d - 1) throw ConfigError("--K must not exceed d-1");
            const PersistenceResult r = khan_select(est.stats, kh_mu0, mu1, kh_q, kh_k);
            if (!kh_out.empty()) {
                std::ostringstream s;
                write_persistence_json(s, r);
                auto j = nlohmann::json::parse(s.str());
                j["config"] = est.echo;
                write_text_file(kh_out, j.dump(2) + "\n");
            }
            if (!kh_bars.empty()) {
                std::ostringstream s;
                write_barcode_csv(s, barcode(r));
                write_text_file(kh_bars, s.str());
            }
            out << "jbar " << r.jbar << "\n";
            out << std::setw(24) << "mu" << std::setw(8) << "rank" << std::setw(8) << "edges" << '\n';
            const auto old = out.precision(12);
            for (const auto& s : r.steps)
                out << std::setw(24) << s.mu << std::setw(8) << s.rank << std::setw(8) << s.edges.size() << '\n';
            out.precision(old);
            for (const auto& w : r.warnings) err << "warning: " << w << '\n';
        } else if (*sim) {
            ExperimentConfig cfg;
            if (!sim_config.empty()) {
                cfg = ExperimentConfig::from_json(read_json_file(sim_config));
            } else if (!sim_preset.empty()) {
                cfg = ExperimentConfig::preset_config(sim_preset, sim_d.value_or(0));
            } else if (!sim_model.empty()) {
                nlohmann::json j{{"model", sim_model}};
                if (sim_d) j["design"] = sim_model == "ising" ? nlohmann::json{{"d", *sim_d}} : nlohmann::json::object();
                cfg = ExperimentConfig::from_json(j);
            } else {
                throw ConfigError("simulate needs --config, --preset or --model");
            }
            if (!sim_config.empty() && (!sim_preset.empty() || sim_d))
                throw ConfigError("--preset and --d cannot be combined with --config");
            cfg.parallelism = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            cfg.seed = default_seed();
            if (!sim_config.empty()) {
                const auto j = read_json_file(sim_config);
                if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
                if (j.contains("parallelism")) cfg.parallelism = j.at("parallelism").get<int>();
            }
            if (sim_n) cfg.n = *sim_n;
            if (sim_q) cfg.q = *sim_q;
            if (!sim_shapes.empty()) cfg.shapes = sim_shapes;
            if (sim_k) cfg.max_dim = *sim_k;
            if (sim_mu0) cfg.mu0 = *sim_mu0;
            if (sim_mu1) cfg.mu1 = *sim_mu1;
            if (sim_lambda) cfg.lambda = *sim_lambda;
            if (sim_theta) cfg.ising.theta = *sim_theta;
            if (sim_reps) cfg.reps = *sim_reps;
            if (sim_seed) cfg.seed = *sim_seed;
            if (sim_par) cfg.parallelism = *sim_par;
            cfg.validate();
            if (!sim_emit.empty()) {
                Rng rng(split_seed(cfg.seed, 0));
                SampleMatrix x;
                WeightedGraph truth;
                if (cfg.model == ModelKind::Ggm) {
                    const GgmModel m = gen_ggm_model(cfg.ggm, rng);
                    truth = m.truth;
                    x = sample_gaussian(m.theta, cfg.n, rng);
                } else {
                    const IsingModel m = gen_ising_forest(cfg.ising, rng);
                    truth = m.weights;
                    x = sample_ising_forest(m.weights, cfg.n, rng);
                }
                const bool binary = sim_emit.size() >= 4 && sim_emit.compare(sim_emit.size() - 4, 4, ".bin") == 0;
                std::ostringstream s(binary ? std::ios::out | std::ios::binary : std::ios::out);
                if (binary)
                    write_samples_binary(s, x);
                else
                    write_samples_csv(s, x);
                write_text_file(sim_emit, s.str());
                if (!sim_truth.empty()) {
                    std::ostringstream t;
                    write_weighted_graph_csv(t, truth);
                    write_text_file(sim_truth, t.str());
                }
                return 0;
            }
            const ExperimentReport rep = run_experiment(cfg);
            emit(sim_out, rep.to_json().dump(2) + "\n", out);
            if (!sim_csv.empty()) {
                std::ostringstream s;
                rep.write_csv(s);
                write_text_file(sim_csv, s.str());
            }
        } else if (*rk) {
            std::ifstream in(rk_edges);
            if (!in) throw ConfigError("cannot open '" + rk_edges + "'");
            int needed = 0;
            const EdgeSet e = read_edge_list_csv(in, &needed);
            if (rk_d < 2) throw ConfigError("--d must be at least 2");
            if (rk_k < 1 || rk_k > rk_d - 1) throw ConfigError("--K must satisfy 1 <= K <= d-1");
            if (needed > rk_d) throw DataError("edge list uses vertex " + std::to_string(needed - 1) + " but d = " +
                                               std::to_string(rk_d));
            const CycleRank r = cycle_rank_breakdown(e, rk_d, rk_k);
            if (rk_json) {
                auto j = to_json(r);
                j["d"] = rk_d;
                j["K"] = rk_k;
                j["edges"] = e.size();
                out << j.dump(2) << '\n';
            } else {
                out << r.total << '\n';
                for (std::size_t k = 0; k < r.per_dim.size(); ++k) out << "Z_" << k + 1 << ' ' << r.per_dim[k] << '\n';
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Config);
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return static_cast<int>(ErrorKind::Numeric);
    }
    return 0;
}

}  // namespace khan
