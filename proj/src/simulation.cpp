#include "khan/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "khan/error.hpp"
#include "khan/persistence.hpp"

namespace khan {

namespace {

std::vector<Edge> missing_pairs(int base, int size, const std::vector<Edge>& present) {
    std::vector<Edge> out;
    for (int a = 0; a < size; ++a)
        for (int b = a + 1; b < size; ++b) {
            const Edge e(base + a, base + b);
            if (std::find(present.begin(), present.end(), e) == present.end()) out.push_back(e);
        }
    return out;
}

std::vector<Edge> cycle_edges(int base, int size) {
    std::vector<Edge> out;
    for (int i = 0; i < size; ++i) out.emplace_back(base + i, base + (i + 1) % size);
    return out;
}

std::vector<Edge> clique_edges(int base, int size) {
    std::vector<Edge> out;
    for (int a = 0; a < size; ++a)
        for (int b = a + 1; b < size; ++b) out.emplace_back(base + a, base + b);
    return out;
}

void add_chords(std::vector<Edge>& edges, int base, int size, int count, Rng& rng) {
    auto missing = missing_pairs(base, size, edges);
    for (int c = 0; c < count && !missing.empty(); ++c) {
        const auto pick = rng.uniform_int(missing.size());
        edges.push_back(missing[pick]);
        missing.erase(missing.begin() + static_cast<std::ptrdiff_t>(pick));
    }
}

std::vector<Edge> prufer_tree(int m, Rng& rng) {
    if (m == 1) return {};
    if (m == 2) return {Edge(0, 1)};
    std::vector<int> code(static_cast<std::size_t>(m - 2));
    for (auto& c : code) c = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m)));
    std::vector<int> degree(static_cast<std::size_t>(m), 1);
    for (int c : code) ++degree[c];
    std::vector<Edge> edges;
    for (int c : code) {
        int leaf = 0;
        while (degree[leaf] != 1) ++leaf;
        edges.emplace_back(leaf, c);
        --degree[leaf];
        --degree[c];
    }
    int a = -1, b = -1;
    for (int v = 0; v < m; ++v)
        if (degree[v] == 1) (a < 0 ? a : b) = v;
    edges.emplace_back(a, b);
    return edges;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

template <class Fn>
std::vector<RepResult> run_reps(const ExperimentConfig& cfg, Fn&& one) {
    std::vector<RepResult> out(static_cast<std::size_t>(cfg.reps));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= out.size()) return;
            try {
                out[i] = one(cfg, i);
            } catch (const std::exception& ex) {
                out[i] = RepResult{};
                out[i].index = i;
                out[i].seed = split_seed(cfg.seed, i);
                out[i].ok = false;
                out[i].error = ex.what();
            }
        }
    };
    const int threads = std::max(1, std::min(cfg.parallelism, cfg.reps));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

GgmModel build_ggm(const GgmDesign& design, const std::vector<Edge>& edges, Rng& rng) {
    const int d = design.d();
    Eigen::MatrixXd off = Eigen::MatrixXd::Zero(d, d);
    for (const auto& e : edges) {
        const double w = rng.uniform(design.weight_low, design.weight_high);
        off(e.u, e.v) = w;
        off(e.v, e.u) = w;
    }
    GgmModel m;
    m.truth = WeightedGraph(off);
    m.support = EdgeSet(edges);
    const double lmin = d > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(off, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .minCoeff()
                              : 0.0;
    m.theta = off;
    m.theta.diagonal().setConstant(std::abs(lmin) + design.diag_pad);
    return m;
}

}  // namespace

GgmDesign GgmDesign::table1(int m1, int m2, int m3) {
    GgmDesign g;
    g.flavor = GgmFlavor::Table1;
    g.m1 = m1;
    g.m2 = m2;
    g.m3 = m3;
    return g;
}

GgmDesign GgmDesign::homology(int m1, int m2, int m3) {
    GgmDesign g;
    g.flavor = GgmFlavor::Homology;
    g.m1 = m1;
    g.m2 = m2;
    g.m3 = m3;
    g.weight_low = 0.0;
    g.weight_high = 10.0;
    g.diag_pad = 0.25;
    g.edge_drop = 0.1;
    return g;
}

GgmModel gen_ggm_model(const GgmDesign& design, Rng& rng) {
    if (design.m1 < 0 || design.m2 < 0 || design.m3 < 0 || design.d() < 2)
        throw ConfigError("GGM design needs nonnegative block counts and d >= 2");
    if (!(design.weight_low <= design.weight_high)) throw ConfigError("weight range is empty");
    std::vector<Edge> edges;
    int base = 0;
    const bool cliques = design.flavor == GgmFlavor::Homology;
    for (int i = 0; i < design.m1; ++i, base += 3) {
        auto e = cycle_edges(base, 3);
        edges.insert(edges.end(), e.begin(), e.end());
    }
    for (int i = 0; i < design.m2; ++i, base += 4) {
        std::vector<Edge> e;
        if (cliques) {
            e = clique_edges(base, 4);
        } else {
            e = cycle_edges(base, 4);
            add_chords(e, base, 4, 1, rng);
        }
        edges.insert(edges.end(), e.begin(), e.end());
    }
    for (int i = 0; i < design.m3; ++i, base += 5) {
        std::vector<Edge> e;
        if (cliques) {
            for (const auto& x : clique_edges(base, 5))
                if (!rng.bernoulli(design.edge_drop)) e.push_back(x);
        } else {
            e = cycle_edges(base, 5);
            add_chords(e, base, 5, 3, rng);
        }
        edges.insert(edges.end(), e.begin(), e.end());
    }
    return build_ggm(design, edges, rng);
}

SampleMatrix sample_gaussian(const Eigen::MatrixXd& theta, int n, Rng& rng) {
    if (n < 1) throw ConfigError("sample size must be positive");
    const Eigen::Index d = theta.rows();
    Eigen::LLT<Eigen::MatrixXd> lt(theta);
    if (lt.info() != Eigen::Success) throw CholeskyFailure();
    Eigen::MatrixXd sigma = lt.solve(Eigen::MatrixXd::Identity(d, d));
    sigma = (sigma + sigma.transpose()) / 2.0;
    Eigen::LLT<Eigen::MatrixXd> ls(sigma);
    if (ls.info() != Eigen::Success) throw CholeskyFailure();
    const Eigen::MatrixXd l = ls.matrixL();
    Eigen::MatrixXd z(n, d);
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
    SampleMatrix x;
    x.data = z * l.transpose();
    return x;
}

IsingDesign IsingDesign::table2(int d) {
    IsingDesign g;
    g.d = d;
    return g;
}

IsingModel gen_ising_forest(const IsingDesign& design, Rng& rng) {
    if (design.d < 2) throw ConfigError("Ising design needs d >= 2");
    if (design.size_low < 2 || design.size_high < design.size_low)
        throw ConfigError("tree sizes must satisfy 2 <= low <= high");
    for (const auto& t : design.templates)
        if (t.edges().size() + 1 != static_cast<std::size_t>(t.vertex_count()) || !t.connected())
            throw ConfigError("tree template '" + t.name() + "' is not a tree");
    std::vector<Edge> edges;
    int base = 0;
    std::size_t next_template = 0;
    for (;;) {
        std::vector<Edge> tree;
        int m;
        if (design.templates.empty()) {
            m = design.size_low +
                static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(design.size_high - design.size_low + 1)));
            if (design.d - base < m) break;
            tree = prufer_tree(m, rng);
        } else {
            const auto& t = design.templates[next_template++ % design.templates.size()];
            m = t.vertex_count();
            if (design.d - base < m) break;
            tree = t.edges().edges();
        }
        for (const auto& e : tree) edges.emplace_back(base + e.u, base + e.v);
        base += m;
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(design.d, design.d);
    for (const auto& e : edges) {
        const double x = rng.uniform(design.weight_low, design.weight_high);
        w(e.u, e.v) = x;
        w(e.v, e.u) = x;
    }
    return {WeightedGraph(w), EdgeSet(edges)};
}

SampleMatrix sample_ising_forest(const WeightedGraph& weights, int n, Rng& rng) {
    if (n < 1) throw ConfigError("sample size must be positive");
    const int d = weights.d();
    std::vector<std::vector<std::pair<int, double>>> nbrs(static_cast<std::size_t>(d));
    std::vector<int> parent(static_cast<std::size_t>(d));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : weights.support()) {
        const int a = find(e.u), b = find(e.v);
        if (a == b) throw NotAForest();
        parent[a] = b;
        const double w = weights.weight(e.u, e.v);
        nbrs[e.u].emplace_back(e.v, w);
        nbrs[e.v].emplace_back(e.u, w);
    }
    // Breadth-first order from the smallest vertex of each component.
    std::vector<int> order, from(static_cast<std::size_t>(d), -1);
    std::vector<double> agree(static_cast<std::size_t>(d), 0.5);
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    for (int r = 0; r < d; ++r) {
        if (seen[r]) continue;
        seen[r] = 1;
        std::size_t head = order.size();
        order.push_back(r);
        while (head < order.size()) {
            const int u = order[head++];
            for (const auto& [v, w] : nbrs[u]) {
                if (seen[v]) continue;
                seen[v] = 1;
                from[v] = u;
                agree[v] = 1.0 / (1.0 + std::exp(-2.0 * w));
                order.push_back(v);
            }
        }
    }
    SampleMatrix x;
    x.data.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int v : order) {
            if (from[v] < 0)
                x.data(i, v) = rng.sign();
            else
                x.data(i, v) = rng.bernoulli(agree[v]) ? x.data(i, from[v]) : -x.data(i, from[v]);
        }
    return x;
}

FdpPower fdp_power(const std::vector<GraphFeature>& selected, const std::vector<GraphFeature>& truth) {
    auto key = [](const GraphFeature& f) { return std::make_pair(f.vertices, f.edges.edges()); };
    std::set<std::pair<std::vector<Vertex>, std::vector<Edge>>> truth_keys;
    for (const auto& f : truth) truth_keys.insert(key(f));
    std::size_t hits = 0;
    for (const auto& f : selected)
        if (truth_keys.count(key(f))) ++hits;
    FdpPower r;
    r.fdp = static_cast<double>(selected.size() - hits) / static_cast<double>(std::max<std::size_t>(1, selected.size()));
    r.power = truth_keys.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth_keys.size());
    return r;
}

RepResult feature_rep(const ExperimentConfig& cfg, std::size_t index) {
    RepResult r;
    r.index = index;
    r.seed = split_seed(cfg.seed, index);
    Rng rng(r.seed);
    EdgeStatistics stats;
    EdgeSet support;
    int d;
    if (cfg.model == ModelKind::Ggm) {
        const GgmModel model = gen_ggm_model(cfg.ggm, rng);
        d = cfg.ggm.d();
        support = model.support;
        stats = ggm_edge_statistics(sample_gaussian(model.theta, cfg.n, rng), cfg.lambda);
    } else {
        const IsingModel model = gen_ising_forest(cfg.ising, rng);
        d = cfg.ising.d;
        support = model.support;
        stats = ising_edge_statistics(sample_ising_forest(model.weights, cfg.n, rng), cfg.ising.theta);
    }
    for (const auto& spec : cfg.shapes) {
        const FeatureShape shape = FeatureShape::parse(spec);
        const auto truth = enumerate_candidates(shape, support, d);
        const auto sel = select_features(stats, shape, cfg.q);
        const auto fp = fdp_power(sel.selected, truth);
        r.fdp.push_back(fp.fdp);
        r.power.push_back(fp.power);
        r.selected.push_back(sel.selected.size());
        r.true_features.push_back(truth.size());
    }
    return r;
}

RepResult homology_rep(const ExperimentConfig& cfg, std::size_t index) {
    RepResult r;
    r.index = index;
    r.seed = split_seed(cfg.seed, index);
    Rng rng(r.seed);
    const GgmModel model = gen_ggm_model(cfg.ggm, rng);
    const int d = cfg.ggm.d();
    const EdgeStatistics stats = ggm_edge_statistics(sample_gaussian(model.theta, cfg.n, rng), cfg.lambda);
    const PersistenceResult res = khan_select(stats, cfg.mu0, cfg.mu1, cfg.q, cfg.max_dim);
    r.change_points = res.steps.size();
    r.initial_rank = res.steps.front().rank;
    r.ufdp = ufdp(res, model.truth, Scenario::TwoSided, cfg.max_dim, cfg.mu0, cfg.mu1);
    const double delta = cfg.power_c * std::sqrt(std::log(static_cast<double>(d)) / cfg.n);
    std::vector<double> grid(static_cast<std::size_t>(cfg.power_grid));
    for (int i = 0; i < cfg.power_grid; ++i)
        grid[i] = cfg.power_grid == 1 ? cfg.mu0 : cfg.mu0 + (cfg.mu1 - cfg.mu0) * i / (cfg.power_grid - 1);
    r.homology_power = homology_power(res, model.truth, Scenario::TwoSided, cfg.max_dim, delta, grid);
    return r;
}

namespace {

void aggregate(ExperimentReport& rep) {
    const std::size_t k = rep.labels.size();
    std::vector<std::vector<double>> fdp(k), pw(k);
    std::vector<double> uf, hp;
    for (const auto& r : rep.reps) {
        if (!r.ok) {
            ++rep.failures;
            continue;
        }
        for (std::size_t s = 0; s < r.fdp.size() && s < k; ++s) {
            fdp[s].push_back(r.fdp[s]);
            pw[s].push_back(r.power[s]);
        }
        uf.push_back(r.ufdp);
        hp.push_back(r.homology_power);
    }
    rep.fdr.clear();
    rep.mean_power.clear();
    for (std::size_t s = 0; s < k; ++s) {
        rep.fdr.push_back(mean(fdp[s]));
        rep.mean_power.push_back(mean(pw[s]));
    }
    if (rep.kind == "homology") {
        rep.ufdr = mean(uf);
        rep.mean_homology_power = mean(hp);
    }
}

}  // namespace

ExperimentReport run_feature_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    for (const auto& s : cfg.shapes) FeatureShape::parse(s);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.kind = "feature";
    rep.config = cfg;
    rep.labels = cfg.shapes;
    rep.reps = run_reps(cfg, feature_rep);
    aggregate(rep);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ExperimentReport run_homology_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.model != ModelKind::Ggm) throw ConfigError("homology experiments use the GGM model");
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.kind = "homology";
    rep.config = cfg;
    rep.labels = {"homology"};
    rep.reps = run_reps(cfg, homology_rep);
    aggregate(rep);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    return cfg.experiment == "homology" ? run_homology_experiment(cfg) : run_feature_experiment(cfg);
}

void ExperimentConfig::validate() const {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0,1)");
    if (n < 2) throw ConfigError("n must be at least 2");
    if (reps < 1) throw ConfigError("reps must be positive");
    if (parallelism < 1) throw ConfigError("parallelism must be positive");
    if (experiment != "feature" && experiment != "homology")
        throw ConfigError("experiment must be 'feature' or 'homology'");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (experiment == "feature" && shapes.empty()) throw ConfigError("at least one shape is required");
    if (experiment == "homology") {
        if (max_dim < 1) throw ConfigError("K must be at least 1");
        if (!(mu0 < mu1)) throw ConfigError("mu0 must be smaller than mu1");
        if (!std::isfinite(mu1)) throw ConfigError("homology experiments need a finite mu1");
        if (power_grid < 1) throw ConfigError("power_grid must be positive");
        if (!(power_c >= 0.0)) throw ConfigError("power_c must be nonnegative");
    }
    if (model == ModelKind::Ggm) {
        if (ggm.m1 < 0 || ggm.m2 < 0 || ggm.m3 < 0 || ggm.d() < 2) throw ConfigError("invalid GGM block counts");
    } else {
        if (ising.d < 2) throw ConfigError("invalid Ising dimension");
        if (!(ising.theta >= 0.0)) throw ConfigError("theta must be nonnegative");
    }
}

ExperimentConfig ExperimentConfig::preset_config(const std::string& name, int d) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "table1") {
        int m1, m2, m3;
        switch (d == 0 ? 200 : d) {
            case 200: m1 = 20, m2 = 10, m3 = 20; break;
            case 250: m1 = 20, m2 = 10, m3 = 30; break;
            case 300: m1 = 40, m2 = 20, m3 = 20; break;
            case 350: m1 = 60, m2 = 30, m3 = 10; break;
            default: throw ConfigError("table1 preset supports d in {200, 250, 300, 350}");
        }
        c.model = ModelKind::Ggm;
        c.ggm = GgmDesign::table1(m1, m2, m3);
        c.shapes = {"triangle"};
    } else if (name == "table2") {
        c.model = ModelKind::Ising;
        c.ising = IsingDesign::table2(d == 0 ? 200 : d);
        c.shapes = {"path:5"};
    } else if (name == "homology") {
        c.model = ModelKind::Ggm;
        c.experiment = "homology";
        if (d == 0 || d == 38)
            c.ggm = GgmDesign::homology(4, 4, 2);
        else if (d == 200)
            c.ggm = GgmDesign::homology(10, 30, 10);
        else
            throw ConfigError("homology preset supports d in {38, 200}");
        c.max_dim = 2;
        c.mu0 = 0.0;
        c.mu1 = 1.0;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected table1, table2 or homology)");
    }
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["preset"] = preset;
    j["experiment"] = experiment;
    j["model"] = model == ModelKind::Ggm ? "ggm" : "ising";
    if (model == ModelKind::Ggm) {
        j["design"] = {{"flavor", ggm.flavor == GgmFlavor::Table1 ? "table1" : "homology"},
                       {"m1", ggm.m1},
                       {"m2", ggm.m2},
                       {"m3", ggm.m3},
                       {"d", ggm.d()},
                       {"weight_low", ggm.weight_low},
                       {"weight_high", ggm.weight_high},
                       {"diag_pad", ggm.diag_pad},
                       {"edge_drop", ggm.edge_drop}};
        j["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json("default");
    } else {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& s : ising.templates) t.push_back(s.name());
        j["design"] = {{"d", ising.d},
                       {"size_low", ising.size_low},
                       {"size_high", ising.size_high},
                       {"weight_low", ising.weight_low},
                       {"weight_high", ising.weight_high},
                       {"templates", t}};
        j["theta"] = ising.theta;
    }
    j["shapes"] = shapes;
    j["n"] = n;
    j["q"] = q;
    if (experiment == "homology") {
        j["K"] = max_dim;
        j["mu0"] = mu0;
        j["mu1"] = mu1;
        j["power_c"] = power_c;
        j["power_grid"] = power_grid;
    }
    j["reps"] = reps;
    j["seed"] = seed;
    j["parallelism"] = parallelism;
    return j;
}

namespace {

template <class T>
void take(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"preset", "experiment", "model", "design", "d", "lambda", "theta", "shapes", "shape", "n", "q",
                    "K", "mu0", "mu1", "power_c", "power_grid", "reps", "seed", "parallelism"},
                   "config");
    ExperimentConfig c;
    std::string preset = "custom";
    take(j, "preset", preset);
    if (preset != "custom") {
        int d = 0;
        take(j, "d", d);
        c = preset_config(preset, d);
    }
    std::string model = c.model == ModelKind::Ggm ? "ggm" : "ising";
    take(j, "model", model);
    if (model == "ggm")
        c.model = ModelKind::Ggm;
    else if (model == "ising")
        c.model = ModelKind::Ising;
    else
        throw ConfigError("model must be 'ggm' or 'ising'");
    take(j, "experiment", c.experiment);
    if (j.contains("design")) {
        const auto& dj = j.at("design");
        if (!dj.is_object()) throw ConfigError("design must be an object");
        if (c.model == ModelKind::Ggm) {
            reject_unknown(dj, {"flavor", "m1", "m2", "m3", "d", "weight_low", "weight_high", "diag_pad", "edge_drop"},
                           "design");
            std::string flavor = c.ggm.flavor == GgmFlavor::Table1 ? "table1" : "homology";
            take(dj, "flavor", flavor);
            if (flavor == "table1")
                c.ggm.flavor = GgmFlavor::Table1;
            else if (flavor == "homology")
                c.ggm.flavor = GgmFlavor::Homology;
            else
                throw ConfigError("design flavor must be 'table1' or 'homology'");
            take(dj, "m1", c.ggm.m1);
            take(dj, "m2", c.ggm.m2);
            take(dj, "m3", c.ggm.m3);
            take(dj, "weight_low", c.ggm.weight_low);
            take(dj, "weight_high", c.ggm.weight_high);
            take(dj, "diag_pad", c.ggm.diag_pad);
            take(dj, "edge_drop", c.ggm.edge_drop);
        } else {
            reject_unknown(dj, {"d", "size_low", "size_high", "weight_low", "weight_high", "templates"}, "design");
            take(dj, "d", c.ising.d);
            take(dj, "size_low", c.ising.size_low);
            take(dj, "size_high", c.ising.size_high);
            take(dj, "weight_low", c.ising.weight_low);
            take(dj, "weight_high", c.ising.weight_high);
            std::vector<std::string> templates;
            take(dj, "templates", templates);
            for (const auto& t : templates) c.ising.templates.push_back(FeatureShape::parse(t));
        }
    }
    if (j.contains("lambda") && j.at("lambda").is_number()) c.lambda = j.at("lambda").get<double>();
    take(j, "theta", c.ising.theta);
    if (j.contains("shape")) {
        std::string s;
        take(j, "shape", s);
        c.shapes = {s};
    }
    take(j, "shapes", c.shapes);
    take(j, "n", c.n);
    take(j, "q", c.q);
    take(j, "K", c.max_dim);
    take(j, "mu0", c.mu0);
    if (j.contains("mu1") && j.at("mu1").is_string()) {
        if (j.at("mu1").get<std::string>() != "inf") throw ConfigError("mu1 must be a number or \"inf\"");
        c.mu1 = std::numeric_limits<double>::infinity();
    } else {
        take(j, "mu1", c.mu1);
    }
    take(j, "power_c", c.power_c);
    take(j, "power_grid", c.power_grid);
    take(j, "reps", c.reps);
    take(j, "seed", c.seed);
    take(j, "parallelism", c.parallelism);
    c.validate();
    return c;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["config"] = config.to_json();
    j["labels"] = labels;
    j["failures"] = failures;
    j["wall_seconds"] = wall_seconds;
    nlohmann::json agg = nlohmann::json::object();
    for (std::size_t s = 0; s < labels.size() && kind == "feature"; ++s)
        agg[labels[s]] = {{"fdr", fdr[s]}, {"power", mean_power[s]}};
    if (kind == "homology") agg = {{"ufdr", ufdr}, {"power", mean_homology_power}};
    j["aggregate"] = agg;
    j["reps"] = nlohmann::json::array();
    for (const auto& r : reps) {
        nlohmann::json x{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}};
        if (!r.ok) x["error"] = r.error;
        if (kind == "feature") {
            x["fdp"] = r.fdp;
            x["power"] = r.power;
            x["selected"] = r.selected;
            x["true_features"] = r.true_features;
        } else {
            x["ufdp"] = r.ufdp;
            x["power"] = r.homology_power;
            x["change_points"] = r.change_points;
            x["initial_rank"] = r.initial_rank;
        }
        j["reps"].push_back(std::move(x));
    }
    return j;
}

void ExperimentReport::write_csv(std::ostream& out) const {
    const auto old = out.precision(17);
    if (kind == "feature") {
        out << "rep,seed,ok,shape,fdp,power,selected,true_features\n";
        for (const auto& r : reps)
            for (std::size_t s = 0; s < labels.size(); ++s) {
                out << r.index << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << labels[s] << ',';
                if (r.ok)
                    out << r.fdp[s] << ',' << r.power[s] << ',' << r.selected[s] << ',' << r.true_features[s];
                else
                    out << ",,,";
                out << '\n';
            }
    } else {
        out << "rep,seed,ok,ufdp,power,change_points,initial_rank\n";
        for (const auto& r : reps) {
            out << r.index << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',';
            if (r.ok)
                out << r.ufdp << ',' << r.homology_power << ',' << r.change_points << ',' << r.initial_rank;
            else
                out << ",,,";
            out << '\n';
        }
    }
    out.precision(old);
}

}  // namespace khan
