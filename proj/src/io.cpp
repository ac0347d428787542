#include "khan/io.hpp"

#include <fstream>
#include <sstream>

#include "khan/error.hpp"

namespace khan {

namespace {

nlohmann::json edge_list(const EdgeSet& e) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& x : e) out.push_back({x.u, x.v});
    return out;
}

}  // namespace

nlohmann::json to_json(const GraphFeature& f) {
    return {{"vertices", f.vertices}, {"edges", edge_list(f.edges)}, {"pvalue", f.pvalue}};
}

nlohmann::json to_json(const SelectionResult& r) {
    nlohmann::json j;
    j["q"] = r.q;
    if (r.total_j_exact)
        j["total_J"] = *r.total_j_exact;
    else
        j["total_J"] = r.total_j;
    j["alpha_hat"] = r.alpha_hat;
    j["j_max"] = r.j_max;
    j["prescreened_edges"] = r.prescreened_edges;
    j["candidates"] = r.candidates.size();
    j["selected"] = nlohmann::json::array();
    for (const auto& f : r.selected) j["selected"].push_back(to_json(f));
    j["warnings"] = r.warnings;
    return j;
}

nlohmann::json to_json(const DgsOutput& r) {
    return {{"mu", r.mu},
            {"q", r.q},
            {"K", r.max_dim},
            {"jbar", r.jbar},
            {"alpha_hat", r.alpha_hat},
            {"j_max", r.j_max},
            {"rank", r.rank},
            {"edges", edge_list(r.selected_edges)},
            {"generator_pvalues", r.generator_pvalues},
            {"warnings", r.warnings}};
}

nlohmann::json to_json(const CycleRank& r) { return {{"rank", r.total}, {"per_dim", r.per_dim}}; }

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace khan
