#include "graphflow/metric.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace graphflow {

double MetricStructure::length(const std::string& edge_id) const {
    auto it = lengths.find(edge_id);
    if (it != lengths.end()) return it->second;
    if (half_infinite(edge_id)) return 1.0;  // nominal sampling length
    throw domain_error("missing length for edge " + edge_id);
}

void MetricStructure::validate(
    const std::function<bool(const std::string&, const std::string&)>& same_function) const {
    graph.validate();
    std::function<bool(const std::string&, const std::string&)> same = same_function;
    if (!same) same = [](const std::string& a, const std::string& b) { return a == b; };
    for (const auto& [eid, len] : lengths) {
        if (!graph.find_edge(eid)) throw invariant_error("length on unknown edge: " + eid);
        if (!half_infinite(eid) && !(len > 0))
            throw invariant_error("nonpositive length on edge " + eid);
    }
    for (const auto& e : graph.edges)
        if (!half_infinite(e.id) && !lengths.count(e.id))
            throw invariant_error("missing length for edge " + e.id);
    for (const auto& [eid, key] : labels) {
        (void)key;
        if (!graph.find_edge(eid)) throw invariant_error("label on unknown edge: " + eid);
    }
    // adjacent labelled edges must carry distinct functions
    for (const auto& v : graph.vertices) {
        std::vector<const Edge*> in_here, out_here;
        for (const auto& e : graph.edges) {
            if (e.dst == v) in_here.push_back(&e);
            if (e.src == v) out_here.push_back(&e);
        }
        std::vector<const Edge*> incident = in_here;
        incident.insert(incident.end(), out_here.begin(), out_here.end());
        for (size_t i = 0; i < incident.size(); i++) {
            for (size_t j = i + 1; j < incident.size(); j++) {
                const Edge* a = incident[i];
                const Edge* b = incident[j];
                if (a == b) continue;  // loop edge contributes two ends
                auto la = labels.find(a->id);
                auto lb = labels.find(b->id);
                if (la == labels.end() || lb == labels.end()) continue;
                if (!same(la->second, lb->second)) continue;
                // serial continuation through a bivalent vertex is one flow
                bool serial = in_here.size() == 1 && out_here.size() == 1 &&
                              in_here[0] != out_here[0];
                if (!serial)
                    throw invariant_error("duplicate function label at vertex " + v + ": " +
                                          la->second);
            }
        }
    }
}

MetricStructure parse_structure(const std::string& text) {
    MetricStructure ms;
    ms.graph = parse_graph(text);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string kw;
        if (!(ss >> kw)) continue;
        if (kw == "length") {
            std::string eid;
            double len;
            if (!(ss >> eid >> len))
                throw parse_error("length line wants: length <edge-id> <float>", lineno);
            ms.lengths[eid] = len;
        } else if (kw == "label") {
            std::string eid, key;
            if (!(ss >> eid >> key))
                throw parse_error("label line wants: label <edge-id> <catalog-key>", lineno);
            ms.labels[eid] = key;
        }
    }
    ms.validate();
    return ms;
}

MetricStructure load_structure(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_structure(ss.str());
}

std::string format_structure(const MetricStructure& ms) {
    std::ostringstream out;
    out << format_graph(ms.graph);
    char buf[64];
    for (const auto& [eid, len] : ms.lengths) {
        snprintf(buf, sizeof buf, "%.12g", len);
        out << "length " << eid << " " << buf << "\n";
    }
    for (const auto& [eid, key] : ms.labels) out << "label " << eid << " " << key << "\n";
    return out.str();
}

void SimplexPoint::validate() const {
    graph.validate();
    if (t.size() != chain.size() + 1)
        throw invariant_error("weight vector needs one more entry than the chain");
    double sum = 0;
    for (double x : t) {
        if (x < -1e-15) throw invariant_error("negative simplex weight");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw invariant_error("simplex weights must sum to 1");
    const OrientedGraph* cur = &graph;
    for (const auto& m : chain) {
        auto bad = validate_morphism(m);
        if (!bad.empty()) throw invariant_error("chain morphism invalid: " + bad.front());
        // composability along the chain
        if (format_graph(m.source) != format_graph(*cur))
            throw invariant_error("chain morphisms not composable");
        cur = &m.target;
    }
}

SimplexMetricResult simplex_metric(const SimplexPoint& p) {
    p.validate();
    const size_t k = p.chain.size();
    SimplexMetricResult res;
    res.metric.graph = p.graph;
    for (const auto& e : p.graph.edges) {
        // lambda_i = 1 while the edge survives down at level i
        std::vector<int> lam(k + 1, 0);
        lam[k] = 1;
        std::optional<std::string> img = e.id;
        for (size_t m = 1; m <= k; m++) {
            if (img) img = p.chain[m - 1].edge_map.at(*img);
            lam[k - m] = img ? 1 : 0;
        }
        double len = 0;
        for (size_t i = 0; i <= k; i++) len += p.t[i] * lam[i];
        res.metric.lengths[e.id] = len;
        if (len <= 1e-15) res.zero_edges.push_back(e.id);
    }
    return res;
}

void assign_labels(MetricStructure& ms, const std::map<std::string, std::string>& assignment,
                   const std::set<std::string>& known_keys,
                   const std::function<bool(const std::string&, const std::string&)>&
                       same_function) {
    for (const auto& [eid, key] : assignment) {
        if (!ms.graph.find_edge(eid)) throw domain_error("label on unknown edge: " + eid);
        if (!known_keys.count(key)) throw domain_error("unknown catalog key: " + key);
    }
    MetricStructure trial = ms;
    for (const auto& [eid, key] : assignment) trial.labels[eid] = key;
    trial.validate(same_function);  // throws on adjacent duplicates
    ms.labels = trial.labels;
}

}  // namespace graphflow
