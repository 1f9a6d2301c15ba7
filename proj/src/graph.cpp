#include "ctfid/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ctfid {

CausalDiagram::CausalDiagram(std::vector<Variable> variables,
                             std::vector<Edge> directed,
                             std::vector<Edge> bidirected)
    : variables_(std::move(variables)) {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        if (v.name.empty()) throw input_error("variable with empty name");
        if (v.domain.empty()) throw input_error("variable " + v.name + " has an empty domain");
        std::set<std::string> seen(v.domain.begin(), v.domain.end());
        if (seen.size() != v.domain.size())
            throw input_error("variable " + v.name + " has duplicate domain values");
        if (!index_.emplace(v.name, i).second)
            throw input_error("duplicate variable name " + v.name);
    }
    for (auto& e : directed) {
        if (!has_variable(e.first) || !has_variable(e.second))
            throw input_error("directed edge " + e.first + " -> " + e.second +
                              " references an undeclared variable");
        if (e.first == e.second) throw input_error("self loop on " + e.first);
        directed_.insert(e);
    }
    for (auto& e : bidirected) {
        if (!has_variable(e.first) || !has_variable(e.second))
            throw input_error("bidirected edge " + e.first + " <-> " + e.second +
                              " references an undeclared variable");
        if (e.first == e.second) throw input_error("bidirected self loop on " + e.first);
        if (e.first < e.second)
            bidirected_.insert(e);
        else
            bidirected_.insert({e.second, e.first});
    }
    check_acyclic();
}

const Variable& CausalDiagram::variable(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw input_error("unknown variable " + name);
    return variables_[it->second];
}

const std::vector<std::string>& CausalDiagram::domain(const std::string& name) const {
    return variable(name).domain;
}

NameSet CausalDiagram::variable_names() const {
    NameSet out;
    for (const auto& v : variables_) out.insert(v.name);
    return out;
}

NameSet CausalDiagram::parents(const std::string& name) const {
    variable(name);
    NameSet out;
    for (const auto& e : directed_)
        if (e.second == name) out.insert(e.first);
    return out;
}

NameSet CausalDiagram::children(const std::string& name) const {
    variable(name);
    NameSet out;
    for (const auto& e : directed_)
        if (e.first == name) out.insert(e.second);
    return out;
}

NameSet CausalDiagram::siblings(const std::string& name) const {
    variable(name);
    NameSet out;
    for (const auto& e : bidirected_) {
        if (e.first == name) out.insert(e.second);
        if (e.second == name) out.insert(e.first);
    }
    return out;
}

bool CausalDiagram::variables_names_equal(const CausalDiagram& o) const {
    if (variables_.size() != o.variables_.size()) return false;
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name != o.variables_[i].name ||
            variables_[i].domain != o.variables_[i].domain)
            return false;
    return true;
}

void CausalDiagram::check_acyclic() const {
    topological_order(*this);
}

NameSet ancestors(const CausalDiagram& g, const NameSet& of) {
    for (const auto& n : of) g.variable(n);
    NameSet out = of;
    std::deque<std::string> frontier(of.begin(), of.end());
    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.pop_front();
        for (const auto& e : g.directed()) {
            if (e.second == cur && !out.count(e.first)) {
                out.insert(e.first);
                frontier.push_back(e.first);
            }
        }
    }
    return out;
}

std::vector<NameSet> c_components(const CausalDiagram& g) {
    std::map<std::string, std::string> root;
    for (const auto& v : g.variables()) root[v.name] = v.name;
    // Union-find over bidirected edges, path halving.
    auto find = [&](std::string n) {
        while (root[n] != n) {
            root[n] = root[root[n]];
            n = root[n];
        }
        return n;
    };
    for (const auto& e : g.bidirected()) {
        auto a = find(e.first), b = find(e.second);
        if (a != b) root[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::string, NameSet> blocks;
    for (const auto& v : g.variables()) blocks[find(v.name)].insert(v.name);
    std::vector<NameSet> out;
    for (auto& [_, members] : blocks) out.push_back(std::move(members));
    return out;
}

CausalDiagram mutilate(const CausalDiagram& g,
                       const NameSet& cut_incoming,
                       const NameSet& cut_outgoing) {
    for (const auto& n : cut_incoming) g.variable(n);
    for (const auto& n : cut_outgoing) g.variable(n);
    std::vector<Edge> directed, bidirected;
    for (const auto& e : g.directed()) {
        if (cut_incoming.count(e.second)) continue;
        if (cut_outgoing.count(e.first)) continue;
        directed.push_back(e);
    }
    for (const auto& e : g.bidirected()) {
        if (cut_incoming.count(e.first) || cut_incoming.count(e.second)) continue;
        bidirected.push_back(e);
    }
    return CausalDiagram(g.variables(), std::move(directed), std::move(bidirected));
}

CausalDiagram induced_subgraph(const CausalDiagram& g, const NameSet& keep) {
    std::vector<Variable> variables;
    for (const auto& v : g.variables())
        if (keep.count(v.name)) variables.push_back(v);
    if (variables.size() != keep.size()) {
        for (const auto& n : keep) g.variable(n);
    }
    std::vector<Edge> directed, bidirected;
    for (const auto& e : g.directed())
        if (keep.count(e.first) && keep.count(e.second)) directed.push_back(e);
    for (const auto& e : g.bidirected())
        if (keep.count(e.first) && keep.count(e.second)) bidirected.push_back(e);
    return CausalDiagram(std::move(variables), std::move(directed), std::move(bidirected));
}

std::vector<std::string> topological_order(const CausalDiagram& g) {
    std::map<std::string, int> indegree;
    for (const auto& v : g.variables()) indegree[v.name] = 0;
    for (const auto& e : g.directed()) indegree[e.second]++;
    std::set<std::string> ready;
    for (const auto& [name, deg] : indegree)
        if (deg == 0) ready.insert(name);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string next = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(next);
        for (const auto& e : g.directed()) {
            if (e.first != next) continue;
            if (--indegree[e.second] == 0) ready.insert(e.second);
        }
    }
    if (order.size() != g.size()) throw input_error("diagram contains a directed cycle");
    return order;
}

namespace {

std::vector<std::string> default_domain() { return {"0", "1"}; }

Edge edge_from_json(const nlohmann::json& j, const char* kind) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
        throw input_error(std::string(kind) + " edge must be a two-element array of names");
    return {j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

CausalDiagram diagram_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error(std::string("graph json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("variables"))
        throw input_error("graph json: expected an object with a \"variables\" array");
    std::vector<Variable> variables;
    for (const auto& vj : j.at("variables")) {
        if (vj.is_string()) {
            variables.push_back({vj.get<std::string>(), default_domain()});
        } else if (vj.is_object()) {
            Variable v;
            v.name = vj.at("name").get<std::string>();
            if (vj.contains("domain"))
                v.domain = vj.at("domain").get<std::vector<std::string>>();
            else
                v.domain = default_domain();
            variables.push_back(std::move(v));
        } else {
            throw input_error("graph json: variable entries must be names or objects");
        }
    }
    std::vector<Edge> directed, bidirected;
    if (j.contains("directed"))
        for (const auto& ej : j.at("directed")) directed.push_back(edge_from_json(ej, "directed"));
    if (j.contains("bidirected"))
        for (const auto& ej : j.at("bidirected"))
            bidirected.push_back(edge_from_json(ej, "bidirected"));
    return CausalDiagram(std::move(variables), std::move(directed), std::move(bidirected));
}

CausalDiagram load_diagram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open graph file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return diagram_from_json(buf.str());
}

std::string diagram_to_json(const CausalDiagram& g) {
    nlohmann::json j;
    j["variables"] = nlohmann::json::array();
    for (const auto& v : g.variables())
        j["variables"].push_back({{"name", v.name}, {"domain", v.domain}});
    j["directed"] = nlohmann::json::array();
    for (const auto& e : g.directed()) j["directed"].push_back({e.first, e.second});
    j["bidirected"] = nlohmann::json::array();
    for (const auto& e : g.bidirected()) j["bidirected"].push_back({e.first, e.second});
    return j.dump(2);
}

}  // namespace ctfid
