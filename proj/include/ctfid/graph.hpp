#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctfid/value.hpp"

namespace ctfid {

struct Variable {
    std::string name;
    std::vector<std::string> domain;
};

using NameSet = std::set<std::string>;
using Edge = std::pair<std::string, std::string>;

// Acyclic directed mixed graph over named finite-domain variables.
// Directed edges are causal arrows, bidirected edges stand for latent
// confounders between their endpoints.
class CausalDiagram {
public:
    CausalDiagram() = default;
    CausalDiagram(std::vector<Variable> variables,
                  std::vector<Edge> directed,
                  std::vector<Edge> bidirected);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::set<Edge>& directed() const { return directed_; }
    const std::set<Edge>& bidirected() const { return bidirected_; }

    bool has_variable(const std::string& name) const { return index_.count(name) > 0; }
    const Variable& variable(const std::string& name) const;
    const std::vector<std::string>& domain(const std::string& name) const;
    NameSet variable_names() const;
    std::size_t size() const { return variables_.size(); }

    NameSet parents(const std::string& name) const;
    NameSet children(const std::string& name) const;
    // Variables connected to name by a bidirected edge.
    NameSet siblings(const std::string& name) const;

    bool operator==(const CausalDiagram& o) const {
        return variables_names_equal(o) && directed_ == o.directed_ && bidirected_ == o.bidirected_;
    }

private:
    bool variables_names_equal(const CausalDiagram& o) const;
    void check_acyclic() const;

    std::vector<Variable> variables_;
    std::map<std::string, std::size_t> index_;
    std::set<Edge> directed_;
    std::set<Edge> bidirected_;
};

// All variables with a directed path into some member of `of`, including
// the members themselves.
NameSet ancestors(const CausalDiagram& g, const NameSet& of);

// Connected components of the bidirected part; singletons for isolated
// variables. Components are ordered by their smallest member.
std::vector<NameSet> c_components(const CausalDiagram& g);

// Removes directed edges into `cut_incoming` (with bidirected edges
// incident to those variables) and directed edges out of `cut_outgoing`.
// Vertices are kept.
CausalDiagram mutilate(const CausalDiagram& g,
                       const NameSet& cut_incoming,
                       const NameSet& cut_outgoing = {});

// Subgraph over `keep` with every edge whose endpoints both remain.
CausalDiagram induced_subgraph(const CausalDiagram& g, const NameSet& keep);

// Deterministic topological order of the directed part; ties broken
// lexicographically by name.
std::vector<std::string> topological_order(const CausalDiagram& g);

CausalDiagram diagram_from_json(const std::string& text);
CausalDiagram load_diagram(const std::string& path);
std::string diagram_to_json(const CausalDiagram& g);

}  // namespace ctfid
