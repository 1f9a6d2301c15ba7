#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ctfid/expr.hpp"
#include "ctfid/graph.hpp"
#include "ctfid/value.hpp"

namespace ctfid {

// A base variable under a constant or symbolic intervention assignment,
// e.g. Y[X=0,Z=z]. An empty subscript is the observed variable.
struct CtfVariable {
    std::string base;
    std::map<std::string, ValueRef> subscript;

    bool operator==(const CtfVariable& o) const {
        return base == o.base && subscript == o.subscript;
    }
    bool operator!=(const CtfVariable& o) const { return !(*this == o); }
    bool operator<(const CtfVariable& o) const {
        if (base != o.base) return base < o.base;
        return subscript < o.subscript;
    }
};

struct CtfTerm {
    CtfVariable var;
    ValueRef value;

    bool operator==(const CtfTerm& o) const { return var == o.var && value == o.value; }
    bool operator<(const CtfTerm& o) const {
        if (!(var == o.var)) return var < o.var;
        return value < o.value;
    }
};

// A conjunction of counterfactual events; order is display order.
using CtfEvent = std::vector<CtfTerm>;

struct CtfFactor {
    CtfEvent events;
};

// Parse-level term: intervention values may themselves be counterfactual
// terms evaluated at the same unit (natural interventions).
struct NestedTerm;
using NestedValue = std::variant<ValueRef, std::shared_ptr<NestedTerm>>;
struct NestedTerm {
    std::string base;
    std::map<std::string, NestedValue> subscript;
};
struct NestedEventTerm {
    NestedTerm term;
    ValueRef value;
};
using NestedEvent = std::vector<NestedEventTerm>;

bool nested_equal(const NestedTerm& a, const NestedTerm& b);
bool is_nested(const NestedTerm& t);

std::string ctf_name(const CtfVariable& v);
std::string render_event(const CtfEvent& e);
std::string render_factor(const CtfFactor& f);

// Drops intervened variables that cannot reach the base.
CtfVariable minimize(const CtfVariable& v, const CausalDiagram& g);

// Counterfactual ancestors: ancestral closure over minimized variables.
std::set<CtfVariable> ctf_ancestors(const std::set<CtfVariable>& vs, const CausalDiagram& g);

// Rewrites nested terms into a flat conjunction: every distinct nested
// intervention value becomes a fresh symbol, with the defining event
// appended and a summation binder returned for it.
struct UnnestResult {
    CtfEvent event;
    std::vector<SumBinder> binders;
};
UnnestResult unnest(const NestedEvent& e, const CausalDiagram& g, SymbolPool& pool);

// Minimizes, deduplicates, drops tautological self-interventions, and
// detects contradictions. Symbolic values meeting a constraint are unified;
// the substitution applied is reported so callers can drop spent binders.
struct SimplifyEventsResult {
    bool zero = false;
    CtfEvent events;
    std::map<std::string, ValueRef> unified;
};
SimplifyEventsResult simplify_events(const CtfEvent& e, const CausalDiagram& g);

// Rewrites an ancestrally closed event set so every variable is intervened
// on all its parents; parent values are read from the intervention itself
// when present and from the matching parent event otherwise.
CtfFactor ancestral_factorize(const CtfEvent& events, const CausalDiagram& g);

// Splits a ctf-factor into one factor per c-component of the induced
// subgraph over its bases, ordered by latest topological member.
std::vector<CtfFactor> factor_decompose(const CtfFactor& f, const CausalDiagram& g);

// Expresses the block's factor as a ratio of prefix marginals of the whole
// joint, over atoms keyed by rendered counterfactual names.
Estimand factor_from_joint(const CtfFactor& f, const NameSet& block,
                           const std::vector<std::string>& order);

struct ConsistencyResult {
    bool consistent = true;
    std::string witness;
};
// Precondition: the factor's bases form a single c-component of g.
ConsistencyResult check_consistency(const CtfFactor& f, const CausalDiagram& g);

}  // namespace ctfid
