#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctfid/ctf.hpp"
#include "ctfid/expr.hpp"
#include "ctfid/graph.hpp"

namespace ctfid {

// The collection of intervention sets whose full interventional
// distributions are available; the empty set means P(V).
struct AvailableSpec {
    std::vector<NameSet> sets;
};

AvailableSpec spec_from_json(const std::string& text);
std::string spec_to_json(const AvailableSpec& spec);
AvailableSpec load_spec(const std::string& path);

// Q[B] from P_z(V): the chain-rule product over members of b of
// P_z(w | predecessors) in a topological order of the z-cut graph.
// values must assign a ValueRef to every non-z variable appearing in the
// atoms and to every member of z.
Estimand c_factor_from_distribution(const NameSet& b, const NameSet& z, const CausalDiagram& g,
                                    const std::map<std::string, ValueRef>& values);

// Recursive c-factor identification of Q[C] from Q[T]. FAIL is a value.
struct IdentifyOutcome {
    bool ok = false;
    Estimand estimand;
};
IdentifyOutcome identify(const NameSet& c, const NameSet& t, Estimand q_t,
                         const CausalDiagram& g, const std::map<std::string, ValueRef>& values);

// One ctf-factor against the available collection: consistency check, then
// the first intervention set in declaration order that identifies it wins.
struct FactorIdentification {
    bool consistent = true;
    std::string witness;
    bool identified = false;
    std::optional<NameSet> used_z;
    Estimand estimand;
};
FactorIdentification identify_ctf_factor(const CtfFactor& f, const AvailableSpec& spec,
                                         const CausalDiagram& g);

}  // namespace ctfid
