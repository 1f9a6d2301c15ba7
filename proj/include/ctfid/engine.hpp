#pragma once

#include <string>
#include <vector>

#include "ctfid/ctf.hpp"
#include "ctfid/expr.hpp"
#include "ctfid/graph.hpp"
#include "ctfid/identify.hpp"

namespace ctfid {

struct Query {
    NestedEvent outcomes;
    NestedEvent conditions;
};

enum class Status { Identified, Fail, Zero, One };

std::string status_name(Status s);

struct FactorDiagnostic {
    std::string factor;
    bool consistent = true;
    std::string witness;
    bool identified = false;
    std::string used_z;
};

struct IdentificationResult {
    Status status = Status::Fail;
    Estimand estimand;
    std::vector<FactorDiagnostic> diagnostics;
};

// Marginal counterfactual identification. The query must have no
// conditioning side.
IdentificationResult ctf_id(const Query& q, const AvailableSpec& spec, const CausalDiagram& g);

// Partition of the counterfactual ancestors of w: per-variable ancestral
// sets in the graph with conditioned ancestor edges cut, merged when they
// share a base variable or are bidirected-adjacent.
std::vector<std::vector<CtfVariable>> ancestral_components(const std::vector<CtfVariable>& w,
                                                           const std::vector<CtfVariable>& x,
                                                           const CausalDiagram& g);

// Conditional counterfactual identification via the ratio of the
// identified joint over the conditioning-relevant ancestral components.
IdentificationResult cond_ctf_id(const Query& q, const AvailableSpec& spec,
                                 const CausalDiagram& g);

// Dispatches on the presence of a conditioning side.
IdentificationResult identify_query(const Query& q, const AvailableSpec& spec,
                                    const CausalDiagram& g);

}  // namespace ctfid
