#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctfid/ctf.hpp"
#include "ctfid/dist.hpp"
#include "ctfid/graph.hpp"

namespace ctfid {

struct ExogenousVariable {
    std::string name;
    int size;
};

// Function table over (exogenous inputs, then parent inputs), row-major
// with the last input fastest; entries index into the variable's domain.
struct Mechanism {
    std::vector<std::string> exo_inputs;
    std::vector<std::string> parent_inputs;
    std::vector<int> table;
};

using Intervention = std::map<std::string, std::string>;

class DiscreteSCM {
  public:
    DiscreteSCM(CausalDiagram diagram, std::vector<ExogenousVariable> exogenous,
                std::vector<double> p_u, std::map<std::string, Mechanism> mechanisms);

    const CausalDiagram& diagram() const { return diagram_; }
    const std::vector<ExogenousVariable>& exogenous() const { return exogenous_; }
    const std::vector<double>& p_u() const { return p_u_; }
    const std::map<std::string, Mechanism>& mechanisms() const { return mechanisms_; }
    std::size_t exogenous_states() const { return p_u_.size(); }

  private:
    CausalDiagram diagram_;
    std::vector<ExogenousVariable> exogenous_;
    std::vector<double> p_u_;
    std::map<std::string, Mechanism> mechanisms_;
};

// Solves the derived model at one unit; u holds one value index per
// exogenous variable in declared order.
std::map<std::string, std::string> potential_response(const DiscreteSCM& m,
                                                      const Intervention& interventions,
                                                      const std::vector<int>& u);

// Probability of a conjunction of counterfactual events by exogenous
// enumeration; nested intervention values are resolved at the same unit.
double ctf_probability(const DiscreteSCM& m, const NestedEvent& events);
double ctf_probability(const DiscreteSCM& m, const CtfEvent& events);

// Joint distribution of the non-intervened variables under do(z).
DistributionTable interventional_table(const DiscreteSCM& m, const Intervention& z);

// Every table an AvailableSpec promises: one per value assignment of each
// intervention set.
TableCollection interventional_family(const DiscreteSCM& m, const std::vector<NameSet>& sets);

// Joint distribution of a list of counterfactual variables, with columns
// named by their rendered counterfactual names.
DistributionTable ctf_joint_table(const DiscreteSCM& m, const std::vector<CtfVariable>& vars);

DiscreteSCM random_scm(const CausalDiagram& g, std::uint64_t seed);

DiscreteSCM scm_from_json(const std::string& text);
std::string scm_to_json(const DiscreteSCM& m);
DiscreteSCM load_scm(const std::string& path);

}  // namespace ctfid
