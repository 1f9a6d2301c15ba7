#pragma once

#include <map>
#include <string>
#include <vector>

#include "ctfid/graph.hpp"
#include "ctfid/value.hpp"

namespace ctfid {

// Joint probability table over an ordered variable list, row-major in
// declaration order of the variables and their domain values.
struct DistributionTable {
    std::vector<Variable> variables;
    std::vector<double> probs;

    std::size_t rows() const;
    // Values of every variable in row `r`, aligned with `variables`.
    std::vector<std::string> row_values(std::size_t r) const;
    // Probability mass of all rows consistent with the assignment.
    double marginal(const std::map<std::string, std::string>& assignment) const;
    void validate() const;
};

// Interventional tables keyed by intervened variable set, then by the
// intervention values aligned with the sorted set.
struct TableCollection {
    std::map<std::vector<std::string>,
             std::map<std::vector<std::string>, DistributionTable>>
        families;
    std::map<std::string, std::vector<std::string>> domains;

    void add(const std::vector<std::string>& intervened_sorted,
             const std::vector<std::string>& values,
             DistributionTable table);
    const DistributionTable& lookup(const std::vector<std::string>& intervened_sorted,
                                    const std::vector<std::string>& values) const;
    const DistributionTable& lookup(const std::map<std::string, std::string>& intervened) const;
    const std::vector<std::string>& domain(const std::string& variable) const;
};

}  // namespace ctfid
