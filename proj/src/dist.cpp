#include "ctfid/dist.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace ctfid {

std::size_t DistributionTable::rows() const {
    std::size_t n = 1;
    for (const auto& v : variables) n *= v.domain.size();
    return n;
}

std::vector<std::string> DistributionTable::row_values(std::size_t r) const {
    std::vector<std::string> out(variables.size());
    for (std::size_t i = variables.size(); i-- > 0;) {
        std::size_t d = variables[i].domain.size();
        out[i] = variables[i].domain[r % d];
        r /= d;
    }
    return out;
}

double DistributionTable::marginal(const std::map<std::string, std::string>& assignment) const {
    for (const auto& [name, value] : assignment) {
        bool known = false;
        for (const auto& v : variables)
            if (v.name == name) {
                known = true;
                if (std::find(v.domain.begin(), v.domain.end(), value) == v.domain.end())
                    throw evaluation_error("value " + value + " outside the domain of " + name);
            }
        if (!known) throw evaluation_error("table has no variable " + name);
    }
    double total = 0.0;
    for (std::size_t r = 0; r < rows(); ++r) {
        auto values = row_values(r);
        bool match = true;
        for (std::size_t i = 0; i < variables.size() && match; ++i) {
            auto it = assignment.find(variables[i].name);
            if (it != assignment.end() && it->second != values[i]) match = false;
        }
        if (match) total += probs[r];
    }
    return total;
}

void DistributionTable::validate() const {
    if (probs.size() != rows())
        throw input_error("table entry count does not match the domain product");
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::fabs(total - 1.0) > 1e-9)
        throw input_error("table does not sum to 1");
    for (double p : probs)
        if (p < -1e-12) throw input_error("table has a negative entry");
}

void TableCollection::add(const std::vector<std::string>& intervened_sorted,
                          const std::vector<std::string>& values,
                          DistributionTable table) {
    for (const auto& v : table.variables) {
        auto it = domains.find(v.name);
        if (it == domains.end())
            domains[v.name] = v.domain;
        else if (it->second != v.domain)
            throw input_error("conflicting domains for " + v.name + " across tables");
    }
    families[intervened_sorted][values] = std::move(table);
}

const DistributionTable& TableCollection::lookup(
    const std::vector<std::string>& intervened_sorted,
    const std::vector<std::string>& values) const {
    auto fam = families.find(intervened_sorted);
    if (fam == families.end()) {
        std::ostringstream msg;
        msg << "no table for intervened set {";
        for (std::size_t i = 0; i < intervened_sorted.size(); ++i)
            msg << (i ? "," : "") << intervened_sorted[i];
        msg << "}";
        throw evaluation_error(msg.str());
    }
    auto it = fam->second.find(values);
    if (it == fam->second.end()) throw evaluation_error("no table for the requested intervention values");
    return it->second;
}

const DistributionTable& TableCollection::lookup(
    const std::map<std::string, std::string>& intervened) const {
    std::vector<std::string> names, values;
    for (const auto& [name, value] : intervened) {
        names.push_back(name);
        values.push_back(value);
    }
    return lookup(names, values);
}

const std::vector<std::string>& TableCollection::domain(const std::string& variable) const {
    auto it = domains.find(variable);
    if (it == domains.end()) throw evaluation_error("no known domain for " + variable);
    return it->second;
}

}  // namespace ctfid
