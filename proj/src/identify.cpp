#include "ctfid/identify.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ctfid {

AvailableSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw input_error(std::string("spec JSON: ") + err.what());
    }
    if (!j.is_object() || !j.contains("available"))
        throw input_error("spec JSON needs an \"available\" list");
    AvailableSpec spec;
    for (const auto& entry : j.at("available")) {
        if (!entry.is_array()) throw input_error("spec entries must be arrays of variable names");
        NameSet z;
        for (const auto& name : entry) z.insert(name.get<std::string>());
        if (std::find(spec.sets.begin(), spec.sets.end(), z) == spec.sets.end())
            spec.sets.push_back(std::move(z));
    }
    return spec;
}

std::string spec_to_json(const AvailableSpec& spec) {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& z : spec.sets) sets.push_back(std::vector<std::string>(z.begin(), z.end()));
    return nlohmann::json{{"available", sets}}.dump(2);
}

AvailableSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return spec_from_json(buf.str());
}

namespace {

ValueRef value_for(const std::map<std::string, ValueRef>& values, const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw input_error("no value supplied for " + name);
    return it->second;
}

Estimand sum_over(const NameSet& vars, const std::map<std::string, ValueRef>& values,
                  Estimand body) {
    std::vector<SumBinder> binders;
    for (const auto& v : vars) {
        ValueRef value = value_for(values, v);
        if (!value.symbolic)
            throw input_error("cannot marginalize " + v + " over a pinned value");
        binders.push_back({value.text, v});
    }
    return make_sum(std::move(binders), std::move(body));
}

}  // namespace

Estimand c_factor_from_distribution(const NameSet& b, const NameSet& z, const CausalDiagram& g,
                                    const std::map<std::string, ValueRef>& values) {
    for (const auto& v : b)
        if (z.count(v)) throw input_error(v + " cannot be both in the factor and intervened");
    CausalDiagram cut = mutilate(g, z);
    auto components = c_components(cut);
    if (std::find(components.begin(), components.end(), b) == components.end())
        throw input_error("the requested set is not a c-component of the intervened diagram");

    std::map<std::string, ValueRef> intervened;
    for (const auto& v : z) intervened.emplace(v, value_for(values, v));

    std::vector<Estimand> factors;
    std::map<std::string, ValueRef> preds;
    for (const auto& w : topological_order(g)) {
        if (z.count(w)) continue;
        if (b.count(w)) {
            DistributionAtom num;
            num.intervened = intervened;
            num.event = preds;
            num.event.emplace(w, value_for(values, w));
            if (preds.empty()) {
                factors.push_back(make_atom(std::move(num)));
            } else {
                DistributionAtom den;
                den.intervened = intervened;
                den.event = preds;
                factors.push_back(make_frac(make_atom(std::move(num)), make_atom(std::move(den))));
            }
        }
        preds.emplace(w, value_for(values, w));
    }
    return make_prod(std::move(factors));
}

IdentifyOutcome identify(const NameSet& c, const NameSet& t, Estimand q_t,
                         const CausalDiagram& g, const std::map<std::string, ValueRef>& values) {
    if (c.empty()) throw input_error("cannot identify an empty set");
    for (const auto& v : c)
        if (!t.count(v)) throw input_error(v + " is outside the context set");

    NameSet a = ancestors(induced_subgraph(g, t), c);
    if (a == c) {
        NameSet rest;
        std::set_difference(t.begin(), t.end(), c.begin(), c.end(),
                            std::inserter(rest, rest.begin()));
        return {true, sum_over(rest, values, q_t)};
    }
    if (a == t) return {false, nullptr};

    NameSet dropped;
    std::set_difference(t.begin(), t.end(), a.begin(), a.end(),
                        std::inserter(dropped, dropped.begin()));
    Estimand q_a = sum_over(dropped, values, q_t);

    auto components = c_components(induced_subgraph(g, a));
    const NameSet* t2 = nullptr;
    for (const auto& comp : components) {
        if (std::includes(comp.begin(), comp.end(), c.begin(), c.end())) {
            t2 = &comp;
            break;
        }
    }
    if (!t2) throw input_error("target set spans several c-components");

    // Extract Q[T'] from Q[A] as a product of prefix-marginal ratios.
    std::vector<Estimand> factors;
    NameSet prefix;
    for (const auto& w : topological_order(g)) {
        if (!a.count(w)) continue;
        NameSet with = prefix;
        with.insert(w);
        if (t2->count(w)) {
            NameSet beyond_num, beyond_den;
            std::set_difference(a.begin(), a.end(), with.begin(), with.end(),
                                std::inserter(beyond_num, beyond_num.begin()));
            Estimand num = sum_over(beyond_num, values, q_a);
            if (prefix.empty()) {
                factors.push_back(std::move(num));
            } else {
                std::set_difference(a.begin(), a.end(), prefix.begin(), prefix.end(),
                                    std::inserter(beyond_den, beyond_den.begin()));
                factors.push_back(make_frac(std::move(num), sum_over(beyond_den, values, q_a)));
            }
        }
        prefix = std::move(with);
    }
    return identify(c, *t2, make_prod(std::move(factors)), g, values);
}

FactorIdentification identify_ctf_factor(const CtfFactor& f, const AvailableSpec& spec,
                                         const CausalDiagram& g) {
    FactorIdentification out;
    ConsistencyResult consistency = check_consistency(f, g);
    if (!consistency.consistent) {
        out.consistent = false;
        out.witness = consistency.witness;
        return out;
    }

    NameSet c;
    std::map<std::string, ValueRef> assignment;
    for (const auto& term : f.events) {
        c.insert(term.var.base);
        assignment.emplace(term.var.base, term.value);
        for (const auto& [var, value] : term.var.subscript) assignment.emplace(var, value);
    }

    std::map<std::string, ValueRef> slots;
    for (const auto& v : g.variable_names()) slots.emplace(v, ValueRef::symbol("#" + v));

    for (const auto& z : spec.sets) {
        bool touches = false;
        for (const auto& v : z)
            if (c.count(v)) touches = true;
        if (touches) continue;

        CausalDiagram cut = mutilate(g, z);
        auto components = c_components(cut);
        const NameSet* b = nullptr;
        for (const auto& comp : components) {
            if (std::includes(comp.begin(), comp.end(), c.begin(), c.end())) {
                b = &comp;
                break;
            }
        }
        if (!b) continue;

        IdentifyOutcome outcome =
            identify(c, *b, c_factor_from_distribution(*b, z, g, slots), cut, slots);
        if (!outcome.ok) continue;

        std::map<std::string, ValueRef> bind;
        for (const auto& [var, value] : assignment) bind.emplace("#" + var, value);
        Estimand est = substitute(outcome.estimand, bind);
        std::map<std::string, ValueRef> pins;
        for (const auto& sym : free_symbols(est))
            if (sym.rfind('#', 0) == 0)
                pins.emplace(sym, ValueRef::constant(g.domain(sym.substr(1)).front()));
        out.identified = true;
        out.used_z = z;
        out.estimand = substitute(est, pins);
        return out;
    }
    return out;
}

}  // namespace ctfid
