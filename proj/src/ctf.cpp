#include "ctfid/ctf.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace ctfid {

bool nested_equal(const NestedTerm& a, const NestedTerm& b) {
    if (a.base != b.base) return false;
    if (a.subscript.size() != b.subscript.size()) return false;
    auto ia = a.subscript.begin();
    auto ib = b.subscript.begin();
    for (; ia != a.subscript.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        const auto* va = std::get_if<ValueRef>(&ia->second);
        const auto* vb = std::get_if<ValueRef>(&ib->second);
        if ((va == nullptr) != (vb == nullptr)) return false;
        if (va) {
            if (!(*va == *vb)) return false;
        } else if (!nested_equal(*std::get<std::shared_ptr<NestedTerm>>(ia->second),
                                 *std::get<std::shared_ptr<NestedTerm>>(ib->second))) {
            return false;
        }
    }
    return true;
}

bool is_nested(const NestedTerm& t) {
    for (const auto& [var, value] : t.subscript)
        if (std::holds_alternative<std::shared_ptr<NestedTerm>>(value)) return true;
    return false;
}

std::string ctf_name(const CtfVariable& v) {
    if (v.subscript.empty()) return v.base;
    std::string out = v.base + "[";
    bool first = true;
    for (const auto& [var, value] : v.subscript) {
        if (!first) out += ",";
        first = false;
        out += var + "=" + value.text;
    }
    return out + "]";
}

std::string render_event(const CtfEvent& e) {
    std::string out;
    for (const auto& term : e) {
        if (!out.empty()) out += ", ";
        out += ctf_name(term.var) + "=" + term.value.text;
    }
    return out;
}

std::string render_factor(const CtfFactor& f) { return "P(" + render_event(f.events) + ")"; }

CtfVariable minimize(const CtfVariable& v, const CausalDiagram& g) {
    if (!g.has_variable(v.base)) throw input_error("unknown variable " + v.base);
    if (v.subscript.empty()) return v;
    NameSet intervened;
    for (const auto& [var, value] : v.subscript) {
        if (!g.has_variable(var)) throw input_error("unknown variable " + var);
        intervened.insert(var);
    }
    NameSet relevant = ancestors(mutilate(g, intervened), {v.base});
    CtfVariable out;
    out.base = v.base;
    for (const auto& [var, value] : v.subscript)
        if (relevant.count(var)) out.subscript.emplace(var, value);
    return out;
}

namespace {

NameSet subscript_vars(const CtfVariable& v) {
    NameSet out;
    for (const auto& [var, value] : v.subscript) out.insert(var);
    return out;
}

// Members of An(Y_x) contributed by one variable: W ranges over the
// ancestors of the base once intervened edges out of X are cut, and keeps
// the part of x that can still reach it.
std::set<CtfVariable> ancestors_of_one(const CtfVariable& v, const CausalDiagram& g) {
    CtfVariable m = minimize(v, g);
    NameSet x = subscript_vars(m);
    CausalDiagram cut_out = mutilate(g, {}, x);
    CausalDiagram cut_in = mutilate(g, x);
    std::set<CtfVariable> out;
    for (const auto& w : ancestors(cut_out, {m.base})) {
        NameSet reach = ancestors(cut_in, {w});
        CtfVariable member;
        member.base = w;
        for (const auto& [var, value] : m.subscript)
            if (reach.count(var)) member.subscript.emplace(var, value);
        out.insert(minimize(member, g));
    }
    return out;
}

}  // namespace

std::set<CtfVariable> ctf_ancestors(const std::set<CtfVariable>& vs, const CausalDiagram& g) {
    std::set<CtfVariable> out;
    for (const auto& v : vs) {
        auto members = ancestors_of_one(v, g);
        out.insert(members.begin(), members.end());
    }
    return out;
}

namespace {

CtfVariable flatten_term(const NestedTerm& t, const CausalDiagram& g, SymbolPool& pool,
                         std::vector<std::pair<CtfVariable, std::string>>& extracted);

ValueRef flatten_value(const std::string& key, const NestedValue& value, const CausalDiagram& g,
                       SymbolPool& pool,
                       std::vector<std::pair<CtfVariable, std::string>>& extracted) {
    if (const auto* direct = std::get_if<ValueRef>(&value)) return *direct;
    const NestedTerm& inner = *std::get<std::shared_ptr<NestedTerm>>(value);
    if (inner.base != key)
        throw input_error("nested intervention on " + key + " must be a counterfactual of " +
                          key + ", got " + inner.base);
    CtfVariable flat = flatten_term(inner, g, pool, extracted);
    flat = minimize(flat, g);
    for (const auto& [var, symbol] : extracted)
        if (var == flat) return ValueRef::symbol(symbol);
    std::string symbol = pool.fresh(flat.base);
    extracted.emplace_back(flat, symbol);
    return ValueRef::symbol(symbol);
}

CtfVariable flatten_term(const NestedTerm& t, const CausalDiagram& g, SymbolPool& pool,
                         std::vector<std::pair<CtfVariable, std::string>>& extracted) {
    if (!g.has_variable(t.base)) throw input_error("unknown variable " + t.base);
    CtfVariable out;
    out.base = t.base;
    for (const auto& [var, value] : t.subscript) {
        if (!g.has_variable(var)) throw input_error("unknown variable " + var);
        out.subscript.emplace(var, flatten_value(var, value, g, pool, extracted));
    }
    return out;
}

}  // namespace

UnnestResult unnest(const NestedEvent& e, const CausalDiagram& g, SymbolPool& pool) {
    UnnestResult out;
    std::vector<std::pair<CtfVariable, std::string>> extracted;
    for (const auto& ev : e) {
        CtfVariable var = flatten_term(ev.term, g, pool, extracted);
        out.event.push_back({std::move(var), ev.value});
    }
    for (const auto& [var, symbol] : extracted) {
        out.event.push_back({var, ValueRef::symbol(symbol)});
        out.binders.push_back({symbol, var.base});
    }
    return out;
}

namespace {

void apply_substitution(CtfEvent& events, const std::map<std::string, ValueRef>& subst) {
    if (subst.empty()) return;
    for (auto& term : events) {
        for (auto& [var, value] : term.var.subscript) {
            if (!value.symbolic) continue;
            auto it = subst.find(value.text);
            if (it != subst.end()) value = it->second;
        }
        if (term.value.symbolic) {
            auto it = subst.find(term.value.text);
            if (it != subst.end()) term.value = it->second;
        }
    }
}

// Records sym→value (or orients two symbols consistently); composes with
// what is already known. Returns false on a definite constant clash.
bool unify(std::map<std::string, ValueRef>& subst, ValueRef a, ValueRef b) {
    auto chase = [&](ValueRef v) {
        while (v.symbolic) {
            auto it = subst.find(v.text);
            if (it == subst.end()) break;
            v = it->second;
        }
        return v;
    };
    a = chase(a);
    b = chase(b);
    if (a == b) return true;
    if (a.symbolic) {
        subst[a.text] = b;
        return true;
    }
    if (b.symbolic) {
        subst[b.text] = a;
        return true;
    }
    return false;
}

}  // namespace

SimplifyEventsResult simplify_events(const CtfEvent& e, const CausalDiagram& g) {
    SimplifyEventsResult out;
    CtfEvent current = e;
    for (bool changed = true; changed;) {
        changed = false;
        apply_substitution(current, out.unified);
        CtfEvent next;
        std::map<CtfVariable, ValueRef> seen;
        for (const auto& term : current) {
            CtfTerm t{minimize(term.var, g), term.value};
            if (!(t.var == term.var)) changed = true;
            auto self = t.var.subscript.find(t.var.base);
            if (self != t.var.subscript.end()) {
                // A self-intervened variable equals its set value; the event
                // holds exactly when the two values agree.
                if (!unify(out.unified, self->second, t.value)) {
                    out.zero = true;
                    return out;
                }
                changed = true;
                continue;
            }
            auto prior = seen.find(t.var);
            if (prior != seen.end()) {
                if (!unify(out.unified, prior->second, t.value)) {
                    out.zero = true;
                    return out;
                }
                changed = true;
                continue;
            }
            seen.emplace(t.var, t.value);
            next.push_back(std::move(t));
        }
        current = std::move(next);
    }
    out.events = std::move(current);
    return out;
}

namespace {

NameSet event_bases(const CtfEvent& events) {
    NameSet out;
    for (const auto& term : events) out.insert(term.var.base);
    return out;
}

}  // namespace

CtfFactor ancestral_factorize(const CtfEvent& events, const CausalDiagram& g) {
    std::set<CtfVariable> vars;
    for (const auto& term : events) {
        if (!vars.insert(term.var).second)
            throw input_error("event set carries two values for " + ctf_name(term.var));
    }
    if (ctf_ancestors(vars, g) != vars)
        throw input_error("event set is not ancestrally closed");

    CtfFactor out;
    for (const auto& term : events) {
        NameSet x = subscript_vars(term.var);
        CausalDiagram cut_in = mutilate(g, x);
        CtfVariable rewritten;
        rewritten.base = term.var.base;
        for (const auto& p : g.parents(term.var.base)) {
            auto direct = term.var.subscript.find(p);
            if (direct != term.var.subscript.end()) {
                rewritten.subscript.emplace(p, direct->second);
                continue;
            }
            // The value comes from the event of this parent as a
            // counterfactual ancestor: the part of x reaching p names it.
            NameSet reach = ancestors(cut_in, {p});
            CtfVariable parent_var;
            parent_var.base = p;
            for (const auto& [var, value] : term.var.subscript)
                if (reach.count(var)) parent_var.subscript.emplace(var, value);
            parent_var = minimize(parent_var, g);
            const CtfTerm* match = nullptr;
            for (const auto& cand : events)
                if (cand.var == parent_var) match = &cand;
            if (!match)
                throw input_error("no event for parent " + ctf_name(parent_var) + " of " +
                                  ctf_name(term.var));
            rewritten.subscript.emplace(p, match->value);
        }
        out.events.push_back({std::move(rewritten), term.value});
    }

    // Display order: latest variables first.
    std::vector<std::string> order = topological_order(g);
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::stable_sort(out.events.begin(), out.events.end(),
                     [&](const CtfTerm& a, const CtfTerm& b) {
                         return position[a.var.base] > position[b.var.base];
                     });
    return out;
}

std::vector<CtfFactor> factor_decompose(const CtfFactor& f, const CausalDiagram& g) {
    NameSet bases = event_bases(f.events);
    CausalDiagram sub = induced_subgraph(g, bases);
    std::vector<NameSet> components = c_components(sub);

    std::vector<std::string> order = topological_order(g);
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;

    std::vector<CtfFactor> blocks;
    for (const auto& comp : components) {
        CtfFactor block;
        for (const auto& term : f.events)
            if (comp.count(term.var.base)) block.events.push_back(term);
        blocks.push_back(std::move(block));
    }
    std::stable_sort(blocks.begin(), blocks.end(), [&](const CtfFactor& a, const CtfFactor& b) {
        auto latest = [&](const CtfFactor& x) {
            std::size_t best = 0;
            for (const auto& term : x.events) best = std::max(best, position[term.var.base]);
            return best;
        };
        return latest(a) > latest(b);
    });
    return blocks;
}

Estimand factor_from_joint(const CtfFactor& f, const NameSet& block,
                           const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::vector<CtfTerm> occurrences = f.events;
    std::stable_sort(occurrences.begin(), occurrences.end(),
                     [&](const CtfTerm& a, const CtfTerm& b) {
                         return position.at(a.var.base) < position.at(b.var.base);
                     });

    auto prefix_atom = [&](std::size_t through) {
        DistributionAtom atom;
        for (std::size_t i = 0; i < through; ++i)
            atom.event.emplace(ctf_name(occurrences[i].var), occurrences[i].value);
        return atom;
    };

    std::vector<Estimand> nums, dens;
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
        if (!block.count(occurrences[i].var.base)) continue;
        nums.push_back(make_atom(prefix_atom(i + 1)));
        if (i > 0) dens.push_back(make_atom(prefix_atom(i)));
    }
    // Adjacent block members telescope.
    for (auto& d : dens) {
        for (auto& n : nums) {
            if (n && d && expr_equal(n, d)) {
                n = nullptr;
                d = nullptr;
                break;
            }
        }
    }
    std::vector<Estimand> keep_n, keep_d;
    for (auto& n : nums)
        if (n) keep_n.push_back(n);
    for (auto& d : dens)
        if (d) keep_d.push_back(d);
    Estimand num = keep_n.empty() ? make_const(1.0) : make_prod(std::move(keep_n));
    if (keep_d.empty()) return num;
    return make_frac(num, make_prod(std::move(keep_d)));
}

ConsistencyResult check_consistency(const CtfFactor& f, const CausalDiagram& g) {
    NameSet bases = event_bases(f.events);
    if (c_components(induced_subgraph(g, bases)).size() != 1)
        throw input_error("consistency check requires a single c-component factor");

    ConsistencyResult out;
    auto clash = [&](const CtfTerm& a, const CtfTerm& b) {
        out.consistent = false;
        out.witness = "P(" + ctf_name(a.var) + "=" + a.value.text + ", " + ctf_name(b.var) + "=" +
                      b.value.text + ")";
    };
    for (std::size_t i = 0; i < f.events.size(); ++i) {
        for (std::size_t j = i + 1; j < f.events.size(); ++j) {
            const auto& a = f.events[i];
            const auto& b = f.events[j];
            // A variable's value against its use as an intervention elsewhere.
            auto sub = b.var.subscript.find(a.var.base);
            if (sub != b.var.subscript.end() && possibly_different(a.value, sub->second)) {
                clash(a, b);
                return out;
            }
            sub = a.var.subscript.find(b.var.base);
            if (sub != a.var.subscript.end() && possibly_different(b.value, sub->second)) {
                clash(a, b);
                return out;
            }
            // Two interventions on a shared variable must agree.
            for (const auto& [var, value] : a.var.subscript) {
                auto other = b.var.subscript.find(var);
                if (other != b.var.subscript.end() &&
                    possibly_different(value, other->second)) {
                    clash(a, b);
                    return out;
                }
            }
        }
    }
    return out;
}

}  // namespace ctfid
