#include "ctfid/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace ctfid {

std::string status_name(Status s) {
    switch (s) {
        case Status::Identified: return "identified";
        case Status::Fail: return "fail";
        case Status::Zero: return "zero";
        case Status::One: return "one";
    }
    return "unknown";
}

namespace {

void reserve_value(SymbolPool& pool, const ValueRef& v) {
    if (v.symbolic) pool.reserve(v.text);
}

void reserve_term(SymbolPool& pool, const NestedTerm& t) {
    for (const auto& [var, value] : t.subscript) {
        if (std::holds_alternative<ValueRef>(value))
            reserve_value(pool, std::get<ValueRef>(value));
        else
            reserve_term(pool, *std::get<std::shared_ptr<NestedTerm>>(value));
    }
}

void reserve_event(SymbolPool& pool, const NestedEvent& e) {
    for (const auto& term : e) {
        reserve_term(pool, term.term);
        reserve_value(pool, term.value);
    }
}

void reserve_domains(SymbolPool& pool, const CausalDiagram& g) {
    for (const auto& v : g.variables())
        for (const auto& d : v.domain) pool.reserve(d);
}

void validate_spec(const AvailableSpec& spec, const CausalDiagram& g) {
    if (spec.sets.empty()) throw input_error("no distributions are available");
    for (const auto& z : spec.sets)
        for (const auto& v : z)
            if (!g.has_variable(v)) throw input_error("available set names unknown variable " + v);
}

std::string format_z(const NameSet& z) {
    std::string out = "{";
    bool first = true;
    for (const auto& v : z) {
        if (!first) out += ", ";
        out += v;
        first = false;
    }
    return out + "}";
}

struct CoreOutcome {
    Status status = Status::Identified;
    Estimand product;
    std::vector<SumBinder> completions;
    std::map<std::string, ValueRef> unified;
    std::vector<FactorDiagnostic> diagnostics;
};

// Shared back end of both entry points: takes a flat conjunction, closes it
// under counterfactual ancestry, factorizes, and identifies every factor.
CoreOutcome identify_conjunction(const CtfEvent& events, const AvailableSpec& spec,
                                 const CausalDiagram& g, SymbolPool& pool) {
    CoreOutcome out;
    SimplifyEventsResult simplified = simplify_events(events, g);
    out.unified = simplified.unified;
    if (simplified.zero) {
        out.status = Status::Zero;
        return out;
    }
    if (simplified.events.empty()) {
        out.status = Status::One;
        out.product = make_const(1);
        return out;
    }

    std::set<CtfVariable> vars;
    for (const auto& term : simplified.events) vars.insert(term.var);
    CtfEvent full = simplified.events;
    for (const auto& v : ctf_ancestors(vars, g)) {
        if (vars.count(v)) continue;
        std::string sym = pool.fresh(v.base);
        out.completions.push_back({sym, v.base});
        full.push_back({v, ValueRef::symbol(sym)});
    }

    CtfFactor factor = ancestral_factorize(full, g);
    bool all_ok = true;
    std::vector<Estimand> parts;
    for (const auto& block : factor_decompose(factor, g)) {
        FactorIdentification fid = identify_ctf_factor(block, spec, g);
        FactorDiagnostic diag;
        diag.factor = render_factor(block);
        diag.consistent = fid.consistent;
        diag.witness = fid.witness;
        diag.identified = fid.identified;
        if (fid.used_z) diag.used_z = format_z(*fid.used_z);
        out.diagnostics.push_back(std::move(diag));
        if (fid.identified)
            parts.push_back(fid.estimand);
        else
            all_ok = false;
    }
    if (!all_ok) {
        out.status = Status::Fail;
        return out;
    }
    out.status = Status::Identified;
    out.product = make_prod(std::move(parts));
    return out;
}

ValueRef chase(const std::map<std::string, ValueRef>& unified, ValueRef v) {
    while (v.symbolic) {
        auto it = unified.find(v.text);
        if (it == unified.end()) break;
        v = it->second;
    }
    return v;
}

}  // namespace

IdentificationResult ctf_id(const Query& q, const AvailableSpec& spec, const CausalDiagram& g) {
    if (!q.conditions.empty())
        throw input_error("query has a conditioning side; use the conditional routine");
    if (q.outcomes.empty()) throw input_error("query has no outcome events");
    validate_spec(spec, g);

    SymbolPool pool;
    reserve_event(pool, q.outcomes);
    reserve_domains(pool, g);

    UnnestResult un = unnest(q.outcomes, g, pool);
    CoreOutcome core = identify_conjunction(un.event, spec, g, pool);

    IdentificationResult res;
    res.status = core.status;
    res.diagnostics = std::move(core.diagnostics);
    if (core.status == Status::Zero) {
        res.estimand = make_const(0);
        return res;
    }
    if (core.status == Status::One) {
        res.estimand = make_const(1);
        return res;
    }
    if (core.status == Status::Fail) return res;

    std::set<std::string> free = free_symbols(core.product);
    std::vector<SumBinder> binders;
    for (const auto& b : un.binders)
        if (free.count(b.symbol)) binders.push_back(b);
    for (const auto& b : core.completions)
        if (free.count(b.symbol)) binders.push_back(b);
    res.estimand = simplify(rename_bound(make_sum(std::move(binders), core.product), pool));
    return res;
}

std::vector<std::vector<CtfVariable>> ancestral_components(const std::vector<CtfVariable>& w,
                                                           const std::vector<CtfVariable>& x,
                                                           const CausalDiagram& g) {
    std::set<CtfVariable> conditioning;
    for (const auto& xv : x) conditioning.insert(minimize(xv, g));

    std::map<std::string, std::string> uf;
    auto find = [&](const std::string& a) {
        std::string r = a;
        while (uf.at(r) != r) r = uf.at(r);
        std::string cur = a;
        while (uf.at(cur) != r) {
            std::string next = uf.at(cur);
            uf[cur] = r;
            cur = next;
        }
        return r;
    };
    auto unite = [&](const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra != rb) uf[std::min(ra, rb)] = std::max(ra, rb);
    };

    std::vector<std::set<CtfVariable>> sets;
    for (const auto& wt : w) {
        std::set<CtfVariable> members = ctf_ancestors({wt}, g);
        NameSet prims;
        for (const auto& xv : conditioning)
            if (members.count(xv)) prims.insert(xv.base);
        sets.push_back(ctf_ancestors({wt}, mutilate(g, {}, prims)));
    }

    for (const auto& a : sets)
        for (const auto& m : a)
            if (!uf.count(m.base)) uf[m.base] = m.base;
    for (const auto& a : sets) {
        const std::string& head = a.begin()->base;
        for (const auto& m : a) unite(head, m.base);
    }
    for (const auto& [u, v] : g.bidirected())
        if (uf.count(u) && uf.count(v)) unite(u, v);

    std::map<std::string, std::set<CtfVariable>> grouped;
    for (const auto& a : sets)
        for (const auto& m : a) grouped[find(m.base)].insert(m);

    std::vector<std::vector<CtfVariable>> blocks;
    for (const auto& [root, members] : grouped)
        blocks.push_back(std::vector<CtfVariable>(members.begin(), members.end()));
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return blocks;
}

IdentificationResult cond_ctf_id(const Query& q, const AvailableSpec& spec,
                                 const CausalDiagram& g) {
    if (q.conditions.empty()) return ctf_id(q, spec, g);
    if (q.outcomes.empty()) throw input_error("query has no outcome events");
    validate_spec(spec, g);

    for (const auto& t : q.conditions) {
        if (is_nested(t.term))
            throw input_error("conditioning events cannot carry nested interventions");
        if (t.value.symbolic) throw input_error("conditioning values must be constants");
        for (const auto& [var, value] : t.term.subscript)
            if (std::get<ValueRef>(value).symbolic)
                throw input_error("conditioning interventions must be constants");
    }

    SymbolPool pool;
    reserve_event(pool, q.outcomes);
    reserve_event(pool, q.conditions);
    reserve_domains(pool, g);

    CtfEvent evx;
    for (const auto& t : q.conditions) {
        CtfVariable v{t.term.base, {}};
        for (const auto& [var, value] : t.term.subscript)
            v.subscript.emplace(var, std::get<ValueRef>(value));
        evx.push_back({v, t.value});
    }
    SimplifyEventsResult sx = simplify_events(evx, g);
    if (sx.zero) throw zero_conditioning_error("conditioning event has probability zero");
    if (sx.events.empty()) return ctf_id(Query{q.outcomes, {}}, spec, g);

    UnnestResult un = unnest(q.outcomes, g, pool);
    CtfEvent combined = un.event;
    combined.insert(combined.end(), evx.begin(), evx.end());
    SimplifyEventsResult sc = simplify_events(combined, g);
    if (sc.zero) return {Status::Zero, make_const(0), {}};

    std::set<CtfVariable> xvars;
    for (const auto& t : sx.events) xvars.insert(t.var);
    CtfEvent yside, xside;
    for (const auto& t : sc.events)
        (xvars.count(t.var) ? xside : yside).push_back(t);
    if (yside.empty()) return {Status::One, make_const(1), {}};

    std::set<CtfVariable> allvars;
    for (const auto& t : sc.events) allvars.insert(t.var);
    std::set<CtfVariable> wstar = ctf_ancestors(allvars, g);

    std::vector<CtfVariable> xlist;
    for (const auto& t : xside) xlist.push_back(t.var);
    auto components =
        ancestral_components(std::vector<CtfVariable>(wstar.begin(), wstar.end()), xlist, g);

    NameSet ybases;
    for (const auto& t : yside) ybases.insert(t.var.base);
    NameSet dbases;
    for (const auto& comp : components) {
        bool relevant = false;
        for (const auto& m : comp)
            if (ybases.count(m.base)) relevant = true;
        if (!relevant) continue;
        for (const auto& m : comp) dbases.insert(m.base);
    }

    std::map<CtfVariable, ValueRef> value_of;
    for (const auto& t : xside) value_of.emplace(t.var, t.value);
    std::vector<SumBinder> sy_binders;
    std::map<std::string, ValueRef> sy_to_query;
    for (const auto& t : yside) {
        std::string sym = pool.fresh("s" + t.var.base);
        sy_binders.push_back({sym, t.var.base});
        sy_to_query.emplace(sym, t.value);
        value_of.emplace(t.var, ValueRef::symbol(sym));
    }
    std::vector<SumBinder> completion_binders;
    CtfEvent wevents;
    for (const auto& m : wstar) {
        auto it = value_of.find(m);
        if (it != value_of.end()) {
            wevents.push_back({m, it->second});
            continue;
        }
        std::string sym = pool.fresh(m.base);
        if (dbases.count(m.base)) completion_binders.push_back({sym, m.base});
        wevents.push_back({m, ValueRef::symbol(sym)});
    }

    CtfFactor full = ancestral_factorize(wevents, g);
    CtfEvent dconj;
    for (const auto& t : full.events)
        if (dbases.count(t.var.base)) dconj.push_back(t);

    CoreOutcome core = identify_conjunction(dconj, spec, g, pool);
    IdentificationResult res;
    res.diagnostics = std::move(core.diagnostics);
    if (core.status == Status::Fail) {
        res.status = Status::Fail;
        return res;
    }
    if (core.status == Status::Zero)
        throw zero_conditioning_error("conditioning event has probability zero");
    if (core.status == Status::One) {
        res.status = Status::One;
        res.estimand = make_const(1);
        return res;
    }

    std::set<std::string> den_free = free_symbols(core.product);
    std::map<std::string, ValueRef> num_map;
    for (const auto& [sym, queryval] : sy_to_query) {
        ValueRef target = chase(core.unified, ValueRef::symbol(sym));
        if (!target.symbolic) {
            if (!queryval.symbolic && target.text != queryval.text)
                return {Status::Zero, make_const(0), std::move(res.diagnostics)};
            continue;
        }
        auto [pos, inserted] = num_map.emplace(target.text, queryval);
        if (!inserted && possibly_different(pos->second, queryval))
            return {Status::Zero, make_const(0), std::move(res.diagnostics)};
    }
    Estimand num_body = substitute(core.product, num_map);
    std::set<std::string> num_free = free_symbols(num_body);

    std::vector<SumBinder> shared;
    shared.insert(shared.end(), un.binders.begin(), un.binders.end());
    shared.insert(shared.end(), completion_binders.begin(), completion_binders.end());
    shared.insert(shared.end(), core.completions.begin(), core.completions.end());

    std::vector<SumBinder> num_binders, den_binders;
    for (const auto& b : shared) {
        if (num_free.count(b.symbol)) num_binders.push_back(b);
        if (den_free.count(b.symbol)) den_binders.push_back(b);
    }
    for (const auto& b : sy_binders)
        if (den_free.count(b.symbol)) den_binders.push_back(b);

    Estimand est = make_frac(make_sum(std::move(num_binders), num_body),
                             make_sum(std::move(den_binders), core.product));
    res.status = Status::Identified;
    res.estimand = simplify(rename_bound(est, pool));
    return res;
}

IdentificationResult identify_query(const Query& q, const AvailableSpec& spec,
                                    const CausalDiagram& g) {
    if (q.conditions.empty()) return ctf_id(q, spec, g);
    return cond_ctf_id(q, spec, g);
}

}  // namespace ctfid
