#include "ctfid/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ctfid {

namespace {

const Expr::Const* const_node(const Estimand& e) { return std::get_if<Expr::Const>(&e->node); }
const DistributionAtom* as_atom(const Estimand& e) { return std::get_if<DistributionAtom>(&e->node); }
const Expr::Prod* as_prod(const Estimand& e) { return std::get_if<Expr::Prod>(&e->node); }
const Expr::Frac* as_frac(const Estimand& e) { return std::get_if<Expr::Frac>(&e->node); }
const Expr::Sum* as_sum(const Estimand& e) { return std::get_if<Expr::Sum>(&e->node); }

bool is_const(const Estimand& e, double v) {
    const auto* c = const_node(e);
    return c && c->value == v;
}

std::vector<Estimand> factor_list(const Estimand& e) {
    if (const auto* p = as_prod(e)) return p->factors;
    return {e};
}

}  // namespace

Estimand make_const(double value) {
    auto e = std::make_shared<Expr>();
    e->node = Expr::Const{value};
    return e;
}

Estimand make_atom(DistributionAtom atom) {
    auto e = std::make_shared<Expr>();
    e->node = std::move(atom);
    return e;
}

Estimand make_prod(std::vector<Estimand> factors) {
    std::vector<Estimand> flat;
    for (auto& f : factors) {
        if (const auto* p = as_prod(f))
            flat.insert(flat.end(), p->factors.begin(), p->factors.end());
        else
            flat.push_back(std::move(f));
    }
    if (flat.size() == 1) return flat.front();
    auto e = std::make_shared<Expr>();
    e->node = Expr::Prod{std::move(flat)};
    return e;
}

Estimand make_frac(Estimand num, Estimand den) {
    auto e = std::make_shared<Expr>();
    e->node = Expr::Frac{std::move(num), std::move(den)};
    return e;
}

Estimand make_sum(std::vector<SumBinder> binders, Estimand body) {
    if (binders.empty()) return body;
    if (const auto* s = as_sum(body)) {
        binders.insert(binders.end(), s->binders.begin(), s->binders.end());
        body = s->body;
    }
    auto e = std::make_shared<Expr>();
    e->node = Expr::Sum{std::move(binders), std::move(body)};
    return e;
}

bool expr_equal(const Estimand& a, const Estimand& b) {
    if (a == b) return true;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* ca = const_node(a)) return ca->value == const_node(b)->value;
    if (const auto* aa = as_atom(a)) return *aa == *as_atom(b);
    if (const auto* pa = as_prod(a)) {
        const auto* pb = as_prod(b);
        if (pa->factors.size() != pb->factors.size()) return false;
        for (size_t i = 0; i < pa->factors.size(); ++i)
            if (!expr_equal(pa->factors[i], pb->factors[i])) return false;
        return true;
    }
    if (const auto* fa = as_frac(a)) {
        const auto* fb = as_frac(b);
        return expr_equal(fa->num, fb->num) && expr_equal(fa->den, fb->den);
    }
    const auto* sa = as_sum(a);
    const auto* sb = as_sum(b);
    if (!(sa->binders == sb->binders)) return false;
    return expr_equal(sa->body, sb->body);
}

namespace {

void collect_free(const Estimand& e, std::set<std::string>& bound, std::set<std::string>& out) {
    if (const_node(e)) return;
    if (const auto* a = as_atom(e)) {
        auto scan = [&](const std::map<std::string, ValueRef>& m) {
            for (const auto& [var, v] : m)
                if (v.symbolic && !bound.count(v.text)) out.insert(v.text);
        };
        scan(a->intervened);
        scan(a->event);
        scan(a->given);
        return;
    }
    if (const auto* p = as_prod(e)) {
        for (const auto& f : p->factors) collect_free(f, bound, out);
        return;
    }
    if (const auto* f = as_frac(e)) {
        collect_free(f->num, bound, out);
        collect_free(f->den, bound, out);
        return;
    }
    const auto* s = as_sum(e);
    std::vector<std::string> added;
    for (const auto& b : s->binders)
        if (bound.insert(b.symbol).second) added.push_back(b.symbol);
    collect_free(s->body, bound, out);
    for (const auto& sym : added) bound.erase(sym);
}

int count_free(const Estimand& e, const std::string& symbol) {
    if (const_node(e)) return 0;
    if (const auto* a = as_atom(e)) {
        int n = 0;
        auto scan = [&](const std::map<std::string, ValueRef>& m) {
            for (const auto& [var, v] : m)
                if (v.symbolic && v.text == symbol) ++n;
        };
        scan(a->intervened);
        scan(a->event);
        scan(a->given);
        return n;
    }
    if (const auto* p = as_prod(e)) {
        int n = 0;
        for (const auto& f : p->factors) n += count_free(f, symbol);
        return n;
    }
    if (const auto* f = as_frac(e)) return count_free(f->num, symbol) + count_free(f->den, symbol);
    const auto* s = as_sum(e);
    for (const auto& b : s->binders)
        if (b.symbol == symbol) return 0;
    return count_free(s->body, symbol);
}

}  // namespace

std::set<std::string> free_symbols(const Estimand& e) {
    std::set<std::string> bound, out;
    collect_free(e, bound, out);
    return out;
}

bool mentions_symbol(const Estimand& e, const std::string& symbol) {
    return count_free(e, symbol) > 0;
}

Estimand substitute(const Estimand& e, const std::map<std::string, ValueRef>& map) {
    if (map.empty()) return e;
    if (const_node(e)) return e;
    if (const auto* a = as_atom(e)) {
        DistributionAtom out = *a;
        auto apply = [&](std::map<std::string, ValueRef>& m) {
            for (auto& [var, v] : m) {
                if (!v.symbolic) continue;
                auto it = map.find(v.text);
                if (it != map.end()) v = it->second;
            }
        };
        apply(out.intervened);
        apply(out.event);
        apply(out.given);
        return make_atom(std::move(out));
    }
    if (const auto* p = as_prod(e)) {
        std::vector<Estimand> out;
        out.reserve(p->factors.size());
        for (const auto& f : p->factors) out.push_back(substitute(f, map));
        return make_prod(std::move(out));
    }
    if (const auto* f = as_frac(e)) return make_frac(substitute(f->num, map), substitute(f->den, map));

    const auto* s = as_sum(e);
    std::map<std::string, ValueRef> inner = map;
    for (const auto& b : s->binders) inner.erase(b.symbol);
    std::vector<SumBinder> binders = s->binders;
    Estimand body = s->body;
    // A replacement value must not collide with a binder symbol.
    for (auto& b : binders) {
        bool captured = false;
        for (const auto& [from, to] : inner)
            if (to.symbolic && to.text == b.symbol) captured = true;
        if (!captured) continue;
        std::string renamed = b.symbol + "'";
        while (mentions_symbol(body, renamed)) renamed += "'";
        body = substitute(body, {{b.symbol, ValueRef::symbol(renamed)}});
        b.symbol = renamed;
    }
    if (inner.empty()) {
        if (binders == s->binders) return e;
        return make_sum(std::move(binders), std::move(body));
    }
    return make_sum(std::move(binders), substitute(body, inner));
}

Estimand rename_bound(const Estimand& e, SymbolPool& pool) {
    if (const_node(e) || as_atom(e)) return e;
    if (const auto* p = as_prod(e)) {
        std::vector<Estimand> out;
        out.reserve(p->factors.size());
        for (const auto& f : p->factors) out.push_back(rename_bound(f, pool));
        return make_prod(std::move(out));
    }
    if (const auto* f = as_frac(e)) return make_frac(rename_bound(f->num, pool), rename_bound(f->den, pool));

    const auto* s = as_sum(e);
    std::vector<SumBinder> binders = s->binders;
    Estimand body = rename_bound(s->body, pool);
    std::map<std::string, ValueRef> renames;
    for (auto& b : binders) {
        if (b.symbol.rfind('#', 0) != 0) continue;
        std::string name = pool.fresh(b.variable);
        renames.emplace(b.symbol, ValueRef::symbol(name));
        b.symbol = name;
    }
    if (!renames.empty()) body = substitute(body, renames);
    return make_sum(std::move(binders), std::move(body));
}

namespace {

// Removes the unique free occurrence of `symbol`, which must sit in the
// event map of a single reachable atom keyed by `variable`. Returns null
// when the occurrence is not in summable position.
Estimand try_absorb(const Estimand& e, const std::string& symbol, const std::string& variable) {
    if (const auto* a = as_atom(e)) {
        auto it = a->event.find(variable);
        if (it == a->event.end() || !it->second.symbolic || it->second.text != symbol) return nullptr;
        DistributionAtom out = *a;
        out.event.erase(variable);
        return make_atom(std::move(out));
    }
    if (const auto* p = as_prod(e)) {
        std::vector<Estimand> out = p->factors;
        for (auto& f : out) {
            if (count_free(f, symbol) == 0) continue;
            Estimand replaced = try_absorb(f, symbol, variable);
            if (!replaced) return nullptr;
            f = replaced;
            return make_prod(std::move(out));
        }
        return nullptr;
    }
    if (const auto* f = as_frac(e)) {
        if (count_free(f->den, symbol) > 0) return nullptr;
        Estimand num = try_absorb(f->num, symbol, variable);
        if (!num) return nullptr;
        return make_frac(num, f->den);
    }
    if (const auto* s = as_sum(e)) {
        for (const auto& b : s->binders)
            if (b.symbol == symbol) return nullptr;
        Estimand body = try_absorb(s->body, symbol, variable);
        if (!body) return nullptr;
        return make_sum(s->binders, body);
    }
    return nullptr;
}

Estimand simplify_pass(const Estimand& e);

Estimand simplify_prod(const Expr::Prod& p) {
    std::vector<Estimand> flat;
    double scale = 1.0;
    for (const auto& raw : p.factors) {
        Estimand f = simplify_pass(raw);
        if (const auto* c = const_node(f)) {
            if (c->value == 0.0) return make_const(0.0);
            scale *= c->value;
            continue;
        }
        if (const auto* inner = as_prod(f))
            flat.insert(flat.end(), inner->factors.begin(), inner->factors.end());
        else
            flat.push_back(f);
    }
    if (flat.empty()) return make_const(scale);
    if (scale != 1.0) flat.insert(flat.begin(), make_const(scale));
    return make_prod(std::move(flat));
}

Estimand simplify_frac(const Expr::Frac& fr) {
    Estimand num = simplify_pass(fr.num);
    Estimand den = simplify_pass(fr.den);
    if (const auto* fn = as_frac(num)) {
        den = make_prod({den, fn->den});
        num = fn->num;
    }
    if (const auto* fd = as_frac(den)) {
        num = make_prod({num, fd->den});
        den = fd->num;
    }
    if (is_const(num, 0.0) && !is_const(den, 0.0)) return make_const(0.0);

    std::vector<Estimand> nf = factor_list(num);
    std::vector<Estimand> df = factor_list(den);
    bool cancelled = false;
    for (auto& d : df) {
        if (is_const(d, 0.0)) continue;
        for (auto& n : nf) {
            if (!n || is_const(n, 0.0)) continue;
            if (expr_equal(n, d)) {
                n = nullptr;
                d = nullptr;
                cancelled = true;
                break;
            }
        }
    }
    if (cancelled) {
        std::vector<Estimand> nk, dk;
        for (auto& n : nf)
            if (n) nk.push_back(n);
        for (auto& d : df)
            if (d) dk.push_back(d);
        num = nk.empty() ? make_const(1.0) : make_prod(std::move(nk));
        den = dk.empty() ? make_const(1.0) : make_prod(std::move(dk));
    }
    if (is_const(den, 1.0)) return num;
    if (expr_equal(num, den) && !is_const(num, 0.0)) return make_const(1.0);
    if (const auto* cn = const_node(num)) {
        if (const auto* cd = const_node(den)) {
            if (cd->value != 0.0) return make_const(cn->value / cd->value);
        }
    }
    return make_frac(num, den);
}

Estimand simplify_sum(const Expr::Sum& s) {
    Estimand body = simplify_pass(s.body);
    std::vector<SumBinder> binders = s.binders;

    // Marginalize binders whose only free occurrence is an event entry.
    for (size_t i = 0; i < binders.size();) {
        const SumBinder& b = binders[i];
        if (count_free(body, b.symbol) == 1) {
            if (Estimand absorbed = try_absorb(body, b.symbol, b.variable)) {
                body = simplify_pass(absorbed);
                binders.erase(binders.begin() + i);
                continue;
            }
        }
        ++i;
    }
    if (binders.empty()) return body;
    if (is_const(body, 0.0)) return make_const(0.0);

    // Pull factors free of every binder out of the sum, and split the rest
    // into independent groups connected by shared binder symbols.
    std::vector<Estimand> factors = factor_list(body);
    size_t groups = binders.size();
    std::vector<size_t> parent(groups);
    for (size_t i = 0; i < groups; ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<Estimand> outside;
    std::vector<std::vector<Estimand>> hits(factors.size());
    std::vector<std::vector<size_t>> factor_binders(factors.size());
    for (size_t fi = 0; fi < factors.size(); ++fi) {
        for (size_t bi = 0; bi < binders.size(); ++bi)
            if (count_free(factors[fi], binders[bi].symbol) > 0) factor_binders[fi].push_back(bi);
        if (factor_binders[fi].empty())
            outside.push_back(factors[fi]);
        else
            for (size_t k = 1; k < factor_binders[fi].size(); ++k)
                parent[find(factor_binders[fi][0])] = find(factor_binders[fi][k]);
    }
    std::map<size_t, std::pair<std::vector<SumBinder>, std::vector<Estimand>>> grouped;
    for (size_t bi = 0; bi < binders.size(); ++bi) grouped[find(bi)].first.push_back(binders[bi]);
    for (size_t fi = 0; fi < factors.size(); ++fi)
        if (!factor_binders[fi].empty()) grouped[find(factor_binders[fi][0])].second.push_back(factors[fi]);

    bool split = !outside.empty() || grouped.size() > 1;
    if (!split) return make_sum(std::move(binders), body);

    std::vector<Estimand> result = std::move(outside);
    for (auto& [root, group] : grouped) {
        auto& [gb, gf] = group;
        Estimand gbody = gf.empty() ? make_const(1.0) : make_prod(std::move(gf));
        result.push_back(make_sum(std::move(gb), std::move(gbody)));
    }
    return make_prod(std::move(result));
}

Estimand simplify_pass(const Estimand& e) {
    if (const_node(e)) return e;
    if (const auto* a = as_atom(e)) {
        DistributionAtom out = *a;
        for (auto it = out.event.begin(); it != out.event.end();) {
            auto g = out.given.find(it->first);
            if (g != out.given.end()) {
                if (forced_equal(it->second, g->second)) {
                    it = out.event.erase(it);
                    continue;
                }
                if (!it->second.symbolic && !g->second.symbolic) return make_const(0.0);
            }
            ++it;
        }
        if (out.event.empty()) return make_const(1.0);
        return make_atom(std::move(out));
    }
    if (const auto* p = as_prod(e)) return simplify_prod(*p);
    if (const auto* f = as_frac(e)) return simplify_frac(*f);
    return simplify_sum(*as_sum(e));
}

}  // namespace

Estimand simplify(const Estimand& e) {
    Estimand cur = e;
    for (int i = 0; i < 50; ++i) {
        Estimand next = simplify_pass(cur);
        if (expr_equal(next, cur)) return next;
        cur = next;
    }
    return cur;
}

namespace {

std::string format_const(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string assignment_text(const std::map<std::string, ValueRef>& m) {
    std::string out;
    for (const auto& [var, v] : m) {
        if (!out.empty()) out += ",";
        out += var + "=" + v.text;
    }
    return out;
}

// P(y,z | z) patterns stay as fractions internally; display collapses a
// fraction of two atoms over the same distribution into one conditional.
bool conditional_collapse(const Expr::Frac& f, DistributionAtom& out) {
    const auto* num = as_atom(f.num);
    const auto* den = as_atom(f.den);
    if (!num || !den) return false;
    if (num->intervened != den->intervened || num->given != den->given) return false;
    for (const auto& [var, v] : den->event) {
        auto it = num->event.find(var);
        if (it == num->event.end() || !(it->second == v)) return false;
    }
    if (den->event.size() >= num->event.size()) return false;
    out = *num;
    for (const auto& [var, v] : den->event) {
        out.event.erase(var);
        out.given.emplace(var, v);
    }
    return true;
}

enum class Prec { Sum, Prod, Atom };

std::string render_impl(const Estimand& e, RenderFormat fmt, Prec ctx);

std::string render_atom(const DistributionAtom& a, RenderFormat fmt) {
    bool latex = fmt == RenderFormat::Latex;
    std::string out = "P";
    if (!a.intervened.empty()) out += "_{" + assignment_text(a.intervened) + "}";
    out += latex ? "\\left(" : "(";
    out += assignment_text(a.event);
    if (!a.given.empty()) out += (latex ? " \\mid " : " | ") + assignment_text(a.given);
    out += latex ? "\\right)" : ")";
    return out;
}

std::string render_impl(const Estimand& e, RenderFormat fmt, Prec ctx) {
    bool latex = fmt == RenderFormat::Latex;
    if (const auto* c = const_node(e)) return format_const(c->value);
    if (const auto* a = as_atom(e)) return render_atom(*a, fmt);
    if (const auto* p = as_prod(e)) {
        std::string out;
        for (const auto& f : p->factors) {
            if (!out.empty()) out += " ";
            out += render_impl(f, fmt, Prec::Prod);
        }
        if (ctx == Prec::Atom) out = latex ? "\\left(" + out + "\\right)" : "(" + out + ")";
        return out;
    }
    if (const auto* f = as_frac(e)) {
        DistributionAtom collapsed;
        if (conditional_collapse(*f, collapsed)) return render_atom(collapsed, fmt);
        if (latex)
            return "\\frac{" + render_impl(f->num, fmt, Prec::Sum) + "}{" +
                   render_impl(f->den, fmt, Prec::Sum) + "}";
        return render_impl(f->num, fmt, Prec::Atom) + " / " + render_impl(f->den, fmt, Prec::Atom);
    }
    const auto* s = as_sum(e);
    std::string syms;
    for (const auto& b : s->binders) {
        if (!syms.empty()) syms += ",";
        syms += b.symbol;
    }
    std::string out = (latex ? "\\sum_{" : "Σ_{") + syms + "} " + render_impl(s->body, fmt, Prec::Prod);
    if (ctx != Prec::Sum) out = latex ? "\\left(" + out + "\\right)" : "(" + out + ")";
    return out;
}

nlohmann::json value_to_json(const ValueRef& v) {
    if (v.symbolic) return nlohmann::json{{"sym", v.text}};
    return nlohmann::json{{"const", v.text}};
}

ValueRef value_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != 1)
        throw input_error("estimand value must be {\"const\": ...} or {\"sym\": ...}");
    if (j.contains("const")) return ValueRef::constant(j.at("const").get<std::string>());
    if (j.contains("sym")) return ValueRef::symbol(j.at("sym").get<std::string>());
    throw input_error("estimand value must be {\"const\": ...} or {\"sym\": ...}");
}

nlohmann::json assignment_to_json(const std::map<std::string, ValueRef>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [var, v] : m) j[var] = value_to_json(v);
    return j;
}

std::map<std::string, ValueRef> assignment_from_json(const nlohmann::json& j) {
    std::map<std::string, ValueRef> m;
    if (!j.is_object()) throw input_error("estimand assignment must be an object");
    for (const auto& [var, v] : j.items()) m.emplace(var, value_from_json(v));
    return m;
}

nlohmann::json expr_to_json(const Estimand& e) {
    if (const auto* c = const_node(e)) return {{"kind", "const"}, {"value", c->value}};
    if (const auto* a = as_atom(e)) {
        nlohmann::json j{{"kind", "atom"},
                         {"intervened", assignment_to_json(a->intervened)},
                         {"event", assignment_to_json(a->event)}};
        if (!a->given.empty()) j["given"] = assignment_to_json(a->given);
        return j;
    }
    if (const auto* p = as_prod(e)) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : p->factors) factors.push_back(expr_to_json(f));
        return {{"kind", "prod"}, {"factors", factors}};
    }
    if (const auto* f = as_frac(e))
        return {{"kind", "frac"}, {"num", expr_to_json(f->num)}, {"den", expr_to_json(f->den)}};
    const auto* s = as_sum(e);
    nlohmann::json binders = nlohmann::json::array();
    for (const auto& b : s->binders) binders.push_back({{"sym", b.symbol}, {"var", b.variable}});
    return {{"kind", "sum"}, {"binders", binders}, {"body", expr_to_json(s->body)}};
}

Estimand expr_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw input_error("estimand node needs a \"kind\"");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "const") return make_const(j.at("value").get<double>());
    if (kind == "atom") {
        DistributionAtom a;
        if (j.contains("intervened")) a.intervened = assignment_from_json(j.at("intervened"));
        a.event = assignment_from_json(j.at("event"));
        if (j.contains("given")) a.given = assignment_from_json(j.at("given"));
        return make_atom(std::move(a));
    }
    if (kind == "prod") {
        std::vector<Estimand> factors;
        for (const auto& f : j.at("factors")) factors.push_back(expr_from_json(f));
        auto e = std::make_shared<Expr>();
        e->node = Expr::Prod{std::move(factors)};
        return e;
    }
    if (kind == "frac") return make_frac(expr_from_json(j.at("num")), expr_from_json(j.at("den")));
    if (kind == "sum") {
        std::vector<SumBinder> binders;
        for (const auto& b : j.at("binders"))
            binders.push_back({b.at("sym").get<std::string>(), b.at("var").get<std::string>()});
        auto e = std::make_shared<Expr>();
        e->node = Expr::Sum{std::move(binders), expr_from_json(j.at("body"))};
        return e;
    }
    throw input_error("unknown estimand kind: " + kind);
}

}  // namespace

std::string render(const Estimand& e, RenderFormat format) {
    if (format == RenderFormat::Json) return estimand_to_json(e);
    return render_impl(e, format, Prec::Sum);
}

std::string estimand_to_json(const Estimand& e) { return expr_to_json(e).dump(2); }

Estimand estimand_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw input_error(std::string("estimand JSON: ") + err.what());
    }
    return expr_from_json(j);
}

namespace {

std::string resolve(const ValueRef& v, const std::map<std::string, std::string>& binding) {
    if (!v.symbolic) return v.text;
    auto it = binding.find(v.text);
    if (it == binding.end()) throw evaluation_error("unbound symbol: " + v.text);
    return it->second;
}

std::map<std::string, std::string> resolve_all(const std::map<std::string, ValueRef>& m,
                                               const std::map<std::string, std::string>& binding) {
    std::map<std::string, std::string> out;
    for (const auto& [var, v] : m) out.emplace(var, resolve(v, binding));
    return out;
}

double evaluate_impl(const Estimand& e, const TableCollection& tables,
                     std::map<std::string, std::string>& binding) {
    if (const auto* c = const_node(e)) return c->value;
    if (const auto* a = as_atom(e)) {
        auto intervened = resolve_all(a->intervened, binding);
        const DistributionTable& table = tables.lookup(intervened);
        auto event = resolve_all(a->event, binding);
        if (a->given.empty()) return table.marginal(event);
        auto given = resolve_all(a->given, binding);
        double mass = table.marginal(given);
        if (mass == 0.0) throw zero_conditioning_error("conditioning event has zero probability");
        auto joint = given;
        for (const auto& [var, val] : event) {
            auto it = joint.find(var);
            if (it != joint.end()) {
                if (it->second != val) return 0.0;
                continue;
            }
            joint.emplace(var, val);
        }
        return table.marginal(joint) / mass;
    }
    if (const auto* p = as_prod(e)) {
        double out = 1.0;
        for (const auto& f : p->factors) out *= evaluate_impl(f, tables, binding);
        return out;
    }
    if (const auto* f = as_frac(e)) {
        double den = evaluate_impl(f->den, tables, binding);
        if (den == 0.0) throw zero_conditioning_error("conditioning event has zero probability");
        return evaluate_impl(f->num, tables, binding) / den;
    }
    const auto* s = as_sum(e);
    std::vector<std::pair<std::string, std::vector<std::string>>> ranges;
    for (const auto& b : s->binders) ranges.emplace_back(b.symbol, tables.domain(b.variable));
    std::vector<std::pair<std::string, std::string>> saved;
    for (const auto& [sym, range] : ranges) {
        auto it = binding.find(sym);
        if (it != binding.end()) saved.emplace_back(sym, it->second);
    }
    double total = 0.0;
    std::function<void(size_t)> walk = [&](size_t i) {
        if (i == ranges.size()) {
            total += evaluate_impl(s->body, tables, binding);
            return;
        }
        for (const auto& value : ranges[i].second) {
            binding[ranges[i].first] = value;
            walk(i + 1);
        }
        binding.erase(ranges[i].first);
    };
    walk(0);
    for (const auto& [sym, value] : saved) binding[sym] = value;
    return total;
}

}  // namespace

double evaluate(const Estimand& e, const TableCollection& tables,
                const std::map<std::string, std::string>& binding) {
    std::map<std::string, std::string> env = binding;
    return evaluate_impl(e, tables, env);
}

}  // namespace ctfid
