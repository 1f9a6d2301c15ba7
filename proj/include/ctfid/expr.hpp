#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ctfid/dist.hpp"
#include "ctfid/value.hpp"

namespace ctfid {

// One probability expression over an available distribution: the subscript
// names the intervened variables, `event` the outcome assignment, `given`
// an optional conditioning assignment.
struct DistributionAtom {
    std::map<std::string, ValueRef> intervened;
    std::map<std::string, ValueRef> event;
    std::map<std::string, ValueRef> given;

    bool operator==(const DistributionAtom& o) const {
        return intervened == o.intervened && event == o.event && given == o.given;
    }
};

struct Expr;
using Estimand = std::shared_ptr<const Expr>;

// Binds `symbol` to every value in the domain of `variable`.
struct SumBinder {
    std::string symbol;
    std::string variable;
    bool operator==(const SumBinder& o) const {
        return symbol == o.symbol && variable == o.variable;
    }
};

struct Expr {
    struct Const {
        double value;
    };
    struct Prod {
        std::vector<Estimand> factors;
    };
    struct Frac {
        Estimand num, den;
    };
    struct Sum {
        std::vector<SumBinder> binders;
        Estimand body;
    };
    std::variant<Const, DistributionAtom, Prod, Frac, Sum> node;
};

Estimand make_const(double value);
Estimand make_atom(DistributionAtom atom);
// Flattens nested products.
Estimand make_prod(std::vector<Estimand> factors);
Estimand make_frac(Estimand num, Estimand den);
// Merges directly nested sums; an empty binder list returns the body.
Estimand make_sum(std::vector<SumBinder> binders, Estimand body);

bool expr_equal(const Estimand& a, const Estimand& b);

// Symbols with at least one free occurrence.
std::set<std::string> free_symbols(const Estimand& e);
bool mentions_symbol(const Estimand& e, const std::string& symbol);

// Replaces free occurrences of the mapped symbols.
Estimand substitute(const Estimand& e, const std::map<std::string, ValueRef>& map);

// Renames bound symbols whose name starts with '#' to fresh pool names.
Estimand rename_bound(const Estimand& e, SymbolPool& pool);

// Conservative syntactic simplification: unit and zero collapse, product
// flattening, cancellation of structurally equal factors across a fraction,
// factoring symbol-free terms out of sums, and marginalization of bound
// event entries. Preserves evaluation exactly.
Estimand simplify(const Estimand& e);

enum class RenderFormat { Text, Latex, Json };
std::string render(const Estimand& e, RenderFormat format);

std::string estimand_to_json(const Estimand& e);
Estimand estimand_from_json(const std::string& text);

// Evaluates under the tables with the given symbol binding. Throws
// evaluation_error for unbound symbols or missing tables and
// zero_conditioning_error when a conditioning event has zero mass.
double evaluate(const Estimand& e, const TableCollection& tables,
                const std::map<std::string, std::string>& binding = {});

}  // namespace ctfid
