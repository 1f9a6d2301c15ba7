#include "ctfid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ctfid {

namespace {

constexpr std::size_t kMaxExogenousStates = std::size_t{1} << 24;

std::size_t state_count(const std::vector<ExogenousVariable>& exogenous) {
    std::size_t total = 1;
    for (const auto& u : exogenous) {
        if (u.size <= 0) throw input_error("exogenous variable " + u.name + " has empty domain");
        if (total > kMaxExogenousStates / static_cast<std::size_t>(u.size))
            throw input_error("exogenous state space exceeds 2^24");
        total *= static_cast<std::size_t>(u.size);
    }
    if (total > kMaxExogenousStates) throw input_error("exogenous state space exceeds 2^24");
    return total;
}

}  // namespace

DiscreteSCM::DiscreteSCM(CausalDiagram diagram, std::vector<ExogenousVariable> exogenous,
                         std::vector<double> p_u, std::map<std::string, Mechanism> mechanisms)
    : diagram_(std::move(diagram)),
      exogenous_(std::move(exogenous)),
      p_u_(std::move(p_u)),
      mechanisms_(std::move(mechanisms)) {
    std::size_t states = state_count(exogenous_);
    if (p_u_.size() != states)
        throw input_error("p_u has " + std::to_string(p_u_.size()) + " entries, expected " +
                          std::to_string(states));
    double total = 0.0;
    for (double p : p_u_) {
        if (p < -1e-12) throw input_error("p_u has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw input_error("p_u does not sum to 1");

    std::map<std::string, int> exo_sizes;
    for (const auto& u : exogenous_) {
        if (!exo_sizes.emplace(u.name, u.size).second)
            throw input_error("duplicate exogenous variable " + u.name);
        if (diagram_.has_variable(u.name))
            throw input_error(u.name + " is both exogenous and endogenous");
    }

    std::map<std::string, std::set<std::string>> exo_users;
    for (const auto& name : diagram_.variable_names()) {
        auto it = mechanisms_.find(name);
        if (it == mechanisms_.end()) throw input_error("no mechanism for " + name);
        const Mechanism& f = it->second;
        NameSet declared_parents = diagram_.parents(name);
        NameSet given_parents(f.parent_inputs.begin(), f.parent_inputs.end());
        if (given_parents != declared_parents ||
            given_parents.size() != f.parent_inputs.size())
            throw input_error("mechanism for " + name + " does not take exactly its parents");
        std::size_t rows = 1;
        for (const auto& u : f.exo_inputs) {
            auto sz = exo_sizes.find(u);
            if (sz == exo_sizes.end())
                throw input_error("mechanism for " + name + " uses unknown exogenous " + u);
            exo_users[u].insert(name);
            rows *= static_cast<std::size_t>(sz->second);
        }
        for (const auto& p : f.parent_inputs) rows *= diagram_.domain(p).size();
        if (f.table.size() != rows)
            throw input_error("mechanism table for " + name + " has " +
                              std::to_string(f.table.size()) + " rows, expected " +
                              std::to_string(rows));
        int width = static_cast<int>(diagram_.domain(name).size());
        for (int entry : f.table)
            if (entry < 0 || entry >= width)
                throw input_error("mechanism table for " + name + " has an out-of-domain entry");
    }
    for (const auto& [name, mech] : mechanisms_)
        if (!diagram_.has_variable(name)) throw input_error("mechanism for unknown variable " + name);

    std::set<Edge> induced;
    for (const auto& [u, users] : exo_users)
        for (const auto& a : users)
            for (const auto& b : users)
                if (a < b) induced.insert({a, b});
    if (induced != diagram_.bidirected())
        throw input_error("shared exogenous parents do not induce the declared bidirected edges");
}

namespace {

std::vector<int> decode_state(std::size_t index, const std::vector<ExogenousVariable>& exogenous) {
    std::vector<int> u(exogenous.size());
    for (std::size_t i = exogenous.size(); i-- > 0;) {
        u[i] = static_cast<int>(index % static_cast<std::size_t>(exogenous[i].size));
        index /= static_cast<std::size_t>(exogenous[i].size);
    }
    return u;
}

int mechanism_output(const DiscreteSCM& m, const std::string& name,
                     const std::map<std::string, int>& exo_index,
                     const std::vector<int>& u,
                     const std::map<std::string, int>& endo_values) {
    const Mechanism& f = m.mechanisms().at(name);
    std::size_t row = 0;
    for (const auto& uname : f.exo_inputs) {
        int size = m.exogenous()[exo_index.at(uname)].size;
        row = row * static_cast<std::size_t>(size) +
              static_cast<std::size_t>(u[exo_index.at(uname)]);
    }
    for (const auto& p : f.parent_inputs) {
        row = row * m.diagram().domain(p).size() +
              static_cast<std::size_t>(endo_values.at(p));
    }
    return f.table[row];
}

std::map<std::string, int> exogenous_index(const DiscreteSCM& m) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < m.exogenous().size(); ++i)
        index[m.exogenous()[i].name] = static_cast<int>(i);
    return index;
}

int domain_index(const CausalDiagram& g, const std::string& var, const std::string& value) {
    const auto& dom = g.domain(var);
    auto it = std::find(dom.begin(), dom.end(), value);
    if (it == dom.end()) throw input_error(value + " is not in the domain of " + var);
    return static_cast<int>(it - dom.begin());
}

std::map<std::string, int> solve(const DiscreteSCM& m, const std::map<std::string, int>& exo_index,
                                 const std::map<std::string, int>& interventions,
                                 const std::vector<int>& u) {
    std::map<std::string, int> values;
    for (const auto& name : topological_order(m.diagram())) {
        auto fixed = interventions.find(name);
        if (fixed != interventions.end())
            values[name] = fixed->second;
        else
            values[name] = mechanism_output(m, name, exo_index, u, values);
    }
    return values;
}

std::map<std::string, int> encode_intervention(const DiscreteSCM& m, const Intervention& iv) {
    std::map<std::string, int> out;
    for (const auto& [var, value] : iv) {
        if (!m.diagram().has_variable(var)) throw input_error("unknown variable " + var);
        out[var] = domain_index(m.diagram(), var, value);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> potential_response(const DiscreteSCM& m,
                                                      const Intervention& interventions,
                                                      const std::vector<int>& u) {
    if (u.size() != m.exogenous().size())
        throw input_error("unit assigns " + std::to_string(u.size()) + " exogenous variables, expected " +
                          std::to_string(m.exogenous().size()));
    auto exo_index = exogenous_index(m);
    auto values = solve(m, exo_index, encode_intervention(m, interventions), u);
    std::map<std::string, std::string> out;
    for (const auto& [name, idx] : values) out[name] = m.diagram().domain(name)[idx];
    return out;
}

namespace {

int resolve_term(const DiscreteSCM& m, const std::map<std::string, int>& exo_index,
                 const NestedTerm& t, const std::vector<int>& u) {
    if (!m.diagram().has_variable(t.base)) throw input_error("unknown variable " + t.base);
    std::map<std::string, int> iv;
    for (const auto& [var, value] : t.subscript) {
        if (!m.diagram().has_variable(var)) throw input_error("unknown variable " + var);
        if (const auto* direct = std::get_if<ValueRef>(&value)) {
            if (direct->symbolic)
                throw evaluation_error("oracle cannot evaluate symbolic value " + direct->text);
            iv[var] = domain_index(m.diagram(), var, direct->text);
        } else {
            iv[var] = resolve_term(m, exo_index, *std::get<std::shared_ptr<NestedTerm>>(value), u);
        }
    }
    return solve(m, exo_index, iv, u).at(t.base);
}

}  // namespace

double ctf_probability(const DiscreteSCM& m, const NestedEvent& events) {
    auto exo_index = exogenous_index(m);
    std::vector<std::pair<const NestedEventTerm*, int>> wanted;
    for (const auto& ev : events) {
        if (ev.value.symbolic)
            throw evaluation_error("oracle cannot evaluate symbolic value " + ev.value.text);
        wanted.emplace_back(&ev, domain_index(m.diagram(), ev.term.base, ev.value.text));
    }
    double total = 0.0;
    for (std::size_t s = 0; s < m.p_u().size(); ++s) {
        if (m.p_u()[s] == 0.0) continue;
        std::vector<int> u = decode_state(s, m.exogenous());
        bool holds = true;
        for (const auto& [ev, target] : wanted) {
            if (resolve_term(m, exo_index, ev->term, u) != target) {
                holds = false;
                break;
            }
        }
        if (holds) total += m.p_u()[s];
    }
    return total;
}

double ctf_probability(const DiscreteSCM& m, const CtfEvent& events) {
    NestedEvent nested;
    for (const auto& term : events) {
        NestedTerm t;
        t.base = term.var.base;
        for (const auto& [var, value] : term.var.subscript) t.subscript.emplace(var, value);
        nested.push_back({std::move(t), term.value});
    }
    return ctf_probability(m, nested);
}

DistributionTable interventional_table(const DiscreteSCM& m, const Intervention& z) {
    auto exo_index = exogenous_index(m);
    auto iv = encode_intervention(m, z);
    std::vector<Variable> columns;
    for (const auto& name : topological_order(m.diagram()))
        if (!iv.count(name)) columns.push_back(m.diagram().variable(name));

    DistributionTable table;
    table.variables = columns;
    std::size_t rows = 1;
    for (const auto& c : columns) rows *= c.domain.size();
    table.probs.assign(rows, 0.0);
    for (std::size_t s = 0; s < m.p_u().size(); ++s) {
        if (m.p_u()[s] == 0.0) continue;
        auto values = solve(m, exo_index, iv, decode_state(s, m.exogenous()));
        std::size_t row = 0;
        for (const auto& c : columns)
            row = row * c.domain.size() + static_cast<std::size_t>(values.at(c.name));
        table.probs[row] += m.p_u()[s];
    }
    return table;
}

TableCollection interventional_family(const DiscreteSCM& m, const std::vector<NameSet>& sets) {
    TableCollection out;
    for (const auto& name : m.diagram().variable_names())
        out.domains[name] = m.diagram().domain(name);
    for (const auto& z : sets) {
        std::vector<std::string> names(z.begin(), z.end());
        std::vector<std::vector<std::string>> domains;
        for (const auto& n : names) domains.push_back(m.diagram().domain(n));
        std::vector<std::size_t> pick(names.size(), 0);
        while (true) {
            Intervention iv;
            std::vector<std::string> values;
            for (std::size_t i = 0; i < names.size(); ++i) {
                iv[names[i]] = domains[i][pick[i]];
                values.push_back(domains[i][pick[i]]);
            }
            out.add(names, values, interventional_table(m, iv));
            std::size_t i = names.size();
            while (i > 0 && ++pick[i - 1] == domains[i - 1].size()) pick[--i] = 0;
            if (i == 0) break;
        }
    }
    return out;
}

DistributionTable ctf_joint_table(const DiscreteSCM& m, const std::vector<CtfVariable>& vars) {
    auto exo_index = exogenous_index(m);
    DistributionTable table;
    for (const auto& v : vars)
        table.variables.push_back({ctf_name(v), m.diagram().domain(v.base)});
    std::size_t rows = 1;
    for (const auto& c : table.variables) rows *= c.domain.size();
    table.probs.assign(rows, 0.0);

    std::vector<std::map<std::string, int>> interventions;
    for (const auto& v : vars) {
        std::map<std::string, int> iv;
        for (const auto& [var, value] : v.subscript) {
            if (value.symbolic)
                throw evaluation_error("oracle cannot evaluate symbolic value " + value.text);
            iv[var] = domain_index(m.diagram(), var, value.text);
        }
        interventions.push_back(std::move(iv));
    }
    for (std::size_t s = 0; s < m.p_u().size(); ++s) {
        if (m.p_u()[s] == 0.0) continue;
        std::vector<int> u = decode_state(s, m.exogenous());
        std::size_t row = 0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto values = solve(m, exo_index, interventions[i], u);
            row = row * table.variables[i].domain.size() +
                  static_cast<std::size_t>(values.at(vars[i].base));
        }
        table.probs[row] += m.p_u()[s];
    }
    return table;
}

DiscreteSCM random_scm(const CausalDiagram& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(0.1, 1.0);

    std::vector<ExogenousVariable> exogenous;
    std::map<std::string, std::vector<std::string>> exo_of;
    for (const auto& [a, b] : g.bidirected()) {
        std::string name = "U_" + a + "_" + b;
        exogenous.push_back({name, 4});
        exo_of[a].push_back(name);
        exo_of[b].push_back(name);
    }
    std::map<std::string, std::string> noise_of;
    for (const auto& v : g.variable_names()) {
        std::string name = "U_" + v;
        exogenous.push_back({name, 2 * static_cast<int>(g.domain(v).size())});
        noise_of[v] = name;
    }

    std::size_t states = state_count(exogenous);
    std::vector<std::vector<double>> marginals;
    for (const auto& u : exogenous) {
        std::vector<double> w(static_cast<std::size_t>(u.size));
        double total = 0.0;
        for (auto& x : w) {
            x = weight(rng);
            total += x;
        }
        for (auto& x : w) x /= total;
        marginals.push_back(std::move(w));
    }
    std::vector<double> p_u(states, 1.0);
    for (std::size_t s = 0; s < states; ++s) {
        std::size_t rest = s;
        for (std::size_t i = exogenous.size(); i-- > 0;) {
            p_u[s] *= marginals[i][rest % static_cast<std::size_t>(exogenous[i].size)];
            rest /= static_cast<std::size_t>(exogenous[i].size);
        }
    }

    std::map<std::string, Mechanism> mechanisms;
    for (const auto& v : g.variable_names()) {
        Mechanism f;
        f.exo_inputs = exo_of.count(v) ? exo_of[v] : std::vector<std::string>{};
        f.exo_inputs.push_back(noise_of[v]);
        NameSet parents = g.parents(v);
        f.parent_inputs.assign(parents.begin(), parents.end());

        int width = static_cast<int>(g.domain(v).size());
        std::size_t rows = 1;
        for (const auto& u : f.exo_inputs)
            for (const auto& e : exogenous)
                if (e.name == u) rows *= static_cast<std::size_t>(e.size);
        for (const auto& p : f.parent_inputs) rows *= g.domain(p).size();

        std::size_t noise_stride = 1;
        for (const auto& p : f.parent_inputs) noise_stride *= g.domain(p).size();
        std::size_t noise_size = static_cast<std::size_t>(2 * width);
        std::uniform_int_distribution<int> pick(0, width - 1);
        f.table.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            // The noise input is the last exogenous input; its first |domain|
            // values force a pure-noise output so every value has support.
            std::size_t noise_value = (r / noise_stride) % noise_size;
            if (noise_value < static_cast<std::size_t>(width))
                f.table[r] = static_cast<int>(noise_value);
            else
                f.table[r] = pick(rng);
        }
        mechanisms.emplace(v, std::move(f));
    }
    return DiscreteSCM(g, std::move(exogenous), std::move(p_u), std::move(mechanisms));
}

namespace {

void flatten_table(const nlohmann::json& j, const CausalDiagram& g, const std::string& var,
                   std::vector<int>& out) {
    if (j.is_array()) {
        for (const auto& item : j) flatten_table(item, g, var, out);
        return;
    }
    if (j.is_number_integer()) {
        out.push_back(j.get<int>());
        return;
    }
    if (j.is_string()) {
        out.push_back(domain_index(g, var, j.get<std::string>()));
        return;
    }
    throw input_error("mechanism table for " + var + " holds a non-value entry");
}

}  // namespace

DiscreteSCM scm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw input_error(std::string("SCM JSON: ") + err.what());
    }
    if (!j.is_object() || !j.contains("graph")) throw input_error("SCM JSON needs a \"graph\"");
    CausalDiagram g = diagram_from_json(j.at("graph").dump());

    std::vector<ExogenousVariable> exogenous;
    for (const auto& u : j.at("exogenous")) {
        if (!u.contains("name") || !u.contains("size"))
            throw input_error("exogenous entries need \"name\" and \"size\"");
        exogenous.push_back({u.at("name").get<std::string>(), u.at("size").get<int>()});
    }
    std::vector<double> p_u = j.at("p_u").get<std::vector<double>>();

    std::map<std::string, Mechanism> mechanisms;
    for (const auto& [var, spec] : j.at("mechanisms").items()) {
        Mechanism f;
        if (spec.contains("exogenous"))
            f.exo_inputs = spec.at("exogenous").get<std::vector<std::string>>();
        if (spec.contains("parents"))
            f.parent_inputs = spec.at("parents").get<std::vector<std::string>>();
        flatten_table(spec.at("table"), g, var, f.table);
        mechanisms.emplace(var, std::move(f));
    }
    return DiscreteSCM(std::move(g), std::move(exogenous), std::move(p_u), std::move(mechanisms));
}

std::string scm_to_json(const DiscreteSCM& m) {
    nlohmann::json j;
    j["graph"] = nlohmann::json::parse(diagram_to_json(m.diagram()));
    j["exogenous"] = nlohmann::json::array();
    for (const auto& u : m.exogenous())
        j["exogenous"].push_back({{"name", u.name}, {"size", u.size}});
    j["p_u"] = m.p_u();
    nlohmann::json mechs = nlohmann::json::object();
    for (const auto& [var, f] : m.mechanisms()) {
        nlohmann::json spec;
        spec["exogenous"] = f.exo_inputs;
        spec["parents"] = f.parent_inputs;
        nlohmann::json table = nlohmann::json::array();
        const auto& dom = m.diagram().domain(var);
        for (int entry : f.table) table.push_back(dom[static_cast<std::size_t>(entry)]);
        spec["table"] = table;
        mechs[var] = spec;
    }
    j["mechanisms"] = mechs;
    return j.dump(2);
}

DiscreteSCM load_scm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scm_from_json(buf.str());
}

}  // namespace ctfid
