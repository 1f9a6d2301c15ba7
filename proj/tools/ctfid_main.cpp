#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctfid/engine.hpp"
#include "ctfid/graph.hpp"
#include "ctfid/identify.hpp"
#include "ctfid/oracle.hpp"
#include "ctfid/parser.hpp"

namespace {

ctfid::RenderFormat parse_format(const std::string& name) {
    if (name == "text") return ctfid::RenderFormat::Text;
    if (name == "latex") return ctfid::RenderFormat::Latex;
    if (name == "json") return ctfid::RenderFormat::Json;
    throw ctfid::input_error("unknown format " + name + " (expected text, latex, or json)");
}

nlohmann::json diagnostics_json(const std::vector<ctfid::FactorDiagnostic>& diagnostics) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : diagnostics) {
        nlohmann::json entry{{"factor", d.factor},
                             {"consistent", d.consistent},
                             {"identified", d.identified}};
        if (!d.witness.empty()) entry["witness"] = d.witness;
        if (!d.used_z.empty()) entry["available_set"] = d.used_z;
        out.push_back(std::move(entry));
    }
    return out;
}

void print_diagnostics(const std::vector<ctfid::FactorDiagnostic>& diagnostics) {
    for (const auto& d : diagnostics) {
        std::cout << "  factor " << d.factor << ": ";
        if (!d.consistent)
            std::cout << "inconsistent; witness " << d.witness;
        else if (d.identified)
            std::cout << "identified from " << d.used_z;
        else
            std::cout << "not identifiable from the available distributions";
        std::cout << "\n";
    }
}

int run_identify(const std::string& graph_path, const std::string& spec_path,
                 const std::string& query_text, const std::string& format_name) {
    ctfid::RenderFormat format = parse_format(format_name);
    ctfid::CausalDiagram g = ctfid::load_diagram(graph_path);
    ctfid::AvailableSpec spec = ctfid::load_spec(spec_path);
    ctfid::Query query = ctfid::parse_query(query_text, g);
    ctfid::IdentificationResult res = ctfid::identify_query(query, spec, g);

    if (format == ctfid::RenderFormat::Json) {
        nlohmann::json out{{"status", ctfid::status_name(res.status)}};
        if (res.estimand) {
            out["estimand"] = nlohmann::json::parse(ctfid::estimand_to_json(res.estimand));
            out["rendered"] = ctfid::render(res.estimand, ctfid::RenderFormat::Text);
        }
        if (!res.diagnostics.empty()) out["factors"] = diagnostics_json(res.diagnostics);
        std::cout << out.dump(2) << "\n";
        return res.status == ctfid::Status::Fail ? 2 : 0;
    }

    if (res.status == ctfid::Status::Fail) {
        std::cout << "not identifiable from the available distributions\n";
        print_diagnostics(res.diagnostics);
        return 2;
    }
    std::cout << ctfid::render(res.estimand, format) << "\n";
    return 0;
}

int run_oracle_check(const std::string& graph_path, const std::string& spec_path,
                     const std::string& query_text, unsigned seeds) {
    ctfid::CausalDiagram g = ctfid::load_diagram(graph_path);
    ctfid::AvailableSpec spec = ctfid::load_spec(spec_path);
    ctfid::Query query = ctfid::parse_query(query_text, g);
    ctfid::IdentificationResult res = ctfid::identify_query(query, spec, g);
    if (res.status == ctfid::Status::Fail) {
        std::cout << "query is not identifiable; nothing to check\n";
        print_diagnostics(res.diagnostics);
        return 2;
    }

    ctfid::NestedEvent conjunction = query.outcomes;
    conjunction.insert(conjunction.end(), query.conditions.begin(), query.conditions.end());

    double worst = 0.0;
    unsigned worst_seed = 0;
    for (unsigned seed = 1; seed <= seeds; ++seed) {
        ctfid::DiscreteSCM scm = ctfid::random_scm(g, seed);
        ctfid::TableCollection tables = ctfid::interventional_family(scm, spec.sets);
        double truth;
        if (query.conditions.empty()) {
            truth = ctfid::ctf_probability(scm, query.outcomes);
        } else {
            double den = ctfid::ctf_probability(scm, query.conditions);
            if (den <= 0.0)
                throw ctfid::evaluation_error("conditioning event has zero probability under seed " +
                                              std::to_string(seed));
            truth = ctfid::ctf_probability(scm, conjunction) / den;
        }
        double value = ctfid::evaluate(res.estimand, tables, {});
        double dev = std::fabs(value - truth);
        if (dev > worst) {
            worst = dev;
            worst_seed = seed;
        }
    }

    std::printf("%u seeds, max deviation %.3g", seeds, worst);
    if (worst > 0.0) std::printf(" (seed %u)", worst_seed);
    std::printf("\n");
    if (worst > 1e-9) {
        std::cout << "estimand disagrees with the model beyond tolerance\n";
        return 1;
    }
    return 0;
}

int run_fixtures(const std::string& dir) {
    std::string path = dir + "/manifest.json";
    std::ifstream in(path);
    if (!in) throw ctfid::input_error("cannot open " + path);
    nlohmann::json manifest;
    in >> manifest;
    for (const auto& entry : manifest.at("cases")) {
        std::cout << entry.at("graph").get<std::string>() << "  " << std::left;
        std::printf("%-11s", entry.at("expected").get<std::string>().c_str());
        std::cout << "  " << entry.at("query").get<std::string>();
        if (entry.contains("spec")) std::cout << "  [" << entry.at("spec").get<std::string>() << "]";
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual identification from observational and experimental distributions"};
    app.require_subcommand(1);

    std::string graph_path, spec_path, query_text;
    std::string format_name = "text";
    unsigned seeds = 20;
    std::string fixtures_dir = "fixtures";

    CLI::App* identify = app.add_subcommand("identify", "Identify a counterfactual query");
    identify->add_option("--graph", graph_path, "Causal diagram JSON file")->required();
    identify->add_option("--spec", spec_path, "Available-distribution spec JSON file")->required();
    identify->add_option("--query", query_text, "Query, e.g. 'P(Y[X=0]=1 | X=1)'")->required();
    identify->add_option("--format", format_name, "Output format: text, latex, or json");

    CLI::App* oracle = app.add_subcommand("oracle-check", "Compare an estimand against random models");
    oracle->add_option("--graph", graph_path, "Causal diagram JSON file")->required();
    oracle->add_option("--spec", spec_path, "Available-distribution spec JSON file")->required();
    oracle->add_option("--query", query_text, "Query to identify and check")->required();
    oracle->add_option("--seeds", seeds, "Number of random models to draw");

    CLI::App* fixtures = app.add_subcommand("fixtures", "List the bundled example graphs and queries");
    fixtures->add_option("--dir", fixtures_dir, "Fixture directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (identify->parsed()) return run_identify(graph_path, spec_path, query_text, format_name);
        if (oracle->parsed()) return run_oracle_check(graph_path, spec_path, query_text, seeds);
        return run_fixtures(fixtures_dir);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
