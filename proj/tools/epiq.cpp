// Copyright 2026 The epiq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epiq/checker.hpp"
#include "epiq/checks.hpp"
#include "epiq/formula.hpp"
#include "epiq/observer.hpp"
#include "epiq/scenarios.hpp"
#include "epiq/spec_file.hpp"
#include "epiq/version.hpp"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;

enum Exit { kPass = 0, kCheckFailed = 1, kInvalid = 2, kIllFormed = 3 };

struct Globals {
    double tolerance = 1e-9;
    bool json = false;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string header(const Globals &g) { return std::string("epiq ") + epiq::kVersion + "  tolerance " + fmt(g.tolerance); }

Json json_header(const Globals &g) {
    Json j;
    j["version"] = epiq::kVersion;
    j["tolerance"] = g.tolerance;
    return j;
}

std::string join(const std::vector<std::string> &xs, const char *sep = ", ") {
    std::string out;
    for (const auto &x : xs) {
        out += (out.empty() ? "" : sep) + x;
    }
    return out;
}

epiq::BuildOptions options(const Globals &g) {
    epiq::BuildOptions o;
    o.tol = epiq::Tolerance(g.tolerance);
    return o;
}

epiq::Protocol load(const std::string &file, const Globals &g) {
    auto spec = std::make_shared<const epiq::ProtocolSpec>(epiq::load_spec(file));
    return epiq::build_gated(spec, options(g));
}

epiq::Protocol load_scenario(const std::string &name, const Globals &g) {
    auto spec = std::make_shared<const epiq::ProtocolSpec>(epiq::parse_spec(epiq::scenario_text(name)));
    return epiq::build_gated(spec, options(g));
}

std::size_t history_arg(const epiq::Protocol &pi, const std::string &h) {
    if (h.empty()) {
        return 0;
    }
    if (const auto idx = pi.history_index(h)) {
        return *idx;
    }
    if (h.find_first_not_of("0123456789") == std::string::npos) {
        const auto i = std::stoul(h);
        if (i < pi.histories().size()) {
            return i;
        }
    }
    throw std::invalid_argument("unknown history '" + h + "'");
}

std::vector<std::string> ordered(const epiq::Protocol &pi, const epiq::System &s) { return pi.universe().ordered(s); }

int report_checks(const epiq::Protocol &pi, const std::vector<epiq::CheckResult> &results, const Globals &g,
                  bool table) {
    bool all = true;
    for (const auto &r : results) {
        all = all && r.passed;
    }
    if (g.json) {
        Json j = json_header(g);
        j["protocol"] = pi.spec().name;
        j["histories"] = pi.histories().size();
        Json rows = Json::array();
        for (const auto &r : results) {
            Json row;
            row["kind"] = r.check.kind;
            row["subject"] = r.check.subject;
            row["expected"] = r.check.expected;
            row["measured"] = r.measured;
            row["passed"] = r.passed;
            row["provenance"] = r.check.provenance;
            row["detail"] = r.detail;
            rows.push_back(row);
        }
        j["checks"] = rows;
        j["passed"] = all;
        std::cout << j.dump(2) << "\n";
        return all ? kPass : kCheckFailed;
    }
    std::cout << header(g) << "\n";
    std::cout << "protocol " << pi.spec().name << ": " << pi.histories().size() << " histories, " << pi.length()
              << " steps\n";
    for (const auto &w : pi.warnings()) {
        std::cout << "warning: " << w << "\n";
    }
    if (table) {
        std::printf("%-4s  %-11s  %-48s  %-24s  %-24s  %s\n", "", "kind", "check", "expected", "measured",
                    "provenance");
    }
    for (const auto &r : results) {
        if (table) {
            std::printf("%-4s  %-11s  %-48s  %-24s  %-24s  %s\n", r.passed ? "PASS" : "FAIL", r.check.kind.c_str(),
                        r.check.subject.c_str(), r.check.expected.c_str(), r.measured.c_str(),
                        r.check.provenance.c_str());
        } else {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.check.kind << " " << r.check.subject << "\n"
                      << "     expected " << r.check.expected << ", measured " << r.measured;
            if (!r.check.provenance.empty()) {
                std::cout << " [" << r.check.provenance << "]";
            }
            std::cout << "\n";
        }
        if (!r.detail.empty()) {
            std::cout << "     " << r.detail << "\n";
        }
    }
    std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
    return all ? kPass : kCheckFailed;
}

int cmd_eval(const epiq::Protocol &pi, const std::string &formula, const std::string &history, std::size_t time,
             bool explain, const Globals &g) {
    const auto f = epiq::parse_formula(formula);
    epiq::Checker checker(pi);
    checker.bind(*f);
    const std::size_t h = history_arg(pi, history);
    if (time > pi.length()) {
        throw std::invalid_argument("time " + std::to_string(time) + " is past the last step (" +
                                    std::to_string(pi.length()) + ")");
    }
    const bool value = checker.eval(*f, h, time);
    // Cell of the outermost modality, or the background's cell.
    const std::string agent = f->is_modal() ? f->agent : std::string();
    const auto members = agent.empty() ? epiq::cell(pi, h, time).members : checker.cell_of(agent, h, time);
    if (g.json) {
        Json j = json_header(g);
        j["formula"] = epiq::to_string(*f);
        j["history"] = pi.history(h).id;
        j["time"] = time;
        j["value"] = value;
        j["cell_agent"] = agent.empty() ? Json(nullptr) : Json(agent);
        j["cell_size"] = members.size();
        if (explain) {
            Json ids = Json::array();
            for (auto m : members) {
                ids.push_back(pi.history(m).id);
            }
            j["cell"] = ids;
        }
        std::cout << j.dump(2) << "\n";
        return kPass;
    }
    std::cout << header(g) << "\n";
    std::cout << epiq::to_string(*f) << " at (" << pi.history(h).id << ", t=" << time << "): "
              << (value ? "true" : "false") << "\n";
    std::cout << "cell of " << (agent.empty() ? "background" : agent) << ": " << members.size() << " of "
              << pi.histories().size() << " histories\n";
    if (explain) {
        for (auto m : members) {
            std::cout << "  " << pi.history(m).id << "  weight " << fmt(pi.history(m).weight()) << "\n";
        }
    }
    return kPass;
}

int cmd_admissible(const epiq::Protocol &base, const std::string &candidate, const std::string &as_observer,
                   const Globals &g) {
    std::optional<epiq::Protocol> anchored;
    if (!as_observer.empty()) {
        anchored = epiq::reanchor(base, as_observer);
    }
    const epiq::Protocol &pi = anchored ? *anchored : base;
    if (!pi.universe().has_agent(candidate) && !pi.universe().has_label(candidate)) {
        throw std::invalid_argument("unknown system '" + candidate + "'");
    }
    const auto v = epiq::admissible_observer(pi, candidate);
    if (g.json) {
        Json j = json_header(g);
        j["candidate"] = v.candidate;
        j["perspective"] = v.perspective;
        j["admissible"] = v.admissible;
        j["persistent_histories"] = v.persistent_histories;
        if (v.admissible) {
            j["witness_history"] = v.witness_history;
            Json chain = Json::array();
            for (const auto &s : v.witness_chain) {
                chain.push_back(ordered(pi, s));
            }
            j["witness_chain"] = chain;
        } else {
            j["known_history"] = pi.history(*v.known_history).id;
            j["known_time"] = *v.known_time;
            j["erasure_step"] = v.erasure_step;
            j["erasure_time"] = v.erasure_time ? Json(*v.erasure_time) : Json(nullptr);
        }
        std::cout << j.dump(2) << "\n";
        return kPass;
    }
    std::cout << header(g) << "\n";
    std::cout << candidate << " admissible wrt " << join(v.perspective) << ": " << (v.admissible ? "true" : "false")
              << "\n";
    if (v.admissible) {
        std::cout << "record chain in history " << v.witness_history << ":\n";
        for (std::size_t k = 0; k < v.witness_chain.size(); ++k) {
            std::cout << "  step " << k + 1 << " (" << pi.history(0).steps[k].id
                      << ") carried by " << join(ordered(pi, v.witness_chain[k]), ",") << "\n";
        }
    } else {
        std::cout << "erasure known at history " << pi.history(*v.known_history).id << ", t=" << *v.known_time
                  << "\n";
        std::cout << "information lost at step " << v.erasure_step;
        if (v.erasure_time) {
            std::cout << " (t=" << *v.erasure_time << ")";
        }
        std::cout << "\n";
    }
    std::cout << "persistent in " << v.persistent_histories.size() << " of " << pi.histories().size()
              << " histories\n";
    return kPass;
}

int cmd_axioms(const epiq::Protocol &pi, const std::vector<std::string> &community, const Globals &g) {
    const auto r = epiq::axiom_suite(pi, community);
    if (g.json) {
        Json j = json_header(g);
        j["community"] = r.community;
        j["community_ok"] = r.community_ok;
        j["battery_size"] = r.battery_size;
        j["factivity"] = r.factivity;
        j["monotonicity"] = r.monotonicity;
        j["knowledge_transfer"] = r.knowledge_transfer;
        Json cex = Json::array();
        for (const auto &c : r.counterexamples) {
            cex.push_back({{"axiom", c.axiom},
                           {"formula", c.formula},
                           {"history", pi.history(c.history).id},
                           {"time", c.time}});
        }
        j["counterexamples"] = cex;
        j["passed"] = r.passed();
        std::cout << j.dump(2) << "\n";
        return r.passed() ? kPass : kCheckFailed;
    }
    std::cout << header(g) << "\n";
    std::cout << "community {" << join(r.community) << "}: " << (r.community_ok ? "verified" : "not a community")
              << "\n";
    std::cout << "battery: " << r.battery_size << " formulas\n";
    std::cout << "factivity           " << (r.factivity ? "holds" : "fails") << " (" << r.factivity_checked
              << " instances)\n";
    std::cout << "monotonicity        " << (r.monotonicity ? "holds" : "fails") << " (" << r.monotonicity_checked
              << " instances)\n";
    std::cout << "knowledge transfer  " << (r.knowledge_transfer ? "holds" : "fails") << " (" << r.transfer_checked
              << " instances)\n";
    for (const auto &c : r.counterexamples) {
        std::cout << "  counterexample " << c.axiom << ": " << c.formula << " at (" << pi.history(c.history).id
                  << ", t=" << c.time << ")\n";
    }
    return r.passed() ? kPass : kCheckFailed;
}

/// A file path, or a scenario name when no such file exists.
epiq::Protocol load_any(const std::string &source, const Globals &g) {
    if (std::FILE *f = std::fopen(source.c_str(), "r")) {
        std::fclose(f);
        return load(source, g);
    }
    for (const auto &n : epiq::scenario_names()) {
        if (n == source) {
            return load_scenario(source, g);
        }
    }
    return load(source, g);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Observer-relative quantum protocols: build, check, and query epistemic formulas"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--tolerance", g.tolerance, "Numerical tolerance eps")->default_val(1e-9)->check(CLI::PositiveNumber);
    app.add_flag("--json", g.json, "Machine-readable output");
    app.set_version_flag("--version", std::string(epiq::kVersion));

    std::string file;
    auto *check = app.add_subcommand("check", "Build a protocol file and run its declared checks");
    check->add_option("file", file, "Protocol file")->required();

    std::string formula;
    std::string history;
    std::size_t time = 0;
    bool explain = false;
    auto *eval = app.add_subcommand("eval", "Evaluate a formula at one point of a protocol");
    eval->add_option("file", file, "Protocol file or scenario name")->required();
    eval->add_option("--formula,-f", formula, "Formula")->required();
    eval->add_option("--history", history, "History id or index (default: first)");
    eval->add_option("--time,-t", time, "Time index")->required();
    eval->add_flag("--explain", explain, "List the cell's histories");

    std::string candidate;
    std::string as_observer;
    auto *adm = app.add_subcommand("admissible", "Decide whether a candidate is an admissible observer");
    adm->add_option("file", file, "Protocol file or scenario name")->required();
    adm->add_option("--candidate,-c", candidate, "Agent or label")->required();
    adm->add_option("--as-observer", as_observer, "Decide relative to this agent's re-anchored description");

    std::string community;
    auto *axioms = app.add_subcommand("axioms", "Check the knowledge axioms for an observer community");
    axioms->add_option("file", file, "Protocol file or scenario name")->required();
    axioms->add_option("--community", community, "Comma-separated agents")->required();

    std::string name;
    bool report = false;
    auto *scenario = app.add_subcommand("scenario", "Run a built-in fixture");
    scenario->add_option("name", name, "Fixture name")->required();
    scenario->add_flag("--report", report, "Print the check table");

    auto *exp = app.add_subcommand("export", "Print a fixture or protocol file in canonical form");
    exp->add_option("source", file, "Protocol file or scenario name")->required();

    auto *list = app.add_subcommand("list", "List built-in fixtures");

    for (auto *sub : {check, eval, adm, axioms, scenario, exp}) {
        sub->add_flag("--json", g.json, "Machine-readable output");
        sub->add_option("--tolerance", g.tolerance, "Numerical tolerance eps")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInvalid;
    }

    try {
        if (*check) {
            const auto pi = load_any(file, g);
            return report_checks(pi, epiq::run_checks(pi, pi.spec().checks), g, false);
        }
        if (*eval) {
            return cmd_eval(load_any(file, g), formula, history, time, explain, g);
        }
        if (*adm) {
            return cmd_admissible(load_any(file, g), candidate, as_observer, g);
        }
        if (*axioms) {
            std::vector<std::string> members;
            std::stringstream ss(community);
            for (std::string m; std::getline(ss, m, ',');) {
                members.push_back(m);
            }
            return cmd_axioms(load_any(file, g), members, g);
        }
        if (*scenario) {
            const auto pi = load_scenario(name, g);
            const auto results = epiq::run_checks(pi, pi.spec().checks);
            if (!report && !g.json) {
                bool all = true;
                for (const auto &r : results) {
                    all = all && r.passed;
                }
                std::cout << name << ": " << results.size() << " checks, " << (all ? "all passed" : "failures")
                          << "\n";
                return all ? kPass : kCheckFailed;
            }
            return report_checks(pi, results, g, true);
        }
        if (*exp) {
            const auto pi = load_any(file, g);
            std::cout << epiq::export_spec(pi.spec());
            return kPass;
        }
        if (*list) {
            for (const auto &n : epiq::scenario_names()) {
                std::cout << n << "\n";
            }
            return kPass;
        }
    } catch (const epiq::IllFormedError &e) {
        if (g.json) {
            Json j = json_header(g);
            j["error"] = "ill-formed";
            j["outer"] = e.outer().empty() ? Json(nullptr) : Json(e.outer());
            j["inner"] = e.inner();
            std::cout << j.dump(2) << "\n";
        }
        std::cerr << "ill-formed formula: " << e.what() << " (pair " << (e.outer().empty() ? "-" : e.outer()) << ","
                  << e.inner() << ")\n";
        return kIllFormed;
    } catch (const epiq::SpecParseError &e) {
        std::cerr << file << ": " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}
