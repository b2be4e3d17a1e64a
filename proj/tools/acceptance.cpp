#include <algorithm>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "errors.hpp"
#include "report.hpp"

namespace cr = coagscale::report;

namespace {

std::vector<int> parse_ids(const std::string& text) {
    std::vector<int> ids;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) ids.push_back(std::stoi(tok));
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gate"};
    std::string only, known;
    bool fast = false, verbose = false;
    cr::Options opt;
    app.add_option("--only", only, "comma separated criterion ids");
    app.add_option("--known-unattainable", known, "comma separated check names whose failure does not fail the gate");
    app.add_flag("--fast", fast, "skip the slow criteria");
    app.add_flag("--verbose", verbose, "print every sub-check");
    app.add_option("--lambda", opt.lambda, "lambda for the end-to-end shot");
    CLI11_PARSE(app, argc, argv);

    std::vector<int> selection;
    try {
        selection = parse_ids(only);
        if (selection.empty())
            for (const auto& c : cr::criteria())
                if (!(fast && c.slow)) selection.push_back(c.id);
    } catch (const std::exception&) {
        std::fprintf(stderr, "bad criterion list\n");
        return 1;
    }
    std::set<std::string> excused;
    {
        std::stringstream ss(known);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) excused.insert(tok);
    }

    cr::Suite suite;
    try {
        suite = cr::run(opt, selection);
    } catch (const coagscale::DomainError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    }

    bool gate = true;
    for (const auto& c : cr::criteria()) {
        if (std::find(selection.begin(), selection.end(), c.id) == selection.end()) continue;
        bool ok = cr::criterion_passed(suite, c.id);
        std::string names;
        bool blocking = false;
        for (const auto& k : suite.checks)
            if (k.criterion == c.id && !k.pass) {
                bool known_fail = excused.count(k.name) > 0;
                names += (names.empty() ? "" : ", ") + k.name + (known_fail ? " [known unattainable]" : "");
                blocking = blocking || !known_fail;
            }
        std::printf("criterion %2d %-28s %s", c.id, c.title, ok ? "PASS" : "FAIL");
        if (!ok) std::printf("  (failing: %s)", names.c_str());
        std::printf("\n");
        if (verbose)
            for (const auto& k : suite.checks)
                if (k.criterion == c.id)
                    std::printf("    %-48s expected %.10g observed %.10g tol %.3g %s\n", k.name.c_str(), k.expected,
                                k.observed, k.tolerance, k.pass ? "ok" : "FAIL");
        if (blocking || (!ok && names.empty())) gate = false;
    }
    std::printf("gate %s\n", gate ? "PASS" : "FAIL");
    return gate ? 0 : 1;
}
