#pragma once

#include <string>
#include <vector>

namespace coagscale::report {

struct Check {
    int criterion = 0;
    std::string name;
    double expected = 0.0;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Diagnostic {
    std::string name;
    double value = 0.0;
    std::string note;
};

struct Options {
    double lambda = 0.1;              // shot used by criterion 12
    double consistency_lambda = 0.05;  // shot used by criterion 13
    double step = 0.02;
    int scan_points = 16;
    std::size_t residual_stride = 5;
};

struct CriterionInfo {
    int id;
    const char* title;
    bool slow;
};

const std::vector<CriterionInfo>& criteria();

struct Suite {
    std::vector<Check> checks;
    std::vector<Diagnostic> diagnostics;
};

// Runs the selected criteria (empty selection means all) in order.
Suite run(const Options& opt, const std::vector<int>& selection = {});

bool criterion_passed(const Suite& s, int id);
std::string to_json(const Suite& s, const Options& opt);

}  // namespace coagscale::report
