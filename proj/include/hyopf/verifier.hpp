#pragma once

#include <string>
#include <vector>

#include "hyopf/ipm.hpp"
#include "hyopf/network.hpp"
#include "hyopf/recovery.hpp"

namespace hyopf {

// One physical check: residual is 0 when satisfied exactly, positive
// magnitude of the violation or mismatch otherwise.
struct CheckResult {
    std::string name;
    double residual = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    double max_residual = 0.0;
    double tol = 0.0;
    bool passed = false;
    std::vector<std::string> violations;  // names of checks above tol
};

// Recomputes every balance equation, bound and rating from the recovered
// voltages using the nodal admittances directly, independent of the
// relaxation machinery.
VerifyReport verify(const NetworkCase& cs, const RecoveredState& st, double tol = 1e-5);

// Largest slack of the DC/DC conversion-loss epigraph at the solver's point;
// near zero when the loss inequality is tight, as it must be at an optimum
// with strictly positive loss pricing.
double loss_epigraph_slack(const NetworkCase& cs, const ConicSolution& sol);

}  // namespace hyopf
