#pragma once

#include "hyopf/coefficients.hpp"
#include "hyopf/network.hpp"

namespace hyopf {

struct OracleResult {
    double objective = 0.0;
    CVec ac_voltage;
    Vec dc_voltage;
    Vec dcdc_q;
    int resolution = 0;
    bool exhaustive = false;
};

// Global optimum by exhaustive grid search over the free degrees of freedom
// (generator/converter bus voltages, unconstrained DC voltages, DC/DC
// transfers), with the balance equalities resolved by a damped Newton solve
// at every grid point and the winner polished by recursive grid shrinking.
// Deterministic: ties break toward the lexicographically first grid index.
// seed != 0 jitters interior grid points (and clears the exhaustive flag).
// Throws OracleError when no feasible point exists at this resolution.
OracleResult brute_force_opf(const NetworkCase& cs, int resolution = 7, unsigned seed = 0);

}  // namespace hyopf
