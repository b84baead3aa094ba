#pragma once

#include "hyopf/ipm.hpp"
#include "hyopf/network.hpp"

namespace hyopf {

// Spectral rank test of a lifted voltage matrix.
struct RankDiagnostics {
    Vec eigenvalues;         // descending
    int effective_rank = 0;  // 1 or 2 when the ratio test passes, 0 otherwise
    double ratio = 0.0;      // the decisive spectral ratio
};

// effective_rank = 1 when lambda_1/lambda_2 >= threshold, 2 when
// lambda_1/lambda_3 >= threshold, else 0.
RankDiagnostics diagnose_rank(const Mat& W, double threshold = 1e5);

// Physical operating point read back out of a relaxation solution.
struct RecoveredState {
    CVec ac_voltage;  // per AC bus; empty when the case has no AC side
    Vec dc_voltage;   // per DC bus

    Vec gen_p, gen_q;    // per generator
    Vec conv_p, conv_q;  // AC-side power per AC/DC converter (0 for external terminals)
    Vec conv_dc_p;       // DC-bus injection per AC/DC converter
    Vec dcdc_q;          // signed transfer per DC/DC converter
    Vec dcdc_s;          // half loss, recomputed from dcdc_q

    // Objective re-evaluated at the recovered point: generation cost plus
    // network and DC/DC conversion losses.
    double objective = 0.0;

    RankDiagnostics ac_rank, dc_rank;
    double ac_defect = 0.0, dc_defect = 0.0;  // relative residual of the rank restoration
};

// Fills every derived quantity (dispatch, converter powers, losses,
// objective) from a complete voltage profile and the DC/DC transfers.
// Rank diagnostics and defects are left at their defaults.
RecoveredState state_from_voltages(const NetworkCase& cs, const CVec& ac_voltage,
                                   const Vec& dc_voltage, const Vec& dcdc_q);

// Newton projection of a near-feasible point back onto the power-flow
// manifold. Voltage magnitudes at dispatchable buses, the DC/DC transfers
// and the bound-clamped generator dispatch are held fixed; load voltages,
// angles and coupled DC voltages are re-solved. Returns the input unchanged
// when the projection fails or the topology is unsupported.
RecoveredState refine_state(const NetworkCase& cs, const RecoveredState& st);

// Extracts voltages from the dominant eigenspace (handling the rank-2
// rotational ambiguity on the AC side), normalizes the gauge (zero slack
// angle, positive master DC voltage), recomputes all derived quantities and
// keeps the refined point when it tightens the independent residual check.
// Throws RecoveryError when the rank test fails.
RecoveredState recover(const NetworkCase& cs, const ConicSolution& sol,
                       double rank_threshold = 1e5);

}  // namespace hyopf
