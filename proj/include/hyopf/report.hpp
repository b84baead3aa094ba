#pragma once

#include <string>
#include <vector>

#include "hyopf/ipm.hpp"
#include "hyopf/network.hpp"
#include "hyopf/recovery.hpp"
#include "hyopf/verifier.hpp"

namespace hyopf {

// Solve summary with every number recomputed from the recovered state, in
// physical units (MW / MVA / p.u. voltage).
struct SolveReport {
    std::string case_name;
    int n_ac_buses = 0, n_dc_buses = 0;

    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    double duality_gap = 0.0;
    RankDiagnostics ac_rank, dc_rank;

    double objective = 0.0;       // model objective at the recovered point
    double total_cost = 0.0;      // generation cost, $/h
    double ac_loss_mw = 0.0;      // AC network loss
    double dc_loss_mw = 0.0;      // DC network loss
    double dcdc_loss_mw = 0.0;    // DC/DC conversion loss

    struct GenRow {
        int bus = 0;
        double p_mw = 0.0, q_mvar = 0.0, cost = 0.0;
    };
    struct AcFlowRow {
        int from = 0, to = 0;
        double s_from_mva = 0.0, s_to_mva = 0.0, limit_mva = 0.0;
        bool near_limit = false;  // within 1% of the rating
    };
    struct DcFlowRow {
        int from = 0, to = 0;
        double p_mw = 0.0, limit_mw = 0.0;
        bool near_limit = false;
    };
    struct ConverterRow {
        int dc_bus = 0;
        bool has_ac = false;
        int ac_bus = 0;
        double p_ac_mw = 0.0, q_ac_mvar = 0.0, p_dc_mw = 0.0, s_conv_mva = 0.0;
    };
    struct DcBusRow {
        int bus = 0;
        double voltage = 0.0, injection_mw = 0.0;
    };
    std::vector<GenRow> generators;
    std::vector<AcFlowRow> ac_flows;
    std::vector<DcFlowRow> dc_flows;
    std::vector<ConverterRow> converters;
    std::vector<DcBusRow> dc_buses;

    // Recovered operating point, embedded so a saved machine-readable report
    // can be re-verified against the case later.
    CVec ac_voltage;
    Vec dc_voltage;
    Vec dcdc_q;

    VerifyReport verification;
    double solve_seconds = 0.0;
};

SolveReport make_report(const NetworkCase& cs, const ConicSolution& sol,
                        const RecoveredState& st, const VerifyReport& verification,
                        double solve_seconds);

std::string render_text(const SolveReport& rep);
std::string render_json(const SolveReport& rep);

}  // namespace hyopf
