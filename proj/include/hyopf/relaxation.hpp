#pragma once

#include "hyopf/conic.hpp"
#include "hyopf/network.hpp"

namespace hyopf {

// The assembled semidefinite relaxation plus the variable bookkeeping needed
// to read a solution back out.
struct Relaxation {
    ConicProblem problem;
    // Block index of the lifted AC voltage matrix. The row/column of the
    // slack bus imaginary part is eliminated rather than pinned to zero so
    // the feasible set keeps a strictly positive definite interior; the
    // block is (2n-1) x (2n-1) and ac_drop names the removed coordinate.
    int w_ac = -1;
    int ac_drop = -1;
    int w_dc = -1;  // block index of the DC voltage matrix

    std::vector<int> alpha;   // cost epigraph scalar per generator
    std::vector<int> dcdc_s;  // half-loss scalar per DC/DC converter
    std::vector<int> dcdc_q;  // signed transfer per DC/DC converter
    std::vector<int> dcdc_t;  // q^2 epigraph (-1 when gamma == 0)
    std::vector<int> dcdc_u;  // |q| epigraph (-1 when beta == 0)

    // Coefficient matrix over the full 2n voltage coordinates reduced to the
    // retained ones (ac_drop row/column deleted).
    Mat reduce_ac(const Mat& full) const;

    // Net DC injection at a DC bus as an affine expression (trace plus
    // DC/DC loss and transfer terms).
    LinExpr dc_injection(const NetworkCase& cs, const CoefficientSet& coeffs, int dc_bus_id) const;
    // AC-side converter power at an AC bus (net injection plus local load).
    LinExpr converter_p(const NetworkCase& cs, const CoefficientSet& coeffs, int ac_bus_id) const;
    LinExpr converter_q(const NetworkCase& cs, const CoefficientSet& coeffs, int ac_bus_id) const;
};

// Emits injection/voltage bounds, line-flow LMIs, cost epigraphs, the loss
// objective term and the slack-bus pin for the AC side.
void build_ac_block(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel);
// DC counterpart: injection/voltage bounds, master pin, flow limits, DC/DC
// converter loss model and the DC loss objective term.
void build_dc_block(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel);
// AC/DC converter balance equalities and capacity LMIs.
void build_coupling(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel);

// Full problem: all of the above over a validated case.
Relaxation assemble(const NetworkCase& cs);

}  // namespace hyopf
