#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hyopf/network.hpp"

namespace hyopf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Coefficient matrices for the trace form of the power flow equations.
//
// AC matrices act on the 2n stacked real/imaginary voltage vector
// X = [Re V; Im V]: Tr{bus_p[k] XX'} is the net active injection at bus k,
// Tr{bus_q[k] XX'} the reactive injection, Tr{bus_v[k] XX'} = |V_k|^2,
// and line_p/line_q give the sending-end flow of each directed line.
// DC matrices act on the DC voltage vector directly.
// Every matrix is exactly symmetric by construction.
struct CoefficientSet {
    int n_ac = 0;
    int n_dc = 0;

    std::vector<Mat> bus_p, bus_q, bus_v;        // per AC bus, 2n x 2n
    std::vector<Mat> line_p_fwd, line_q_fwd;     // per AC line, l -> m
    std::vector<Mat> line_p_rev, line_q_rev;     // per AC line, m -> l
    std::vector<Mat> dc_bus_p, dc_bus_v;         // per DC bus, n_dc x n_dc
    std::vector<Mat> dc_line_fwd, dc_line_rev;   // per DC line
};

// Nodal admittance matrix; complex for AC, real conductance for DC.
CMat build_ac_admittance(const NetworkCase& cs);
Mat build_dc_admittance(const NetworkCase& cs);

// Fills the AC members of the set from the nodal admittance.
CoefficientSet build_ac_coefficients(const NetworkCase& cs);
// Fills the DC members.
CoefficientSet build_dc_coefficients(const NetworkCase& cs);
// Both sides at once.
CoefficientSet build_coefficients(const NetworkCase& cs);

}  // namespace hyopf
