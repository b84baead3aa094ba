#pragma once

#include <string>
#include <vector>

#include "hyopf/relaxation.hpp"
#include "hyopf/standard_form.hpp"

namespace hyopf {

struct SolverOptions {
    double gap_tol = 1e-8;
    double feas_tol = 1e-8;
    int max_iter = 200;
    int verbosity = 0;  // 0 silent, 1 iteration log on stderr
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus s);

// Full primal-dual iterate for a StandardForm problem.
struct RawSolution {
    std::vector<Mat> X, Z;  // per PSD block
    Vec x_nonneg, z_nonneg;
    Vec f;  // free variables
    Vec y;  // one multiplier per equality row

    double primal_obj = 0.0, dual_obj = 0.0;
    double gap = 0.0, rel_gap = 0.0;
    double primal_inf = 0.0, dual_inf = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    // On non-optimal exits: constraint tags ranked by dual weight.
    std::vector<std::string> suspect_tags;
};

RawSolution solve(const StandardForm& form, const SolverOptions& opts = {});

struct ResidualNorms {
    double primal_inf = 0.0;
    double dual_inf = 0.0;
    double gap = 0.0;
};

// Recomputed from scratch, independent of solver internals.
ResidualNorms residuals(const StandardForm& form, const RawSolution& sol);

// Solution of a Relaxation, mapped back to model variables.
struct ConicSolution {
    Mat w_ac, w_dc;
    Vec alpha;  // per generator
    Vec S, Q;   // per DC/DC converter
    double objective_value = 0.0;
    double duality_gap = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    RawSolution raw;
};

ConicSolution solve_relaxation(const Relaxation& rel, const SolverOptions& opts = {});

}  // namespace hyopf
