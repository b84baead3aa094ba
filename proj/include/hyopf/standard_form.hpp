#pragma once

#include "hyopf/conic.hpp"

namespace hyopf {

// Equality-standard form consumed by the interior-point engine:
//
//   minimize   sum_b <C_b, X_b> + c_n'x + c_f'f + const
//   subject to sum_b <A_b_i, X_b> + a_n_i'x + a_f_i'f = rhs_i
//              X_b PSD, x >= 0, f free
//
// Inequalities of the source problem get nonnegative slack scalars, LMIs an
// additional PSD slack block tied entrywise to the affine expression.
struct StandardForm {
    struct BlockTerm {
        int block = 0;
        std::vector<SymTriplet> coeffs;
    };
    struct Row {
        std::vector<BlockTerm> blocks;
        std::vector<std::pair<int, double>> nonneg;
        std::vector<std::pair<int, double>> free_vars;
        double rhs = 0.0;
        Tag tag;
    };

    std::vector<int> block_dims;
    int n_nonneg = 0;
    int n_free = 0;
    std::vector<Row> rows;

    std::vector<BlockTerm> obj_blocks;
    std::vector<std::pair<int, double>> obj_nonneg;
    std::vector<std::pair<int, double>> obj_free;
    double obj_constant = 0.0;

    // Bookkeeping back to the source problem.
    int n_source_blocks = 0;                           // leading blocks mirror ConicProblem
    std::vector<std::pair<bool, int>> scalar_slot;     // per source scalar: (is_nonneg, index)
    std::vector<int> lmi_slack_block;                  // per source LMI: its slack block

    int total_psd_dim() const;
};

StandardForm compile(const ConicProblem& problem);

}  // namespace hyopf
