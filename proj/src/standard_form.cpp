#include "hyopf/standard_form.hpp"

#include <cmath>

#include "hyopf/errors.hpp"

namespace hyopf {

namespace {

// Translates a LinExpr into row terms; returns the constant offset.
double expr_terms(const LinExpr& e, const std::vector<std::pair<bool, int>>& scalar_slot,
                  const std::vector<int>& block_dims, StandardForm::Row& row) {
    for (const auto& [b, trips] : e.traces) {
        if (b < 0 || b >= static_cast<int>(block_dims.size()))
            throw CompileError("expression references undeclared block " + std::to_string(b));
        for (const auto& t : trips)
            if (t.r > t.c || t.c >= block_dims[b])
                throw CompileError("coefficient outside block dimensions");
        row.blocks.push_back({b, trips});
    }
    for (const auto& [s, c] : e.scalars) {
        if (s < 0 || s >= static_cast<int>(scalar_slot.size()))
            throw CompileError("expression references undeclared scalar " + std::to_string(s));
        auto [nonneg, idx] = scalar_slot[s];
        if (nonneg)
            row.nonneg.emplace_back(idx, c);
        else
            row.free_vars.emplace_back(idx, c);
    }
    return e.constant;
}

}  // namespace

int StandardForm::total_psd_dim() const {
    int d = 0;
    for (int b : block_dims) d += b;
    return d;
}

StandardForm compile(const ConicProblem& p) {
    StandardForm sf;
    sf.n_source_blocks = static_cast<int>(p.blocks.size());
    for (const auto& b : p.blocks) sf.block_dims.push_back(b.dim);
    for (const auto& s : p.scalar_vars) {
        if (s.nonneg)
            sf.scalar_slot.emplace_back(true, sf.n_nonneg++);
        else
            sf.scalar_slot.emplace_back(false, sf.n_free++);
    }

    // Objective.
    {
        StandardForm::Row tmp;
        sf.obj_constant = expr_terms(p.objective, sf.scalar_slot, sf.block_dims, tmp);
        sf.obj_blocks = std::move(tmp.blocks);
        sf.obj_nonneg = std::move(tmp.nonneg);
        sf.obj_free = std::move(tmp.free_vars);
    }

    for (const auto& c : p.linear) {
        if (!std::isfinite(c.lo) && !std::isfinite(c.hi))
            throw CompileError("constraint [" + c.tag.str() + "] has no finite bound");
        if (c.lo > c.hi) throw CompileError("constraint [" + c.tag.str() + "] has lo > hi");
        // lo <= expr <= hi  ->  expr (+/- slack) = bound
        auto emit = [&](double bound, double slack_sign) {
            StandardForm::Row row;
            double constant = expr_terms(c.expr, sf.scalar_slot, sf.block_dims, row);
            if (slack_sign != 0.0) row.nonneg.emplace_back(sf.n_nonneg++, slack_sign);
            row.rhs = bound - constant;
            row.tag = c.tag;
            sf.rows.push_back(std::move(row));
        };
        if (c.lo == c.hi) {
            emit(c.lo, 0.0);
        } else {
            if (std::isfinite(c.hi)) emit(c.hi, 1.0);
            if (std::isfinite(c.lo)) emit(c.lo, -1.0);
        }
    }

    for (const auto& lmi : p.lmis) {
        if (static_cast<int>(lmi.entries.size()) != lmi.dim * (lmi.dim + 1) / 2)
            throw CompileError("LMI [" + lmi.tag.str() + "] entry count does not match dimension");
        int slack = static_cast<int>(sf.block_dims.size());
        sf.block_dims.push_back(lmi.dim);
        sf.lmi_slack_block.push_back(slack);
        for (int r = 0; r < lmi.dim; ++r)
            for (int col = r; col < lmi.dim; ++col) {
                StandardForm::Row row;
                double constant = expr_terms(lmi.entry(r, col), sf.scalar_slot, sf.block_dims, row);
                // expr - U(r,c) = 0; off-diagonal entries are counted twice
                // by the symmetric inner product.
                row.blocks.push_back({slack, {{r, col, r == col ? -1.0 : -0.5}}});
                row.rhs = -constant;
                row.tag = lmi.tag;
                sf.rows.push_back(std::move(row));
            }
    }

    return sf;
}

}  // namespace hyopf
