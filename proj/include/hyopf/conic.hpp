#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "hyopf/coefficients.hpp"

namespace hyopf {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One entry of a symmetric coefficient matrix, upper triangle (r <= c).
// The trace inner product counts off-diagonal entries twice.
struct SymTriplet {
    int r = 0, c = 0;
    double v = 0.0;
};

struct Tag {
    std::string kind;  // constraint family, e.g. "dc-injection-bound"
    int subject = -1;  // bus / line / device identifier, -1 when n/a
    int detail = -1;   // orientation or secondary id
    std::string str() const;
};

// Affine expression over PSD-block traces and scalar variables.
struct LinExpr {
    std::vector<std::pair<int, std::vector<SymTriplet>>> traces;  // block index -> coeffs
    std::vector<std::pair<int, double>> scalars;                  // scalar index -> coeff
    double constant = 0.0;

    LinExpr& add_trace(int block, const Mat& coeff);
    LinExpr& add_scalar(int index, double coeff);
    double eval(const std::vector<Mat>& block_values, const Vec& scalar_values) const;
};

// lo <= expr <= hi (either side may be infinite; lo == hi is an equality).
struct LinearConstraint {
    LinExpr expr;
    double lo = -kInf;
    double hi = kInf;
    Tag tag;
};

// Affine matrix constrained PSD; entries in row-major upper triangle order.
struct LmiConstraint {
    int dim = 0;
    std::vector<LinExpr> entries;  // dim*(dim+1)/2 of them
    Tag tag;

    LinExpr& entry(int r, int c);
    const LinExpr& entry(int r, int c) const;
    Mat value(const std::vector<Mat>& block_values, const Vec& scalar_values) const;
};

struct PsdBlock {
    std::string name;
    int dim = 0;
};

struct ScalarVar {
    std::string name;
    bool nonneg = false;
};

struct ConicProblem {
    std::vector<PsdBlock> blocks;
    std::vector<ScalarVar> scalar_vars;
    LinExpr objective;  // minimized
    std::vector<LinearConstraint> linear;
    std::vector<LmiConstraint> lmis;

    int add_block(const std::string& name, int dim);
    int add_scalar(const std::string& name, bool nonneg);
    int block_index(const std::string& name) const;  // -1 when absent

    // Deterministic text export of blocks, scalars and tagged constraints.
    std::string dump() const;
};

}  // namespace hyopf
