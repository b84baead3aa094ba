#include "hyopf/conic.hpp"

#include <cmath>
#include <sstream>

#include "hyopf/errors.hpp"

namespace hyopf {

std::string Tag::str() const {
    std::string s = kind;
    if (subject >= 0) s += " " + std::to_string(subject);
    if (detail >= 0) s += ":" + std::to_string(detail);
    return s;
}

LinExpr& LinExpr::add_trace(int block, const Mat& coeff) {
    std::vector<SymTriplet> trips;
    for (int c = 0; c < coeff.cols(); ++c)
        for (int r = 0; r <= c; ++r)
            if (coeff(r, c) != 0.0) trips.push_back({r, c, coeff(r, c)});
    if (!trips.empty()) traces.emplace_back(block, std::move(trips));
    return *this;
}

LinExpr& LinExpr::add_scalar(int index, double coeff) {
    if (coeff != 0.0) scalars.emplace_back(index, coeff);
    return *this;
}

double LinExpr::eval(const std::vector<Mat>& block_values, const Vec& scalar_values) const {
    double out = constant;
    for (const auto& [b, trips] : traces) {
        const Mat& X = block_values.at(b);
        for (const auto& t : trips) out += t.v * X(t.r, t.c) * (t.r == t.c ? 1.0 : 2.0);
    }
    for (const auto& [i, c] : scalars) out += c * scalar_values(i);
    return out;
}

LinExpr& LmiConstraint::entry(int r, int c) {
    if (r > c) std::swap(r, c);
    return entries.at(static_cast<size_t>(r) * dim - r * (r + 1) / 2 + c);
}

const LinExpr& LmiConstraint::entry(int r, int c) const {
    return const_cast<LmiConstraint*>(this)->entry(r, c);
}

Mat LmiConstraint::value(const std::vector<Mat>& block_values, const Vec& scalar_values) const {
    Mat out(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = r; c < dim; ++c) out(r, c) = out(c, r) = entry(r, c).eval(block_values, scalar_values);
    return out;
}

int ConicProblem::add_block(const std::string& name, int dim) {
    if (dim <= 0) throw ModelError("PSD block '" + name + "' needs positive dimension");
    blocks.push_back({name, dim});
    return static_cast<int>(blocks.size()) - 1;
}

int ConicProblem::add_scalar(const std::string& name, bool nonneg) {
    scalar_vars.push_back({name, nonneg});
    return static_cast<int>(scalar_vars.size()) - 1;
}

int ConicProblem::block_index(const std::string& name) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

void print_expr(std::ostream& os, const ConicProblem& p, const LinExpr& e) {
    bool first = true;
    auto sep = [&] {
        if (!first) os << " + ";
        first = false;
    };
    for (const auto& [b, trips] : e.traces) {
        sep();
        os << "tr(" << p.blocks[b].name << "; ";
        bool f2 = true;
        for (const auto& t : trips) {
            if (!f2) os << " ";
            f2 = false;
            os << "[" << t.r << "," << t.c << "]=" << t.v;
        }
        os << ")";
    }
    for (const auto& [i, c] : e.scalars) {
        sep();
        os << c << "*" << p.scalar_vars[i].name;
    }
    if (e.constant != 0.0 || first) {
        sep();
        os << e.constant;
    }
}

}  // namespace

std::string ConicProblem::dump() const {
    std::ostringstream os;
    os.precision(12);
    os << "blocks " << blocks.size() << "\n";
    for (const auto& b : blocks) os << "  psd " << b.name << " dim " << b.dim << "\n";
    os << "scalars " << scalar_vars.size() << "\n";
    for (const auto& s : scalar_vars)
        os << "  " << (s.nonneg ? "nonneg " : "free   ") << s.name << "\n";
    os << "objective: ";
    print_expr(os, *this, objective);
    os << "\n";
    os << "linear_constraints " << linear.size() << "\n";
    for (const auto& c : linear) {
        os << "  [" << c.tag.str() << "] ";
        if (c.lo == c.hi) {
            print_expr(os, *this, c.expr);
            os << " == " << c.lo;
        } else {
            if (c.lo != -kInf) os << c.lo << " <= ";
            print_expr(os, *this, c.expr);
            if (c.hi != kInf) os << " <= " << c.hi;
        }
        os << "\n";
    }
    os << "lmi_constraints " << lmis.size() << "\n";
    for (const auto& c : lmis) {
        os << "  [" << c.tag.str() << "] dim " << c.dim << "\n";
        for (int r = 0; r < c.dim; ++r)
            for (int col = r; col < c.dim; ++col) {
                os << "    (" << r << "," << col << ") ";
                print_expr(os, *this, c.entry(r, col));
                os << "\n";
            }
    }
    return os.str();
}

}  // namespace hyopf
