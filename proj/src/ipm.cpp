#include "hyopf/ipm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "hyopf/errors.hpp"

namespace hyopf {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::MaxIterations: return "MaxIterations";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

namespace {

using Triplets = std::vector<SymTriplet>;

void scatter(const Triplets& trips, double w, Mat& A) {
    for (const auto& t : trips) {
        A(t.r, t.c) += w * t.v;
        if (t.r != t.c) A(t.c, t.r) += w * t.v;
    }
}

// <A, T> for symmetric T, A given as upper-triangle triplets.
double sym_dot(const Triplets& trips, const Mat& T) {
    double out = 0.0;
    for (const auto& t : trips) out += t.v * T(t.r, t.c) * (t.r == t.c ? 1.0 : 2.0);
    return out;
}

// Invertible square root factor of a (near-)PSD matrix: X = F F'.
Mat psd_factor(const Mat& X) {
    Eigen::LLT<Mat> llt(X);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Mat> es(X);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in scaling");
    Vec ev = es.eigenvalues();
    double floor_val = std::max(ev.maxCoeff(), 1.0) * 1e-14;
    for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), floor_val));
    return es.eigenvectors() * ev.asDiagonal();
}

// Problem data reorganized for the iteration.
struct Workspace {
    const StandardForm& sf;
    int m = 0, nb = 0;
    std::vector<int> dims;
    // per block: rows touching it, with accumulated triplets
    std::vector<std::vector<std::pair<int, Triplets>>> block_rows;
    // per nonneg scalar: (row, coeff) incidences
    std::vector<std::vector<std::pair<int, double>>> nn_cols;
    Mat F;  // m x n_free
    Vec rhs;
    std::vector<Mat> C;
    Vec c_nn, c_free;
    // Diagonal equilibration: row i of (A, b) divided by row_scale(i), the
    // objective divided by obj_scale. Solve in the scaled problem, map back.
    Vec row_scale;
    double obj_scale = 1.0;

    explicit Workspace(const StandardForm& form, bool equilibrate = false) : sf(form) {
        m = static_cast<int>(form.rows.size());
        nb = static_cast<int>(form.block_dims.size());
        dims = form.block_dims;
        block_rows.resize(nb);
        nn_cols.resize(form.n_nonneg);
        F = Mat::Zero(m, form.n_free);
        rhs = Vec::Zero(m);
        for (int i = 0; i < m; ++i) {
            const auto& row = form.rows[i];
            rhs(i) = row.rhs;
            for (const auto& bt : row.blocks) {
                auto& lst = block_rows[bt.block];
                if (!lst.empty() && lst.back().first == i)
                    lst.back().second.insert(lst.back().second.end(), bt.coeffs.begin(),
                                             bt.coeffs.end());
                else
                    lst.emplace_back(i, bt.coeffs);
            }
            for (const auto& [j, c] : row.nonneg) nn_cols[j].emplace_back(i, c);
            for (const auto& [j, c] : row.free_vars) F(i, j) += c;
        }
        C.resize(nb);
        for (int b = 0; b < nb; ++b) C[b] = Mat::Zero(dims[b], dims[b]);
        for (const auto& bt : form.obj_blocks) scatter(bt.coeffs, 1.0, C[bt.block]);
        c_nn = Vec::Zero(form.n_nonneg);
        for (const auto& [j, c] : form.obj_nonneg) c_nn(j) += c;
        c_free = Vec::Zero(form.n_free);
        for (const auto& [j, c] : form.obj_free) c_free(j) += c;

        row_scale = Vec::Ones(m);
        if (!equilibrate) return;
        Vec nrm2 = Vec::Zero(m);
        for (int b = 0; b < nb; ++b)
            for (const auto& [i, trips] : block_rows[b])
                for (const auto& t : trips) nrm2(i) += t.v * t.v * (t.r == t.c ? 1.0 : 2.0);
        for (size_t j = 0; j < nn_cols.size(); ++j)
            for (const auto& [i, c] : nn_cols[j]) nrm2(i) += c * c;
        for (int i = 0; i < m; ++i) nrm2(i) += F.row(i).squaredNorm();
        for (int i = 0; i < m; ++i) {
            double s = std::sqrt(nrm2(i));
            row_scale(i) = s > 0 ? s : 1.0;
        }
        for (int b = 0; b < nb; ++b)
            for (auto& [i, trips] : block_rows[b])
                for (auto& t : trips) t.v /= row_scale(i);
        for (auto& col : nn_cols)
            for (auto& [i, c] : col) c /= row_scale(i);
        for (int i = 0; i < m; ++i) {
            F.row(i) /= row_scale(i);
            rhs(i) /= row_scale(i);
        }
        double cmax = 0.0;
        for (int b = 0; b < nb; ++b)
            if (dims[b] > 0) cmax = std::max(cmax, C[b].cwiseAbs().maxCoeff());
        if (c_nn.size() > 0) cmax = std::max(cmax, c_nn.cwiseAbs().maxCoeff());
        if (c_free.size() > 0) cmax = std::max(cmax, c_free.cwiseAbs().maxCoeff());
        obj_scale = std::max(1.0, cmax);
        for (int b = 0; b < nb; ++b) C[b] /= obj_scale;
        c_nn /= obj_scale;
        c_free /= obj_scale;
    }

    Vec primal_residual(const std::vector<Mat>& X, const Vec& x, const Vec& f) const {
        Vec r = rhs;
        for (int b = 0; b < nb; ++b)
            for (const auto& [i, trips] : block_rows[b]) r(i) -= sym_dot(trips, X[b]);
        for (size_t j = 0; j < nn_cols.size(); ++j)
            for (const auto& [i, c] : nn_cols[j]) r(i) -= c * x(j);
        if (F.cols() > 0) r -= F * f;
        return r;
    }

    // C - Z - A'(y), per block; plus the scalar duals.
    void dual_residual(const std::vector<Mat>& Z, const Vec& z, const Vec& y,
                       std::vector<Mat>& Rd, Vec& rdn, Vec& rf) const {
        Rd.resize(nb);
        for (int b = 0; b < nb; ++b) {
            Rd[b] = C[b] - Z[b];
            for (const auto& [i, trips] : block_rows[b]) scatter(trips, -y(i), Rd[b]);
        }
        rdn = c_nn - z;
        for (size_t j = 0; j < nn_cols.size(); ++j)
            for (const auto& [i, c] : nn_cols[j]) rdn(j) -= c * y(i);
        rf = c_free;
        if (F.cols() > 0) rf -= F.transpose() * y;
    }

    double primal_objective(const std::vector<Mat>& X, const Vec& x, const Vec& f) const {
        double v = 0.0;
        for (int b = 0; b < nb; ++b) v += (C[b].array() * X[b].array()).sum();
        v += c_nn.dot(x) + c_free.dot(f);
        return sf.obj_constant + obj_scale * v;
    }

    double dual_objective(const Vec& y) const {
        return sf.obj_constant + obj_scale * rhs.dot(y);
    }
};

// Nesterov-Todd scaling per block: W = G G' with W Z W = X; lambda holds the
// common scaled spectrum.
struct BlockScaling {
    Mat G, Gt;
    Vec lambda;
};

BlockScaling nt_scaling(const Mat& X, const Mat& Z) {
    BlockScaling s;
    Mat Lx = psd_factor(X);
    Mat Lz = psd_factor(Z);
    Eigen::BDCSVD<Mat> svd(Lz.transpose() * Lx, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec sv = svd.singularValues();
    Vec inv_sqrt(sv.size());
    for (int i = 0; i < sv.size(); ++i) {
        if (!(sv(i) > 0)) throw NumericalError("singular NT scaling");
        inv_sqrt(i) = 1.0 / std::sqrt(sv(i));
    }
    s.G = Lx * svd.matrixV() * inv_sqrt.asDiagonal();
    s.Gt = s.G.transpose();
    s.lambda = sv;
    return s;
}

// The Schur system reaches condition numbers around 1/mu^2 near convergence,
// past what double-precision LLT plus refinement can recover, so the
// factorization and solves run in extended precision.
struct AugmentedSolver {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    LMat M, F, MinvF;
    Eigen::LLT<LMat> lltM;
    Eigen::LLT<LMat> lltK;

    bool factor(const Mat& Mmat, const Mat& Fmat) {
        M = Mmat.cast<long double>();
        F = Fmat.cast<long double>();
        long double reg = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            lltM.compute(M);
            if (lltM.info() == Eigen::Success) break;
            long double bump = (reg == 0.0 ? 1e-16L : reg * 100) *
                               std::max<long double>(1.0, M.diagonal().cwiseAbs().maxCoeff());
            M.diagonal().array() += bump - reg;
            reg = bump;
            if (attempt == 3) return false;
        }
        if (F.cols() > 0) {
            MinvF = lltM.solve(F);
            LMat K = F.transpose() * MinvF;
            lltK.compute(K);
            if (lltK.info() != Eigen::Success) return false;
        }
        return true;
    }

    void base_solve(const LVec& h, const LVec& rf, LVec& dy, LVec& df) const {
        LVec g = lltM.solve(h);
        if (F.cols() > 0) {
            df = lltK.solve(F.transpose() * g - rf);
            dy = g - MinvF * df;
        } else {
            df.resize(0);
            dy = g;
        }
    }

    void solve(const Vec& hd, const Vec& rfd, Vec& dy_out, Vec& df_out, int refinements) const {
        LVec h = hd.cast<long double>();
        LVec rf = rfd.cast<long double>();
        LVec dy, df;
        base_solve(h, rf, dy, df);
        for (int it = 0; it < refinements; ++it) {
            LVec res_h = h - M.selfadjointView<Eigen::Lower>() * dy;
            if (F.cols() > 0) res_h -= F * df;
            LVec res_f = F.cols() > 0 ? LVec(rf - F.transpose() * dy) : LVec();
            LVec cy, cf;
            base_solve(res_h, res_f, cy, cf);
            dy += cy;
            if (F.cols() > 0) df += cf;
        }
        dy_out = dy.cast<double>();
        df_out = df.cast<double>();
    }
};

double max_step_scaled(const Vec& lambda, const Mat& D) {
    if (lambda.size() == 0) return std::numeric_limits<double>::infinity();
    Vec inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
    Mat S = inv_sqrt.asDiagonal() * D * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    double emin = es.eigenvalues().minCoeff();
    return emin < 0 ? -1.0 / emin : std::numeric_limits<double>::infinity();
}

}  // namespace

RawSolution solve(const StandardForm& sf, const SolverOptions& opts) {
    Workspace ws(sf, /*equilibrate=*/true);
    const int m = ws.m, nb = ws.nb, nn = sf.n_nonneg, nf = sf.n_free;
    const double step_frac = 0.99;

    RawSolution sol;
    if (m == 0) throw CompileError("problem has no constraints");

    // Interior start scaled to the data.
    double data_scale = 1.0;
    for (int i = 0; i < m; ++i) data_scale = std::max(data_scale, std::abs(ws.rhs(i)));
    double cost_scale = 1.0;
    for (int b = 0; b < nb; ++b)
        cost_scale = std::max(cost_scale, ws.C[b].cwiseAbs().maxCoeff());
    if (nn > 0 && ws.c_nn.size() > 0)
        cost_scale = std::max(cost_scale, ws.c_nn.cwiseAbs().maxCoeff());
    const double tau = std::max(1.0, std::sqrt(data_scale));
    const double rho = std::max(1.0, std::sqrt(cost_scale));

    sol.X.resize(nb);
    sol.Z.resize(nb);
    for (int b = 0; b < nb; ++b) {
        sol.X[b] = tau * Mat::Identity(ws.dims[b], ws.dims[b]);
        sol.Z[b] = rho * Mat::Identity(ws.dims[b], ws.dims[b]);
    }
    sol.x_nonneg = Vec::Constant(nn, tau);
    sol.z_nonneg = Vec::Constant(nn, rho);
    sol.f = Vec::Zero(nf);
    sol.y = Vec::Zero(m);
    sol.status = SolveStatus::MaxIterations;

    double nu = nn;
    for (int b = 0; b < nb; ++b) nu += ws.dims[b];
    const double rhs_norm = 1.0 + ws.rhs.norm();
    double cnorm = ws.c_nn.norm() + ws.c_free.norm();
    for (int b = 0; b < nb; ++b) cnorm += ws.C[b].norm();
    const double c_norm = 1.0 + cnorm;

    double mu0 = 0.0;
    int consecutive_short_steps = 0;

    std::vector<BlockScaling> scal(nb);
    std::vector<Mat> Rd;
    Vec rdn, rf;

    // Gram matrix of the constraint map, built lazily for the primal polish.
    // Unlike the Schur complement it is independent of the iterate and stays
    // well conditioned, so a projection through it is accurate.
    Mat gram;
    Eigen::LLT<Mat> gram_llt;
    int gram_state = 0;  // 0 unbuilt, 1 ready, -1 failed

    auto try_polish = [&](const Vec& rp) -> bool {
        if (gram_state == 0) {
            gram = Mat::Zero(m, m);
            for (int b = 0; b < nb; ++b) {
                const auto& rows_b = ws.block_rows[b];
                Mat A = Mat::Zero(ws.dims[b], ws.dims[b]);
                for (size_t jj = 0; jj < rows_b.size(); ++jj) {
                    A.setZero();
                    scatter(rows_b[jj].second, 1.0, A);
                    for (size_t ii = 0; ii < rows_b.size(); ++ii)
                        gram(rows_b[ii].first, rows_b[jj].first) +=
                            sym_dot(rows_b[ii].second, A);
                }
            }
            for (int j = 0; j < nn; ++j)
                for (const auto& [ri, ci] : ws.nn_cols[j])
                    for (const auto& [rk, ck] : ws.nn_cols[j]) gram(ri, rk) += ci * ck;
            if (nf > 0) gram += ws.F * ws.F.transpose();
            gram = 0.5 * (gram + gram.transpose()).eval();
            gram.diagonal().array() += 1e-13 * gram.diagonal().cwiseAbs().maxCoeff();
            gram_llt.compute(gram);
            gram_state = gram_llt.info() == Eigen::Success ? 1 : -1;
        }
        if (gram_state < 0) return false;
        (void)rp;

        // Alternating projections between the affine constraint set and the
        // cone. Both contain the true optimum, so the iterate converges into
        // their intersection while moving only O(current error).
        std::vector<Mat> Xc = sol.X;
        Vec xc = sol.x_nonneg;
        Vec fc = sol.f;
        double pinf2 = std::numeric_limits<double>::infinity();
        for (int round = 0; round < 40; ++round) {
            Vec rc = ws.primal_residual(Xc, xc, fc);
            Vec u = gram_llt.solve(rc);
            u += gram_llt.solve(rc - gram.selfadjointView<Eigen::Lower>() * u);
            for (int b = 0; b < nb; ++b)
                for (const auto& [i, trips] : ws.block_rows[b]) scatter(trips, u(i), Xc[b]);
            for (int j = 0; j < nn; ++j)
                for (const auto& [i, c] : ws.nn_cols[j]) xc(j) += c * u(i);
            if (nf > 0) fc += ws.F.transpose() * u;
            for (int b = 0; b < nb; ++b) {
                Eigen::SelfAdjointEigenSolver<Mat> es(Xc[b]);
                if (es.info() != Eigen::Success) return false;
                if (es.eigenvalues().minCoeff() >= 0) continue;
                Vec ev = es.eigenvalues().cwiseMax(0.0);
                Xc[b] = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
                Xc[b] = 0.5 * (Xc[b] + Xc[b].transpose()).eval();
            }
            xc = xc.cwiseMax(0.0);
            pinf2 = ws.primal_residual(Xc, xc, fc).norm() / (1.0 + ws.rhs.norm());
            if (pinf2 <= 0.3 * opts.feas_tol) break;
        }
        double gap2 = xc.dot(sol.z_nonneg);
        for (int b = 0; b < nb; ++b) gap2 += (Xc[b].array() * sol.Z[b].array()).sum();
        double pobj2 = ws.primal_objective(Xc, xc, fc);
        double rel2 = ws.obj_scale * std::abs(gap2) /
                      (1.0 + std::abs(pobj2) + std::abs(sol.dual_obj));
        if (opts.verbosity >= 2)
            std::fprintf(stderr, "polish: pinf %.2e -> %.2e  relgap -> %.2e\n",
                         rp.norm() / (1.0 + ws.rhs.norm()), pinf2, rel2);
        if (pinf2 > opts.feas_tol) return false;
        if (rel2 > opts.gap_tol) return false;

        sol.X = std::move(Xc);
        sol.x_nonneg = std::move(xc);
        sol.f = std::move(fc);
        sol.primal_obj = pobj2;
        sol.gap = ws.obj_scale * gap2;
        sol.rel_gap = rel2;
        sol.primal_inf = pinf2;
        return true;
    };

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        sol.iterations = iter;
        Vec rp = ws.primal_residual(sol.X, sol.x_nonneg, sol.f);
        ws.dual_residual(sol.Z, sol.z_nonneg, sol.y, Rd, rdn, rf);

        double gap = sol.x_nonneg.dot(sol.z_nonneg);
        for (int b = 0; b < nb; ++b) gap += (sol.X[b].array() * sol.Z[b].array()).sum();
        double mu = gap / nu;
        if (iter == 0) mu0 = mu;

        sol.primal_obj = ws.primal_objective(sol.X, sol.x_nonneg, sol.f);
        sol.dual_obj = ws.dual_objective(sol.y);
        sol.gap = ws.obj_scale * gap;
        sol.rel_gap = sol.gap / (1.0 + std::abs(sol.primal_obj) + std::abs(sol.dual_obj));
        double dinf2 = rdn.squaredNorm() + rf.squaredNorm();
        for (int b = 0; b < nb; ++b) dinf2 += Rd[b].squaredNorm();
        sol.primal_inf = rp.norm() / rhs_norm;
        sol.dual_inf = std::sqrt(dinf2) / c_norm;

        if (opts.verbosity >= 1)
            std::fprintf(stderr, "it %3d  pobj %+.9e  dobj %+.9e  gap %.2e  pinf %.2e  dinf %.2e\n",
                         iter, sol.primal_obj, sol.dual_obj, sol.rel_gap, sol.primal_inf,
                         sol.dual_inf);

        if (sol.rel_gap <= opts.gap_tol && sol.primal_inf <= opts.feas_tol &&
            sol.dual_inf <= opts.feas_tol) {
            sol.status = SolveStatus::Optimal;
            break;
        }
        // Near convergence the Schur system turns ill conditioned and the
        // primal residual can stall at solve-noise level while the gap keeps
        // shrinking. Project the iterate back onto the affine constraints and
        // re-test; accept only if every criterion then holds.
        if (sol.rel_gap <= opts.gap_tol && sol.dual_inf <= opts.feas_tol &&
            sol.primal_inf < 1e-5 && try_polish(rp)) {
            sol.status = SolveStatus::Optimal;
            break;
        }

        // Divergence heuristics. A near-feasible dual sequence with exploding
        // objective certifies primal infeasibility, and vice versa.
        if (sol.dual_obj > 1e9 * (1.0 + data_scale) && sol.dual_inf < 1e-4) {
            sol.status = SolveStatus::Infeasible;
            break;
        }
        if (sol.primal_obj < -1e9 * (1.0 + cost_scale) && sol.primal_inf < 1e-4) {
            sol.status = SolveStatus::Unbounded;
            break;
        }
        // Complementarity exhausted without reaching feasibility: stop rather
        // than grind on a numerically hopeless barrier path.
        if (mu < 1e-12 * mu0 && mu < 1e-14) {
            sol.status = SolveStatus::NumericalFailure;
            break;
        }

        try {
            for (int b = 0; b < nb; ++b) scal[b] = nt_scaling(sol.X[b], sol.Z[b]);
        } catch (const NumericalError&) {
            sol.status = SolveStatus::NumericalFailure;
            break;
        }
        Vec w2(nn), lam_nn(nn);
        for (int j = 0; j < nn; ++j) {
            w2(j) = sol.x_nonneg(j) / sol.z_nonneg(j);
            lam_nn(j) = std::sqrt(sol.x_nonneg(j) * sol.z_nonneg(j));
        }

        // Schur complement M = A(W . W)A' over PSD blocks and scaled scalars.
        Mat M = Mat::Zero(m, m);
        std::vector<std::vector<Mat>> T_cache(nb);  // W A_i W per touching row
        for (int b = 0; b < nb; ++b) {
            const auto& rows_b = ws.block_rows[b];
            T_cache[b].resize(rows_b.size());
            const Mat& G = scal[b].G;
            const Mat& Gt = scal[b].Gt;
            Mat A = Mat::Zero(ws.dims[b], ws.dims[b]);
            for (size_t jj = 0; jj < rows_b.size(); ++jj) {
                A.setZero();
                scatter(rows_b[jj].second, 1.0, A);
                Mat T = G * (Gt * A * G) * Gt;  // = W A W
                for (size_t ii = 0; ii < rows_b.size(); ++ii) {
                    double v = sym_dot(rows_b[ii].second, T);
                    M(rows_b[ii].first, rows_b[jj].first) += v;
                }
                T_cache[b][jj] = std::move(T);
            }
        }
        for (int j = 0; j < nn; ++j)
            for (const auto& [ri, ci] : ws.nn_cols[j])
                for (const auto& [rk, ck] : ws.nn_cols[j]) M(ri, rk) += w2(j) * ci * ck;
        // Average out assembly round-off so the factorization sees an exactly
        // symmetric matrix.
        M = 0.5 * (M + M.transpose()).eval();

        AugmentedSolver aug;
        if (!aug.factor(M, ws.F)) {
            sol.status = SolveStatus::NumericalFailure;
            break;
        }
        const int refinements = mu < 1e-6 * mu0 ? 3 : (mu < 1e-2 * mu0 ? 2 : 1);

        // Common pieces: scaled dual residual contribution W Rd W.
        std::vector<Mat> WRdW(nb);
        for (int b = 0; b < nb; ++b)
            WRdW[b] = scal[b].G * (scal[b].Gt * Rd[b] * scal[b].G) * scal[b].Gt;

        auto schur_rhs = [&](const std::vector<Mat>& TE, const Vec& tE_nn) {
            Vec h = rp;
            for (int b = 0; b < nb; ++b) {
                Mat P = WRdW[b] - TE[b];
                for (const auto& [i, trips] : ws.block_rows[b]) h(i) += sym_dot(trips, P);
            }
            for (int j = 0; j < nn; ++j) {
                double pj = w2(j) * rdn(j) - tE_nn(j);
                for (const auto& [i, c] : ws.nn_cols[j]) h(i) += c * pj;
            }
            return h;
        };

        // Given dy, recover the full direction in scaled space.
        struct Direction {
            std::vector<Mat> Dx, Dz, dX, dZ;
            Vec dx_nn, dz_nn, dxs_nn, dzs_nn;
            Vec dy, df;
        };
        auto expand = [&](const Vec& dy, const Vec& df, const std::vector<Mat>& K_blocks,
                          const Vec& tE_nn) {
            Direction d;
            d.dy = dy;
            d.df = df;
            d.Dx.resize(nb);
            d.Dz.resize(nb);
            d.dX.resize(nb);
            d.dZ.resize(nb);
            for (int b = 0; b < nb; ++b) {
                Mat dZ = Rd[b];
                for (const auto& [i, trips] : ws.block_rows[b]) scatter(trips, -dy(i), dZ);
                d.dZ[b] = dZ;
                d.Dz[b] = scal[b].Gt * dZ * scal[b].G;
                d.Dz[b] = 0.5 * (d.Dz[b] + d.Dz[b].transpose()).eval();
                d.Dx[b] = K_blocks[b] - d.Dz[b];
                d.dX[b] = scal[b].G * d.Dx[b] * scal[b].Gt;
                d.dX[b] = 0.5 * (d.dX[b] + d.dX[b].transpose()).eval();
            }
            d.dz_nn = rdn;
            for (int j = 0; j < nn; ++j)
                for (const auto& [i, c] : ws.nn_cols[j]) d.dz_nn(j) -= c * dy(i);
            d.dx_nn = Vec(nn);
            for (int j = 0; j < nn; ++j) d.dx_nn(j) = tE_nn(j) - w2(j) * d.dz_nn(j);
            d.dxs_nn = Vec(nn);
            d.dzs_nn = Vec(nn);
            for (int j = 0; j < nn; ++j) {
                d.dxs_nn(j) = d.dx_nn(j) / std::sqrt(w2(j));
                d.dzs_nn(j) = d.dz_nn(j) * std::sqrt(w2(j));
            }
            return d;
        };

        auto step_limits = [&](const Direction& d) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = std::numeric_limits<double>::infinity();
            for (int b = 0; b < nb; ++b) {
                ap = std::min(ap, max_step_scaled(scal[b].lambda, d.Dx[b]));
                ad = std::min(ad, max_step_scaled(scal[b].lambda, d.Dz[b]));
            }
            for (int j = 0; j < nn; ++j) {
                if (d.dxs_nn(j) < 0) ap = std::min(ap, -lam_nn(j) / d.dxs_nn(j));
                if (d.dzs_nn(j) < 0) ad = std::min(ad, -lam_nn(j) / d.dzs_nn(j));
            }
            return std::pair{ap, ad};
        };

        // Predictor: drive straight toward complementarity zero.
        std::vector<Mat> K_aff(nb), TE_aff(nb);
        for (int b = 0; b < nb; ++b) {
            K_aff[b] = Mat(Vec(-scal[b].lambda).asDiagonal());
            TE_aff[b] = -sol.X[b];
        }
        Vec tE_aff = -sol.x_nonneg;

        Vec dy_aff, df_aff;
        aug.solve(schur_rhs(TE_aff, tE_aff), rf, dy_aff, df_aff, refinements);
        Direction aff = expand(dy_aff, df_aff, K_aff, tE_aff);
        auto [ap_aff, ad_aff] = step_limits(aff);
        double alpha_aff = std::min({1.0, ap_aff, ad_aff});

        // Centering weight from the affine trial point.
        double gap_aff = 0.0;
        for (int b = 0; b < nb; ++b) {
            Vec lam = scal[b].lambda;
            gap_aff += (Mat((lam.asDiagonal())) + alpha_aff * aff.Dx[b])
                           .cwiseProduct(Mat(lam.asDiagonal()) + alpha_aff * aff.Dz[b])
                           .sum();
        }
        for (int j = 0; j < nn; ++j)
            gap_aff += (lam_nn(j) + alpha_aff * aff.dxs_nn(j)) *
                       (lam_nn(j) + alpha_aff * aff.dzs_nn(j));
        double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
        sigma = std::min(1.0, sigma);

        // Corrector with Mehrotra second-order term.
        std::vector<Mat> K_cor(nb), TE_cor(nb);
        for (int b = 0; b < nb; ++b) {
            const Vec& lam = scal[b].lambda;
            Mat E = -0.5 * (aff.Dx[b] * aff.Dz[b] + aff.Dz[b] * aff.Dx[b]);
            E.diagonal().array() += sigma * mu;
            E -= Mat(lam.cwiseProduct(lam).asDiagonal());
            Mat K(E.rows(), E.cols());
            for (int r = 0; r < E.rows(); ++r)
                for (int c = 0; c < E.cols(); ++c) K(r, c) = 2.0 * E(r, c) / (lam(r) + lam(c));
            K_cor[b] = K;
            TE_cor[b] = scal[b].G * K * scal[b].Gt;
            TE_cor[b] = 0.5 * (TE_cor[b] + TE_cor[b].transpose()).eval();
        }
        Vec tE_cor(nn);
        for (int j = 0; j < nn; ++j) {
            double e = sigma * mu - lam_nn(j) * lam_nn(j) - aff.dxs_nn(j) * aff.dzs_nn(j);
            tE_cor(j) = std::sqrt(w2(j)) * e / lam_nn(j);
        }

        Vec dy, df;
        aug.solve(schur_rhs(TE_cor, tE_cor), rf, dy, df, refinements);
        Direction dir = expand(dy, df, K_cor, tE_cor);
        auto [ap, ad] = step_limits(dir);
        double alpha_p = std::min(1.0, step_frac * ap);
        double alpha_d = std::min(1.0, step_frac * ad);

        if (alpha_p < 1e-8 && alpha_d < 1e-8) {
            if (++consecutive_short_steps >= 3) {
                sol.status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            consecutive_short_steps = 0;
        }

        for (int b = 0; b < nb; ++b) {
            sol.X[b] += alpha_p * dir.dX[b];
            sol.Z[b] += alpha_d * dir.dZ[b];
        }
        sol.x_nonneg += alpha_p * dir.dx_nn;
        sol.z_nonneg += alpha_d * dir.dz_nn;
        sol.f += alpha_p * dir.df;
        sol.y += alpha_d * dir.dy;
        sol.iterations = iter + 1;
    }

    // Map the dual iterate back to the unscaled problem.
    for (int i = 0; i < m; ++i) sol.y(i) *= ws.obj_scale / ws.row_scale(i);
    for (int b = 0; b < nb; ++b) sol.Z[b] *= ws.obj_scale;
    sol.z_nonneg *= ws.obj_scale;

    // Rank the constraints by dual weight for diagnostics.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(sol.y(a)) > std::abs(sol.y(b)); });
    for (int i = 0; i < std::min(m, 5); ++i) sol.suspect_tags.push_back(sf.rows[order[i]].tag.str());
    return sol;
}

ResidualNorms residuals(const StandardForm& sf, const RawSolution& sol) {
    Workspace ws(sf);
    ResidualNorms out;
    out.primal_inf = ws.primal_residual(sol.X, sol.x_nonneg, sol.f).norm();
    std::vector<Mat> Rd;
    Vec rdn, rf;
    ws.dual_residual(sol.Z, sol.z_nonneg, sol.y, Rd, rdn, rf);
    double d2 = rdn.squaredNorm() + rf.squaredNorm();
    for (const auto& R : Rd) d2 += R.squaredNorm();
    out.dual_inf = std::sqrt(d2);
    out.gap = sol.x_nonneg.dot(sol.z_nonneg);
    for (size_t b = 0; b < sol.X.size(); ++b)
        out.gap += (sol.X[b].array() * sol.Z[b].array()).sum();
    return out;
}

ConicSolution solve_relaxation(const Relaxation& rel, const SolverOptions& opts) {
    StandardForm sf = compile(rel.problem);
    RawSolution raw = solve(sf, opts);

    ConicSolution cs;
    cs.status = raw.status;
    cs.iterations = raw.iterations;
    cs.objective_value = raw.primal_obj;
    cs.duality_gap = raw.rel_gap;
    if (rel.w_ac >= 0) {
        // Reinsert the eliminated slack-imaginary coordinate as a zero
        // row/column so consumers see the full voltage lift.
        const Mat& R = raw.X[rel.w_ac];
        const int nf = static_cast<int>(R.rows()) + 1;
        Mat full = Mat::Zero(nf, nf);
        for (int r = 0, rr = 0; r < nf; ++r) {
            if (r == rel.ac_drop) continue;
            for (int c = 0, cc = 0; c < nf; ++c) {
                if (c == rel.ac_drop) continue;
                full(r, c) = R(rr, cc++);
            }
            ++rr;
        }
        cs.w_ac = full;
    }
    if (rel.w_dc >= 0) cs.w_dc = raw.X[rel.w_dc];

    auto scalar_value = [&](int idx) -> double {
        if (idx < 0) return 0.0;
        auto [nonneg, slot] = sf.scalar_slot[idx];
        return nonneg ? raw.x_nonneg(slot) : raw.f(slot);
    };
    cs.alpha = Vec(rel.alpha.size());
    for (size_t g = 0; g < rel.alpha.size(); ++g) cs.alpha(g) = scalar_value(rel.alpha[g]);
    cs.S = Vec(rel.dcdc_s.size());
    cs.Q = Vec(rel.dcdc_q.size());
    for (size_t d = 0; d < rel.dcdc_s.size(); ++d) {
        cs.S(d) = scalar_value(rel.dcdc_s[d]);
        cs.Q(d) = scalar_value(rel.dcdc_q[d]);
    }
    cs.raw = std::move(raw);
    return cs;
}

}  // namespace hyopf
