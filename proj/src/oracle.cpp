#include "hyopf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hyopf/errors.hpp"
#include "hyopf/recovery.hpp"
#include "hyopf/verifier.hpp"

namespace hyopf {

namespace {

struct Dof {
    double* target = nullptr;
    double lo = 0.0, hi = 0.0;
};

// All continuous state of one trial point.
struct Trial {
    Vec ac_mag, ac_ang, v_dc, q;
};

}  // namespace

OracleResult brute_force_opf(const NetworkCase& cs, int resolution, unsigned seed) {
    if (resolution < 2) throw OracleError("grid resolution must be at least 2");
    const int n_ac = static_cast<int>(cs.ac_buses.size());
    const int n_dc = static_cast<int>(cs.dc_buses.size());
    const int n_cv = static_cast<int>(cs.dcdc_converters.size());

    Trial t;
    t.ac_mag = Vec::Ones(n_ac);
    t.ac_ang = Vec::Zero(n_ac);
    t.v_dc = Vec::Ones(n_dc);
    t.q = Vec::Zero(n_cv);

    std::vector<Dof> grid;  // searched dimensions
    // Newton unknowns with their cold-start values; the square system built
    // from `eqs` is solved jointly, so order does not pair them individually.
    std::vector<std::pair<double*, double>> unk;
    struct Equation {
        enum Kind { AcP, AcQ, DcPin, ConvBalance } kind;
        int idx;       // bus or converter index
        double value;  // pin value for DcPin
    };
    std::vector<Equation> eqs;

    // A converter whose DC terminal is the master bus contributes a balance
    // equation but no free DC voltage; its AC angle takes that role.
    auto dc_is_master = [&](int dc_bus_id) {
        return cs.dc_buses[cs.dc_index(dc_bus_id)].is_master;
    };

    for (int k = 0; k < n_ac; ++k) {
        const AcBus& bus = cs.ac_buses[k];
        bool has_gen = !cs.generators_at(bus.id).empty();
        int conv = cs.converter_at_ac(bus.id);
        if (has_gen || conv >= 0 || bus.is_slack) {
            grid.push_back({&t.ac_mag(k), bus.v_min, bus.v_max});
            bool angle_solves_balance = conv >= 0 && dc_is_master(cs.acdc_converters[conv].dc_bus);
            if (bus.is_slack) {
                if (angle_solves_balance)
                    throw OracleError("converter at the AC slack and DC master bus pair "
                                      "is not supported");
            } else if (angle_solves_balance) {
                unk.emplace_back(&t.ac_ang(k), 0.0);
            } else {
                grid.push_back({&t.ac_ang(k), -0.6, 0.6});
            }
        } else {
            unk.emplace_back(&t.ac_mag(k), 1.0);
            eqs.push_back({Equation::AcP, k, 0.0});
            unk.emplace_back(&t.ac_ang(k), 0.0);
            eqs.push_back({Equation::AcQ, k, 0.0});
        }
    }
    const double v_master = cs.has_dc() ? cs.dc_buses[cs.dc_master_index()].v_master : 1.0;
    for (int k = 0; k < n_dc; ++k) {
        const DcBus& bus = cs.dc_buses[k];
        int conv = cs.converter_at_dc(bus.id);
        bool internal_conv = conv >= 0 && cs.acdc_converters[conv].ac_bus.has_value();
        bool pinned = bus.p_min == bus.p_max;
        if (internal_conv && pinned)
            throw OracleError("DC bus " + std::to_string(bus.id) +
                              ": pinned injection with an internal converter is not supported");
        if (internal_conv) eqs.push_back({Equation::ConvBalance, conv, 0.0});
        if (bus.is_master) {
            t.v_dc(k) = bus.v_master;
            if (pinned)
                throw OracleError("DC master bus with pinned injection is not supported");
            continue;
        }
        if (pinned) {
            unk.emplace_back(&t.v_dc(k), v_master);
            eqs.push_back({Equation::DcPin, k, bus.p_min});
        } else if (internal_conv) {
            unk.emplace_back(&t.v_dc(k), v_master);
        } else {
            grid.push_back({&t.v_dc(k), bus.v_min, bus.v_max});
        }
    }
    if (unk.size() != eqs.size())
        throw OracleError("unsupported topology: " + std::to_string(unk.size()) +
                          " free variables against " + std::to_string(eqs.size()) +
                          " balance equations");
    for (int d = 0; d < n_cv; ++d)
        grid.push_back({&t.q(d), -cs.dcdc_converters[d].q_max, cs.dcdc_converters[d].q_max});

    const CMat Y = cs.has_ac() ? build_ac_admittance(cs) : CMat();
    const Mat G = cs.has_dc() ? build_dc_admittance(cs) : Mat();

    auto ac_injection = [&](int k) {
        CVec v(n_ac);
        for (int i = 0; i < n_ac; ++i) v(i) = std::polar(t.ac_mag(i), t.ac_ang(i));
        return v(k) * std::conj((Y.row(k) * v)(0));
    };
    auto dc_injection = [&](int k) {
        double p = t.v_dc(k) * G.row(k).dot(t.v_dc);
        int id = cs.dc_buses[k].id;
        for (int d : cs.dcdc_at(id)) {
            const DcDcConverter& c = cs.dcdc_converters[d];
            double qd = t.q(d);
            p += 0.5 * (c.delta + c.beta * std::abs(qd) + c.gamma * qd * qd);
            p += (c.bus_k == id ? 1.0 : -1.0) * qd;
        }
        return p;
    };
    auto residual = [&](const Equation& e) {
        switch (e.kind) {
            case Equation::AcP:
                return ac_injection(e.idx).real() + cs.ac_buses[e.idx].p_load;
            case Equation::AcQ:
                return ac_injection(e.idx).imag() + cs.ac_buses[e.idx].q_load;
            case Equation::DcPin:
                return dc_injection(e.idx) - e.value;
            case Equation::ConvBalance: {
                const AcDcConverter& conv = cs.acdc_converters[e.idx];
                int ak = cs.ac_index(*conv.ac_bus);
                double p_ac = ac_injection(ak).real() + cs.ac_buses[ak].p_load;
                return conv.efficiency * p_ac + dc_injection(cs.dc_index(conv.dc_bus));
            }
        }
        return 0.0;
    };

    const int nu = static_cast<int>(unk.size());
    auto eval_residuals = [&]() {
        Vec r(nu);
        for (int i = 0; i < nu; ++i) r(i) = residual(eqs[i]);
        return r;
    };
    auto newton = [&]() {
        if (nu == 0) return true;
        Vec r = eval_residuals();
        for (int it = 0; it < 40; ++it) {
            if (r.lpNorm<Eigen::Infinity>() < 1e-11) return true;
            Mat J(nu, nu);
            for (int j = 0; j < nu; ++j) {
                double save = *unk[j].first;
                double h = 1e-7 * std::max(1.0, std::abs(save));
                *unk[j].first = save + h;
                Vec rp = eval_residuals();
                *unk[j].first = save - h;
                Vec rm = eval_residuals();
                *unk[j].first = save;
                J.col(j) = (rp - rm) / (2 * h);
            }
            Eigen::FullPivLU<Mat> lu(J);
            if (!lu.isInvertible()) return false;
            Vec du = lu.solve(-r);
            double alpha = 1.0;
            Vec saved(nu);
            for (int j = 0; j < nu; ++j) saved(j) = *unk[j].first;
            for (int bt = 0; bt < 6; ++bt) {
                for (int j = 0; j < nu; ++j) *unk[j].first = saved(j) + alpha * du(j);
                Vec rt = eval_residuals();
                if (rt.norm() < r.norm() || bt == 5) {
                    r = rt;
                    break;
                }
                alpha *= 0.5;
            }
        }
        return r.lpNorm<Eigen::Infinity>() < 1e-9;
    };

    auto reset_unknowns = [&]() {
        // Cold start every time so results cannot depend on visit order.
        for (auto& [ptr, start] : unk) *ptr = start;
    };

    auto make_state = [&]() {
        CVec v(n_ac);
        for (int i = 0; i < n_ac; ++i) v(i) = std::polar(t.ac_mag(i), t.ac_ang(i));
        return state_from_voltages(cs, n_ac > 0 ? v : CVec(), t.v_dc, t.q);
    };

    const int nd = static_cast<int>(grid.size());
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jit(-0.3, 0.3);

    bool found = false;
    double best_obj = 0.0;
    Vec best_dofs(nd);
    std::vector<std::pair<double, double>> window(nd);
    for (int i = 0; i < nd; ++i) window[i] = {grid[i].lo, grid[i].hi};

    const int rounds = 48;
    for (int round = 0; round < rounds; ++round) {
        std::vector<Vec> points(nd);
        for (int i = 0; i < nd; ++i) {
            auto [lo, hi] = window[i];
            Vec pts = Vec::LinSpaced(lo == hi ? 1 : resolution, lo, hi);
            if (seed != 0 && pts.size() > 2) {
                double step = (hi - lo) / (resolution - 1);
                for (int p = 1; p + 1 < pts.size(); ++p)
                    pts(p) = std::clamp(pts(p) + jit(rng) * step, lo, hi);
            }
            points[i] = pts;
        }
        std::vector<int> odo(nd, 0);
        while (true) {
            for (int i = 0; i < nd; ++i) *grid[i].target = points[i](odo[i]);
            reset_unknowns();
            if (newton()) {
                RecoveredState st = make_state();
                if (verify(cs, st, 1e-7).passed && (!found || st.objective < best_obj)) {
                    found = true;
                    best_obj = st.objective;
                    for (int i = 0; i < nd; ++i) best_dofs(i) = *grid[i].target;
                }
            }
            int i = nd - 1;
            for (; i >= 0; --i) {
                if (++odo[i] < points[i].size()) break;
                odo[i] = 0;
            }
            if (i < 0) break;
        }
        if (!found) throw OracleError("no feasible grid point at resolution " +
                                      std::to_string(resolution));
        if (nd == 0) break;
        // Pattern-search window update: an incumbent on a window edge means
        // the optimum may lie beyond it, so re-center at the same width and
        // let the window walk; shrink only around interior incumbents.
        double max_step = 0.0;
        for (int i = 0; i < nd; ++i) {
            auto [lo, hi] = window[i];
            double width = hi - lo;
            double step = width / (resolution - 1);
            bool at_edge = (best_dofs(i) <= lo + 0.5 * step && lo > grid[i].lo) ||
                           (best_dofs(i) >= hi - 0.5 * step && hi < grid[i].hi);
            double half = at_edge ? 0.5 * width : step;
            window[i] = {std::clamp(best_dofs(i) - half, grid[i].lo, grid[i].hi),
                         std::clamp(best_dofs(i) + half, grid[i].lo, grid[i].hi)};
            max_step = std::max(max_step, (window[i].second - window[i].first) /
                                              (grid[i].hi - grid[i].lo + 1e-300));
        }
        if (max_step < 1e-10) break;
    }

    // The grid phase can stall when the feasible set is a narrow curved
    // valley (tight angle coupling); finish with a Nelder-Mead descent that
    // can slide along such valleys. Infeasible points score infinity.
    if (nd > 0) {
        auto eval_point = [&](const Vec& d) {
            for (int i = 0; i < nd; ++i)
                *grid[i].target = std::clamp(d(i), grid[i].lo, grid[i].hi);
            reset_unknowns();
            if (!newton()) return std::numeric_limits<double>::infinity();
            RecoveredState s = make_state();
            if (!verify(cs, s, 1e-7).passed) return std::numeric_limits<double>::infinity();
            return s.objective;
        };
        for (int restart = 0; restart < 3; ++restart) {
            std::vector<Vec> simplex(nd + 1, best_dofs);
            std::vector<double> fv(nd + 1);
            double h0 = 0.02 / std::pow(4.0, restart);
            for (int i = 1; i <= nd; ++i)
                simplex[i](i - 1) += h0 * (grid[i - 1].hi - grid[i - 1].lo);
            for (int i = 0; i <= nd; ++i) fv[i] = eval_point(simplex[i]);
            for (int it = 0; it < 250; ++it) {
                std::vector<int> ord(nd + 1);
                std::iota(ord.begin(), ord.end(), 0);
                std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
                {
                    std::vector<Vec> s2(nd + 1);
                    std::vector<double> f2(nd + 1);
                    for (int i = 0; i <= nd; ++i) {
                        s2[i] = simplex[ord[i]];
                        f2[i] = fv[ord[i]];
                    }
                    simplex.swap(s2);
                    fv.swap(f2);
                }
                if (std::isfinite(fv[0]) &&
                    (!std::isfinite(fv[nd]) ? false : fv[nd] - fv[0] < 1e-12 * (1 + std::abs(fv[0]))))
                    break;
                Vec centroid = Vec::Zero(nd);
                for (int i = 0; i < nd; ++i) centroid += simplex[i];
                centroid /= nd;
                Vec xr = centroid + (centroid - simplex[nd]);
                double fr = eval_point(xr);
                if (fr < fv[0]) {
                    Vec xe = centroid + 2.0 * (centroid - simplex[nd]);
                    double fe = eval_point(xe);
                    if (fe < fr) {
                        simplex[nd] = xe;
                        fv[nd] = fe;
                    } else {
                        simplex[nd] = xr;
                        fv[nd] = fr;
                    }
                } else if (fr < fv[nd - 1]) {
                    simplex[nd] = xr;
                    fv[nd] = fr;
                } else {
                    Vec xc = centroid + 0.5 * (simplex[nd] - centroid);
                    double fc = eval_point(xc);
                    if (fc < fv[nd]) {
                        simplex[nd] = xc;
                        fv[nd] = fc;
                    } else {
                        for (int i = 1; i <= nd; ++i) {
                            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                            fv[i] = eval_point(simplex[i]);
                        }
                    }
                }
            }
            int besti = 0;
            for (int i = 1; i <= nd; ++i)
                if (fv[i] < fv[besti]) besti = i;
            if (std::isfinite(fv[besti]) && fv[besti] < best_obj) {
                best_obj = fv[besti];
                for (int i = 0; i < nd; ++i)
                    best_dofs(i) = std::clamp(simplex[besti](i), grid[i].lo, grid[i].hi);
            }
        }
    }

    for (int i = 0; i < nd; ++i) *grid[i].target = best_dofs(i);
    reset_unknowns();
    newton();
    RecoveredState st = make_state();

    OracleResult res;
    res.objective = st.objective;
    res.ac_voltage = st.ac_voltage;
    res.dc_voltage = st.dc_voltage;
    res.dcdc_q = st.dcdc_q;
    res.resolution = resolution;
    res.exhaustive = seed == 0;
    return res;
}

}  // namespace hyopf
