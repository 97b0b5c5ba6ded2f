// SPDX-License-Identifier: Apache-2.0
//
// iafb - interference alignment with limited feedback, link-level simulator
// Copyright (C) 2026 The iafb authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Acceptance gate: runs each numbered criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include "iafb/alignment.hpp"
#include "iafb/codebook.hpp"
#include "iafb/errors.hpp"
#include "iafb/evaluation.hpp"
#include "iafb/feedback.hpp"
#include "iafb/network_model.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace iafb;

namespace
{
    constexpr std::uint64_t seed = 20260101;

    struct Outcome
    {
        bool pass = true;
        std::ostringstream detail;

        void require(bool ok, const std::string &what)
        {
            if (!ok)
            {
                pass = false;
                detail << " [failed: " << what << "]";
            }
        }
    };

    std::string fmt(const char *spec, double x)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, spec, x);
        return buf;
    }

    std::vector<double> db_grid(int lo, int hi, int step)
    {
        std::vector<double> out;
        for (int db = lo; db <= hi; db += step)
            out.push_back(std::pow(10.0, db / 10.0));
        return out;
    }

    NetworkParams base_params()
    {
        NetworkParams p;
        p.M = 3;
        p.t = 1;
        p.L = 2;
        p.seed = seed;
        return p;
    }

    CMatrix svd_basis(const CMatrix &A)
    {
        Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullU);
        const auto &s = svd.singularValues();
        Eigen::Index rank = 0;
        while (rank < s.size() && s(rank) > 1e-9 * s(0))
            ++rank;
        return svd.matrixU().leftCols(rank);
    }

    double outside(const CMatrix &X, const CMatrix &basis)
    {
        double worst = 0.0;
        for (Eigen::Index c = 0; c < X.cols(); ++c)
        {
            const CVector x = X.col(c).normalized();
            worst = std::max(worst, (x - basis * (basis.adjoint() * x)).norm());
        }
        return worst;
    }

    CMatrix adj(const CVector &h, const CMatrix &X) { return h.conjugate().asDiagonal() * X; }

    // ---------------------------------------------------------------------

    void criterion1(Outcome &o)
    {
        struct Case
        {
            int M, t, Q;
            std::vector<int> d;
            int N;
        };
        const Case cases[] = {{3, 1, 1, {2, 1, 1}, 3}, {3, 2, 1, {3, 2, 2}, 5}, {4, 1, 5, {32, 1, 1, 1}, 33}};
        for (const auto &c : cases)
        {
            const IADimensions dims = ia_dimensions(c.M, c.t);
            const bool ok = dims.Q == c.Q && dims.d == c.d && dims.N == c.N;
            o.require(ok, "M=" + std::to_string(c.M) + " t=" + std::to_string(c.t));
            o.detail << " (M=" << c.M << ",t=" << c.t << ")->Q=" << dims.Q << ",N=" << dims.N;
        }
    }

    void criterion2(Outcome &o)
    {
        const IADimensions dims = ia_dimensions(3, 1);
        const double P = 1e4;
        double worst_rel = 0.0, worst_interf = 0.0;
        int degenerate = 0;
        for (std::uint64_t trial = 0; trial < 200; ++trial)
        {
            NetworkParams p = base_params();
            p.seed = trial_seed(seed, trial);
            const NetworkRealization real = sample_network(p);
            DirectionSets dirs;
            try
            {
                dirs = build_directions(perfect_csi(real), dims);
            }
            catch (const DegenerateCsiError &)
            {
                ++degenerate;
                continue;
            }
            const auto &d = dirs.diagnostics;
            worst_rel = std::max(worst_rel, std::max(d.cross_residual, d.interference_residual) / d.min_direct_gain());
            double hmax = 0.0;
            for (const auto &h : real.freq)
                hmax = std::max(hmax, h.squaredNorm());
            const EffectiveIO io = effective_io(real, dirs.U, dirs.V, dims, P);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t m = 0; m < io.I1[i].size(); ++m)
                    worst_interf = std::max(worst_interf, (io.I1[i][m] + io.I2[i][m]) / (P / 3.0 * hmax));
        }
        o.require(worst_rel < 1e-9, "relative residual");
        o.require(worst_interf < 1e-9, "interference power");
        o.require(degenerate == 0, "degenerate draws");
        o.detail << " max residual/direct " << fmt("%.2e", worst_rel) << ", max I/((P/M)max|h|^2) "
                 << fmt("%.2e", worst_interf) << ", 200 trials";
    }

    SweepResult perfect_sweep;

    void criterion3(Outcome &o, CodebookCache &cache)
    {
        perfect_sweep = dof_sweep(base_params(), FeedbackMode::perfect(), db_grid(10, 70, 10), 50, cache);
        const double target = 4.0 / 3.0;
        o.require(std::abs(perfect_sweep.slope - target) <= 0.05 * target, "slope within 5%");
        o.detail << " slope " << fmt("%.4f", perfect_sweep.slope) << " vs 4/3 (rel err "
                 << fmt("%.2f%%", 100.0 * std::abs(perfect_sweep.slope - target) / target) << ")";
    }

    void criterion4(Outcome &o, CodebookCache &cache)
    {
        const SweepResult s = dof_sweep(base_params(), FeedbackMode::limited(), db_grid(10, 70, 10), 50, cache);
        int violations = 0, streams = 0, not_applicable = 0;
        for (const auto &tr : s.trials)
        {
            if (!tr.constant_applies)
                ++not_applicable;
            violations += tr.violations(tr.constant_bound);
            for (const auto &row : tr.I1)
                streams += static_cast<int>(row.size());
        }
        bool below = true;
        for (const auto &pt : s.grid)
            below = below && pt.mean_interference < pt.mean_constant_bound;
        const double target = 4.0 / 3.0;
        o.require(violations == 0 && not_applicable == 0, "(a) per-stream constant bound");
        o.require(below, "(b) mean interference below mean constant");
        o.require(s.interference_slope >= -0.3 && s.interference_slope <= 0.15, "(b) interference slope");
        o.require(std::abs(s.slope - target) <= 0.10 * target, "(c) slope within 10%");
        o.detail << " (a) " << violations << " violations in " << streams << " streams; (b) I slope "
                 << fmt("%.3f", s.interference_slope) << ", mean I/bound at 70 dB "
                 << fmt("%.3f", s.grid.back().mean_interference / s.grid.back().mean_constant_bound) << "; (c) slope "
                 << fmt("%.4f", s.slope) << "; N_d up to " << s.grid.back().N_d << " (codebook "
                 << cache.get(2, s.grid.back().N_d)->size() << " words, cap " << (std::size_t{1} << (s.grid.back().N_d + 1))
                 << ")";
    }

    void criterion5(Outcome &o, CodebookCache &cache)
    {
        const SweepResult s = dof_sweep(base_params(), FeedbackMode::fixed(4), db_grid(10, 70, 10), 50, cache);
        o.require(s.slope <= 0.75 * perfect_sweep.slope, "slope at least 25% below perfect");
        o.require(s.interference_slope >= 0.8, "interference slope >= 0.8");
        o.detail << " slope " << fmt("%.4f", s.slope) << " vs perfect " << fmt("%.4f", perfect_sweep.slope)
                 << ", I slope " << fmt("%.3f", s.interference_slope);
    }

    void criterion6(Outcome &o, CodebookCache &cache)
    {
        for (int N_d : {4, 6, 8, 10})
        {
            const auto cb = cache.get(2, N_d);
            const double cover = codebook_stats(*cb, 100000, seed + static_cast<std::uint64_t>(N_d)).covering_estimate;
            const double bound = 1.1 * 2.0 * std::exp2(-N_d / 2.0);
            o.require(cb->size() <= (std::size_t{1} << N_d), "size N_d=" + std::to_string(N_d));
            o.require(cover <= bound, "covering N_d=" + std::to_string(N_d));
            o.detail << " N_d=" << N_d << ": " << cb->size() << " words, cover " << fmt("%.4f", cover) << " <= "
                     << fmt("%.4f", bound) << ";";
        }
    }

    void criterion7(Outcome &o, CodebookCache &cache)
    {
        const IADimensions dims = ia_dimensions(3, 1);
        double parseval = 0.0, hadamard = 0.0, containment = 0.0;
        for (std::uint64_t trial = 0; trial < 100; ++trial)
        {
            NetworkParams p = base_params();
            p.seed = trial_seed(seed ^ 0x77, trial);
            const NetworkRealization real = sample_network(p);
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                {
                    const double e = real.channels(i, k).taps().squaredNorm();
                    parseval = std::max(parseval, std::abs(real.freq(i, k).squaredNorm() - e) / e);
                }
            const LinkGrid<CVector> csi = perfect_csi(real);
            const TxDirections tx = build_tx_directions(csi, dims);
            const auto &V = tx.V;
            containment = std::max({containment, outside(adj(csi(2, 1), V[1]), svd_basis(adj(csi(2, 0), V[0]))),
                                    outside(adj(csi(1, 2), V[2]), svd_basis(adj(csi(1, 0), V[0]))),
                                    outside(adj(csi(0, 1), V[1]), svd_basis(adj(csi(0, 2), V[2]))),
                                    outside(adj(csi(0, 2), V[2]), svd_basis(adj(csi(0, 1), V[1])))});
        }

        std::mt19937_64 rng(seed);
        for (int s = 0; s < 1000; ++s)
        {
            const CVector u = haar_unit_vector(3, rng), v = haar_unit_vector(3, rng), h = haar_unit_vector(3, rng);
            const cplx lhs = h.dot(u.conjugate().cwiseProduct(v));
            const cplx rhs = (u.adjoint() * FrequencyMatrix(h).dense().adjoint() * v)(0, 0);
            hadamard = std::max(hadamard, std::abs(lhs - rhs));
        }

        int mismatches = 0;
        const auto cb = cache.get(2, 10);
        for (int s = 0; s < 10000; ++s)
        {
            const CVector w = haar_unit_vector(2, rng);
            std::size_t best = 0;
            double best_val = -1.0;
            for (std::size_t l = 0; l < cb->size(); ++l)
                if (const double c = std::abs(cb->codeword(l).dot(w)); c > best_val)
                {
                    best_val = c;
                    best = l;
                }
            mismatches += quantize(w, *cb).index != best;
        }

        o.require(parseval < 1e-12, "Parseval");
        o.require(hadamard < 1e-12, "Hadamard");
        o.require(mismatches == 0, "quantizer oracle");
        o.require(containment < 1e-10, "containment");
        o.detail << " Parseval " << fmt("%.1e", parseval) << ", Hadamard " << fmt("%.1e", hadamard) << ", quantizer "
                 << mismatches << "/10000 mismatches, containment " << fmt("%.1e", containment);
    }
}

int main()
{
    CodebookCache cache(seed);
    struct Criterion
    {
        int number;
        const char *title;
        double budget_s;
        std::function<void(Outcome &)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "dimension formulas", 1.0, criterion1},
        {2, "perfect-CSI alignment", 10.0, criterion2},
        {3, "perfect-CSI DoF slope", 120.0, [&](Outcome &o) { criterion3(o, cache); }},
        {4, "limited-feedback constant interference and slope", 600.0, [&](Outcome &o) { criterion4(o, cache); }},
        {5, "fixed-feedback contrast", 300.0, [&](Outcome &o) { criterion5(o, cache); }},
        {6, "quantizer bounds", 120.0, [&](Outcome &o) { criterion6(o, cache); }},
        {7, "identity and oracle suite", 60.0, [&](Outcome &o) { criterion7(o, cache); }},
    };

    int failed = 0;
    for (const auto &c : criteria)
    {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try
        {
            c.run(o);
        }
        catch (const std::exception &e)
        {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.require(elapsed <= c.budget_s, "runtime budget " + fmt("%.0f s", c.budget_s));
        failed += !o.pass;
        std::printf("%s criterion %d (%s):%s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.number, c.title,
                    o.detail.str().c_str(), elapsed);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
