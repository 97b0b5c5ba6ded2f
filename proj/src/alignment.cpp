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

#include "iafb/alignment.hpp"

#include "iafb/errors.hpp"
#include "iafb/network_model.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace iafb
{
    namespace
    {
        long long checked_pow(long long base, int exp)
        {
            long long out = 1;
            for (int e = 0; e < exp; ++e)
            {
                if (out > (1LL << 30) / base)
                    throw ParameterError("ia_dimensions: stream counts overflow");
                out *= base;
            }
            return out;
        }

        // Orthonormal basis of span(A) from a column-pivoted QR with a relative pivot cutoff.
        CMatrix orthonormal_basis(const CMatrix &A, Eigen::Index *rank_out = nullptr)
        {
            Eigen::ColPivHouseholderQR<CMatrix> qr(A);
            qr.setThreshold(alignment_limits::rank_tolerance);
            const Eigen::Index rank = qr.rank();
            if (rank_out)
                *rank_out = rank;
            CMatrix Q = qr.householderQ();
            return Q.leftCols(rank);
        }

        // Largest norm of a unit-normalized column of X outside span(basis).
        double containment_residual(const CMatrix &X, const CMatrix &basis)
        {
            double worst = 0.0;
            for (Eigen::Index c = 0; c < X.cols(); ++c)
            {
                const CVector x = X.col(c).normalized();
                const CVector outside = x - basis * (basis.adjoint() * x);
                worst = std::max(worst, outside.norm());
            }
            return worst;
        }

        // diag(spectrum)^H applied to every column of X.
        CMatrix apply_adjoint(const CVector &spectrum, const CMatrix &X)
        {
            return spectrum.conjugate().asDiagonal() * X;
        }

        void normalize_columns(CMatrix &X)
        {
            for (Eigen::Index c = 0; c < X.cols(); ++c)
                X.col(c).normalize();
        }

        void require_three_users(const LinkGrid<CVector> &csi, const IADimensions &dims)
        {
            if (dims.M != 3 || csi.size() != 3)
                throw UnsupportedError("alignment: direction construction is implemented for M = 3 only; general M is a "
                                       "non-goal (ia_dimensions still covers every M)");
            for (const auto &c : csi)
                if (c.size() != dims.N)
                    throw DimensionError("alignment: csi vectors must have N = " + std::to_string(dims.N) + " tones");
        }

        void require_invertible(const CVector &c, const char *what)
        {
            const double scale = c.cwiseAbs().maxCoeff();
            if (!(scale > 0.0) || c.cwiseAbs().minCoeff() <= alignment_limits::rank_tolerance * scale)
                throw DegenerateCsiError(std::string("alignment: ") + what + " has a vanishing tone");
        }
    }

    int IADimensions::total_streams() const
    {
        int s = 0;
        for (int x : d)
            s += x;
        return s;
    }

    IADimensions ia_dimensions(int M, int t)
    {
        if (M < 3)
            throw UnsupportedError("ia_dimensions: M = " + std::to_string(M) +
                                   " gives Q < 1, outside the alignment construction (need M >= 3)");
        if (t < 1)
            throw ParameterError("ia_dimensions: t must be at least 1");
        if (M > 64)
            throw ParameterError("ia_dimensions: M too large");

        IADimensions dims;
        dims.M = M;
        dims.t = t;
        dims.Q = (M - 1) * (M - 2) - 1;
        const long long lead = checked_pow(t + 1, dims.Q);
        const long long rest = checked_pow(t, dims.Q);
        dims.d.assign(static_cast<std::size_t>(M), static_cast<int>(rest));
        dims.d[0] = static_cast<int>(lead);
        dims.N = static_cast<int>(lead + rest);
        dims.dof_bound = static_cast<double>(lead + (M - 1) * rest) / static_cast<double>(dims.N);
        dims.min_taps = static_cast<double>(lead - 1) / (3.0 * t * dims.Q);
        return dims;
    }

    double AlignmentDiagnostics::min_direct_gain() const
    {
        double g = std::numeric_limits<double>::infinity();
        for (const auto &row : direct_gains)
            for (double x : row)
                g = std::min(g, x);
        return g;
    }

    bool AlignmentDiagnostics::aligned(double tol) const
    {
        const double ref = min_direct_gain();
        return ref > 0.0 && cross_residual < tol * ref && interference_residual < tol * ref;
    }

    double ContainmentResiduals::max() const { return std::max({at_dest1, at_dest2, at_dest3}); }

    TxDirections build_tx_directions(const LinkGrid<CVector> &csi, const IADimensions &dims)
    {
        require_three_users(csi, dims);
        const int N = dims.N;
        const int t = dims.t;

        // 0-based: csi(i, k) is the link from source k to destination i
        const CVector &c12 = csi(0, 1), &c13 = csi(0, 2);
        const CVector &c21 = csi(1, 0), &c23 = csi(1, 2);
        const CVector &c31 = csi(2, 0), &c32 = csi(2, 1);
        require_invertible(c32, "link S2->D3");
        require_invertible(c21, "link S1->D2");
        require_invertible(c13, "link S3->D1");
        require_invertible(c23, "link S3->D2");

        // T = D12^H (D32^H)^-1 D31^H (D21^H)^-1 D23^H (D13^H)^-1, all diagonal
        const CVector T = (c12.conjugate().cwiseProduct(c31.conjugate()).cwiseProduct(c23.conjugate()))
                              .cwiseQuotient(c32.conjugate().cwiseProduct(c21.conjugate()).cwiseProduct(c13.conjugate()));

        CMatrix powers(N, t + 1); // T^q 1 for q = 0..t
        powers.col(0).setOnes();
        for (int q = 1; q <= t; ++q)
            powers.col(q) = T.cwiseProduct(powers.col(q - 1));

        TxDirections out;
        out.V.resize(3);
        CMatrix V1 = powers;
        CMatrix V2 = (c31.conjugate().cwiseQuotient(c32.conjugate())).asDiagonal() * powers.leftCols(t);
        CMatrix V3 = (c21.conjugate().cwiseQuotient(c23.conjugate())).asDiagonal() * powers.rightCols(t);
        normalize_columns(V1);
        normalize_columns(V2);
        normalize_columns(V3);

        Eigen::JacobiSVD<CMatrix> svd(V1);
        const auto &s = svd.singularValues();
        if (!(s(s.size() - 1) > alignment_limits::rank_tolerance * s(0)))
            throw DegenerateCsiError("build_tx_directions: V1 is rank deficient (T is close to a multiple of identity)");

        out.residuals.at_dest3 = containment_residual(apply_adjoint(c32, V2), orthonormal_basis(apply_adjoint(c31, V1)));
        out.residuals.at_dest2 = containment_residual(apply_adjoint(c23, V3), orthonormal_basis(apply_adjoint(c21, V1)));
        const CMatrix at1_from2 = apply_adjoint(c12, V2);
        const CMatrix at1_from3 = apply_adjoint(c13, V3);
        out.residuals.at_dest1 = std::max(containment_residual(at1_from2, orthonormal_basis(at1_from3)),
                                          containment_residual(at1_from3, orthonormal_basis(at1_from2)));

        out.V[0] = std::move(V1);
        out.V[1] = std::move(V2);
        out.V[2] = std::move(V3);
        return out;
    }

    CMatrix interference_basis(const LinkGrid<CVector> &csi, const IADimensions &dims, const std::vector<CMatrix> &V,
                               int i)
    {
        const int M = csi.size();
        int cols = 0;
        for (int k = 0; k < M; ++k)
            if (k != i)
                cols += static_cast<int>(V[static_cast<std::size_t>(k)].cols());
        CMatrix span(dims.N, cols);
        int at = 0;
        for (int k = 0; k < M; ++k)
        {
            if (k == i)
                continue;
            const CMatrix &Vk = V[static_cast<std::size_t>(k)];
            span.middleCols(at, Vk.cols()) = apply_adjoint(csi(i, k), Vk);
            at += static_cast<int>(Vk.cols());
        }
        Eigen::Index rank = 0;
        CMatrix basis = orthonormal_basis(span, &rank);
        const int expected = dims.N - dims.d[static_cast<std::size_t>(i)];
        if (rank != expected)
            throw DegenerateCsiError("interference_basis: interference at destination " + std::to_string(i + 1) +
                                     " spans " + std::to_string(rank) + " dimensions, expected " +
                                     std::to_string(expected));
        return basis;
    }

    RxDirections build_rx_directions(const LinkGrid<CVector> &csi, const IADimensions &dims,
                                     const std::vector<CMatrix> &V)
    {
        require_three_users(csi, dims);
        if (V.size() != 3)
            throw DimensionError("build_rx_directions: need one transmit set per source");
        for (int k = 0; k < 3; ++k)
            if (V[static_cast<std::size_t>(k)].rows() != dims.N || V[static_cast<std::size_t>(k)].cols() != dims.d[static_cast<std::size_t>(k)])
                throw DimensionError("build_rx_directions: V_k must be N x d_k");

        RxDirections out;
        out.U.resize(3);
        out.min_singular_value = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
        {
            const int di = dims.d[static_cast<std::size_t>(i)];
            CMatrix G(dims.N, dims.N);
            G.leftCols(di) = apply_adjoint(csi(i, i), V[static_cast<std::size_t>(i)]);
            G.rightCols(dims.N - di) = interference_basis(csi, dims, V, i);

            Eigen::JacobiSVD<CMatrix> svd(G);
            const auto &s = svd.singularValues();
            const double smin = s(s.size() - 1);
            const double cond = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
            if (!(cond <= alignment_limits::max_condition_number))
                throw DegenerateCsiError("build_rx_directions: basis matrix at destination " + std::to_string(i + 1) +
                                         " is singular (condition number " + std::to_string(cond) + ")");
            out.min_singular_value = std::min(out.min_singular_value, smin);
            out.max_condition_number = std::max(out.max_condition_number, cond);

            // Row m of G^-1 is orthogonal to every column of G except column m.
            const CMatrix dual = G.fullPivLu().inverse().adjoint();
            CMatrix U = dual.leftCols(di);
            normalize_columns(U);
            out.U[static_cast<std::size_t>(i)] = std::move(U);
        }
        return out;
    }

    AlignmentDiagnostics check_alignment_conditions(const LinkGrid<CVector> &csi, const std::vector<CMatrix> &U,
                                                    const std::vector<CMatrix> &V)
    {
        const int M = csi.size();
        if (static_cast<int>(U.size()) != M || static_cast<int>(V.size()) != M)
            throw DimensionError("check_alignment_conditions: need M receive and M transmit sets");

        AlignmentDiagnostics diag;
        diag.direct_gains.resize(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i)
        {
            const CMatrix &Ui = U[static_cast<std::size_t>(i)];
            diag.direct_gains[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(Ui.cols()), 0.0);
            for (int k = 0; k < M; ++k)
            {
                const CMatrix &Vk = V[static_cast<std::size_t>(k)];
                const FrequencyMatrix D(csi(i, k));
                if (Ui.rows() != D.size() || Vk.rows() != D.size())
                    throw DimensionError("check_alignment_conditions: direction length differs from the tone count");
                for (Eigen::Index m = 0; m < Ui.cols(); ++m)
                    for (Eigen::Index p = 0; p < Vk.cols(); ++p)
                    {
                        const CVector u = Ui.col(m);
                        const CVector v = Vk.col(p);
                        const cplx d_form = u.dot(D.apply_adjoint(v));
                        const CVector b = u.conjugate().cwiseProduct(v);
                        const cplx w_form = csi(i, k).dot(b);
                        diag.hadamard_discrepancy = std::max(diag.hadamard_discrepancy, std::abs(d_form - w_form));

                        const double mag = std::abs(d_form);
                        if (k == i && m == p)
                            diag.direct_gains[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)] = mag;
                        else if (k == i)
                            diag.cross_residual = std::max(diag.cross_residual, mag);
                        else
                            diag.interference_residual = std::max(diag.interference_residual, mag);
                    }
            }
        }
        return diag;
    }

    DirectionSets build_directions(const LinkGrid<CVector> &csi, const IADimensions &dims)
    {
        TxDirections tx = build_tx_directions(csi, dims);
        RxDirections rx = build_rx_directions(csi, dims, tx.V);
        DirectionSets out;
        out.diagnostics = check_alignment_conditions(csi, rx.U, tx.V);
        out.diagnostics.min_singular_value = rx.min_singular_value;
        out.diagnostics.max_condition_number = rx.max_condition_number;
        out.V = std::move(tx.V);
        out.U = std::move(rx.U);
        return out;
    }
}
