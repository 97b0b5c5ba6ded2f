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

#pragma once

#include "iafb/types.hpp"

#include <vector>

namespace iafb
{
    struct IADimensions
    {
        int M = 0;
        int Q = 0;
        int t = 0;
        std::vector<int> d;   // streams per source, d[0] = (t+1)^Q, d[k>0] = t^Q
        int N = 0;            // tones, (t+1)^Q + t^Q
        double dof_bound = 0; // sum(d) / N
        double min_taps = 0;  // ((t+1)^Q - 1) / (3 t Q)

        int total_streams() const;
    };

    // Stream and tone counts of the symbol-extension alignment scheme.
    // Throws UnsupportedError for M < 3 and ParameterError for t < 1 or
    // dimensions that overflow int.
    IADimensions ia_dimensions(int M, int t);

    struct AlignmentDiagnostics
    {
        std::vector<std::vector<double>> direct_gains; // [i][m] = |u_i^m^H D_ii^H v_i^m|
        double cross_residual = 0;                     // max_{i, m != p} |u_i^m^H D_ii^H v_i^p|
        double interference_residual = 0;              // max_{k != i, m, p} |u_i^m^H D_ik^H v_k^p|
        double min_singular_value = 0;                 // min over i of sigma_min(G_i)
        double max_condition_number = 0;               // max over i of cond(G_i)
        double hadamard_discrepancy = 0;               // max |D-form - w~-form| over all coefficients

        double min_direct_gain() const;

        // Cross and interference residuals below tol relative to the weakest direct gain.
        bool aligned(double tol) const;
    };

    struct DirectionSets
    {
        std::vector<CMatrix> V; // V[k] is N x d_k
        std::vector<CMatrix> U; // U[i] is N x d_i
        AlignmentDiagnostics diagnostics;
    };

    // Residuals of the three span conditions satisfied by the transmit construction,
    // measured as the norm of the component outside the target span.
    struct ContainmentResiduals
    {
        double at_dest3 = 0; // D32^H V2 inside span(D31^H V1)
        double at_dest2 = 0; // D23^H V3 inside span(D21^H V1)
        double at_dest1 = 0; // span(D12^H V2) == span(D13^H V3)

        double max() const;
    };

    struct TxDirections
    {
        std::vector<CMatrix> V;
        ContainmentResiduals residuals;
    };

    // Transmit directions for M = 3 from DFT-domain channel state csi(i, k).
    // csi may be true normalized responses or the quantized ones reconstructed
    // from feedback; the construction is the same.
    TxDirections build_tx_directions(const LinkGrid<CVector> &csi, const IADimensions &dims);

    struct RxDirections
    {
        std::vector<CMatrix> U;
        double min_singular_value = 0;
        double max_condition_number = 0;
    };

    RxDirections build_rx_directions(const LinkGrid<CVector> &csi, const IADimensions &dims,
                                     const std::vector<CMatrix> &V);

    // Both direction sets plus diagnostics measured against csi itself.
    DirectionSets build_directions(const LinkGrid<CVector> &csi, const IADimensions &dims);

    AlignmentDiagnostics check_alignment_conditions(const LinkGrid<CVector> &csi, const std::vector<CMatrix> &U,
                                                    const std::vector<CMatrix> &V);

    // Orthonormal basis of the interference span at destination i (N x (N - d_i)).
    CMatrix interference_basis(const LinkGrid<CVector> &csi, const IADimensions &dims,
                               const std::vector<CMatrix> &V, int i);

    namespace alignment_limits
    {
        inline constexpr double rank_tolerance = 1e-9;      // relative singular value cutoff
        inline constexpr double max_condition_number = 1e12; // G_i abort threshold
    }
}
