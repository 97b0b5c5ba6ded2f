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

#include "iafb/codebook.hpp"
#include "iafb/network_model.hpp"
#include "iafb/types.hpp"

#include <cstddef>
#include <optional>

namespace iafb
{
    // Codeword indices broadcast by every destination: entry (i, k) is the index
    // D_i sends for the link S_k -> D_i.
    struct FeedbackReport
    {
        int N_d = 0; // bits per quantized vector
        LinkGrid<std::size_t> indices;

        int M() const { return indices.size(); }
        int bits_per_destination() const { return M() * N_d; }

        bool operator==(const FeedbackReport &) const = default;
    };

    // Network-wide channel knowledge every node rebuilds from the broadcast indices.
    struct QuantizedCSI
    {
        LinkGrid<CVector> w_hat;   // codewords in C^L
        LinkGrid<CVector> w_tilde; // N-point unitary DFTs of the zero-padded codewords
        // Delta_d per link. Only destinations (which know the true channels) can
        // fill this in; see measure_quantization_errors.
        std::optional<LinkGrid<double>> quantization_errors;

        double max_quantization_error() const;
    };

    FeedbackReport quantize_network(const NetworkRealization &real, const Codebook &cb);

    // Uses only what was broadcast: the indices and the shared codebook.
    QuantizedCSI reconstruct_quantized_csi(const FeedbackReport &report, const Codebook &cb, int N);

    // Delta_d(w_ik, w_hat_ik) for every link, against the true normalized channels.
    void measure_quantization_errors(QuantizedCSI &csi, const NetworkRealization &real);

    // DFT-domain normalized true channels, i.e. what reconstruction would give with exact feedback.
    LinkGrid<CVector> perfect_csi(const NetworkRealization &real);

    // ceil((L - 1) log2 P), never negative.
    int limited_feedback_bits(double P, int L);
}
