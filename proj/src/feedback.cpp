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

#include "iafb/feedback.hpp"

#include "iafb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iafb
{
    double QuantizedCSI::max_quantization_error() const
    {
        if (!quantization_errors)
            return 0.0;
        double worst = 0.0;
        for (double e : *quantization_errors)
            worst = std::max(worst, e);
        return worst;
    }

    FeedbackReport quantize_network(const NetworkRealization &real, const Codebook &cb)
    {
        if (cb.L() != real.L)
            throw DimensionError("quantize_network: codebook L = " + std::to_string(cb.L()) +
                                 " but channels have L = " + std::to_string(real.L));
        FeedbackReport report;
        report.N_d = cb.bits();
        report.indices = LinkGrid<std::size_t>(real.M);
        for (int i = 0; i < real.M; ++i)
            for (int k = 0; k < real.M; ++k)
                report.indices(i, k) = quantize(normalize_cir(real.channels(i, k)), cb).index;
        return report;
    }

    QuantizedCSI reconstruct_quantized_csi(const FeedbackReport &report, const Codebook &cb, int N)
    {
        if (N < cb.L())
            throw DimensionError("reconstruct_quantized_csi: N = " + std::to_string(N) + " is smaller than L = " +
                                 std::to_string(cb.L()));
        const int M = report.M();
        QuantizedCSI csi;
        csi.w_hat = LinkGrid<CVector>(M);
        csi.w_tilde = LinkGrid<CVector>(M);
        for (int i = 0; i < M; ++i)
            for (int k = 0; k < M; ++k)
            {
                const std::size_t idx = report.indices(i, k);
                if (idx >= cb.size())
                    throw CorruptFeedbackError("reconstruct_quantized_csi: index " + std::to_string(idx) + " for link (" +
                                               std::to_string(i) + ", " + std::to_string(k) + ") exceeds codebook size " +
                                               std::to_string(cb.size()));
                csi.w_hat(i, k) = cb.codeword(idx);
                csi.w_tilde(i, k) = unitary_dft(csi.w_hat(i, k), N);
            }
        return csi;
    }

    void measure_quantization_errors(QuantizedCSI &csi, const NetworkRealization &real)
    {
        if (csi.w_hat.size() != real.M)
            throw DimensionError("measure_quantization_errors: grid size mismatch");
        LinkGrid<double> errors(real.M);
        for (int i = 0; i < real.M; ++i)
            for (int k = 0; k < real.M; ++k)
            {
                const CVector w = normalize_cir(real.channels(i, k));
                if (w.size() != csi.w_hat(i, k).size())
                    throw DimensionError("measure_quantization_errors: L mismatch");
                const CVector &p = csi.w_hat(i, k);
                errors(i, k) = (w - p.dot(w) * p).norm();
            }
        csi.quantization_errors = std::move(errors);
    }

    LinkGrid<CVector> perfect_csi(const NetworkRealization &real)
    {
        LinkGrid<CVector> csi(real.M);
        for (int i = 0; i < real.M; ++i)
            for (int k = 0; k < real.M; ++k)
                csi(i, k) = unitary_dft(normalize_cir(real.channels(i, k)), real.N);
        return csi;
    }

    int limited_feedback_bits(double P, int L)
    {
        if (!(P > 0.0))
            throw ParameterError("limited_feedback_bits: P must be positive");
        if (L < 1)
            throw ParameterError("limited_feedback_bits: L must be positive");
        // the 1e-9 guard keeps exact powers of two from rounding up a whole bit
        const double bits = (L - 1) * std::log2(P);
        return std::max(0, static_cast<int>(std::ceil(bits - 1e-9)));
    }
}
