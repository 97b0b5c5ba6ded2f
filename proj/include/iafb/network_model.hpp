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

#include <cstdint>
#include <vector>

namespace iafb
{
    struct NetworkParams
    {
        int M = 3;                 // source-destination pairs
        int L = 2;                 // taps per channel
        int t = 1;                 // auxiliary alignment variable
        double P = 1.0e3;          // total network transmit power (linear)
        double noise_power = 1.0;  // N_o (linear)
        std::uint64_t seed = 1;

        // Throws ParameterError if any field is out of range, including N < L
        // for the tone count implied by (M, t). Throws UnsupportedError when
        // (M, t) has no tone count (M < 3).
        void validate() const;

        // Tone count N implied by (M, t).
        int tones() const;
    };

    // L-tap impulse response with every tap strictly nonzero and finite.
    class ChannelImpulseResponse
    {
    public:
        ChannelImpulseResponse() = default;
        explicit ChannelImpulseResponse(CVector taps);

        const CVector &taps() const { return taps_; }
        int length() const { return static_cast<int>(taps_.size()); }

        bool operator==(const ChannelImpulseResponse &other) const { return taps_ == other.taps_; }

    private:
        CVector taps_;
    };

    struct NetworkRealization
    {
        int M = 0;
        int L = 0;
        int N = 0;
        LinkGrid<ChannelImpulseResponse> channels; // row i = destination, column k = source
        LinkGrid<CVector> freq;                    // N-point unitary DFT of each impulse response

        bool operator==(const NetworkRealization &other) const;
    };

    // Draws M*M*L i.i.d. CN(0,1) taps (taps below 1e-12 in magnitude are redrawn)
    // and fills in the N-point frequency responses.
    NetworkRealization sample_network(const NetworkParams &params);

    // Unitary N-point DFT of a length-n sequence zero-padded to N:
    //   out(r) = 1/sqrt(N) * sum_n x[n] exp(-j 2 pi r n / N)
    CVector unitary_dft(const CVector &x, int N);

    CVector dft_response(const ChannelImpulseResponse &cir, int N);

    // w = h / ||h||
    CVector normalize_cir(const ChannelImpulseResponse &cir);
    CVector normalize_cir(const CVector &taps);

    // Diagonal operator diag(h(0), ..., h(N-1)) stored by its spectrum.
    class FrequencyMatrix
    {
    public:
        explicit FrequencyMatrix(CVector spectrum) : spectrum_(std::move(spectrum)) {}

        int size() const { return static_cast<int>(spectrum_.size()); }
        const CVector &spectrum() const { return spectrum_; }

        CVector apply(const CVector &x) const;         // diag(h) x
        CVector apply_adjoint(const CVector &x) const; // diag(h)^H x

        // Dense form, for tests and small diagnostics only.
        CMatrix dense() const;

    private:
        CVector spectrum_;
    };

    inline FrequencyMatrix frequency_matrix(const CVector &spectrum) { return FrequencyMatrix(spectrum); }
}
