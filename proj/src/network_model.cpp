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

#include "iafb/network_model.hpp"

#include "iafb/alignment.hpp"
#include "iafb/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace iafb
{
    void NetworkParams::validate() const
    {
        if (M < 2)
            throw ParameterError("NetworkParams: M must be at least 2, got " + std::to_string(M));
        if (L < 2)
            throw ParameterError("NetworkParams: L must be at least 2, got " + std::to_string(L));
        if (t < 1)
            throw ParameterError("NetworkParams: t must be at least 1, got " + std::to_string(t));
        if (!(P > 0.0) || !std::isfinite(P))
            throw ParameterError("NetworkParams: P must be positive and finite");
        if (!(noise_power > 0.0) || !std::isfinite(noise_power))
            throw ParameterError("NetworkParams: noise_power must be positive and finite");
        const int N = tones();
        if (N < L)
            throw ParameterError("NetworkParams: tone count N = " + std::to_string(N) + " is smaller than L = " +
                                 std::to_string(L));
    }

    int NetworkParams::tones() const { return ia_dimensions(M, t).N; }

    ChannelImpulseResponse::ChannelImpulseResponse(CVector taps) : taps_(std::move(taps))
    {
        if (taps_.size() == 0)
            throw ParameterError("ChannelImpulseResponse: no taps");
        for (Eigen::Index l = 0; l < taps_.size(); ++l)
        {
            const double mag = std::abs(taps_(l));
            if (!(mag > 0.0) || !std::isfinite(mag))
                throw ParameterError("ChannelImpulseResponse: tap " + std::to_string(l) +
                                     " must have finite, nonzero magnitude");
        }
    }

    bool NetworkRealization::operator==(const NetworkRealization &other) const
    {
        return M == other.M && L == other.L && N == other.N && channels == other.channels && freq == other.freq;
    }

    NetworkRealization sample_network(const NetworkParams &params)
    {
        params.validate();

        NetworkRealization real;
        real.M = params.M;
        real.L = params.L;
        real.N = params.tones();
        real.channels = LinkGrid<ChannelImpulseResponse>(params.M);
        real.freq = LinkGrid<CVector>(params.M);

        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          0x6e657477u};
        std::mt19937_64 rng(seq);
        // CN(0,1): real and imaginary parts each N(0, 1/2)
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

        for (int i = 0; i < params.M; ++i)
            for (int k = 0; k < params.M; ++k)
            {
                CVector taps(params.L);
                for (int l = 0; l < params.L; ++l)
                {
                    cplx h;
                    do
                    {
                        const double re = normal(rng);
                        const double im = normal(rng);
                        h = cplx(re, im);
                    } while (std::abs(h) < 1e-12);
                    taps(l) = h;
                }
                real.channels(i, k) = ChannelImpulseResponse(std::move(taps));
                real.freq(i, k) = dft_response(real.channels(i, k), real.N);
            }
        return real;
    }

    CVector unitary_dft(const CVector &x, int N)
    {
        if (N < x.size())
            throw DimensionError("unitary_dft: N = " + std::to_string(N) + " is smaller than the input length " +
                                 std::to_string(x.size()));
        const double scale = 1.0 / std::sqrt(static_cast<double>(N));
        CVector out(N);
        for (int r = 0; r < N; ++r)
        {
            cplx acc(0.0, 0.0);
            for (Eigen::Index n = 0; n < x.size(); ++n)
            {
                // r*n reduced mod N keeps the phase argument small
                const auto rn = static_cast<long long>(r) * n % N;
                const double angle = -2.0 * std::numbers::pi * static_cast<double>(rn) / N;
                acc += x(n) * std::polar(1.0, angle);
            }
            out(r) = scale * acc;
        }
        return out;
    }

    CVector dft_response(const ChannelImpulseResponse &cir, int N)
    {
        if (N < cir.length())
            throw DimensionError("dft_response: N = " + std::to_string(N) + " is smaller than L = " +
                                 std::to_string(cir.length()));
        return unitary_dft(cir.taps(), N);
    }

    CVector normalize_cir(const CVector &taps)
    {
        const double norm = taps.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw DegenerateChannelError("normalize_cir: impulse response has zero or non-finite norm");
        return taps / norm;
    }

    CVector normalize_cir(const ChannelImpulseResponse &cir) { return normalize_cir(cir.taps()); }

    CVector FrequencyMatrix::apply(const CVector &x) const
    {
        if (x.size() != spectrum_.size())
            throw DimensionError("FrequencyMatrix::apply: length mismatch");
        return spectrum_.cwiseProduct(x);
    }

    CVector FrequencyMatrix::apply_adjoint(const CVector &x) const
    {
        if (x.size() != spectrum_.size())
            throw DimensionError("FrequencyMatrix::apply_adjoint: length mismatch");
        return spectrum_.conjugate().cwiseProduct(x);
    }

    CMatrix FrequencyMatrix::dense() const { return spectrum_.asDiagonal(); }
}
