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

#include "iafb/errors.hpp"
#include "iafb/feedback.hpp"
#include "iafb/serialization.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace iafb;
using Catch::Matchers::WithinAbs;

namespace
{
    NetworkRealization network(std::uint64_t seed, int L = 2, int t = 1)
    {
        NetworkParams p;
        p.L = L;
        p.t = t;
        p.seed = seed;
        return sample_network(p);
    }
}

TEST_CASE("feedback bit count follows the power")
{
    CHECK(limited_feedback_bits(1e3, 2) == 10);
    CHECK(limited_feedback_bits(1024.0, 2) == 10);
    CHECK(limited_feedback_bits(1025.0, 2) == 11);
    CHECK(limited_feedback_bits(1e7, 2) == 24);
    CHECK(limited_feedback_bits(10.0, 3) == 7);
    CHECK(limited_feedback_bits(0.5, 2) == 0);
    CHECK(limited_feedback_bits(1e5, 1) == 0);
    CHECK_THROWS_AS(limited_feedback_bits(0.0, 2), ParameterError);

    for (double db = 10.0; db <= 70.0; db += 10.0)
    {
        const double P = std::pow(10.0, db / 10.0);
        const int bits = limited_feedback_bits(P, 2);
        CHECK(std::exp2(-bits) <= 1.0 / P);
        CHECK(std::exp2(-(bits - 1)) > 1.0 / P);
    }
}

TEST_CASE("quantize_network reports M*N_d bits per destination")
{
    const Codebook cb = design_codebook(2, 10, 1);
    REQUIRE(cb.bits() == 10);
    const NetworkRealization real = network(3);
    const FeedbackReport report = quantize_network(real, cb);
    CHECK(report.N_d == 10);
    CHECK(report.bits_per_destination() == 30);
    REQUIRE(report.M() == 3);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
        {
            CHECK(report.indices(i, k) < cb.size());
            CHECK(report.indices(i, k) == quantize(normalize_cir(real.channels(i, k)), cb).index);
        }

    CHECK_THROWS_AS(quantize_network(real, design_codebook(3, 4, 1)), DimensionError);
}

TEST_CASE("C^1 feedback is exact")
{
    // L = 1 is outside NetworkParams, so build the realization by hand.
    NetworkRealization real;
    real.M = 3;
    real.L = 1;
    real.N = 3;
    real.channels = LinkGrid<ChannelImpulseResponse>(3);
    real.freq = LinkGrid<CVector>(3);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
        {
            real.channels(i, k) = ChannelImpulseResponse((CVector(1) << std::polar(1.0 + i, 0.3 * k)).finished());
            real.freq(i, k) = dft_response(real.channels(i, k), 3);
        }
    const Codebook cb = design_codebook(1, 0, 1);
    const FeedbackReport report = quantize_network(real, cb);
    for (auto idx : report.indices)
        CHECK(idx == 0);
    QuantizedCSI csi = reconstruct_quantized_csi(report, cb, 3);
    measure_quantization_errors(csi, real);
    for (double e : *csi.quantization_errors)
        CHECK_THAT(e, WithinAbs(0.0, 1e-7));
}

TEST_CASE("reconstruction zero-pads and transforms the codewords")
{
    const Codebook cb(2, 0.5, 1, CMatrix::Identity(2, 2));
    FeedbackReport report;
    report.N_d = 1;
    report.indices = LinkGrid<std::size_t>(3, 0);
    const QuantizedCSI csi = reconstruct_quantized_csi(report, cb, 3);
    for (const auto &w : csi.w_tilde)
        for (int r = 0; r < 3; ++r)
            CHECK(std::abs(w(r) - 1.0 / std::sqrt(3.0)) < 1e-15);
    CHECK_FALSE(csi.quantization_errors.has_value());
    CHECK(csi.max_quantization_error() == 0.0);

    report.indices(1, 2) = 2;
    CHECK_THROWS_AS(reconstruct_quantized_csi(report, cb, 3), CorruptFeedbackError);
    report.indices(1, 2) = 1;
    CHECK_THROWS_AS(reconstruct_quantized_csi(report, cb, 1), DimensionError);
}

TEST_CASE("feedback round trip is bit exact and unit norm")
{
    const Codebook cb = design_codebook(2, 12, 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const NetworkRealization real = network(seed);
        const FeedbackReport report = quantize_network(real, cb);
        QuantizedCSI csi = reconstruct_quantized_csi(report, cb, real.N);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
            {
                CHECK(csi.w_hat(i, k) == CVector(cb.codeword(report.indices(i, k))));
                CHECK_THAT(csi.w_hat(i, k).norm(), WithinAbs(1.0, 1e-12));
                CHECK_THAT(csi.w_tilde(i, k).norm(), WithinAbs(1.0, 1e-12));
            }
        measure_quantization_errors(csi, real);
        CHECK(csi.max_quantization_error() <= 1.1 * target_sin_delta(2, 12));
    }
}

TEST_CASE("reconstruction depends only on the broadcast report")
{
    const Codebook cb = design_codebook(2, 10, 4);
    const NetworkRealization real = network(17);
    const FeedbackReport report = quantize_network(real, cb);
    const QuantizedCSI direct = reconstruct_quantized_csi(report, cb, real.N);

    const std::string wire = report_to_json(report).dump();
    const FeedbackReport received = report_from_json(nlohmann::json::parse(wire));
    CHECK(received == report);
    const QuantizedCSI rebuilt = reconstruct_quantized_csi(received, codebook_from_json(codebook_to_json(cb)), real.N);
    CHECK(rebuilt.w_hat == direct.w_hat);
    CHECK(rebuilt.w_tilde == direct.w_tilde);
}

TEST_CASE("perfect CSI is the normalized true response")
{
    const NetworkRealization real = network(5);
    const LinkGrid<CVector> csi = perfect_csi(real);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
        {
            CHECK_THAT(csi(i, k).norm(), WithinAbs(1.0, 1e-12));
            CHECK((csi(i, k) * real.freq(i, k).norm() - real.freq(i, k)).norm() < 1e-12 * real.freq(i, k).norm());
        }
}

TEST_CASE("quantization error shrinks as the design bits grow")
{
    std::vector<double> means;
    for (int N_d : {4, 8, 12})
    {
        const Codebook cb = design_codebook(2, N_d, 1);
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 60; ++seed)
        {
            const NetworkRealization real = network(seed);
            QuantizedCSI csi = reconstruct_quantized_csi(quantize_network(real, cb), cb, real.N);
            measure_quantization_errors(csi, real);
            total += csi.max_quantization_error();
        }
        means.push_back(total / 60.0);
    }
    CHECK(means[0] > means[1]);
    CHECK(means[1] > means[2]);
}
