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

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace iafb
{
    namespace detail
    {
        class BlochIndex;
    }

    struct CodebookOptions
    {
        // Construction stops after this many consecutive rejected candidates.
        int rejection_streak = 20000;
        // Haar samples used for the covering estimate stored with the codebook.
        int stats_samples = 10000;
    };

    // Unit-norm codewords in C^L with pairwise |p_l^H p_m| < cos(delta).
    class Codebook
    {
    public:
        // vectors is L x N_actual, one codeword per column. Throws ParameterError
        // for non-unit columns or a packing violation beyond 1e-9.
        Codebook(int L, double delta, int design_bits, CMatrix vectors, double covering_estimate = -1.0);

        int L() const { return L_; }
        double delta() const { return delta_; }
        int design_bits() const { return design_bits_; }
        int bits() const { return bits_; } // ceil(log2 N_actual)
        std::size_t size() const { return static_cast<std::size_t>(vectors_.cols()); }
        const CMatrix &vectors() const { return vectors_; }
        auto codeword(std::size_t l) const { return vectors_.col(static_cast<Eigen::Index>(l)); }
        double coherence() const { return coherence_; }
        // Monte Carlo estimate of the worst quantization error; negative if never measured.
        double covering_estimate() const { return covering_estimate_; }

        const detail::BlochIndex *index() const { return index_.get(); }

    private:
        friend Codebook design_codebook(int, int, std::uint64_t, const CodebookOptions &);

        int L_;
        double delta_;
        int design_bits_;
        int bits_ = 0;
        CMatrix vectors_;
        double coherence_ = 0.0;
        double covering_estimate_ = -1.0;
        std::shared_ptr<const detail::BlochIndex> index_;
    };

    // sin(delta) = min(1, 2 * 2^(-N_d / (2 (L - 1)))); 1 for L = 1.
    double target_sin_delta(int L, int N_d);

    // (sin(delta) / 2)^(-2 (L - 1)), the largest packing size possible at angle delta.
    double packing_size_bound(int L, double delta);

    // Greedy maximal packing: Haar candidates are admitted when their largest
    // |inner product| with the admitted codewords is below cos(delta). Stops after
    // options.rejection_streak consecutive rejections or 2^(N_d + 1) codewords.
    Codebook design_codebook(int L, int N_d, std::uint64_t seed, const CodebookOptions &options = {});

    struct QuantizationResult
    {
        std::size_t index = 0;
        double error = 0.0; // sqrt(1 - |w^H w_hat|^2)
    };

    // Codeword maximizing |p_l^H w|, lowest index on ties.
    QuantizationResult quantize(const CVector &w, const Codebook &cb);

    struct CodebookStats
    {
        double coherence = 0.0;
        double covering_estimate = 0.0;
    };

    CodebookStats codebook_stats(const Codebook &cb, int n_samples, std::uint64_t seed);

    // Haar-distributed unit vector in C^L.
    template <typename Rng>
    CVector haar_unit_vector(int L, Rng &rng);

    nlohmann::json codebook_to_json(const Codebook &cb);
    Codebook codebook_from_json(const nlohmann::json &doc);
    void save_codebook(const Codebook &cb, const std::filesystem::path &path);
    Codebook load_codebook(const std::filesystem::path &path);

    // cb_L{L}_Nd{N_d}_seed{seed}.json
    std::string codebook_file_name(int L, int N_d, std::uint64_t seed);
}

#include <random>

namespace iafb
{
    template <typename Rng>
    CVector haar_unit_vector(int L, Rng &rng)
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        CVector v(L);
        double norm = 0.0;
        do
        {
            for (int l = 0; l < L; ++l)
                v(l) = cplx(normal(rng), normal(rng));
            norm = v.norm();
        } while (norm < 1e-300);
        return v / norm;
    }
}
