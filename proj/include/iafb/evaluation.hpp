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

#include "iafb/alignment.hpp"
#include "iafb/codebook.hpp"
#include "iafb/network_model.hpp"
#include "iafb/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iafb
{
    // Per-stream quantities indexed [i][m], destination i and stream m.
    using StreamTable = std::vector<std::vector<double>>;

    // Effective scalar channels seen after transmit and receive projections,
    // evaluated against the true frequency responses.
    struct EffectiveIO
    {
        StreamTable direct_gains; // |hbar_ii^H bhat_ii^{mm}|^2
        StreamTable I1;           // intra-user, sum over p != m
        StreamTable I2;           // inter-user, sum over k != i and all p
    };

    // bhat = conj(u) o v and the coefficient hbar^H bhat for each (i, k, m, p).
    // Per-stream power is P / (M d_k).
    EffectiveIO effective_io(const NetworkRealization &real, const std::vector<CMatrix> &U,
                             const std::vector<CMatrix> &V, const IADimensions &dims, double P);

    struct RateResult
    {
        std::vector<double> rates; // bits per tone use, one per pair
        double sum_rate = 0.0;
    };

    // R_i = (1/N) sum_m log2(1 + (P / (M d_i)) g_im / (I1_im + I2_im + N_o))
    RateResult rate_lower_bound(const EffectiveIO &io, double P, double noise_power, const IADimensions &dims);

    struct InterferenceBound
    {
        StreamTable constant;     // sum of Delta = 4 |bhat|^2 |hbar|^2 / (M d_k) over interfering terms
        StreamTable intermediate; // P 2^(-N_d / (L - 1)) times constant
        // Same terms with 4 2^(-N_d/(L-1)) replaced by the realized Delta_d^2 of each link.
        std::optional<StreamTable> realized;
        bool constant_applies = false; // N_d >= (L - 1) log2 P, so intermediate <= constant
    };

    // quantization_errors, when given, holds Delta_d for every link and enables the realized bound.
    InterferenceBound interference_constant_bound(const NetworkRealization &real, const std::vector<CMatrix> &U,
                                                  const std::vector<CMatrix> &V, const IADimensions &dims, double P,
                                                  int N_d, const LinkGrid<double> *quantization_errors = nullptr);

    enum class FeedbackKind
    {
        perfect,
        limited,
        fixed
    };

    struct FeedbackMode
    {
        FeedbackKind kind = FeedbackKind::perfect;
        int fixed_bits = 0;

        static FeedbackMode perfect() { return {FeedbackKind::perfect, 0}; }
        static FeedbackMode limited() { return {FeedbackKind::limited, 0}; }
        static FeedbackMode fixed(int bits) { return {FeedbackKind::fixed, bits}; }

        // Bits per quantized vector at power P, or -1 for perfect CSI.
        int bits_at(double P, int L) const;
        // "perfect", "limited" or "fixed(N)"
        std::string name() const;
        static FeedbackMode parse(const std::string &text);
        bool operator==(const FeedbackMode &) const = default;
    };

    // Shared codebooks keyed by (L, N_d). Built on first use; when a directory is
    // set, books up to disk_limit codewords are also read from and written to
    // cb_L{L}_Nd{N_d}_seed{seed}.json there. Larger books are rebuilt from the seed,
    // which reproduces them exactly.
    class CodebookCache
    {
    public:
        explicit CodebookCache(std::uint64_t seed, std::optional<std::filesystem::path> dir = std::nullopt,
                               CodebookOptions options = {});

        std::shared_ptr<const Codebook> get(int L, int N_d);
        std::uint64_t seed() const { return seed_; }
        const std::optional<std::filesystem::path> &directory() const { return dir_; }
        std::size_t disk_limit = std::size_t{1} << 18;

    private:
        std::uint64_t seed_;
        std::optional<std::filesystem::path> dir_;
        CodebookOptions options_;
        std::mutex mutex_;
        std::map<std::pair<int, int>, std::shared_ptr<const Codebook>> books_;
    };

    struct TrialResult
    {
        double P = 0.0;
        int N_d = -1; // -1 in perfect mode
        FeedbackMode mode;
        std::vector<double> rates;
        double sum_rate = 0.0;
        StreamTable I1, I2;
        StreamTable direct_gains;
        StreamTable constant_bound;
        StreamTable intermediate_bound;
        StreamTable realized_bound; // empty in perfect mode
        bool constant_applies = false;
        double quantization_max_error = 0.0;
        double min_direct_gain = 0.0;      // min over streams of |hbar_ii^H bhat_ii^{mm}|
        double alignment_residual = 0.0;   // max cross/interference residual against the CSI used for design
        int resamples = 0;

        double total_interference() const;
        double total_constant_bound() const;
        // Streams with I1 + I2 above the given bound, beyond 1e-9 relative slack.
        int violations(const StreamTable &bound) const;
    };

    // One network draw seeded from params.seed. Degenerate CSI is redrawn with a
    // derived seed up to 10 times before the error propagates.
    TrialResult run_trial(const NetworkParams &params, const FeedbackMode &mode, CodebookCache *cache);

    // Seed of trial number `trial` in a sweep; the same for every P so grid points share networks.
    std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

    struct SweepPoint
    {
        double P = 0.0;
        int N_d = -1;
        double mean_sum_rate = 0.0;
        double mean_interference = 0.0;
        double mean_constant_bound = 0.0;
        int resamples = 0;
    };

    struct SweepResult
    {
        std::vector<SweepPoint> grid; // ascending in P
        std::vector<TrialResult> trials; // grid-major, trials_per_point per point
        double slope = 0.0;              // least squares of mean R_sum on log2 P, top half of grid
        double interference_slope = 0.0; // least squares of log mean I on log P, whole grid
        double dof_target = 0.0;
    };

    // Least-squares slope of y on x.
    double fit_slope(const std::vector<double> &x, const std::vector<double> &y);

    // threads = 0 uses the hardware concurrency. Results do not depend on the thread count.
    SweepResult dof_sweep(const NetworkParams &params, const FeedbackMode &mode, const std::vector<double> &P_grid,
                          int trials_per_point, CodebookCache &cache, unsigned threads = 0);
}
