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

#include "iafb/evaluation.hpp"

#include "iafb/errors.hpp"
#include "iafb/feedback.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace iafb
{
    namespace
    {
        constexpr int max_resamples = 10;

        std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint32_t tag)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag};
            std::uint32_t out[2];
            seq.generate(out, out + 2);
            return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        }

        StreamTable stream_table(const IADimensions &dims)
        {
            StreamTable t(static_cast<std::size_t>(dims.M));
            for (int i = 0; i < dims.M; ++i)
                t[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(dims.d[static_cast<std::size_t>(i)]), 0.0);
            return t;
        }

        void check_shapes(const NetworkRealization &real, const std::vector<CMatrix> &U, const std::vector<CMatrix> &V,
                          const IADimensions &dims)
        {
            if (real.M != dims.M || static_cast<int>(U.size()) != dims.M || static_cast<int>(V.size()) != dims.M)
                throw DimensionError("evaluation: network, directions and dimensions disagree on M");
            if (real.N != dims.N)
                throw DimensionError("evaluation: network has " + std::to_string(real.N) + " tones, dimensions expect " +
                                     std::to_string(dims.N));
            for (int k = 0; k < dims.M; ++k)
            {
                const auto ks = static_cast<std::size_t>(k);
                if (U[ks].rows() != dims.N || V[ks].rows() != dims.N || U[ks].cols() != dims.d[ks] ||
                    V[ks].cols() != dims.d[ks])
                    throw DimensionError("evaluation: direction set " + std::to_string(k + 1) + " must be N x d_k");
            }
        }

        double stream_power(double P, const IADimensions &dims, int k)
        {
            return P / (dims.M * dims.d[static_cast<std::size_t>(k)]);
        }

        // Visits every interfering coefficient of stream (i, m): (k, p) != (i, m).
        template <typename Fn>
        void for_each_term(const NetworkRealization &real, const std::vector<CMatrix> &U, const std::vector<CMatrix> &V,
                           int i, Eigen::Index m, Fn &&fn)
        {
            const CVector u_conj = U[static_cast<std::size_t>(i)].col(m).conjugate();
            for (int k = 0; k < real.M; ++k)
            {
                const CMatrix &Vk = V[static_cast<std::size_t>(k)];
                for (Eigen::Index p = 0; p < Vk.cols(); ++p)
                {
                    const CVector b = u_conj.cwiseProduct(Vk.col(p));
                    fn(k, p, b, real.freq(i, k).dot(b));
                }
            }
        }
    }

    EffectiveIO effective_io(const NetworkRealization &real, const std::vector<CMatrix> &U,
                             const std::vector<CMatrix> &V, const IADimensions &dims, double P)
    {
        check_shapes(real, U, V, dims);
        if (!(P > 0.0))
            throw ParameterError("effective_io: P must be positive");
        EffectiveIO io{stream_table(dims), stream_table(dims), stream_table(dims)};
        for (int i = 0; i < dims.M; ++i)
        {
            const auto is = static_cast<std::size_t>(i);
            for (Eigen::Index m = 0; m < dims.d[is]; ++m)
            {
                const auto ms = static_cast<std::size_t>(m);
                for_each_term(real, U, V, i, m, [&](int k, Eigen::Index p, const CVector &, cplx coef) {
                    const double power = std::norm(coef);
                    if (k == i && p == m)
                        io.direct_gains[is][ms] = power;
                    else if (k == i)
                        io.I1[is][ms] += stream_power(P, dims, k) * power;
                    else
                        io.I2[is][ms] += stream_power(P, dims, k) * power;
                });
            }
        }
        return io;
    }

    RateResult rate_lower_bound(const EffectiveIO &io, double P, double noise_power, const IADimensions &dims)
    {
        RateResult out;
        out.rates.assign(static_cast<std::size_t>(dims.M), 0.0);
        for (int i = 0; i < dims.M; ++i)
        {
            const auto is = static_cast<std::size_t>(i);
            double r = 0.0;
            for (std::size_t m = 0; m < io.direct_gains[is].size(); ++m)
            {
                const double signal = stream_power(P, dims, i) * io.direct_gains[is][m];
                r += std::log2(1.0 + signal / (io.I1[is][m] + io.I2[is][m] + noise_power));
            }
            out.rates[is] = r / dims.N;
            out.sum_rate += out.rates[is];
        }
        return out;
    }

    InterferenceBound interference_constant_bound(const NetworkRealization &real, const std::vector<CMatrix> &U,
                                                  const std::vector<CMatrix> &V, const IADimensions &dims, double P,
                                                  int N_d, const LinkGrid<double> *quantization_errors)
    {
        check_shapes(real, U, V, dims);
        if (real.L < 2)
            throw ParameterError("interference_constant_bound: needs L >= 2");
        if (N_d < 0)
            throw ParameterError("interference_constant_bound: N_d must be non-negative");
        if (quantization_errors && quantization_errors->size() != dims.M)
            throw DimensionError("interference_constant_bound: quantization error grid has the wrong size");

        const double decay = std::exp2(-static_cast<double>(N_d) / (real.L - 1));
        InterferenceBound out;
        out.constant = stream_table(dims);
        out.intermediate = stream_table(dims);
        if (quantization_errors)
            out.realized = stream_table(dims);
        out.constant_applies = P * decay <= 1.0 + 1e-12;

        for (int i = 0; i < dims.M; ++i)
        {
            const auto is = static_cast<std::size_t>(i);
            for (Eigen::Index m = 0; m < dims.d[is]; ++m)
            {
                const auto ms = static_cast<std::size_t>(m);
                for_each_term(real, U, V, i, m, [&](int k, Eigen::Index p, const CVector &b, cplx) {
                    if (k == i && p == m)
                        return;
                    const double energy = b.squaredNorm() * real.freq(i, k).squaredNorm();
                    out.constant[is][ms] += 4.0 * energy / (dims.M * dims.d[static_cast<std::size_t>(k)]);
                    if (quantization_errors)
                    {
                        const double e = (*quantization_errors)(i, k);
                        (*out.realized)[is][ms] += stream_power(P, dims, k) * energy * e * e;
                    }
                });
                out.intermediate[is][ms] = P * decay * out.constant[is][ms];
            }
        }
        return out;
    }

    int FeedbackMode::bits_at(double P, int L) const
    {
        switch (kind)
        {
        case FeedbackKind::perfect:
            return -1;
        case FeedbackKind::limited:
            return limited_feedback_bits(P, L);
        case FeedbackKind::fixed:
            return fixed_bits;
        }
        return -1;
    }

    std::string FeedbackMode::name() const
    {
        switch (kind)
        {
        case FeedbackKind::perfect:
            return "perfect";
        case FeedbackKind::limited:
            return "limited";
        case FeedbackKind::fixed:
            return "fixed(" + std::to_string(fixed_bits) + ")";
        }
        return "?";
    }

    FeedbackMode FeedbackMode::parse(const std::string &text)
    {
        if (text == "perfect")
            return perfect();
        if (text == "limited")
            return limited();
        const std::string prefix = "fixed(";
        if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size(), prefix) == 0 && text.back() == ')')
        {
            const std::string digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
            if (!digits.empty() && digits.size() <= 3 && std::all_of(digits.begin(), digits.end(), ::isdigit))
                return fixed(std::stoi(digits));
        }
        throw ParameterError("unknown feedback mode '" + text + "' (expected perfect, limited or fixed(N))");
    }

    CodebookCache::CodebookCache(std::uint64_t seed, std::optional<std::filesystem::path> dir, CodebookOptions options)
        : seed_(seed), dir_(std::move(dir)), options_(options)
    {
    }

    std::shared_ptr<const Codebook> CodebookCache::get(int L, int N_d)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(L, N_d);
        if (auto it = books_.find(key); it != books_.end())
            return it->second;

        std::shared_ptr<const Codebook> book;
        std::optional<std::filesystem::path> file;
        if (dir_)
            file = *dir_ / codebook_file_name(L, N_d, seed_);
        if (file && std::filesystem::exists(*file))
        {
            auto loaded = std::make_shared<const Codebook>(load_codebook(*file));
            if (loaded->L() != L || loaded->design_bits() != N_d)
                throw std::runtime_error("codebook cache: " + file->string() + " does not hold an L = " +
                                         std::to_string(L) + ", N_d = " + std::to_string(N_d) + " codebook");
            book = std::move(loaded);
        }
        else
        {
            book = std::make_shared<const Codebook>(design_codebook(L, N_d, seed_, options_));
            if (file && book->size() <= disk_limit)
            {
                std::filesystem::create_directories(*dir_);
                const auto tmp = std::filesystem::path(file->string() + ".tmp");
                save_codebook(*book, tmp);
                std::filesystem::rename(tmp, *file);
            }
        }
        books_.emplace(key, book);
        return book;
    }

    double TrialResult::total_interference() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < I1.size(); ++i)
            for (std::size_t m = 0; m < I1[i].size(); ++m)
                s += I1[i][m] + I2[i][m];
        return s;
    }

    double TrialResult::total_constant_bound() const
    {
        double s = 0.0;
        for (const auto &row : constant_bound)
            for (double x : row)
                s += x;
        return s;
    }

    int TrialResult::violations(const StreamTable &bound) const
    {
        int count = 0;
        for (std::size_t i = 0; i < bound.size(); ++i)
            for (std::size_t m = 0; m < bound[i].size(); ++m)
                if (I1[i][m] + I2[i][m] > bound[i][m] * (1.0 + 1e-9))
                    ++count;
        return count;
    }

    std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return derive_seed(seed, trial, 0x747269u); }

    TrialResult run_trial(const NetworkParams &params, const FeedbackMode &mode, CodebookCache *cache)
    {
        params.validate();
        const IADimensions dims = ia_dimensions(params.M, params.t);
        if (dims.M != 3)
            throw UnsupportedError("run_trial: direction construction is implemented for M = 3 only; general M is a "
                                   "non-goal");
        const int N_d = mode.bits_at(params.P, params.L);
        std::shared_ptr<const Codebook> cb;
        if (N_d >= 0)
        {
            if (!cache)
                throw ParameterError("run_trial: quantized feedback needs a codebook cache");
            cb = cache->get(params.L, N_d);
        }

        TrialResult out;
        out.P = params.P;
        out.N_d = N_d;
        out.mode = mode;

        NetworkRealization real;
        DirectionSets dirs;
        std::optional<LinkGrid<double>> errors;
        for (int attempt = 0;; ++attempt)
        {
            NetworkParams draw = params;
            if (attempt > 0)
                draw.seed = derive_seed(params.seed, static_cast<std::uint64_t>(attempt), 0x726573u);
            real = sample_network(draw);
            try
            {
                if (cb)
                {
                    QuantizedCSI q = reconstruct_quantized_csi(quantize_network(real, *cb), *cb, real.N);
                    measure_quantization_errors(q, real);
                    errors = q.quantization_errors;
                    dirs = build_directions(q.w_tilde, dims);
                }
                else
                {
                    dirs = build_directions(perfect_csi(real), dims);
                }
                break;
            }
            catch (const DegenerateCsiError &)
            {
                if (attempt == max_resamples)
                    throw;
                ++out.resamples;
            }
        }

        const EffectiveIO io = effective_io(real, dirs.U, dirs.V, dims, params.P);
        RateResult rates = rate_lower_bound(io, params.P, params.noise_power, dims);
        out.rates = std::move(rates.rates);
        out.sum_rate = rates.sum_rate;
        out.I1 = io.I1;
        out.I2 = io.I2;
        out.direct_gains = io.direct_gains;

        InterferenceBound bound = interference_constant_bound(real, dirs.U, dirs.V, dims, params.P, std::max(N_d, 0),
                                                              errors ? &*errors : nullptr);
        out.constant_bound = std::move(bound.constant);
        if (N_d >= 0)
        {
            out.intermediate_bound = std::move(bound.intermediate);
            out.realized_bound = std::move(*bound.realized);
            out.constant_applies = bound.constant_applies;
            for (double e : *errors)
                out.quantization_max_error = std::max(out.quantization_max_error, e);
        }

        out.min_direct_gain = std::numeric_limits<double>::infinity();
        for (const auto &row : io.direct_gains)
            for (double g : row)
                out.min_direct_gain = std::min(out.min_direct_gain, std::sqrt(g));
        const auto &diag = dirs.diagnostics;
        out.alignment_residual = std::max(diag.cross_residual, diag.interference_residual) / diag.min_direct_gain();
        return out;
    }

    double fit_slope(const std::vector<double> &x, const std::vector<double> &y)
    {
        if (x.size() != y.size())
            throw DimensionError("fit_slope: x and y differ in length");
        const std::size_t n = x.size();
        if (n < 2)
            return std::numeric_limits<double>::quiet_NaN();
        double mx = 0.0, my = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            mx += x[j];
            my += y[j];
        }
        mx /= n;
        my /= n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = 0; j < n; ++j)
        {
            sxy += (x[j] - mx) * (y[j] - my);
            sxx += (x[j] - mx) * (x[j] - mx);
        }
        return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    }

    SweepResult dof_sweep(const NetworkParams &params, const FeedbackMode &mode, const std::vector<double> &P_grid,
                          int trials_per_point, CodebookCache &cache, unsigned threads)
    {
        if (P_grid.empty())
            throw ParameterError("dof_sweep: empty power grid");
        for (std::size_t j = 0; j < P_grid.size(); ++j)
            if (!(P_grid[j] > 0.0) || (j > 0 && !(P_grid[j] > P_grid[j - 1])))
                throw ParameterError("dof_sweep: power grid must be positive and strictly increasing");
        if (trials_per_point < 1)
            throw ParameterError("dof_sweep: need at least one trial per point");
        params.validate();
        const IADimensions dims = ia_dimensions(params.M, params.t);

        // Codebooks are built up front, in grid order, so worker threads only read them.
        for (double P : P_grid)
            if (const int N_d = mode.bits_at(P, params.L); N_d >= 0)
                cache.get(params.L, N_d);

        const std::size_t points = P_grid.size();
        const std::size_t per = static_cast<std::size_t>(trials_per_point);
        SweepResult out;
        out.trials.resize(points * per);
        out.dof_target = dims.dof_bound;

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t job = next++; job < out.trials.size(); job = next++)
            {
                try
                {
                    NetworkParams p = params;
                    p.P = P_grid[job / per];
                    p.seed = trial_seed(params.seed, job % per);
                    out.trials[job] = run_trial(p, mode, &cache);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = out.trials.size();
                }
            }
        };
        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, out.trials.size()));
        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w)
                pool.emplace_back(worker);
        }
        if (failure)
            std::rethrow_exception(failure);

        std::vector<double> log2P, mean_rate, logP, log_interf;
        bool interference_positive = true;
        for (std::size_t j = 0; j < points; ++j)
        {
            SweepPoint pt;
            pt.P = P_grid[j];
            pt.N_d = mode.bits_at(pt.P, params.L);
            for (std::size_t r = 0; r < per; ++r)
            {
                const TrialResult &tr = out.trials[j * per + r];
                pt.mean_sum_rate += tr.sum_rate;
                pt.mean_interference += tr.total_interference();
                pt.mean_constant_bound += tr.total_constant_bound();
                pt.resamples += tr.resamples;
            }
            pt.mean_sum_rate /= per;
            pt.mean_interference /= per;
            pt.mean_constant_bound /= per;
            out.grid.push_back(pt);

            log2P.push_back(std::log2(pt.P));
            mean_rate.push_back(pt.mean_sum_rate);
            logP.push_back(std::log(pt.P));
            interference_positive = interference_positive && pt.mean_interference > 0.0;
            log_interf.push_back(pt.mean_interference > 0.0 ? std::log(pt.mean_interference) : 0.0);
        }

        const std::size_t top = (points + 1) / 2;
        out.slope = fit_slope(std::vector<double>(log2P.end() - static_cast<std::ptrdiff_t>(top), log2P.end()),
                              std::vector<double>(mean_rate.end() - static_cast<std::ptrdiff_t>(top), mean_rate.end()));
        out.interference_slope = interference_positive ? fit_slope(logP, log_interf)
                                                       : std::numeric_limits<double>::quiet_NaN();
        return out;
    }
}
