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

#include "iafb/codebook.hpp"

#include "bloch_index.hpp"
#include "iafb/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace iafb
{
    namespace
    {
        // Codebooks at least this large get a spatial index (L = 2 only).
        constexpr std::size_t index_threshold = 64;

        template <typename A, typename B>
        double abs_inner(const A &p, const B &w)
        {
            cplx acc(0.0, 0.0);
            for (Eigen::Index l = 0; l < p.size(); ++l)
                acc += std::conj(p(l)) * w(l);
            return std::abs(acc);
        }

        // sqrt(1 - |p^H w|^2) evaluated as the norm of the residual, which keeps
        // full relative precision when the error is tiny.
        template <typename A>
        double quantization_error(const A &p, const CVector &w)
        {
            const cplx c = p.dot(w);
            return (w - c * p).norm() / w.norm();
        }

        int bits_for_size(std::size_t n)
        {
            int bits = 0;
            while ((std::size_t{1} << bits) < n)
                ++bits;
            return bits;
        }

        std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t tag)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), a, b, tag};
            return std::mt19937_64(seq);
        }

        double coherence_brute_force(const CMatrix &vectors)
        {
            double best = 0.0;
            for (Eigen::Index l = 0; l < vectors.cols(); ++l)
                for (Eigen::Index m = l + 1; m < vectors.cols(); ++m)
                    best = std::max(best, abs_inner(vectors.col(l), vectors.col(m)));
            return best;
        }

        double coherence_indexed(const CMatrix &vectors, const detail::BlochIndex &index, double delta)
        {
            // Every line of a maximal packing has a neighbour within twice the covering
            // radius, so the closest pair is found by a local search; if nothing turns
            // up locally the packing is sparse and the full scan is cheap.
            const double radius = 2.0 * detail::covering_query_radius(delta);
            double best = -1.0;
            for (Eigen::Index j = 0; j < vectors.cols(); ++j)
            {
                const auto pj = detail::bloch_point(vectors(0, j), vectors(1, j));
                index.for_each_near(pj, radius,
                                    [&](std::uint32_t id)
                                    {
                                        if (static_cast<Eigen::Index>(id) < j)
                                            best = std::max(best, abs_inner(vectors.col(id), vectors.col(j)));
                                    });
            }
            if (best < 0.0)
                return coherence_brute_force(vectors);
            return best;
        }

        CMatrix build_generic(int L, double delta, std::size_t cap, std::mt19937_64 &rng, const CodebookOptions &options)
        {
            const double cos_delta = std::cos(delta);
            std::vector<CVector> words;
            int streak = 0;
            while (streak < options.rejection_streak && words.size() < cap)
            {
                CVector w = haar_unit_vector(L, rng);
                bool admitted = true;
                for (const auto &p : words)
                    if (abs_inner(p, w) >= cos_delta)
                    {
                        admitted = false;
                        break;
                    }
                if (admitted)
                {
                    words.push_back(std::move(w));
                    streak = 0;
                }
                else
                    ++streak;
            }
            CMatrix out(L, static_cast<Eigen::Index>(words.size()));
            for (std::size_t j = 0; j < words.size(); ++j)
                out.col(static_cast<Eigen::Index>(j)) = words[j];
            return out;
        }

        // Greedy packing on C^2 with the same admission sequence distribution as
        // plain Haar sampling: candidates are drawn uniformly from the part of the
        // Bloch sphere not yet certified as covered, which only skips candidates
        // that would have been rejected anyway. Certification is exact: a cell is
        // dropped only if a single codeword's covering cap contains all of it.
        class SphereBuilder
        {
        public:
            SphereBuilder(double delta, std::size_t cap, std::mt19937_64 &rng, const CodebookOptions &options)
                : delta_(delta), cos_delta_(std::cos(delta)), cover_dot_(2.0 * std::cos(delta) * std::cos(delta) - 1.0),
                  radius_(detail::covering_query_radius(delta)), cap_(cap), rng_(rng), options_(options),
                  cells_(std::min(2.0 * delta, std::numbers::pi)), index_(std::min(2.0 * delta, std::numbers::pi))
            {
            }

            CMatrix run()
            {
                std::vector<SampleCell> active;
                active.reserve(cells_.cell_count());
                for (int r = 0; r < cells_.rows(); ++r)
                    for (int c = 0; c < cells_.cols(r); ++c)
                        active.push_back(SampleCell{static_cast<std::uint32_t>(c), static_cast<std::uint16_t>(r), 0, 0, 0});

                int streak = 0;
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                std::vector<double> cumulative;
                while (!active.empty())
                {
                    cumulative.resize(active.size());
                    double total = 0.0;
                    for (std::size_t j = 0; j < active.size(); ++j)
                    {
                        total += bounds(active[j]).area();
                        cumulative[j] = total;
                    }

                    const std::size_t budget = std::max<std::size_t>(4096, active.size());
                    for (std::size_t attempt = 0; attempt < budget; ++attempt)
                    {
                        const double u = unit(rng_) * total;
                        std::size_t j = static_cast<std::size_t>(
                            std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                        j = std::min(j, active.size() - 1);
                        const CellBounds b = bounds(active[j]);
                        const double z = b.z_lo + unit(rng_) * (b.z_hi - b.z_lo);
                        double phi = b.phi_lo + unit(rng_) * (b.phi_hi - b.phi_lo);
                        if (phi >= detail::two_pi)
                            phi -= detail::two_pi;

                        if (try_admit(z, phi))
                        {
                            streak = 0;
                            if (words_.size() >= cap_)
                                return finish();
                        }
                        else if (++streak >= options_.rejection_streak)
                            return finish();
                    }
                    active = refine(active);
                }
                return finish();
            }

        private:
            static constexpr int max_depth = 7;

            struct SampleCell
            {
                std::uint32_t col;
                std::uint16_t row;
                std::uint8_t depth;
                std::uint16_t iz;
                std::uint16_t iphi;
            };

            struct CellBounds
            {
                double z_lo, z_hi, phi_lo, phi_hi;
                double area() const { return (z_hi - z_lo) * (phi_hi - phi_lo); }
            };

            struct Line
            {
                cplx a, b;
                double z, sin_theta, phi;
            };

            CellBounds bounds(const SampleCell &c) const
            {
                const double h = cells_.ring_height();
                const double z_top = std::cos(c.row * h);
                const double z_bottom = (c.row + 1 == cells_.rows()) ? -1.0 : std::cos((c.row + 1) * h);
                const int parts = 1 << c.depth;
                const double dz = (z_top - z_bottom) / parts;
                const double width = detail::two_pi / cells_.cols(c.row);
                const double dphi = width / parts;
                CellBounds b;
                b.z_lo = z_bottom + c.iz * dz;
                b.z_hi = (c.iz + 1 == parts) ? z_top : b.z_lo + dz;
                b.phi_lo = c.col * width + c.iphi * dphi;
                b.phi_hi = b.phi_lo + dphi;
                return b;
            }

            bool try_admit(double z, double phi)
            {
                const auto w = detail::line_from_bloch(z, phi);
                detail::SphericalPoint p;
                p.z = z;
                p.sin_theta = std::sqrt(std::max(0.0, 1.0 - z * z));
                p.theta = std::acos(std::clamp(z, -1.0, 1.0));
                p.phi = phi;

                const bool covered = index_.any_near(p, radius_,
                                                     [&](std::uint32_t id)
                                                     {
                                                         const Line &q = words_[id];
                                                         return std::abs(std::conj(q.a) * w[0] + std::conj(q.b) * w[1]) >=
                                                                cos_delta_;
                                                     });
                if (covered)
                    return false;

                const auto id = static_cast<std::uint32_t>(words_.size());
                words_.push_back(Line{w[0], w[1], z, p.sin_theta, phi});
                index_.insert(id, p);
                return true;
            }

            // Smallest Bloch dot product between line q and any point of the cell.
            static double min_dot(const CellBounds &b, const Line &q)
            {
                const double width = b.phi_hi - b.phi_lo;
                double spread; // largest longitude separation from q within the cell
                if (width >= detail::two_pi)
                    spread = std::numbers::pi;
                else
                {
                    double rel = std::fmod(q.phi + std::numbers::pi - b.phi_lo, detail::two_pi);
                    if (rel < 0.0)
                        rel += detail::two_pi;
                    if (rel <= width)
                        spread = std::numbers::pi;
                    else
                    {
                        auto circular = [](double x, double y)
                        {
                            double d = std::fmod(std::abs(x - y), detail::two_pi);
                            return std::min(d, detail::two_pi - d);
                        };
                        spread = std::max(circular(q.phi, b.phi_lo), circular(q.phi, b.phi_hi));
                    }
                }
                // dot(theta) = A cos(theta) + B sin(theta) on the latitude range of the cell
                const double A = q.z;
                const double B = q.sin_theta * std::cos(spread);
                const double sin_top = std::sqrt(std::max(0.0, 1.0 - b.z_hi * b.z_hi));
                const double sin_bottom = std::sqrt(std::max(0.0, 1.0 - b.z_lo * b.z_lo));
                double lowest = std::min(A * b.z_hi + B * sin_top, A * b.z_lo + B * sin_bottom);
                const double theta_top = std::acos(std::clamp(b.z_hi, -1.0, 1.0));
                const double theta_bottom = std::acos(std::clamp(b.z_lo, -1.0, 1.0));
                const double argmin = std::atan2(B, A) + std::numbers::pi;
                if ((argmin >= theta_top && argmin <= theta_bottom) ||
                    (argmin - detail::two_pi >= theta_top && argmin - detail::two_pi <= theta_bottom))
                    lowest = -std::hypot(A, B);
                return lowest;
            }

            bool certified_covered(const SampleCell &c) const
            {
                const CellBounds b = bounds(c);
                detail::SphericalPoint centre;
                centre.z = 0.5 * (b.z_lo + b.z_hi);
                centre.theta = std::acos(std::clamp(centre.z, -1.0, 1.0));
                centre.sin_theta = std::sin(centre.theta);
                centre.phi = 0.5 * (b.phi_lo + b.phi_hi);
                if (centre.phi >= detail::two_pi)
                    centre.phi -= detail::two_pi;

                return index_.any_near(centre, radius_,
                                       [&](std::uint32_t id) { return min_dot(b, words_[id]) >= cover_dot_ + 1e-12; });
            }

            std::vector<SampleCell> refine(const std::vector<SampleCell> &active) const
            {
                std::vector<SampleCell> next;
                next.reserve(active.size());
                for (const SampleCell &c : active)
                {
                    if (certified_covered(c))
                        continue;
                    if (c.depth >= max_depth)
                    {
                        next.push_back(c);
                        continue;
                    }
                    for (int dz = 0; dz < 2; ++dz)
                        for (int dp = 0; dp < 2; ++dp)
                        {
                            const SampleCell child{c.col, c.row, static_cast<std::uint8_t>(c.depth + 1),
                                                   static_cast<std::uint16_t>(2 * c.iz + dz),
                                                   static_cast<std::uint16_t>(2 * c.iphi + dp)};
                            if (!certified_covered(child))
                                next.push_back(child);
                        }
                }
                return next;
            }

            CMatrix finish() const
            {
                CMatrix out(2, static_cast<Eigen::Index>(words_.size()));
                for (std::size_t j = 0; j < words_.size(); ++j)
                {
                    out(0, static_cast<Eigen::Index>(j)) = words_[j].a;
                    out(1, static_cast<Eigen::Index>(j)) = words_[j].b;
                }
                return out;
            }

            double delta_;
            double cos_delta_;
            double cover_dot_;
            double radius_;
            std::size_t cap_;
            std::mt19937_64 &rng_;
            const CodebookOptions &options_;
            detail::RingGrid cells_;
            detail::BlochIndex index_;
            std::vector<Line> words_;
        };
    }

    Codebook::Codebook(int L, double delta, int design_bits, CMatrix vectors, double covering_estimate)
        : L_(L), delta_(delta), design_bits_(design_bits), vectors_(std::move(vectors)),
          covering_estimate_(covering_estimate)
    {
        if (L_ < 1)
            throw ParameterError("Codebook: L must be at least 1");
        if (!(delta_ > 0.0) || delta_ > 0.5 * std::numbers::pi + 1e-12)
            throw ParameterError("Codebook: delta must lie in (0, pi/2]");
        if (vectors_.rows() != L_)
            throw DimensionError("Codebook: codewords must have L entries");
        if (vectors_.cols() == 0)
            throw ParameterError("Codebook: no codewords");
        for (Eigen::Index j = 0; j < vectors_.cols(); ++j)
            if (std::abs(vectors_.col(j).norm() - 1.0) > 1e-12)
                throw ParameterError("Codebook: codeword " + std::to_string(j) + " is not unit norm");

        bits_ = bits_for_size(size());
        if (L_ == 2 && size() >= index_threshold)
        {
            auto index = std::make_shared<detail::BlochIndex>(std::min(2.0 * delta_, std::numbers::pi));
            for (Eigen::Index j = 0; j < vectors_.cols(); ++j)
                index->insert(static_cast<std::uint32_t>(j), detail::bloch_point(vectors_(0, j), vectors_(1, j)));
            index_ = std::move(index);
            coherence_ = coherence_indexed(vectors_, *index_, delta_);
        }
        else
            coherence_ = coherence_brute_force(vectors_);

        if (size() > 1 && coherence_ >= std::cos(delta_) + 1e-9)
            throw ParameterError("Codebook: codewords violate the packing angle");
    }

    double target_sin_delta(int L, int N_d)
    {
        if (L < 1 || N_d < 0)
            throw ParameterError("target_sin_delta: need L >= 1 and N_d >= 0");
        if (L == 1)
            return 1.0;
        return std::min(1.0, 2.0 * std::exp2(-static_cast<double>(N_d) / (2.0 * (L - 1))));
    }

    double packing_size_bound(int L, double delta)
    {
        return std::pow(std::sin(delta) / 2.0, -2.0 * (L - 1));
    }

    Codebook design_codebook(int L, int N_d, std::uint64_t seed, const CodebookOptions &options)
    {
        if (L < 1)
            throw ParameterError("design_codebook: L must be at least 1");
        if (N_d < 0 || N_d > 40)
            throw ParameterError("design_codebook: N_d must lie in [0, 40]");
        if (options.rejection_streak < 1)
            throw ParameterError("design_codebook: rejection_streak must be positive");

        if (L == 1)
        {
            CMatrix one(1, 1);
            one(0, 0) = cplx(1.0, 0.0);
            return Codebook(1, 0.5 * std::numbers::pi, 0, std::move(one), 0.0);
        }

        const double delta = std::asin(target_sin_delta(L, N_d));
        const std::size_t cap = std::size_t{1} << (N_d + 1);
        auto rng = make_rng(seed, static_cast<std::uint32_t>(L), static_cast<std::uint32_t>(N_d), 0x636231u);

        CMatrix vectors;
        if (L == 2)
            vectors = SphereBuilder(delta, cap, rng, options).run();
        else
            vectors = build_generic(L, delta, cap, rng, options);

        Codebook cb(L, delta, N_d, std::move(vectors));
        if (options.stats_samples > 0)
            cb.covering_estimate_ = codebook_stats(cb, options.stats_samples, seed ^ 0x9e3779b97f4a7c15ull).covering_estimate;
        return cb;
    }

    QuantizationResult quantize(const CVector &w, const Codebook &cb)
    {
        if (w.size() != cb.L())
            throw DimensionError("quantize: vector has " + std::to_string(w.size()) + " entries, codebook L = " +
                                 std::to_string(cb.L()));
        if (std::abs(w.norm() - 1.0) > 1e-9)
            throw ParameterError("quantize: input must be unit norm");

        const CMatrix &words = cb.vectors();
        if (const auto *index = cb.index())
        {
            double best = -1.0;
            std::size_t best_id = std::numeric_limits<std::size_t>::max();
            index->for_each_near(detail::bloch_point(w(0), w(1)), detail::covering_query_radius(cb.delta()),
                                 [&](std::uint32_t id)
                                 {
                                     const double v = abs_inner(words.col(id), w);
                                     if (v > best || (v == best && id < best_id))
                                     {
                                         best = v;
                                         best_id = id;
                                     }
                                 });
            // Anything at least as close as cos(delta) lies inside the searched radius.
            if (best >= std::cos(cb.delta()))
                return {best_id, quantization_error(words.col(static_cast<Eigen::Index>(best_id)), w)};
        }

        double best = -1.0;
        std::size_t best_id = 0;
        for (Eigen::Index l = 0; l < words.cols(); ++l)
        {
            const double v = abs_inner(words.col(l), w);
            if (v > best)
            {
                best = v;
                best_id = static_cast<std::size_t>(l);
            }
        }
        return {best_id, quantization_error(words.col(static_cast<Eigen::Index>(best_id)), w)};
    }

    CodebookStats codebook_stats(const Codebook &cb, int n_samples, std::uint64_t seed)
    {
        if (n_samples < 1)
            throw ParameterError("codebook_stats: n_samples must be positive");
        auto rng = make_rng(seed, static_cast<std::uint32_t>(cb.L()), static_cast<std::uint32_t>(cb.size()), 0x737461u);
        double worst = 0.0;
        for (int s = 0; s < n_samples; ++s)
            worst = std::max(worst, quantize(haar_unit_vector(cb.L(), rng), cb).error);
        return {cb.coherence(), std::min(worst, 1.0)};
    }

    nlohmann::json codebook_to_json(const Codebook &cb)
    {
        nlohmann::json vectors = nlohmann::json::array();
        for (std::size_t j = 0; j < cb.size(); ++j)
        {
            nlohmann::json v = nlohmann::json::array();
            for (int l = 0; l < cb.L(); ++l)
            {
                const cplx c = cb.vectors()(l, static_cast<Eigen::Index>(j));
                v.push_back({c.real(), c.imag()});
            }
            vectors.push_back(std::move(v));
        }
        return {{"version", 1},
                {"L", cb.L()},
                {"delta", cb.delta()},
                {"bits", cb.bits()},
                {"design_bits", cb.design_bits()},
                {"coherence", cb.coherence()},
                {"covering_estimate", cb.covering_estimate()},
                {"vectors", std::move(vectors)}};
    }

    Codebook codebook_from_json(const nlohmann::json &doc)
    {
        try
        {
            if (doc.at("version").get<int>() != 1)
                throw ParameterError("codebook: unsupported version");
            const int L = doc.at("L").get<int>();
            const double delta = doc.at("delta").get<double>();
            const auto &vectors = doc.at("vectors");
            CMatrix words(L, static_cast<Eigen::Index>(vectors.size()));
            for (std::size_t j = 0; j < vectors.size(); ++j)
            {
                const auto &v = vectors[j];
                if (static_cast<int>(v.size()) != L)
                    throw DimensionError("codebook: codeword " + std::to_string(j) + " has the wrong length");
                for (int l = 0; l < L; ++l)
                    words(l, static_cast<Eigen::Index>(j)) = cplx(v[static_cast<std::size_t>(l)].at(0).get<double>(),
                                                                  v[static_cast<std::size_t>(l)].at(1).get<double>());
            }
            const int design_bits = doc.value("design_bits", doc.at("bits").get<int>());
            const double covering = doc.value("covering_estimate", -1.0);
            Codebook cb(L, delta, design_bits, std::move(words), covering);
            if (cb.bits() != doc.at("bits").get<int>())
                throw ParameterError("codebook: stored bit count does not match the number of codewords");
            return cb;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ParameterError(std::string("codebook: malformed document: ") + e.what());
        }
    }

    void save_codebook(const Codebook &cb, const std::filesystem::path &path)
    {
        // Streamed by hand: large codebooks would otherwise be built as a DOM first.
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("save_codebook: cannot open " + path.string());
        auto num = [](double x)
        {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof(buf), x);
            return std::string(buf, res.ptr);
        };
        out << "{\"version\":1,\"L\":" << cb.L() << ",\"delta\":" << num(cb.delta()) << ",\"bits\":" << cb.bits()
            << ",\"design_bits\":" << cb.design_bits() << ",\"coherence\":" << num(cb.coherence())
            << ",\"covering_estimate\":" << num(cb.covering_estimate()) << ",\"vectors\":[";
        for (std::size_t j = 0; j < cb.size(); ++j)
        {
            out << (j ? ",[" : "[");
            for (int l = 0; l < cb.L(); ++l)
            {
                const cplx c = cb.vectors()(l, static_cast<Eigen::Index>(j));
                out << (l ? ",[" : "[") << num(c.real()) << ',' << num(c.imag()) << ']';
            }
            out << ']';
        }
        out << "]}\n";
        if (!out)
            throw std::runtime_error("save_codebook: write failed for " + path.string());
    }

    Codebook load_codebook(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("load_codebook: cannot open " + path.string());
        nlohmann::json doc;
        try
        {
            in >> doc;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ParameterError("load_codebook: " + path.string() + ": " + e.what());
        }
        return codebook_from_json(doc);
    }

    std::string codebook_file_name(int L, int N_d, std::uint64_t seed)
    {
        std::ostringstream name;
        name << "cb_L" << L << "_Nd" << N_d << "_seed" << seed << ".json";
        return name.str();
    }
}
