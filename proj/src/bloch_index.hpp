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

// Spatial index over lines in C^2. A unit vector w = (a, b) maps to its Bloch
// point r = (2 Re(a* b), 2 Im(a* b), |a|^2 - |b|^2) on the unit sphere and
//   |w^H p|^2 = (1 + r_w . r_p) / 2,
// so |w^H p| >= cos(delta) exactly when the Bloch angle between them is at
// most 2 delta. Cells are latitude rings split into equal-width longitude bins.

#pragma once

#include "iafb/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace iafb::detail
{
    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    struct SphericalPoint
    {
        double z = 1.0;     // cos(theta)
        double sin_theta = 0.0;
        double theta = 0.0; // colatitude in [0, pi]
        double phi = 0.0;   // longitude in [0, 2 pi)
    };

    inline SphericalPoint bloch_point(cplx a, cplx b)
    {
        const cplx ab = std::conj(a) * b;
        const double x = 2.0 * ab.real();
        const double y = 2.0 * ab.imag();
        const double z = std::clamp(std::norm(a) - std::norm(b), -1.0, 1.0);
        SphericalPoint p;
        p.z = z;
        p.sin_theta = std::hypot(x, y);
        p.theta = std::atan2(p.sin_theta, z);
        double phi = std::atan2(y, x);
        if (phi < 0.0)
            phi += two_pi;
        if (phi >= two_pi)
            phi = 0.0;
        p.phi = phi;
        return p;
    }

    // Unit vector with real, non-negative first entry whose Bloch point is (z, phi).
    inline std::array<cplx, 2> line_from_bloch(double z, double phi)
    {
        const double a = std::sqrt(std::max(0.0, 0.5 * (1.0 + z)));
        const double s = std::sqrt(std::max(0.0, 0.5 * (1.0 - z)));
        return {cplx(a, 0.0), std::polar(s, phi)};
    }

    class RingGrid
    {
    public:
        RingGrid() = default;
        explicit RingGrid(double ring_height);

        int rows() const { return static_cast<int>(cols_.size()); }
        int cols(int row) const { return cols_[static_cast<std::size_t>(row)]; }
        double ring_height() const { return height_; }
        std::size_t cell_count() const { return offsets_.back(); }
        std::size_t cell_id(int row, int col) const { return offsets_[static_cast<std::size_t>(row)] + col; }
        std::size_t cell_of(double theta, double phi) const;

        // Visits (row, col) of every cell that may hold points within angular
        // distance beta of (theta, phi). fn returns true to stop early.
        template <typename Fn>
        void for_each_cell_near(double theta, double phi, double beta, Fn &&fn) const;

    private:
        double height_ = std::numbers::pi;
        std::vector<int> cols_;
        std::vector<std::size_t> offsets_;
    };

    class BlochIndex
    {
    public:
        // Cell size is matched to the largest query radius in regular use.
        explicit BlochIndex(double cell_angle);

        void insert(std::uint32_t id, const SphericalPoint &p);
        std::size_t size() const { return next_.size(); }

        // Calls fn(id) for every stored point that may lie within angular distance beta.
        template <typename Fn>
        void for_each_near(const SphericalPoint &p, double beta, Fn &&fn) const;

        // Same candidates as for_each_near; stops as soon as pred(id) is true and
        // reports whether it was.
        template <typename Pred>
        bool any_near(const SphericalPoint &p, double beta, Pred &&pred) const;

    private:
        RingGrid grid_;
        std::vector<std::int32_t> head_;
        std::vector<std::int32_t> next_;
    };

    // Largest Bloch angle between two lines admitted as "covered" at packing angle
    // delta, widened slightly so floating-point rounding never drops a candidate.
    inline double covering_query_radius(double delta) { return 2.0 * delta * (1.0 + 1e-9) + 1e-12; }

    template <typename Fn>
    void RingGrid::for_each_cell_near(double theta, double phi, double beta, Fn &&fn) const
    {
        const int n_rows = rows();
        const int r_lo = std::max(0, static_cast<int>(std::floor((theta - beta) / height_)));
        const int r_hi = std::min(n_rows - 1, static_cast<int>(std::floor((theta + beta) / height_)));

        bool full_rows = theta - beta <= 0.0 || theta + beta >= std::numbers::pi;
        double dphi = std::numbers::pi;
        if (!full_rows)
        {
            const double ratio = std::sin(beta) / std::sin(theta);
            if (ratio >= 1.0 || beta >= 0.5 * std::numbers::pi)
                full_rows = true;
            else
                dphi = std::asin(ratio);
        }

        for (int r = r_lo; r <= r_hi; ++r)
        {
            const int n_cols = cols_[static_cast<std::size_t>(r)];
            if (full_rows)
            {
                for (int c = 0; c < n_cols; ++c)
                    if (fn(r, c))
                        return;
                continue;
            }
            const double width = two_pi / n_cols;
            const long c_lo = static_cast<long>(std::floor((phi - dphi) / width));
            const long c_hi = static_cast<long>(std::floor((phi + dphi) / width));
            if (c_hi - c_lo + 1 >= n_cols)
            {
                for (int c = 0; c < n_cols; ++c)
                    if (fn(r, c))
                        return;
                continue;
            }
            for (long c = c_lo; c <= c_hi; ++c)
            {
                long cc = c % n_cols;
                if (cc < 0)
                    cc += n_cols;
                if (fn(r, static_cast<int>(cc)))
                    return;
            }
        }
    }

    template <typename Fn>
    void BlochIndex::for_each_near(const SphericalPoint &p, double beta, Fn &&fn) const
    {
        grid_.for_each_cell_near(p.theta, p.phi, beta,
                                 [&](int r, int c)
                                 {
                                     for (std::int32_t id = head_[grid_.cell_id(r, c)]; id >= 0;
                                          id = next_[static_cast<std::size_t>(id)])
                                         fn(static_cast<std::uint32_t>(id));
                                     return false;
                                 });
    }

    template <typename Pred>
    bool BlochIndex::any_near(const SphericalPoint &p, double beta, Pred &&pred) const
    {
        bool found = false;
        grid_.for_each_cell_near(p.theta, p.phi, beta,
                                 [&](int r, int c)
                                 {
                                     for (std::int32_t id = head_[grid_.cell_id(r, c)]; id >= 0;
                                          id = next_[static_cast<std::size_t>(id)])
                                         if (pred(static_cast<std::uint32_t>(id)))
                                         {
                                             found = true;
                                             return true;
                                         }
                                     return false;
                                 });
        return found;
    }
}
