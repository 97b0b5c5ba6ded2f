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

#include "bloch_index.hpp"

#include <stdexcept>

namespace iafb::detail
{
    RingGrid::RingGrid(double ring_height)
    {
        if (!(ring_height > 0.0))
            throw std::invalid_argument("RingGrid: ring height must be positive");
        const int n_rows = std::max(1, static_cast<int>(std::ceil(std::numbers::pi / std::min(ring_height, std::numbers::pi))));
        height_ = std::numbers::pi / n_rows;
        cols_.resize(static_cast<std::size_t>(n_rows));
        offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
        for (int r = 0; r < n_rows; ++r)
        {
            const double lo = r * height_;
            const double hi = (r + 1) * height_;
            const double widest = (lo <= 0.5 * std::numbers::pi && hi >= 0.5 * std::numbers::pi)
                                      ? 1.0
                                      : std::max(std::sin(lo), std::sin(hi));
            cols_[static_cast<std::size_t>(r)] = std::max(1, static_cast<int>(std::ceil(two_pi * widest / height_)));
            offsets_[static_cast<std::size_t>(r) + 1] = offsets_[static_cast<std::size_t>(r)] + cols_[static_cast<std::size_t>(r)];
        }
    }

    std::size_t RingGrid::cell_of(double theta, double phi) const
    {
        const int r = std::clamp(static_cast<int>(theta / height_), 0, rows() - 1);
        const int n_cols = cols_[static_cast<std::size_t>(r)];
        const int c = std::clamp(static_cast<int>(phi / (two_pi / n_cols)), 0, n_cols - 1);
        return cell_id(r, c);
    }

    BlochIndex::BlochIndex(double cell_angle) : grid_(cell_angle), head_(grid_.cell_count(), -1) {}

    void BlochIndex::insert(std::uint32_t id, const SphericalPoint &p)
    {
        if (id != next_.size())
            throw std::logic_error("BlochIndex: ids must be inserted densely in order");
        const std::size_t cell = grid_.cell_of(p.theta, p.phi);
        next_.push_back(head_[cell]);
        head_[cell] = static_cast<std::int32_t>(id);
    }
}
