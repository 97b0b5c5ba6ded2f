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

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace iafb
{
    using cplx = std::complex<double>;
    using CVector = Eigen::VectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    // Square M x M container indexed (destination i, source k), both 0-based.
    template <typename T>
    class LinkGrid
    {
    public:
        LinkGrid() = default;
        explicit LinkGrid(int M, const T &init = T{}) : M_(M), cells_(static_cast<std::size_t>(M) * M, init) {}

        int size() const { return M_; }

        T &operator()(int i, int k) { return cells_[static_cast<std::size_t>(i) * M_ + k]; }
        const T &operator()(int i, int k) const { return cells_[static_cast<std::size_t>(i) * M_ + k]; }

        auto begin() { return cells_.begin(); }
        auto end() { return cells_.end(); }
        auto begin() const { return cells_.begin(); }
        auto end() const { return cells_.end(); }

        bool operator==(const LinkGrid &) const = default;

    private:
        int M_ = 0;
        std::vector<T> cells_;
    };
}
