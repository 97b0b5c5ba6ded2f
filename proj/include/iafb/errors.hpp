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

#include <stdexcept>
#include <string>

namespace iafb
{
    // Invalid user-supplied parameters (counts, powers, seeds, grids).
    class ParameterError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Vector or matrix sizes that do not match.
    class DimensionError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // A channel impulse response with zero norm.
    class DegenerateChannelError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Channel state for which the alignment construction is rank deficient or ill-conditioned.
    class DegenerateCsiError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A feedback report that references codewords the codebook does not have.
    class CorruptFeedbackError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Requests outside what the library implements (e.g. precoders for M > 3).
    class UnsupportedError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };
}
