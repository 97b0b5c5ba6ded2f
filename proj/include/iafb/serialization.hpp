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
#include "iafb/evaluation.hpp"
#include "iafb/feedback.hpp"
#include "iafb/network_model.hpp"

#include <json.hpp>

// JSON forms of the simulator's data. Complex numbers are [re, im] pairs and
// vectors/matrices are nested arrays (matrices column by column). The *_from_json
// readers throw ParameterError on malformed documents.
namespace iafb
{
    nlohmann::json complex_to_json(cplx z);
    cplx complex_from_json(const nlohmann::json &j);
    nlohmann::json vector_to_json(const CVector &v);
    CVector vector_from_json(const nlohmann::json &j);
    nlohmann::json matrix_to_json(const CMatrix &A); // list of columns
    CMatrix matrix_from_json(const nlohmann::json &j, Eigen::Index rows);

    nlohmann::json realization_to_json(const NetworkRealization &real);
    NetworkRealization realization_from_json(const nlohmann::json &j);

    nlohmann::json report_to_json(const FeedbackReport &report);
    FeedbackReport report_from_json(const nlohmann::json &j);

    nlohmann::json directions_to_json(const DirectionSets &dirs);
    DirectionSets directions_from_json(const nlohmann::json &j);

    nlohmann::json trial_to_json(const TrialResult &trial);
}
