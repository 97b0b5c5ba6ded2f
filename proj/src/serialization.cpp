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

#include "iafb/serialization.hpp"

#include "iafb/errors.hpp"

#include <cmath>
#include <string>

using nlohmann::json;

namespace iafb
{
    namespace
    {
        const json &field(const json &j, const char *name)
        {
            if (!j.is_object() || !j.contains(name))
                throw ParameterError(std::string("json: missing field '") + name + "'");
            return j.at(name);
        }

        int int_field(const json &j, const char *name)
        {
            const json &v = field(j, name);
            if (!v.is_number_integer())
                throw ParameterError(std::string("json: field '") + name + "' must be an integer");
            return v.get<int>();
        }

        template <typename T, typename Fn>
        LinkGrid<T> grid_from_json(const json &j, int M, Fn &&convert)
        {
            if (!j.is_array() || static_cast<int>(j.size()) != M)
                throw ParameterError("json: link grid must have M rows");
            LinkGrid<T> grid(M);
            for (int i = 0; i < M; ++i)
            {
                const json &row = j[static_cast<std::size_t>(i)];
                if (!row.is_array() || static_cast<int>(row.size()) != M)
                    throw ParameterError("json: link grid must have M columns");
                for (int k = 0; k < M; ++k)
                    grid(i, k) = convert(row[static_cast<std::size_t>(k)]);
            }
            return grid;
        }

        template <typename T, typename Fn>
        json grid_to_json(const LinkGrid<T> &grid, Fn &&convert)
        {
            json rows = json::array();
            for (int i = 0; i < grid.size(); ++i)
            {
                json row = json::array();
                for (int k = 0; k < grid.size(); ++k)
                    row.push_back(convert(grid(i, k)));
                rows.push_back(std::move(row));
            }
            return rows;
        }

        json matrices_to_json(const std::vector<CMatrix> &list)
        {
            json out = json::array();
            for (const auto &A : list)
                out.push_back(json{{"rows", A.rows()}, {"columns", matrix_to_json(A)}});
            return out;
        }

        std::vector<CMatrix> matrices_from_json(const json &j)
        {
            if (!j.is_array())
                throw ParameterError("json: expected a list of matrices");
            std::vector<CMatrix> out;
            for (const auto &entry : j)
                out.push_back(matrix_from_json(field(entry, "columns"), int_field(entry, "rows")));
            return out;
        }
    }

    json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

    cplx complex_from_json(const json &j)
    {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
            throw ParameterError("json: complex value must be [re, im]");
        return {j[0].get<double>(), j[1].get<double>()};
    }

    json vector_to_json(const CVector &v)
    {
        json out = json::array();
        for (Eigen::Index r = 0; r < v.size(); ++r)
            out.push_back(complex_to_json(v(r)));
        return out;
    }

    CVector vector_from_json(const json &j)
    {
        if (!j.is_array())
            throw ParameterError("json: complex vector must be an array");
        CVector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t r = 0; r < j.size(); ++r)
            v(static_cast<Eigen::Index>(r)) = complex_from_json(j[r]);
        return v;
    }

    json matrix_to_json(const CMatrix &A)
    {
        json out = json::array();
        for (Eigen::Index c = 0; c < A.cols(); ++c)
            out.push_back(vector_to_json(A.col(c)));
        return out;
    }

    CMatrix matrix_from_json(const json &j, Eigen::Index rows)
    {
        if (!j.is_array())
            throw ParameterError("json: matrix must be a list of columns");
        CMatrix A(rows, static_cast<Eigen::Index>(j.size()));
        for (std::size_t c = 0; c < j.size(); ++c)
        {
            const CVector col = vector_from_json(j[c]);
            if (col.size() != rows)
                throw ParameterError("json: matrix column has the wrong length");
            A.col(static_cast<Eigen::Index>(c)) = col;
        }
        return A;
    }

    json realization_to_json(const NetworkRealization &real)
    {
        return json{{"M", real.M},
                    {"L", real.L},
                    {"N", real.N},
                    {"taps", grid_to_json(real.channels, [](const ChannelImpulseResponse &c) { return vector_to_json(c.taps()); })},
                    {"freq", grid_to_json(real.freq, [](const CVector &v) { return vector_to_json(v); })}};
    }

    NetworkRealization realization_from_json(const json &j)
    {
        NetworkRealization real;
        real.M = int_field(j, "M");
        real.L = int_field(j, "L");
        real.N = int_field(j, "N");
        if (real.M < 1 || real.L < 1 || real.N < real.L)
            throw ParameterError("json: realization dimensions are inconsistent");
        real.channels = grid_from_json<ChannelImpulseResponse>(field(j, "taps"), real.M, [&](const json &e) {
            CVector taps = vector_from_json(e);
            if (taps.size() != real.L)
                throw ParameterError("json: impulse response must have L taps");
            return ChannelImpulseResponse(std::move(taps));
        });
        real.freq = grid_from_json<CVector>(field(j, "freq"), real.M, [&](const json &e) {
            CVector v = vector_from_json(e);
            if (v.size() != real.N)
                throw ParameterError("json: frequency response must have N tones");
            return v;
        });
        return real;
    }

    json report_to_json(const FeedbackReport &report)
    {
        return json{{"N_d", report.N_d}, {"indices", grid_to_json(report.indices, [](std::size_t x) { return x; })}};
    }

    FeedbackReport report_from_json(const json &j)
    {
        FeedbackReport report;
        report.N_d = int_field(j, "N_d");
        const json &rows = field(j, "indices");
        if (!rows.is_array() || rows.empty())
            throw ParameterError("json: feedback indices must be a non-empty grid");
        report.indices = grid_from_json<std::size_t>(rows, static_cast<int>(rows.size()), [](const json &e) {
            if (!e.is_number_unsigned())
                throw ParameterError("json: feedback index must be a non-negative integer");
            return e.get<std::size_t>();
        });
        return report;
    }

    json directions_to_json(const DirectionSets &dirs)
    {
        const auto &d = dirs.diagnostics;
        return json{{"V", matrices_to_json(dirs.V)},
                    {"U", matrices_to_json(dirs.U)},
                    {"diagnostics",
                     {{"direct_gains", d.direct_gains},
                      {"cross_residual", d.cross_residual},
                      {"interference_residual", d.interference_residual},
                      {"min_singular_value", d.min_singular_value},
                      {"max_condition_number", d.max_condition_number},
                      {"hadamard_discrepancy", d.hadamard_discrepancy}}}};
    }

    DirectionSets directions_from_json(const json &j)
    {
        DirectionSets dirs;
        dirs.V = matrices_from_json(field(j, "V"));
        dirs.U = matrices_from_json(field(j, "U"));
        if (j.contains("diagnostics"))
        {
            const json &d = j.at("diagnostics");
            auto &out = dirs.diagnostics;
            try
            {
                out.direct_gains = field(d, "direct_gains").get<std::vector<std::vector<double>>>();
                out.cross_residual = field(d, "cross_residual").get<double>();
                out.interference_residual = field(d, "interference_residual").get<double>();
                out.min_singular_value = field(d, "min_singular_value").get<double>();
                out.max_condition_number = field(d, "max_condition_number").get<double>();
                out.hadamard_discrepancy = field(d, "hadamard_discrepancy").get<double>();
            }
            catch (const json::exception &e)
            {
                throw ParameterError(std::string("json: bad diagnostics: ") + e.what());
            }
        }
        return dirs;
    }

    json trial_to_json(const TrialResult &trial)
    {
        json out{{"P", trial.P},
                 {"mode", trial.mode.name()},
                 {"rates", trial.rates},
                 {"sum_rate", trial.sum_rate},
                 {"I1", trial.I1},
                 {"I2", trial.I2},
                 {"I_total", trial.total_interference()},
                 {"direct_gains", trial.direct_gains},
                 {"constant_bound", trial.constant_bound},
                 {"bound_total", trial.total_constant_bound()},
                 {"min_direct_gain", trial.min_direct_gain},
                 {"alignment_residual", trial.alignment_residual},
                 {"resamples", trial.resamples}};
        if (trial.N_d >= 0)
        {
            out["N_d"] = trial.N_d;
            out["intermediate_bound"] = trial.intermediate_bound;
            out["realized_bound"] = trial.realized_bound;
            out["constant_applies"] = trial.constant_applies;
            out["max_quant_error"] = trial.quantization_max_error;
        }
        return out;
    }
}
