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

#include "iafb/evaluation.hpp"
#include "iafb/network_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iafb
{
    namespace exit_code
    {
        inline constexpr int ok = 0;
        inline constexpr int config = 1;
        inline constexpr int unsupported = 2;
        inline constexpr int runtime = 3;
        inline constexpr int validation = 4;
    }

    // Environment variable that overrides the configured codebook cache directory.
    inline constexpr const char *codebook_dir_env = "IAFB_CODEBOOK_DIR";

    struct ExperimentConfig
    {
        NetworkParams params;
        FeedbackMode mode = FeedbackMode::limited();
        std::vector<double> P_grid; // linear, strictly increasing
        int trials = 50;
        std::filesystem::path output = "iafb_out";
        // Empty means <output>/codebooks.
        std::filesystem::path codebook_dir;

        void validate() const;
        std::filesystem::path resolved_codebook_dir() const;
    };

    // Recognized keys: M, L, t, P or P_dB, noise_power, seed, mode, P_grid or
    // P_grid_dB (a list, or {start, stop, step} in dB), trials, output, codebook_dir.
    // Unknown keys are rejected. Throws ParameterError.
    ExperimentConfig config_from_json(const nlohmann::json &doc);
    ExperimentConfig load_config(const std::filesystem::path &path);

    // Defaults used when no config file is given: M = 3, t = 1, L = 2 and
    // P from 10 to 70 dB in 10 dB steps.
    ExperimentConfig default_config();

    enum class Command
    {
        trial,
        sweep,
        validate
    };

    // Runs one subcommand against a parsed config and returns its exit code.
    // Errors are reported on err and mapped onto exit_code values.
    int run_experiment(const ExperimentConfig &config, Command command, std::ostream &out, std::ostream &err);

    // Designs one codebook, prints its statistics and stores it under dir.
    int run_codebook(int L, int bits, std::uint64_t seed, int samples, const std::filesystem::path &dir,
                     std::ostream &out, std::ostream &err);

    // Full command line: codebook, trial, sweep and validate subcommands.
    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

    // One row per trial: P,N_d,mode,R_sum,I_total,bound_total,min_direct_gain,max_quant_error,resamples
    void write_results_csv(const SweepResult &sweep, std::ostream &os);
    // One row: mode,points,trials_per_point,slope,dof_target,interference_slope
    void write_summary_csv(const SweepResult &sweep, const FeedbackMode &mode, std::ostream &os);
    // One row per grid point: P,P_dB,N_d,mean_R_sum,mean_I_total,mean_bound_total,resamples
    void write_grid_csv(const SweepResult &sweep, std::ostream &os);
}
