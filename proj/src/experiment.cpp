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

#include "iafb/experiment.hpp"

#include "iafb/alignment.hpp"
#include "iafb/codebook.hpp"
#include "iafb/errors.hpp"
#include "iafb/feedback.hpp"
#include "iafb/serialization.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

using nlohmann::json;

namespace iafb
{
    namespace
    {
        std::string num(double x)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return buf;
        }

        std::string fixed(double x, int digits)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", digits, x);
            return buf;
        }

        std::string sci(double x)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3e", x);
            return buf;
        }

        double from_db(double db) { return std::pow(10.0, db / 10.0); }

        double number(const json &j, const char *key)
        {
            if (!j.is_number())
                throw ParameterError(std::string("config: '") + key + "' must be a number");
            return j.get<double>();
        }

        int integer(const json &j, const char *key)
        {
            if (!j.is_number_integer())
                throw ParameterError(std::string("config: '") + key + "' must be an integer");
            return j.get<int>();
        }

        std::vector<double> db_grid(const json &j)
        {
            std::vector<double> out;
            if (j.is_array())
            {
                for (const auto &x : j)
                    out.push_back(from_db(number(x, "P_grid_dB")));
                return out;
            }
            if (!j.is_object())
                throw ParameterError("config: 'P_grid_dB' must be a list or {start, stop, step}");
            for (const auto &[key, value] : j.items())
                if (key != "start" && key != "stop" && key != "step")
                    throw ParameterError("config: unknown key 'P_grid_dB." + key + "'");
            if (!j.contains("start") || !j.contains("stop") || !j.contains("step"))
                throw ParameterError("config: 'P_grid_dB' range needs start, stop and step");
            const double start = number(j["start"], "start");
            const double stop = number(j["stop"], "stop");
            const double step = number(j["step"], "step");
            if (!(step > 0.0) || !(stop >= start))
                throw ParameterError("config: 'P_grid_dB' range needs step > 0 and stop >= start");
            const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
            if (count > 10000)
                throw ParameterError("config: 'P_grid_dB' range has too many points");
            for (long j2 = 0; j2 < count; ++j2)
                out.push_back(from_db(start + step * static_cast<double>(j2)));
            return out;
        }

        int error_code(const std::exception &e)
        {
            if (dynamic_cast<const UnsupportedError *>(&e))
                return exit_code::unsupported;
            if (dynamic_cast<const std::invalid_argument *>(&e) || dynamic_cast<const json::exception *>(&e))
                return exit_code::config;
            return exit_code::runtime;
        }

        template <typename Fn>
        int guarded(std::ostream &err, Fn &&fn)
        {
            try
            {
                return fn();
            }
            catch (const std::exception &e)
            {
                const int code = error_code(e);
                err << "iafb: " << e.what() << "\n";
                return code;
            }
        }

        void write_file(const std::filesystem::path &path, const std::function<void(std::ostream &)> &fill)
        {
            std::ofstream os(path, std::ios::binary);
            if (!os)
                throw std::runtime_error("cannot open " + path.string() + " for writing");
            fill(os);
            if (!os)
                throw std::runtime_error("failed writing " + path.string());
        }

        // ---- validation suite ----

        struct Check
        {
            std::string name;
            bool pass = false;
            std::string detail;
        };

        Check check_parseval(const ExperimentConfig &cfg)
        {
            double worst = 0.0;
            for (std::uint64_t s = 0; s < 20; ++s)
            {
                NetworkParams p = cfg.params;
                p.seed = trial_seed(cfg.params.seed, s);
                const NetworkRealization real = sample_network(p);
                for (int i = 0; i < real.M; ++i)
                    for (int k = 0; k < real.M; ++k)
                    {
                        const double e = real.channels(i, k).taps().squaredNorm();
                        worst = std::max(worst, std::abs(real.freq(i, k).squaredNorm() - e) / e);
                    }
            }
            return {"parseval", worst < 1e-12, "max relative error " + sci(worst)};
        }

        Check check_hadamard(const ExperimentConfig &cfg)
        {
            const int N = cfg.params.tones();
            std::mt19937_64 rng(cfg.params.seed);
            double worst = 0.0;
            for (int s = 0; s < 200; ++s)
            {
                const CVector u = haar_unit_vector(N, rng), v = haar_unit_vector(N, rng), h = haar_unit_vector(N, rng);
                const cplx lhs = h.dot(u.conjugate().cwiseProduct(v));
                const cplx rhs = u.dot(FrequencyMatrix(h).apply_adjoint(v));
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            return {"hadamard identity", worst < 1e-12, "max discrepancy " + sci(worst)};
        }

        Check check_packing(const ExperimentConfig &cfg, CodebookCache &cache)
        {
            bool pass = true;
            std::ostringstream detail;
            for (int N_d : {4, 6, 8, 10})
            {
                const auto cb = cache.get(cfg.params.L, N_d);
                const double cover = codebook_stats(*cb, 10000, cfg.params.seed).covering_estimate;
                const bool ok = cb->coherence() < std::cos(cb->delta()) + 1e-9 &&
                                static_cast<double>(cb->size()) <= packing_size_bound(cb->L(), cb->delta()) &&
                                cb->size() <= (std::size_t{1} << N_d) && cover <= 1.1 * target_sin_delta(cb->L(), N_d);
                pass = pass && ok;
                detail << " N_d=" << N_d << ":" << cb->size() << "/cover " << fixed(cover, 4);
            }
            return {"codebook packing and covering", pass, "sizes and covering" + detail.str()};
        }

        Check check_quantizer(const ExperimentConfig &cfg, CodebookCache &cache)
        {
            const auto cb = cache.get(cfg.params.L, 10);
            std::mt19937_64 rng(cfg.params.seed ^ 0x71u);
            int mismatches = 0;
            for (int s = 0; s < 2000; ++s)
            {
                const CVector w = haar_unit_vector(cb->L(), rng);
                std::size_t best = 0;
                double best_val = -1.0;
                for (std::size_t l = 0; l < cb->size(); ++l)
                    if (const double c = std::abs(cb->codeword(l).dot(w)); c > best_val)
                    {
                        best_val = c;
                        best = l;
                    }
                mismatches += quantize(w, *cb).index != best;
            }
            return {"quantizer matches exhaustive search", mismatches == 0,
                    std::to_string(mismatches) + " mismatches in 2000 vectors"};
        }

        std::vector<Check> check_perfect_alignment(const ExperimentConfig &cfg)
        {
            const IADimensions dims = ia_dimensions(cfg.params.M, cfg.params.t);
            double worst_residual = 0.0, worst_interference = 0.0, worst_containment = 0.0;
            int skipped = 0;
            for (std::uint64_t s = 0; s < 50; ++s)
            {
                NetworkParams p = cfg.params;
                p.seed = trial_seed(cfg.params.seed, s);
                const NetworkRealization real = sample_network(p);
                const LinkGrid<CVector> csi = perfect_csi(real);
                try
                {
                    const TxDirections tx = build_tx_directions(csi, dims);
                    worst_containment = std::max(worst_containment, tx.residuals.max());
                    const DirectionSets dirs = build_directions(csi, dims);
                    const auto &d = dirs.diagnostics;
                    worst_residual =
                        std::max(worst_residual, std::max(d.cross_residual, d.interference_residual) / d.min_direct_gain());
                    double hmax = 0.0;
                    for (const auto &h : real.freq)
                        hmax = std::max(hmax, h.squaredNorm());
                    const EffectiveIO io = effective_io(real, dirs.U, dirs.V, dims, p.P);
                    for (std::size_t i = 0; i < io.I1.size(); ++i)
                        for (std::size_t m = 0; m < io.I1[i].size(); ++m)
                            worst_interference =
                                std::max(worst_interference, (io.I1[i][m] + io.I2[i][m]) / (p.P / p.M * hmax));
                }
                catch (const DegenerateCsiError &)
                {
                    ++skipped;
                }
            }
            const std::string note = skipped ? " (" + std::to_string(skipped) + " degenerate draws skipped)" : "";
            return {{"perfect-CSI alignment residuals", worst_residual < 1e-9,
                     "max relative residual " + sci(worst_residual) + note},
                    {"perfect-CSI zero interference", worst_interference < 1e-9,
                     "max I / ((P/M) max |h|^2) " + sci(worst_interference)},
                    {"transmit span containment", worst_containment < 1e-10,
                     "max residual " + sci(worst_containment)}};
        }

        Check check_constant_bound(const ExperimentConfig &cfg, CodebookCache &cache)
        {
            int violations = 0, streams = 0;
            for (double P : {1e1, 1e2, 1e3, 1e4, 1e5})
                for (std::uint64_t s = 0; s < 20; ++s)
                {
                    NetworkParams p = cfg.params;
                    p.P = P;
                    p.seed = trial_seed(cfg.params.seed, s);
                    const TrialResult tr = run_trial(p, FeedbackMode::limited(), &cache);
                    violations += tr.violations(tr.realized_bound) + tr.violations(tr.intermediate_bound);
                    if (tr.constant_applies)
                        violations += tr.violations(tr.constant_bound);
                    for (const auto &row : tr.I1)
                        streams += static_cast<int>(row.size());
                }
            return {"limited-feedback constant interference bound", violations == 0,
                    std::to_string(violations) + " violations over " + std::to_string(streams) + " streams"};
        }

        int run_validate(const ExperimentConfig &cfg, std::ostream &out)
        {
            CodebookCache cache(cfg.params.seed, cfg.resolved_codebook_dir());
            ia_dimensions(cfg.params.M, cfg.params.t);
            if (cfg.params.M != 3)
                throw UnsupportedError("validate: direction construction is implemented for M = 3 only; general M is "
                                       "a non-goal");
            std::vector<Check> checks{check_parseval(cfg), check_hadamard(cfg), check_packing(cfg, cache),
                                      check_quantizer(cfg, cache)};
            for (auto &c : check_perfect_alignment(cfg))
                checks.push_back(std::move(c));
            checks.push_back(check_constant_bound(cfg, cache));

            bool all = true;
            for (const auto &c : checks)
            {
                out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
                all = all && c.pass;
            }
            out << (all ? "validation passed" : "validation FAILED") << "\n";
            return all ? exit_code::ok : exit_code::validation;
        }

        int run_sweep(const ExperimentConfig &cfg, std::ostream &out)
        {
            if (cfg.P_grid.empty())
                throw ParameterError("sweep: config has no P_grid");
            CodebookCache cache(cfg.params.seed, cfg.resolved_codebook_dir());
            const SweepResult sweep = dof_sweep(cfg.params, cfg.mode, cfg.P_grid, cfg.trials, cache);

            std::filesystem::create_directories(cfg.output);
            write_file(cfg.output / "results.csv", [&](std::ostream &os) { write_results_csv(sweep, os); });
            write_file(cfg.output / "summary.csv", [&](std::ostream &os) { write_summary_csv(sweep, cfg.mode, os); });
            write_file(cfg.output / "grid.csv", [&](std::ostream &os) { write_grid_csv(sweep, os); });

            std::ostringstream text;
            text << "mode " << cfg.mode.name() << ", M=" << cfg.params.M << " L=" << cfg.params.L
                 << " t=" << cfg.params.t << ", " << cfg.trials << " trials per point, seed " << cfg.params.seed
                 << "\n";
            text << "     P_dB  N_d   mean_R_sum   mean_I_total  mean_bound_total\n";
            for (const auto &pt : sweep.grid)
            {
                char line[160];
                std::snprintf(line, sizeof line, "%9.2f  %3s  %11.5f  %13.5e  %16.5e\n", 10.0 * std::log10(pt.P),
                              pt.N_d >= 0 ? std::to_string(pt.N_d).c_str() : "-", pt.mean_sum_rate,
                              pt.mean_interference, pt.mean_constant_bound);
                text << line;
            }
            if (sweep.grid.size() < 4 || cfg.trials < 20 || cfg.P_grid.back() / cfg.P_grid.front() < 1e4)
                text << "note: the slope is only indicative below 4 decades of P or 20 trials per point\n";
            text << "interference log-log slope " << fixed(sweep.interference_slope, 4) << "\n";
            text << "slope " << fixed(sweep.slope, 4) << " dof_target " << fixed(sweep.dof_target, 4) << "\n";
            write_file(cfg.output / "summary.txt", [&](std::ostream &os) { os << text.str(); });
            out << text.str();
            return exit_code::ok;
        }

        int run_single_trial(const ExperimentConfig &cfg, std::ostream &out)
        {
            CodebookCache cache(cfg.params.seed, cfg.resolved_codebook_dir());
            json doc = trial_to_json(run_trial(cfg.params, cfg.mode, &cache));
            doc["seed"] = cfg.params.seed;
            out << doc.dump(2) << "\n";
            return exit_code::ok;
        }
    }

    void ExperimentConfig::validate() const
    {
        params.validate();
        if (trials < 1)
            throw ParameterError("config: trials must be at least 1");
        for (std::size_t j = 0; j < P_grid.size(); ++j)
            if (!(P_grid[j] > 0.0) || !std::isfinite(P_grid[j]) || (j > 0 && !(P_grid[j] > P_grid[j - 1])))
                throw ParameterError("config: P_grid must be positive, finite and strictly increasing");
        if (mode.kind == FeedbackKind::fixed && (mode.fixed_bits < 0 || mode.fixed_bits > 40))
            throw ParameterError("config: fixed feedback bits must lie in [0, 40]");
    }

    std::filesystem::path ExperimentConfig::resolved_codebook_dir() const
    {
        if (const char *env = std::getenv(codebook_dir_env); env && *env)
            return env;
        return codebook_dir.empty() ? output / "codebooks" : codebook_dir;
    }

    ExperimentConfig default_config()
    {
        ExperimentConfig cfg;
        for (int db = 10; db <= 70; db += 10)
            cfg.P_grid.push_back(from_db(db));
        return cfg;
    }

    ExperimentConfig config_from_json(const json &doc)
    {
        if (!doc.is_object())
            throw ParameterError("config: top level must be an object");
        static const std::set<std::string> known{"M",      "L",         "t",      "P",      "P_dB",
                                                 "noise_power", "seed",  "mode",   "P_grid", "P_grid_dB",
                                                 "trials", "output",    "codebook_dir"};
        for (const auto &[key, value] : doc.items())
            if (!known.count(key))
                throw ParameterError("config: unknown key '" + key + "'");
        if (doc.contains("P") && doc.contains("P_dB"))
            throw ParameterError("config: give P or P_dB, not both");
        if (doc.contains("P_grid") && doc.contains("P_grid_dB"))
            throw ParameterError("config: give P_grid or P_grid_dB, not both");

        ExperimentConfig cfg = default_config();
        auto &p = cfg.params;
        if (doc.contains("M"))
            p.M = integer(doc["M"], "M");
        if (doc.contains("L"))
            p.L = integer(doc["L"], "L");
        if (doc.contains("t"))
            p.t = integer(doc["t"], "t");
        if (doc.contains("P"))
            p.P = number(doc["P"], "P");
        if (doc.contains("P_dB"))
            p.P = from_db(number(doc["P_dB"], "P_dB"));
        if (doc.contains("noise_power"))
            p.noise_power = number(doc["noise_power"], "noise_power");
        if (doc.contains("seed"))
        {
            if (!doc["seed"].is_number_unsigned())
                throw ParameterError("config: 'seed' must be a non-negative integer");
            p.seed = doc["seed"].get<std::uint64_t>();
        }
        if (doc.contains("mode"))
        {
            if (!doc["mode"].is_string())
                throw ParameterError("config: 'mode' must be a string");
            cfg.mode = FeedbackMode::parse(doc["mode"].get<std::string>());
        }
        if (doc.contains("P_grid"))
        {
            if (!doc["P_grid"].is_array())
                throw ParameterError("config: 'P_grid' must be a list");
            cfg.P_grid.clear();
            for (const auto &x : doc["P_grid"])
                cfg.P_grid.push_back(number(x, "P_grid"));
        }
        if (doc.contains("P_grid_dB"))
            cfg.P_grid = db_grid(doc["P_grid_dB"]);
        if (doc.contains("trials"))
            cfg.trials = integer(doc["trials"], "trials");
        if (doc.contains("output"))
        {
            if (!doc["output"].is_string())
                throw ParameterError("config: 'output' must be a string");
            cfg.output = doc["output"].get<std::string>();
        }
        if (doc.contains("codebook_dir"))
        {
            if (!doc["codebook_dir"].is_string())
                throw ParameterError("config: 'codebook_dir' must be a string");
            cfg.codebook_dir = doc["codebook_dir"].get<std::string>();
        }
        return cfg;
    }

    ExperimentConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream is(path);
        if (!is)
            throw ParameterError("config: cannot open " + path.string());
        json doc;
        try
        {
            is >> doc;
        }
        catch (const json::parse_error &e)
        {
            throw ParameterError("config: " + path.string() + " is not valid JSON: " + e.what());
        }
        return config_from_json(doc);
    }

    void write_results_csv(const SweepResult &sweep, std::ostream &os)
    {
        os << "P,N_d,mode,R_sum,I_total,bound_total,min_direct_gain,max_quant_error,resamples\n";
        for (const auto &tr : sweep.trials)
            os << num(tr.P) << ',' << (tr.N_d >= 0 ? std::to_string(tr.N_d) : "") << ',' << tr.mode.name() << ','
               << num(tr.sum_rate) << ',' << num(tr.total_interference()) << ',' << num(tr.total_constant_bound())
               << ',' << num(tr.min_direct_gain) << ',' << num(tr.quantization_max_error) << ',' << tr.resamples
               << '\n';
    }

    void write_summary_csv(const SweepResult &sweep, const FeedbackMode &mode, std::ostream &os)
    {
        const std::size_t per = sweep.grid.empty() ? 0 : sweep.trials.size() / sweep.grid.size();
        os << "mode,points,trials_per_point,slope,dof_target,interference_slope\n";
        os << mode.name() << ',' << sweep.grid.size() << ',' << per << ',' << num(sweep.slope) << ','
           << num(sweep.dof_target) << ',' << num(sweep.interference_slope) << '\n';
    }

    void write_grid_csv(const SweepResult &sweep, std::ostream &os)
    {
        os << "P,P_dB,N_d,mean_R_sum,mean_I_total,mean_bound_total,resamples\n";
        for (const auto &pt : sweep.grid)
            os << num(pt.P) << ',' << num(10.0 * std::log10(pt.P)) << ','
               << (pt.N_d >= 0 ? std::to_string(pt.N_d) : "") << ',' << num(pt.mean_sum_rate) << ','
               << num(pt.mean_interference) << ',' << num(pt.mean_constant_bound) << ',' << pt.resamples << '\n';
    }

    int run_experiment(const ExperimentConfig &config, Command command, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            config.validate();
            switch (command)
            {
            case Command::trial:
                return run_single_trial(config, out);
            case Command::sweep:
                return run_sweep(config, out);
            case Command::validate:
                return run_validate(config, out);
            }
            return exit_code::runtime;
        });
    }

    int run_codebook(int L, int bits, std::uint64_t seed, int samples, const std::filesystem::path &dir,
                     std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            if (L < 1 || bits < 0 || bits > 40 || samples < 1)
                throw ParameterError("codebook: need L >= 1, 0 <= bits <= 40 and samples >= 1");
            const Codebook cb = design_codebook(L, bits, seed);
            const CodebookStats stats = codebook_stats(cb, samples, seed);
            std::filesystem::create_directories(dir);
            const auto path = dir / codebook_file_name(L, bits, seed);
            save_codebook(cb, path);
            out << "L " << L << " design bits " << bits << " seed " << seed << "\n"
                << "codewords " << cb.size() << " (bits " << cb.bits() << ", size bound "
                << num(packing_size_bound(L, cb.delta())) << ")\n"
                << "delta " << fixed(cb.delta(), 6) << " sin(delta) " << fixed(std::sin(cb.delta()), 6) << "\n"
                << "coherence " << fixed(stats.coherence, 6) << " < cos(delta) " << fixed(std::cos(cb.delta()), 6)
                << "\n"
                << "covering estimate " << fixed(stats.covering_estimate, 6) << " over " << samples << " samples\n"
                << "written to " << path.string() << "\n";
            return exit_code::ok;
        });
    }

    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Interference alignment with limited feedback: link-level simulator", "iafb"};
        app.require_subcommand(1);

        int cb_L = 2, cb_bits = 8, cb_samples = 100000;
        std::uint64_t cb_seed = 1;
        std::string cb_out;
        auto *codebook = app.add_subcommand("codebook", "design a codebook and report its statistics");
        codebook->add_option("--L", cb_L, "vector dimension")->required();
        codebook->add_option("--bits", cb_bits, "design bits N_d")->required();
        codebook->add_option("--seed", cb_seed, "construction seed");
        codebook->add_option("--samples", cb_samples, "Monte Carlo samples for the covering estimate");
        codebook->add_option("--out", cb_out, "output directory (default: $IAFB_CODEBOOK_DIR or .)");

        struct RunFlags
        {
            std::string config;
            std::optional<std::uint64_t> seed;
            std::optional<std::string> output;
            std::optional<int> trials;
        };
        RunFlags flags;
        auto add_run = [&](const char *name, const char *help, bool config_required) {
            auto *sub = app.add_subcommand(name, help);
            auto *opt = sub->add_option("--config", flags.config, "JSON experiment config");
            if (config_required)
                opt->required();
            sub->add_option("--seed", flags.seed, "override the config seed");
            sub->add_option("--out", flags.output, "override the output directory");
            sub->add_option("--trials", flags.trials, "override trials per point");
            return sub;
        };
        auto *trial = add_run("trial", "run one trial and print it as JSON", true);
        auto *sweep = add_run("sweep", "sweep P and fit the rate slope", true);
        auto *validate = add_run("validate", "run the invariant suite", false);

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? exit_code::ok : exit_code::config;
        }

        if (codebook->parsed())
        {
            std::filesystem::path dir = cb_out;
            if (dir.empty())
            {
                const char *env = std::getenv(codebook_dir_env);
                dir = env && *env ? env : ".";
            }
            return run_codebook(cb_L, cb_bits, cb_seed, cb_samples, dir, out, err);
        }

        ExperimentConfig cfg;
        const int parsed = guarded(err, [&] {
            cfg = flags.config.empty() ? default_config() : load_config(flags.config);
            if (flags.seed)
                cfg.params.seed = *flags.seed;
            if (flags.output)
                cfg.output = *flags.output;
            if (flags.trials)
                cfg.trials = *flags.trials;
            return exit_code::ok;
        });
        if (parsed != exit_code::ok)
            return parsed;

        if (trial->parsed())
            return run_experiment(cfg, Command::trial, out, err);
        if (sweep->parsed())
            return run_experiment(cfg, Command::sweep, out, err);
        (void)validate;
        return run_experiment(cfg, Command::validate, out, err);
    }
}
