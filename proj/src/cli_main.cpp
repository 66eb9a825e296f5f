#include "chelsea/cli.hpp"

#include "chelsea/calibration.hpp"
#include "chelsea/config.hpp"
#include "chelsea/errors.hpp"
#include "chelsea/matching.hpp"
#include "chelsea/metrics.hpp"
#include "chelsea/pipeline.hpp"
#include "chelsea/synthetic.hpp"
#include "chelsea/tensor_io.hpp"
#include "chelsea/theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace chelsea {
namespace {

namespace fs = std::filesystem;

std::string head_file(Index head, const char* part) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "head%03lld_%s.ckvt", static_cast<long long>(head), part);
    return buf;
}

std::string format_real(Real v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open output file: " + path.string());
    }
    return os;
}

int cmd_generate(const SyntheticSpec& spec, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto heads = generate_synthetic(spec);
    const auto queries = synthetic_queries(spec);
    for (Index h = 0; h < spec.heads; ++h) {
        const auto& states = heads[static_cast<std::size_t>(h)];
        save_tensor(out_dir / head_file(h, "K"), states.keys);
        save_tensor(out_dir / head_file(h, "V"), states.values);
        save_tensor(out_dir / head_file(h, "Q"), queries[static_cast<std::size_t>(h)]);
    }
    std::cout << "wrote " << spec.heads << " head(s) of " << spec.n << "x" << spec.d
              << " tensors to " << out_dir.string() << "\n";
    return kExitOk;
}

std::vector<HeadTensors> load_run_tensors(const fs::path& dir) {
    std::vector<HeadTensors> heads;
    for (Index h = 0;; ++h) {
        const fs::path k_path = dir / head_file(h, "K");
        if (!fs::exists(k_path)) {
            break;
        }
        HeadTensors t;
        t.keys = load_tensor(k_path);
        t.values = load_tensor(dir / head_file(h, "V"));
        t.queries = load_tensor(dir / head_file(h, "Q"));
        heads.push_back(std::move(t));
    }
    if (heads.empty()) {
        throw TensorIoError(TensorIoError::Kind::open_failed,
                            "no head000_K.ckvt found in " + dir.string());
    }
    return heads;
}

void write_metrics_csv(std::ostream& os) {
    const MetricsSnapshot snap = metrics().snapshot();
    os << "counter,value\n";
    os << "similarity_evals," << snap.similarity_evals << "\n";
    os << "csm_passes," << snap.csm_passes << "\n";
    os << "compressions," << snap.compressions << "\n";
    os << "prune_clamps," << snap.prune_clamps << "\n";
}

int cmd_run(const fs::path& config_path, const fs::path& tensor_dir,
            const fs::path& transcript_path, const fs::path& metrics_path) {
    const ChelseaConfig cfg = load_config(config_path);
    const auto heads = load_run_tensors(tensor_dir);
    const Index rows = heads[0].keys.rows();
    if (rows <= cfg.max_decode) {
        throw ConfigError("run: tensors have " + std::to_string(rows) +
                          " rows, need more than max_decode = " + std::to_string(cfg.max_decode));
    }
    const Index prompt_len = rows - cfg.max_decode;

    metrics().reset();
    const RunResult result = run_pipeline(heads, prompt_len, cfg);

    auto transcript = open_out(transcript_path);
    write_transcript_csv(transcript, result);
    if (!metrics_path.empty()) {
        auto mos = open_out(metrics_path);
        write_metrics_csv(mos);
    }

    Real l2_sum = 0.0;
    Index l2_count = 0;
    Index peak = 0;
    for (const auto& rec : result.records) {
        peak = std::max(peak, rec.cache_len);
        if (rec.step > 0) {
            l2_sum += rec.l2_error;
            ++l2_count;
        }
    }
    std::cout << "heads=" << result.heads.size() << " prompt_len=" << prompt_len
              << " decode_steps=" << cfg.max_decode << " compressions="
              << result.compressions.size() << " peak_s=" << peak << " mean_decode_l2="
              << format_real(l2_count > 0 ? l2_sum / static_cast<Real>(l2_count) : 0.0) << "\n";
    return kExitOk;
}

int cmd_calibrate(const fs::path& tensor_dir, Index chunk, Real threshold, Real ratio,
                  const fs::path& out_path) {
    // Any "headNNN*_K.ckvt" file counts as one key sample for head NNN.
    std::map<Index, std::vector<fs::path>> samples;
    for (const auto& entry : fs::directory_iterator(tensor_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("head", 0) != 0 || name.size() < 11 ||
            name.substr(name.size() - 7) != "_K.ckvt") {
            continue;
        }
        std::size_t pos = 4;
        Index head = 0;
        bool has_digit = false;
        while (pos < name.size() && name[pos] >= '0' && name[pos] <= '9') {
            head = head * 10 + (name[pos] - '0');
            ++pos;
            has_digit = true;
        }
        if (has_digit) {
            samples[head].push_back(entry.path());
        }
    }
    if (samples.empty()) {
        throw TensorIoError(TensorIoError::Kind::open_failed,
                            "no head key tensors found in " + tensor_dir.string());
    }

    std::vector<HeadProfile> profiles;
    for (auto& [head, paths] : samples) {
        std::sort(paths.begin(), paths.end());
        std::vector<Matrix> key_samples;
        key_samples.reserve(paths.size());
        for (const auto& p : paths) {
            key_samples.push_back(load_tensor(p));
        }
        HeadProfile profile = profile_head(key_samples, chunk, threshold);
        profile.head_index = head;
        profiles.push_back(std::move(profile));
    }
    const std::vector<Index> outliers = select_outliers(profiles, ratio);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file = open_out(out_path);
        os = &file;
    }
    *os << "head_index,unmatched_proportion,sample_count,variance\n";
    for (const auto& p : profiles) {
        Real var = 0.0;
        for (Real sp : p.sample_proportions) {
            var += (sp - p.unmatched_proportion) * (sp - p.unmatched_proportion);
        }
        var /= static_cast<Real>(p.sample_count);
        *os << p.head_index << ',' << format_real(p.unmatched_proportion) << ','
            << p.sample_count << ',' << format_real(var) << "\n";
    }
    *os << "# outliers:";
    for (Index h : outliers) {
        *os << ' ' << h;
    }
    *os << "\n";
    return kExitOk;
}

int cmd_verify_theorem(Index n, Index trials, std::uint64_t seed) {
    using theory::random_valid_score;
    using theory::verify_theorem;

    Index failures = 0;
    std::printf("%-8s %-20s %-22s %-22s %s\n", "trial", "seed", "best", "alternating", "result");
    for (Index t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        const auto f = random_valid_score(n, trial_seed);
        const auto report = verify_theorem(n, f);
        if (!report.holds) {
            ++failures;
        }
        std::printf("%-8lld %-20llu %-22.15g %-22.15g %s\n", static_cast<long long>(t),
                    static_cast<unsigned long long>(trial_seed), report.best_value,
                    report.alternating_value, report.holds ? "PASS" : "FAIL");
    }
    std::printf("%lld/%lld trials passed (n = %lld)\n", static_cast<long long>(trials - failures),
                static_cast<long long>(trials), static_cast<long long>(n));
    return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_profile(const fs::path& keys_path, const fs::path& tensor_dir, Index window,
                Index sample_count, std::uint64_t seed, const fs::path& out_path) {
    std::vector<Matrix> key_mats;
    if (!keys_path.empty()) {
        key_mats.push_back(load_tensor(keys_path));
    } else {
        for (Index h = 0;; ++h) {
            const fs::path p = tensor_dir / head_file(h, "K");
            if (!fs::exists(p)) {
                break;
            }
            key_mats.push_back(load_tensor(p));
        }
        if (key_mats.empty()) {
            throw TensorIoError(TensorIoError::Kind::open_failed,
                                "no head key tensors found in " + tensor_dir.string());
        }
    }

    std::vector<Real> mean(static_cast<std::size_t>(window), 0.0);
    for (std::size_t i = 0; i < key_mats.size(); ++i) {
        const ProfileCurve curve = similarity_distance_profile(
            key_mats[i], window, sample_count, seed + static_cast<std::uint64_t>(i));
        for (std::size_t k = 0; k < mean.size(); ++k) {
            mean[k] += curve.mean_similarity[k];
        }
    }
    for (auto& v : mean) {
        v /= static_cast<Real>(key_mats.size());
    }

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file = open_out(out_path);
        os = &file;
    }
    *os << "distance,mean_similarity\n";
    for (std::size_t k = 0; k < mean.size(); ++k) {
        *os << (k + 1) << ',' << format_real(mean[k]) << "\n";
    }
    return kExitOk;
}

Degrees load_degrees(const fs::path& path, Index expect_rows) {
    const Matrix m = load_tensor(path);
    if ((m.rows() != 1 && m.cols() != 1) || m.size() != expect_rows) {
        throw TensorIoError(TensorIoError::Kind::size_mismatch,
                            "degree tensor must be 1 x " + std::to_string(expect_rows));
    }
    Degrees d(expect_rows);
    for (Index i = 0; i < m.size(); ++i) {
        const Real v = m(i / m.cols(), i % m.cols());
        const Real rounded = std::round(v);
        if (std::abs(v - rounded) > 1e-6 || rounded < 1.0) {
            throw TensorIoError(TensorIoError::Kind::bad_payload,
                                "degree entries must be integers >= 1");
        }
        d(i) = static_cast<std::int64_t>(rounded);
    }
    return d;
}

int cmd_compress_once(const fs::path& keys_path, const fs::path& values_path,
                      const fs::path& degrees_path, const fs::path& config_path,
                      const std::string& out_prefix) {
    const ChelseaConfig cfg = load_config(config_path);
    CacheState state;
    state.keys = load_tensor(keys_path);
    state.values = load_tensor(values_path);
    if (state.values.rows() != state.keys.rows()) {
        throw ContractError("compress-once: key/value row counts disagree");
    }
    state.degrees = degrees_path.empty() ? Degrees::Ones(state.keys.rows())
                                         : load_degrees(degrees_path, state.keys.rows());
    state.budget = cache_budget(cfg, state.keys.rows());

    const std::int64_t degree_sum_before = state.degree_sum();
    const Index before = state.length();
    const CompressionStats stats = chelsea_step(state, cfg);

    save_tensor(out_prefix + "_K.ckvt", state.keys);
    save_tensor(out_prefix + "_V.ckvt", state.values);
    Matrix degrees_out(1, state.degrees.size());
    for (Index i = 0; i < state.degrees.size(); ++i) {
        degrees_out(0, i) = static_cast<Real>(state.degrees(i));
    }
    save_tensor(out_prefix + "_N.ckvt", degrees_out);

    std::cout << "compressed " << before << " -> " << state.length() << " rows in "
              << stats.passes.size() << " pass(es); budget=" << state.budget
              << " degree_sum=" << state.degree_sum() << " (was " << degree_sum_before << ")\n";
    return kExitOk;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"online KV-cache clustering workbench"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "write synthetic per-head K/V/Q tensor files");
    SyntheticSpec spec;
    std::string gen_out;
    generate->add_option("--n", spec.n, "sequence length")->capture_default_str();
    generate->add_option("--d", spec.d, "state dimension")->capture_default_str();
    generate->add_option("--heads", spec.heads, "attention heads")->capture_default_str();
    generate->add_option("--locality", spec.locality_scale, "key correlation length (inf allowed)")
        ->capture_default_str();
    generate->add_option("--noise", spec.noise, "isotropic key noise")->capture_default_str();
    generate->add_option("--seed", spec.seed, "rng seed")->capture_default_str();
    generate->add_option("--out", gen_out, "output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "drive the decode pipeline over tensor files");
    std::string run_config, run_tensors, run_transcript, run_metrics;
    run->add_option("--config", run_config, "flat key-value config file")->required();
    run->add_option("--tensors", run_tensors, "directory with headNNN_{K,V,Q}.ckvt")->required();
    run->add_option("--transcript", run_transcript, "output transcript CSV")->required();
    run->add_option("--metrics", run_metrics, "output counters CSV");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "profile heads and select outliers");
    std::string cal_tensors, cal_out;
    Index cal_chunk = 256;
    Real cal_threshold = 0.8;
    Real cal_ratio = 0.04;
    calibrate->add_option("--tensors", cal_tensors, "directory with headNNN*_K.ckvt samples")
        ->required();
    calibrate->add_option("--chunk", cal_chunk, "chunk size")->capture_default_str();
    calibrate->add_option("--threshold", cal_threshold, "edge similarity threshold")
        ->capture_default_str();
    calibrate->add_option("--ratio", cal_ratio, "outlier head ratio")->capture_default_str();
    calibrate->add_option("--out", cal_out, "report file (default stdout)");

    // verify-theorem
    auto* verify = app.add_subcommand("verify-theorem",
                                      "exhaustively check the alternating-partition optimality");
    Index thm_n = 3;
    Index thm_trials = 50;
    std::uint64_t thm_seed = 0;
    verify->add_option("--n", thm_n, "pair count (set sizes), 1..8")->capture_default_str();
    verify->add_option("--trials", thm_trials, "random score functions to test")
        ->capture_default_str();
    verify->add_option("--seed", thm_seed, "base seed")->capture_default_str();

    // profile
    auto* profile = app.add_subcommand("profile", "similarity-vs-distance curve CSV");
    std::string prof_keys, prof_tensors, prof_out;
    Index prof_window = 256;
    Index prof_samples = 64;
    std::uint64_t prof_seed = 0;
    profile->add_option("--keys", prof_keys, "single key tensor file");
    profile->add_option("--tensors", prof_tensors, "directory with headNNN_K.ckvt (averaged)");
    profile->add_option("--window", prof_window, "max token distance")->capture_default_str();
    profile->add_option("--samples", prof_samples, "anchor tokens")->capture_default_str();
    profile->add_option("--seed", prof_seed, "anchor sampling seed")->capture_default_str();
    profile->add_option("--out", prof_out, "output CSV (default stdout)");

    // compress-once
    auto* once = app.add_subcommand("compress-once", "run one compression on a K/V dump");
    std::string once_keys, once_values, once_degrees, once_config, once_prefix;
    once->add_option("--keys", once_keys, "key tensor file")->required();
    once->add_option("--values", once_values, "value tensor file")->required();
    once->add_option("--degrees", once_degrees, "degree tensor file (default all ones)");
    once->add_option("--config", once_config, "flat key-value config file")->required();
    once->add_option("--out-prefix", once_prefix, "output file prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (generate->parsed()) {
        return cmd_generate(spec, gen_out);
    }
    if (run->parsed()) {
        return cmd_run(run_config, run_tensors, run_transcript, run_metrics);
    }
    if (calibrate->parsed()) {
        return cmd_calibrate(cal_tensors, cal_chunk, cal_threshold, cal_ratio, cal_out);
    }
    if (verify->parsed()) {
        return cmd_verify_theorem(thm_n, thm_trials, thm_seed);
    }
    if (profile->parsed()) {
        if (prof_keys.empty() == prof_tensors.empty()) {
            std::cerr << "profile: pass exactly one of --keys or --tensors\n";
            return kExitUsage;
        }
        return cmd_profile(prof_keys, prof_tensors, prof_window, prof_samples, prof_seed,
                           prof_out);
    }
    if (once->parsed()) {
        return cmd_compress_once(once_keys, once_values, once_degrees, once_config, once_prefix);
    }
    return kExitUsage;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TensorIoError& e) {
        std::cerr << "tensor error: " << e.what() << "\n";
        return kExitTensorIo;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const ContractError& e) {
        std::cerr << "contract error: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace chelsea
