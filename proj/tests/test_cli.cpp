#include "chelsea/cli.hpp"

#include "chelsea/tensor_io.hpp"
#include "chelsea/types.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace chelsea;
namespace fs = std::filesystem;

namespace {

int cli(std::initializer_list<std::string> args) {
    std::vector<std::string> storage = {"chelsea"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) {
        argv.push_back(s.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "chelsea_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_config(const fs::path& p, const std::string& body) {
    std::ofstream os(p);
    os << body;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) {
        if (c == '\n') {
            ++n;
        }
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("verify-theorem runs clean") {
        CHECK(cli({"verify-theorem", "--n", "3", "--trials", "10", "--seed", "7"}) == kExitOk);
    }

    TEST_CASE("generate then profile yields a window-sized CSV") {
        const fs::path dir = work_dir() / "gen_profile";
        fs::remove_all(dir);
        CHECK(cli({"generate", "--n", "512", "--d", "32", "--heads", "2", "--seed", "1", "--out",
                   dir.string()}) == kExitOk);
        CHECK(fs::exists(dir / "head001_Q.ckvt"));

        const fs::path csv = work_dir() / "profile.csv";
        CHECK(cli({"profile", "--tensors", dir.string(), "--window", "256", "--samples", "32",
                   "--out", csv.string()}) == kExitOk);
        const std::string body = slurp(csv);
        CHECK(count_lines(body) == 257);  // header + 256 distances
        CHECK(body.rfind("distance,mean_similarity\n", 0) == 0);

        const fs::path csv2 = work_dir() / "profile2.csv";
        CHECK(cli({"profile", "--tensors", dir.string(), "--window", "256", "--samples", "32",
                   "--out", csv2.string()}) == kExitOk);
        CHECK(body == slurp(csv2));  // byte-identical report
    }

    TEST_CASE("run is deterministic and reports zero errors at full budget") {
        const fs::path dir = work_dir() / "run_full";
        fs::remove_all(dir);
        REQUIRE(cli({"generate", "--n", "96", "--d", "16", "--heads", "2", "--seed", "5", "--out",
                     dir.string()}) == kExitOk);
        const fs::path cfg = work_dir() / "full.cfg";
        write_config(cfg,
                     "cache_ratio = 1.0\nmax_decode = 16\nsink = 4\nrecent = 8\n"
                     "interval = 4\nchunk_size = 16\n");
        const fs::path t1 = work_dir() / "t1.csv";
        const fs::path t2 = work_dir() / "t2.csv";
        REQUIRE(cli({"run", "--config", cfg.string(), "--tensors", dir.string(), "--transcript",
                     t1.string()}) == kExitOk);
        REQUIRE(cli({"run", "--config", cfg.string(), "--tensors", dir.string(), "--transcript",
                     t2.string()}) == kExitOk);
        const std::string body = slurp(t1);
        CHECK(body == slurp(t2));  // byte-identical reruns
        CHECK(body.find("compress") == std::string::npos);
        // every l2 column is exactly 0
        std::istringstream is(body);
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            CHECK(line.substr(line.rfind(',') + 1) == "0");
        }
    }

    TEST_CASE("run under budget pressure writes compress events and metrics") {
        const fs::path dir = work_dir() / "run_tight";
        fs::remove_all(dir);
        REQUIRE(cli({"generate", "--n", "160", "--d", "16", "--heads", "1", "--locality", "64",
                     "--noise", "0.05", "--seed", "9", "--out", dir.string()}) == kExitOk);
        const fs::path cfg = work_dir() / "tight.cfg";
        write_config(cfg,
                     "cache_ratio = 0.3\nmax_decode = 32\nsink = 4\nrecent = 8\n"
                     "interval = 8\nchunk_size = 32\n");
        const fs::path transcript = work_dir() / "tight.csv";
        const fs::path metrics_csv = work_dir() / "tight_metrics.csv";
        REQUIRE(cli({"run", "--config", cfg.string(), "--tensors", dir.string(), "--transcript",
                     transcript.string(), "--metrics", metrics_csv.string()}) == kExitOk);
        const std::string body = slurp(transcript);
        CHECK(body.find("compress") != std::string::npos);
        const std::string metrics_body = slurp(metrics_csv);
        CHECK(metrics_body.find("similarity_evals,") != std::string::npos);
        CHECK(metrics_body.find("compressions,0\n") == std::string::npos);
    }

    TEST_CASE("compress-once conserves the degree sum") {
        const fs::path dir = work_dir() / "once";
        fs::remove_all(dir);
        REQUIRE(cli({"generate", "--n", "128", "--d", "8", "--heads", "1", "--seed", "3", "--out",
                     dir.string()}) == kExitOk);
        const fs::path cfg = work_dir() / "once.cfg";
        write_config(cfg,
                     "cache_ratio = 0.4\nmax_decode = 0\nsink = 2\nrecent = 4\n"
                     "interval = 2\nchunk_size = 16\n");
        const std::string prefix = (work_dir() / "once_out").string();
        REQUIRE(cli({"compress-once", "--keys", (dir / "head000_K.ckvt").string(), "--values",
                     (dir / "head000_V.ckvt").string(), "--config", cfg.string(), "--out-prefix",
                     prefix}) == kExitOk);
        const Matrix degrees = load_tensor(prefix + "_N.ckvt");
        Real total = 0.0;
        for (Index i = 0; i < degrees.size(); ++i) {
            total += degrees(0, i);
        }
        CHECK(total == 128.0);  // sum of merged degrees equals original token count
        const Matrix keys = load_tensor(prefix + "_K.ckvt");
        CHECK(keys.rows() == degrees.cols());
        CHECK(keys.rows() <= 51);  // budget = floor(0.4 * 128)
    }

    TEST_CASE("calibrate flags orthogonal-key heads") {
        const fs::path dir = work_dir() / "calib";
        fs::remove_all(dir);
        fs::create_directories(dir);
        // head 0: identical keys; head 1: mutually orthogonal keys
        Matrix identical(32, 32);
        identical.setZero();
        identical.col(0).setOnes();
        Matrix orthogonal = Matrix::Identity(32, 32);
        save_tensor(dir / "head000_K.ckvt", identical);
        save_tensor(dir / "head001_K.ckvt", orthogonal);

        const fs::path report = work_dir() / "calib.csv";
        REQUIRE(cli({"calibrate", "--tensors", dir.string(), "--chunk", "8", "--threshold", "0.8",
                     "--ratio", "0.5", "--out", report.string()}) == kExitOk);
        const std::string body = slurp(report);
        CHECK(body.find("0,0,") != std::string::npos);
        CHECK(body.find("1,1,") != std::string::npos);
        CHECK(body.find("# outliers: 1") != std::string::npos);

        const fs::path report2 = work_dir() / "calib2.csv";
        REQUIRE(cli({"calibrate", "--tensors", dir.string(), "--chunk", "8", "--threshold", "0.8",
                     "--ratio", "0.5", "--out", report2.string()}) == kExitOk);
        CHECK(body == slurp(report2));  // byte-identical report
    }

    TEST_CASE("error classes map to distinct exit codes") {
        CHECK(cli({"definitely-not-a-subcommand"}) == kExitUsage);
        CHECK(cli({"run", "--config", "/nope.cfg", "--tensors", "/tmp", "--transcript",
                   "/tmp/x.csv"}) == kExitConfig);

        const fs::path cfg = work_dir() / "ok.cfg";
        write_config(cfg, "cache_ratio = 0.5\n");
        const fs::path empty = work_dir() / "empty_dir";
        fs::create_directories(empty);
        CHECK(cli({"run", "--config", cfg.string(), "--tensors", empty.string(), "--transcript",
                   (work_dir() / "y.csv").string()}) == kExitTensorIo);

        const fs::path bad_cfg = work_dir() / "bad.cfg";
        write_config(bad_cfg, "chunk_size = 1\n");
        CHECK(cli({"run", "--config", bad_cfg.string(), "--tensors", empty.string(),
                   "--transcript", (work_dir() / "z.csv").string()}) == kExitConfig);
    }

    TEST_CASE("help exits zero") {
        CHECK(cli({"--help"}) == kExitOk);
    }
}
