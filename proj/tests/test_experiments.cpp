#include "dtnwave/experiments.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dtnwave;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("dtnwave_exp_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ConfigTest, DefaultsAndOverrides) {
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"experiment":"energy"})"));
    EXPECT_EQ(cfg.experiment, "energy");
    EXPECT_EQ(cfg.kappa, 1.0);
    EXPECT_EQ(cfg.T, 5.0);
    EXPECT_EQ(cfg.n_steps, 2000);
    EXPECT_EQ(cfg.L, 64);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.data_kind, ExperimentConfig::DataKind::rough);

    const auto cfg2 = config_from_json(nlohmann::json::parse(
        R"({"experiment":"evolve","kappa":2.5,"T":3.0,"n_steps":100,"L":8,"seed":9,
            "output_dir":"/tmp/x","data":{"type":"zero"}})"));
    EXPECT_EQ(cfg2.kappa, 2.5);
    EXPECT_EQ(cfg2.data_kind, ExperimentConfig::DataKind::zero);
}

TEST(ConfigTest, UnknownKeysRejected) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"experiment":"energy","krapa":1})")),
                 std::invalid_argument);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(
                     R"({"experiment":"energy","data":{"type":"rough","f7":{}}})")),
                 std::invalid_argument);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(
                     R"({"experiment":"energy","data":{"type":"rough","f0":{"sigma":2}}})")),
                 std::invalid_argument);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(
                     R"({"experiment":"energy","data":{"type":"martian"}})")),
                 std::invalid_argument);
}

TEST(ConfigTest, RoughSlotsCanBeDropped) {
    const auto cfg = config_from_json(nlohmann::json::parse(
        R"({"experiment":"energy","data":{"type":"rough","f0":{"s":1.5,"rho":1.2}}})"));
    EXPECT_TRUE(cfg.f0_on);
    EXPECT_FALSE(cfg.f1_on);
    EXPECT_FALSE(cfg.g_on);
    EXPECT_EQ(cfg.f0_rho, 1.2);
}

TEST(ConfigTest, ValidationCatchesBadValues) {
    ExperimentConfig cfg;
    cfg.experiment = "snorkel";
    EXPECT_THROW(validate_config(cfg), std::invalid_argument);
    cfg.experiment = "energy";
    cfg.kappa = -1.0;
    EXPECT_THROW(validate_config(cfg), std::invalid_argument);
}

TEST(RunnerTest, TransformsWritesReportsAndPasses) {
    TempDir tmp("transforms");
    ExperimentConfig cfg;
    cfg.experiment = "transforms";
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    EXPECT_TRUE(res.summary.at("pass").get<bool>());
    EXPECT_EQ(res.summary.at("experiment"), "transforms");
    ASSERT_TRUE(res.summary.contains("config"));
    ASSERT_TRUE(res.summary.contains("constants"));
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "transforms.csv"));
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "transforms_summary.json"));
    const std::string csv = slurp(tmp.path / "transforms.csv");
    EXPECT_EQ(csv.rfind("L,roundtrip_max_abs,parseval_rel\n", 0), 0u);
}

TEST(RunnerTest, ReportsAreBitwiseStable) {
    TempDir a("det_a"), b("det_b");
    for (const auto& dir : {a.str(), b.str()}) {
        ExperimentConfig cfg;
        cfg.experiment = "lemmas";
        cfg.L = 12;
        cfg.seed = 5;
        cfg.output_dir = dir;
        ASSERT_EQ(run_experiment(cfg).status, 0);
    }
    EXPECT_EQ(slurp(a.path / "lemmas.csv"), slurp(b.path / "lemmas.csv"));
    // summaries echo the config including output_dir, so compare constants only
    const auto ja = nlohmann::json::parse(slurp(a.path / "lemmas_summary.json"));
    const auto jb = nlohmann::json::parse(slurp(b.path / "lemmas_summary.json"));
    EXPECT_EQ(ja.at("constants"), jb.at("constants"));
    EXPECT_EQ(ja.at("pass"), jb.at("pass"));
}

TEST(RunnerTest, LemmasSummaryCarriesTheConstant) {
    TempDir tmp("lemmas");
    ExperimentConfig cfg;
    cfg.experiment = "lemmas";
    cfg.L = 16;
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    EXPECT_NEAR(res.summary["constants"]["coercivity_constant"].get<double>(), 0.38490018, 1e-8);
    EXPECT_GE(res.summary["constants"]["positivity_min"].get<double>(), -1e-12);
}

TEST(RunnerTest, EnergyCsvHasDocumentedColumns) {
    TempDir tmp("energy");
    ExperimentConfig cfg;
    cfg.experiment = "energy";
    cfg.L = 6;
    cfg.T = 1.0;
    cfg.n_steps = 120;
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    const std::string csv = slurp(tmp.path / "energy.csv");
    EXPECT_EQ(csv.rfind("t,E,Edot_num,pairing,bound\n", 0), 0u);
    std::size_t rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    EXPECT_EQ(rows, static_cast<std::size_t>(cfg.n_steps) + 2);  // header + samples
}

TEST(RunnerTest, EvolveZeroDataWritesZeroTrajectory) {
    TempDir tmp("evolve0");
    ExperimentConfig cfg;
    cfg.experiment = "evolve";
    cfg.L = 2;
    cfg.n_steps = 4;
    cfg.T = 1.0;
    cfg.data_kind = ExperimentConfig::DataKind::zero;
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    std::ifstream in(tmp.path / "evolve.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,l,m,f,fdot,fddot,G");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        const auto tail = line.substr(line.find(',', line.find(',', line.find(',') + 1) + 1) + 1);
        EXPECT_EQ(tail, "0,0,0,0");
    }
    EXPECT_EQ(rows, 5u * 9u);
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "evolve_params.json"));
}

TEST(RunnerTest, EvolveReadsSpectrumFiles) {
    TempDir tmp("evolve_files");
    const SpectralField f0 = basis_field(3, 1, 0, 2.5);
    io::write_spectrum_csv((tmp.path / "f0.csv").string(), f0);
    ExperimentConfig cfg;
    cfg.experiment = "evolve";
    cfg.L = 3;
    cfg.n_steps = 8;
    cfg.T = 1.0;
    cfg.data_kind = ExperimentConfig::DataKind::files;
    cfg.f0_path = (tmp.path / "f0.csv").string();
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    EXPECT_GT(res.summary["constants"]["final_f_32"].get<double>(), 0.0);
}

TEST(RunnerTest, ContinuityRowContract) {
    TempDir tmp("cont");
    ExperimentConfig cfg;
    cfg.experiment = "continuity";
    cfg.L = 8;
    cfg.T = 1.0;
    cfg.n_steps = 400;
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    std::ifstream in(tmp.path / "continuity.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "L,trial,kind,ratio,refine_drift");
    std::size_t rows = 0, max_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.find(",max,") != std::string::npos) ++max_rows;
    }
    // three truncations (2, 4, 8), 50 trials plus a max row each
    EXPECT_EQ(max_rows, 3u);
    EXPECT_EQ(rows, 3u * 51u);
}

TEST(RunnerTest, DispersionPasses) {
    TempDir tmp("disp");
    ExperimentConfig cfg;
    cfg.experiment = "dispersion";
    cfg.output_dir = tmp.str();
    const RunResult res = run_experiment(cfg);
    EXPECT_EQ(res.status, 0);
    EXPECT_LE(res.summary["constants"]["worst_rel_err"].get<double>(), 1e-8);
}

TEST(RunnerTest, InvalidExperimentThrowsBeforeComputing) {
    ExperimentConfig cfg;
    cfg.experiment = "warp_drive";
    EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(CliTest, ExitStatusContract) {
    TempDir tmp("cli");
    const std::string cli = DTNWAVE_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int raw = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    // status 0: a passing experiment
    EXPECT_EQ(run("--experiment transforms --output " + tmp.str() + " --seed 1"), 0);
    // status 2: unknown experiment, missing experiment, malformed config
    EXPECT_EQ(run("--experiment snorkel --output " + tmp.str()), 2);
    EXPECT_EQ(run("--output " + tmp.str()), 2);
    {
        std::ofstream bad(tmp.path / "bad.json");
        bad << R"({"experiment":"energy","krapa":2})";
    }
    EXPECT_EQ(run("--config " + (tmp.path / "bad.json").string()), 2);

    // flags override the config file
    {
        std::ofstream good(tmp.path / "good.json");
        good << R"({"experiment":"lemmas","L":12,"seed":3,"output_dir":")" + tmp.str() + R"("})";
    }
    EXPECT_EQ(run("--config " + (tmp.path / "good.json").string() + " --experiment transforms"), 0);
    EXPECT_TRUE(std::filesystem::exists(tmp.path / "transforms_summary.json"));

    // status 2: output directory cannot be created (path under a file)
    EXPECT_EQ(run("--experiment transforms --output " +
                  (tmp.path / "transforms.csv" / "sub").string()),
              2);
}
