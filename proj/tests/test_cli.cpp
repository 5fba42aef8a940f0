#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "absynth/cli.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace absynth;
using namespace absynth::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("absynth_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string temp(const std::string& name, const std::string& text) const {
        const std::string path = (dir_ / name).string();
        std::ofstream(path) << text;
        return path;
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

const std::string kLow = fixture("blocks_world.abs");
const std::string kHigh = fixture("blocks_world_high.abs");

}  // namespace

TEST_F(Cli, ValidateFixtures) {
    const Outcome r = cli({"validate", kLow, kHigh});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("overall: pass"), std::string::npos) << r.out;
}

TEST_F(Cli, InputErrors) {
    EXPECT_EQ(cli({"validate", path("missing.abs")}).code, kExitInput);
    EXPECT_EQ(cli({}).code, kExitInput);
    EXPECT_EQ(cli({"frobnicate", kLow}).code, kExitInput);
    EXPECT_EQ(cli({"check", kLow, "--bounds", "3"}).code, kExitInput);
    EXPECT_EQ(cli({"check", kLow, "--bounds", "3..1"}).code, kExitInput);
    EXPECT_EQ(cli({"synth", kLow, "--simplify", "--no-simplify"}).code, kExitInput);
    EXPECT_EQ(cli({"check", kLow, "--scope", "some"}).code, kExitInput);
    // Diagnostics point into the second file.
    const std::string bad = temp("bad.abs", "bat high H {\n  fluent P;\n  action A poss P &&;\n}\n");
    const Outcome r = cli({"validate", kLow, bad});
    EXPECT_EQ(r.code, kExitInput);
    EXPECT_EQ(r.err.rfind(bad + ":3:", 0), 0u) << r.err;
}

TEST_F(Cli, ValidationViolations) {
    const std::string bad = temp("arity.abs", "bat high H { fluent P(x); action A poss true; ssa P { add A; } init true; }\n");
    const Outcome r = cli({"validate", bad});
    EXPECT_EQ(r.code, kExitInvalid);
    EXPECT_NE(r.out.find("libat-predicate-arity"), std::string::npos) << r.out;
    EXPECT_EQ(cli({"synth", kLow, bad}).code, kExitInvalid);
}

TEST_F(Cli, CheckReportsLabels) {
    const Outcome r = cli({"check", kLow, "--bounds", "1..2", "--report", "json"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    std::map<std::string, std::string> labels;
    for (const auto& c : j.at("checks"))
        if (c.at("name").get<std::string>().rfind("label ", 0) == 0)
            labels[c.at("name").get<std::string>()] = c.at("detail").get<std::string>();
    EXPECT_EQ(labels.size(), 4u);
    EXPECT_EQ(labels["label PickAboveC/Num"].rfind("decremental", 0), 0u);
    EXPECT_EQ(labels["label Putdown/Holding"].rfind("disabling", 0), 0u);
}

TEST_F(Cli, SynthToStdoutAndFile) {
    const Outcome r = cli({"synth", kLow, "--bounds", "1..2"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(r.out, read_file(fixture("golden/blocks_synth.abs")));
    const Outcome literal = cli({"synth", kLow, "--bounds", "1..2", "--no-simplify"});
    EXPECT_NE(literal.out.find("Num >= 0"), std::string::npos) << literal.out;

    const std::string out = path("high.abs");
    const Outcome f = cli({"synth", kLow, "--bounds", "1..2", "--out", out, "--report", "json"});
    EXPECT_EQ(f.code, kExitOk) << f.err;
    EXPECT_TRUE(f.out.empty());
    EXPECT_EQ(read_file(out), r.out);
    const auto prov = nlohmann::json::parse(read_file(out + ".provenance.json"));
    EXPECT_EQ(prov.at("checks").size(), 5u);
}

TEST_F(Cli, CertifyVerdicts) {
    EXPECT_EQ(cli({"certify", kLow, kHigh, "--bounds", "1..2"}).code, kExitOk);
    // Without a high theory in the input one is synthesized first.
    EXPECT_EQ(cli({"certify", kLow, "--bounds", "1..2"}).code, kExitOk);
    const Outcome bad = cli({"certify", kLow, fixture("mutants/precondition_flipped.abs"), "--bounds", "1..2"});
    EXPECT_EQ(bad.code, kExitRefuted);
    EXPECT_NE(bad.out.find("forth"), std::string::npos) << bad.out;
}

TEST_F(Cli, Inconclusive) {
    const Outcome r = cli({"check", kLow, "--bounds", "3..3", "--budget", "10"});
    EXPECT_EQ(r.code, kExitInconclusive);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    const std::string text = read_file(kLow);
    const std::string vacuous = temp("vacuous.abs", text.substr(0, text.find("  init ")) + "  init false;\n" +
                                                        text.substr(text.find("\n", text.find("  init ")) + 1));
    EXPECT_EQ(cli({"certify", vacuous, kHigh, "--bounds", "1..2"}).code, kExitInconclusive);
}

TEST_F(Cli, UnsynthesizableMappingIsRefuted) {
    const Outcome r = cli({"synth", fixture("mutants/guard_dropped.abs"), "--bounds", "1..2"});
    EXPECT_EQ(r.code, kExitRefuted) << r.out << r.err;
    EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, DeterministicAcrossJobs) {
    const Outcome a = cli({"certify", kLow, fixture("mutants/decrement_off_by_one.abs"), "--bounds", "1..3", "--jobs", "1",
                       "--report", "json"});
    const Outcome b = cli({"certify", kLow, fixture("mutants/decrement_off_by_one.abs"), "--bounds", "1..3", "--jobs", "3",
                       "--report", "json"});
    EXPECT_EQ(a.code, kExitRefuted);
    EXPECT_EQ(a.out, b.out);
    const Outcome c = cli({"check", kLow, "--bounds", "1..2", "--jobs", "1"});
    const Outcome d = cli({"check", kLow, "--bounds", "1..2", "--jobs", "4"});
    EXPECT_EQ(c.out, d.out);
}
