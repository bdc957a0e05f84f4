#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fvarclust/io.hpp"
#include "fvarclust/synthetic.hpp"
#include "support/oracles.hpp"

using namespace fvarclust;
namespace fs = std::filesystem;

namespace {

std::string fibers_text(const std::vector<Fiber>& f) {
    std::ostringstream out;
    io::write_fibers(out, f);
    return out.str();
}

std::string gram_bytes(const GramMatrix& g) {
    std::ostringstream out(std::ios::binary);
    io::write_gram(out, g);
    return out.str();
}

std::size_t line_of(const std::string& text) {
    std::istringstream in(text);
    try {
        io::read_fibers(in);
    } catch (const FormatError& e) {
        return e.line();
    }
    return 0;
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fvarclust_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

}  // namespace

TEST(FiberIo, RoundTripIsByteIdentical) {
    const auto f = synthesize(planted_bundle_spec(2, 3, 4)).fibers;
    const std::string first = fibers_text(f);
    std::istringstream in(first);
    const auto back = io::read_fibers(in);
    EXPECT_EQ(back, f);
    EXPECT_EQ(fibers_text(back), first);
}

TEST(FiberIo, PreservesDoublesExactly) {
    const std::vector<Fiber> f{Fiber(-7, {Point3(0.1, 1.0 / 3.0, -2e-300), Point3(1e300, 5e-324, 0.7)},
                                     {0.123456789012345678, 2.0 / 3.0})};
    std::istringstream in(fibers_text(f));
    EXPECT_EQ(io::read_fibers(in), f);
}

TEST(FiberIo, SkipsBlankLines) {
    std::istringstream in("\n{\"id\":1,\"points\":[[0,0,0],[1,0,0]],\"signal\":[0.5,0.5]}\n   \n");
    EXPECT_EQ(io::read_fibers(in).size(), 1u);
}

TEST(FiberIo, MalformedRecordsReportLineNumbers) {
    const std::string good = "{\"id\":1,\"points\":[[0,0,0],[1,0,0]],\"signal\":[0.5,0.5]}\n";
    EXPECT_EQ(line_of(good + "{not json\n"), 2u);
    EXPECT_EQ(line_of(good + "\n{\"id\":2,\"points\":[[0,0,0]],\"signal\":[0.5]}\n"), 3u);
    EXPECT_EQ(line_of(good + "{\"id\":2,\"points\":[[0,0],[1,0]],\"signal\":[0.5,0.5]}\n"), 2u);
    EXPECT_EQ(line_of(good + "{\"id\":2,\"points\":[[0,0,0],[1,0,0]],\"signal\":[0.5]}\n"), 2u);
    EXPECT_EQ(line_of(good + "{\"points\":[[0,0,0],[1,0,0]],\"signal\":[0.5,0.5]}\n"), 2u);
    EXPECT_EQ(line_of(good + "{\"id\":1.5,\"points\":[[0,0,0],[1,0,0]],\"signal\":[0.5,0.5]}\n"), 2u);
    EXPECT_EQ(line_of(good + "{\"id\":3,\"points\":[[0,0,\"x\"],[1,0,0]],\"signal\":[0.5,0.5]}\n"), 2u);
    EXPECT_EQ(line_of(good + good), 2u);
    EXPECT_EQ(line_of("[1,2,3]\n"), 1u);
}

TEST(FiberIo, ErrorMessageMentionsLine) {
    std::istringstream in("{\"id\":1}\n");
    try {
        io::read_fibers(in);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(GramIo, RoundTripIsByteIdentical) {
    const auto f = oracle::random_fibers(3, 6);
    const auto g = compute_gram(f, KernelModel::SignalOnly, {4.0, 0.2, 0.01});
    const std::string bytes = gram_bytes(g);
    EXPECT_EQ(bytes.size(), 4u + 1u + 24u + 8u + 8u * 21u);
    std::istringstream in(bytes, std::ios::binary);
    const auto back = io::read_gram(in);
    EXPECT_EQ(back.values, g.values);
    EXPECT_EQ(back.model, g.model);
    EXPECT_EQ(back.params, g.params);
    EXPECT_EQ(gram_bytes(back), bytes);
}

TEST(GramIo, HeaderLayoutIsLittleEndian) {
    GramMatrix g{Eigen::MatrixXd::Constant(1, 1, 1.0), KernelModel::McpRbf, {}};
    const std::string b = gram_bytes(g);
    EXPECT_EQ(b.substr(0, 4), "GRM1");
    EXPECT_EQ(static_cast<unsigned char>(b[4]), 3u);
    // n = 1 as u64 LE.
    EXPECT_EQ(static_cast<unsigned char>(b[29]), 1u);
    for (int k = 30; k < 37; ++k) EXPECT_EQ(b[static_cast<std::size_t>(k)], 0);
    // 1.0 = 0x3FF0000000000000 stored LE: last byte 0x3F, second last 0xF0.
    EXPECT_EQ(static_cast<unsigned char>(b[44]), 0x3Fu);
    EXPECT_EQ(static_cast<unsigned char>(b[43]), 0xF0u);
}

TEST(GramIo, RejectsCorruptFiles) {
    const auto g = compute_gram(oracle::random_fibers(5, 3), KernelModel::Varifold, {});
    const std::string bytes = gram_bytes(g);
    auto read = [](const std::string& s) {
        std::istringstream in(s, std::ios::binary);
        return io::read_gram(in);
    };
    EXPECT_THROW(read("GRM2" + bytes.substr(4)), FormatError);
    EXPECT_THROW(read(bytes.substr(0, bytes.size() - 3)), FormatError);
    EXPECT_THROW(read(bytes + "x"), FormatError);
    std::string bad_tag = bytes;
    bad_tag[4] = 9;
    EXPECT_THROW(read(bad_tag), FormatError);
    EXPECT_THROW(read(""), FormatError);
}

TEST_F(TempDir, LabelsRoundTrip) {
    const std::vector<int> labels{0, 3, 1, 1, -1};
    io::write_labels(dir_ / "l.json", labels);
    EXPECT_EQ(io::read_labels(dir_ / "l.json"), labels);
    std::ofstream(dir_ / "bad.json") << "{\"labels\": [1, \"a\"]}";
    EXPECT_THROW(io::read_labels(dir_ / "bad.json"), FormatError);
    std::ofstream(dir_ / "none.json") << "{\"x\": 1}";
    EXPECT_THROW(io::read_labels(dir_ / "none.json"), FormatError);
}

TEST_F(TempDir, ResultRoundTripIsByteIdentical) {
    const auto set = synthesize(planted_bundle_spec(2, 8, 2));
    const auto g = compute_gram(set.fibers, KernelModel::FunctionalVarifold, {});
    io::ResultRecord r;
    r.model = g.model;
    r.params = g.params;
    r.config.m = 2;
    r.config.s_max = 2;
    r.config.seed = 17;
    r.config.restarts = 3;
    r.fit = fit(g, r.config);
    r.labels = hard_assign(r.fit.codes);
    io::write_result(dir_ / "a.json", r);
    const auto back = io::read_result(dir_ / "a.json");
    EXPECT_EQ(back.fit.codes.codes, r.fit.codes.codes);
    EXPECT_EQ(back.fit.dictionary.atoms, r.fit.dictionary.atoms);
    EXPECT_EQ(back.fit.objective_trace, r.fit.objective_trace);
    EXPECT_EQ(back.labels.labels, r.labels.labels);
    EXPECT_EQ(back.config.seed, 17u);
    EXPECT_EQ(back.config.restarts, 3u);
    EXPECT_EQ(back.params, r.params);
    io::write_result(dir_ / "b.json", back);
    std::ifstream a(dir_ / "a.json");
    std::ifstream b(dir_ / "b.json");
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
    // A result file doubles as a labels file.
    EXPECT_EQ(io::read_labels(dir_ / "a.json"), r.labels.labels);
}

TEST_F(TempDir, MalformedResultRejected) {
    std::ofstream(dir_ / "r.json") << "{\"format\": \"something-else\"}";
    EXPECT_THROW(io::read_result(dir_ / "r.json"), FormatError);
    std::ofstream(dir_ / "t.json") << "{\"format\": \"fvarclust-result\", \"n\": 2}";
    EXPECT_THROW(io::read_result(dir_ / "t.json"), FormatError);
}

TEST_F(TempDir, MissingFileIsError) {
    EXPECT_THROW(io::read_fibers(dir_ / "nope.jsonl"), Error);
    EXPECT_THROW(io::read_gram(dir_ / "nope.grm"), Error);
}

TEST(Seeding, NamesRoundTrip) {
    EXPECT_EQ(io::parse_seeding(io::seeding_name(AtomSeeding::Uniform)), AtomSeeding::Uniform);
    EXPECT_EQ(io::parse_seeding(io::seeding_name(AtomSeeding::KMeansPlusPlus)), AtomSeeding::KMeansPlusPlus);
    EXPECT_THROW(io::parse_seeding("random"), InvalidArgument);
}
