#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "scoreq/data/corpus.hpp"
#include "scoreq/data/manifest.hpp"
#include "scoreq/eval/stats.hpp"
#include "test_support.hpp"

using namespace scoreq;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("scoreq_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

}  // namespace

TEST(Response, ShapesAreStrictlyIncreasingFromZeroToOne) {
  for (std::size_t f = 0; f < kMaxFamilies; ++f) {
    const ResponseShape shape = family_response(f);
    EXPECT_NEAR(response(shape, 0.0), 0.0, 1e-12);
    EXPECT_NEAR(response(shape, 1.0), 1.0, 1e-12);
    double prev = response(shape, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = response(shape, i / 1000.0);
      EXPECT_GT(v, prev) << "family " << f << " at " << i;
      prev = v;
    }
  }
}

TEST(SyntheticSpec, Validation) {
  SyntheticSpec s;
  s.n_families = 1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = SyntheticSpec{};
  s.holdout_families = {"Z"};
  EXPECT_THROW(s.validate(), ConfigError);
  s.holdout_families = {"A", "B", "C", "D", "E"};
  EXPECT_THROW(s.validate(), ConfigError);
  s = SyntheticSpec{};
  s.mos_noise_sd = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Corpus, CleanEndpointAndLabelRange) {
  SyntheticSpec spec;
  spec.samples_per_family = 50;
  for (std::size_t f = 0; f < kMaxFamilies; ++f) EXPECT_DOUBLE_EQ(noiseless_mos(f, 0.0), 5.0);
  for (const auto& s : generate_corpus(spec)) {
    EXPECT_GE(s.mos, 1.0);
    EXPECT_LE(s.mos, 5.0);
    EXPECT_TRUE(s.features.all_finite());
    ASSERT_TRUE(s.severity.has_value());
    EXPECT_EQ(s.features.rows(), spec.frames);
    EXPECT_EQ(s.features.cols(), spec.input_dim);
    if (*s.severity < 0.01) EXPECT_NEAR(s.mos, 5.0, 4 * spec.mos_noise_sd + 0.05);
  }
}

TEST(Corpus, NoiselessLabelsDecreaseInSeverity) {
  const auto corpus = generate_corpus(SyntheticSpec{});
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_family;
  for (const auto& s : corpus) {
    const std::size_t f = static_cast<std::size_t>(s.degradation[0] - 'A');
    by_family[s.degradation].first.push_back(*s.severity);
    by_family[s.degradation].second.push_back(noiseless_mos(f, *s.severity));
  }
  EXPECT_EQ(by_family.size(), 5u);
  for (const auto& [fam, v] : by_family) EXPECT_NEAR(spearman(v.first, v.second), -1.0, 1e-12) << fam;
}

TEST(Corpus, NoisyLabelsRankAgainstSeverity) {
  const auto corpus = generate_corpus(SyntheticSpec{});
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_family;
  for (const auto& s : corpus) {
    by_family[s.degradation].first.push_back(*s.severity);
    by_family[s.degradation].second.push_back(s.mos);
  }
  for (const auto& [fam, v] : by_family) EXPECT_LE(spearman(v.first, v.second), -0.95) << fam;
}

TEST(Corpus, SameSeedIsBitIdentical) {
  SyntheticSpec spec;
  spec.samples_per_family = 40;
  spec.seed = 5;
  const auto a = generate_corpus(spec), b = generate_corpus(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].mos, b[i].mos);
    EXPECT_EQ(a[i].split, b[i].split);
  }
  spec.seed = 6;
  EXPECT_NE(generate_corpus(spec)[0].features, a[0].features);
}

TEST(Corpus, HoldoutFamilyOnlyInTest) {
  SyntheticSpec spec;
  spec.samples_per_family = 100;
  spec.holdout_families = {"E"};
  for (const auto& s : generate_corpus(spec))
    if (s.degradation == "E") EXPECT_EQ(s.split, Split::test);
}

TEST(Corpus, ReferencesAreCleanAndIndependent) {
  SyntheticSpec spec;
  spec.samples_per_family = 10;
  const auto refs = generate_references(spec, 50);
  ASSERT_EQ(refs.size(), 50u);
  const auto corpus = generate_corpus(spec);
  for (const auto& r : refs) {
    EXPECT_EQ(r.degradation, "clean");
    EXPECT_EQ(*r.severity, 0.0);
    for (const auto& s : corpus) EXPECT_NE(r.features, s.features);
  }
}

TEST(SplitByFamily, HoldoutAndStability) {
  SyntheticSpec spec;
  spec.samples_per_family = 200;
  auto corpus = generate_corpus(spec);
  const std::vector<std::string> hold{"E"};
  const SplitSet a = split_by_family(corpus, hold);
  for (const auto& s : a.train) EXPECT_NE(s.degradation, "E");
  for (const auto& s : a.val) EXPECT_NE(s.degradation, "E");
  EXPECT_EQ(a.test.size(), 200u);

  std::mt19937_64 rng(1);
  std::shuffle(corpus.begin(), corpus.end(), rng);
  const SplitSet b = split_by_family(corpus, hold);
  std::map<std::string, Split> where;
  for (const auto& s : a.train) where[s.id] = Split::train;
  for (const auto& s : a.val) where[s.id] = Split::val;
  for (const auto& s : b.train) EXPECT_EQ(where.at(s.id), Split::train);
  for (const auto& s : b.val) EXPECT_EQ(where.at(s.id), Split::val);
}

TEST(SplitByFamily, EightyTwentyOnTenThousand) {
  std::vector<LabeledSample> samples(10000);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].id = "utt" + std::to_string(i);
    samples[i].degradation = i % 2 ? "A" : "B";
  }
  samples.push_back(LabeledSample{"held", {}, 3.0, "C", std::nullopt, Split::train});
  const std::vector<std::string> hold{"C"};
  const SplitSet s = split_by_family(samples, hold);
  const double train_share = static_cast<double>(s.train.size()) / 10000.0;
  EXPECT_NEAR(train_share, 0.8, 0.02);
  EXPECT_EQ(s.train.size() + s.val.size(), 10000u);
}

TEST(SplitByFamily, Errors) {
  std::vector<LabeledSample> samples(3);
  for (auto& s : samples) s.degradation = "A";
  EXPECT_THROW(split_by_family(samples, std::vector<std::string>{}), ConfigError);
  EXPECT_THROW(split_by_family(samples, std::vector<std::string>{"A"}), ConfigError);
}

TEST(TrimFrames, Examples) {
  std::mt19937_64 rng(2);
  const Matrix x = scoreq::testing::random_matrix(100, 3, rng);
  const Matrix t = trim_frames(x, 40);
  ASSERT_EQ(t.rows(), 40u);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(t(r, c), x(r, c));
  EXPECT_EQ(trim_frames(x, 100), x);
  EXPECT_EQ(trim_frames(x, 500), x);
  EXPECT_THROW(trim_frames(x, 0), std::invalid_argument);
}

TEST(Manifest, RoundTripIsIdentity) {
  const fs::path dir = fresh_dir("manifest_roundtrip");
  SyntheticSpec spec;
  spec.samples_per_family = 8;
  const auto corpus = generate_corpus(spec);
  const auto path = write_manifest(dir, corpus);
  const auto back = load_manifest(path);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].mos, corpus[i].mos);
    EXPECT_EQ(back[i].split, corpus[i].split);
    EXPECT_EQ(back[i].degradation, corpus[i].degradation);
    EXPECT_EQ(back[i].features, corpus[i].features);
  }
  fs::remove_all(dir);
}

TEST(Manifest, EmptyDataSectionGivesEmptyList) {
  const fs::path dir = fresh_dir("manifest_empty");
  write_file(dir / "m.csv", std::string(kManifestHeader) + "\n");
  EXPECT_TRUE(load_manifest(dir / "m.csv").empty());
  fs::remove_all(dir);
}

TEST(Manifest, ErrorsAreItemizedWithLineNumbers) {
  const fs::path dir = fresh_dir("manifest_errors");
  write_file(dir / "f.csv", "1,2\n3,4\n");
  write_file(dir / "bad.csv", "1,x\n");
  write_file(dir / "m.csv", std::string(kManifestHeader) +
                                "\n"
                                "a,train,A,3.0,f.csv\n"
                                "b,train,A,6.2,f.csv\n"
                                "c,train,A,abc,f.csv\n"
                                "d,train,A\n"
                                "e,nowhere,A,2.0,f.csv\n"
                                "f,val,A,2.0,bad.csv\n"
                                "g,val,A,2.0,missing.csv\n");
  try {
    load_manifest(dir / "m.csv");
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    const auto& errs = e.errors();
    ASSERT_EQ(errs.size(), 6u);
    EXPECT_NE(errs[0].find(":3:"), std::string::npos);
    EXPECT_NE(errs[0].find("6.2"), std::string::npos);
    EXPECT_NE(errs[1].find(":4:"), std::string::npos);
    EXPECT_NE(errs[2].find(":5:"), std::string::npos);
    EXPECT_NE(errs[3].find(":6:"), std::string::npos);
    EXPECT_NE(errs[4].find("malformed float"), std::string::npos);
    EXPECT_NE(errs[5].find("cannot open"), std::string::npos);
  }
  write_file(dir / "h.csv", "id,mos\n");
  EXPECT_THROW(load_manifest(dir / "h.csv"), ManifestError);
  EXPECT_THROW(load_manifest(dir / "absent.csv"), IoError);
  fs::remove_all(dir);
}

TEST(Manifest, RaggedFeatureFileRejected) {
  const fs::path dir = fresh_dir("manifest_ragged");
  write_file(dir / "f.csv", "1,2\n3\n");
  write_file(dir / "m.csv", std::string(kManifestHeader) + "\na,train,A,3.0,f.csv\n");
  EXPECT_THROW(load_manifest(dir / "m.csv"), ManifestError);
  fs::remove_all(dir);
}

TEST(FormatDouble, RoundTrips) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(rng);
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double out;
  EXPECT_FALSE(parse_double("nan", out));
  EXPECT_FALSE(parse_double("1.0x", out));
  EXPECT_FALSE(parse_double("", out));
}
