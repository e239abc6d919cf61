#include "veritext/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "test_util.hpp"
#include "veritext/rng.hpp"
#include "veritext/stopwords.hpp"

using namespace veritext;

namespace {

std::vector<std::string> toks(const std::string& text, Pipeline p) {
  return preprocess(text, p).tokens;
}

Corpus toy_corpus(const std::string& name, int fake, int real) {
  Corpus corpus;
  corpus.name = name;
  for (int i = 0; i < fake; ++i)
    corpus.posts.push_back({name + "-f" + std::to_string(i),
                            "fake post number " + std::to_string(i),
                            Label::Fake});
  for (int i = 0; i < real; ++i)
    corpus.posts.push_back({name + "-r" + std::to_string(i),
                            "real post number " + std::to_string(i),
                            Label::Real});
  return corpus;
}

}  // namespace

TEST_CASE("preprocess classic drops symbols and stopwords") {
  CHECK(toks("The CDC currently reports 99031 deaths.", Pipeline::Classic) ==
        std::vector<std::string>{"cdc", "currently", "reports", "99031",
                                 "deaths"});
  CHECK(toks("!!! ???", Pipeline::Classic).empty());
  // hashtag and mention sigils survive
  CHECK(toks("Check #Corona @WHO now!", Pipeline::Classic) ==
        std::vector<std::string>{"check", "#corona", "@who"});
}

TEST_CASE("preprocess raw splits on whitespace only") {
  CHECK(toks("Check https://t.co/x #coronavirus", Pipeline::Raw) ==
        std::vector<std::string>{"Check", "https://t.co/x", "#coronavirus"});
  CHECK(toks("  a\t b\nc ", Pipeline::Raw) ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(toks("", Pipeline::Raw).empty());
}

TEST_CASE("classic tokens stay inside the retained alphabet") {
  // fuzz over byte soup, including multi-byte UTF-8
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const size_t len = rng.below(80);
    for (size_t i = 0; i < len; ++i)
      text.push_back(static_cast<char>(rng.below(256)));
    for (const std::string& tok : toks(text, Pipeline::Classic)) {
      CHECK(!tok.empty());
      for (char c : tok) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '#' || c == '@' || c == '\'';
        CHECK(ok);
      }
      CHECK(!is_stopword(tok));
    }
  }
}

TEST_CASE("label parsing is case-insensitive and strict") {
  CHECK(parse_label("fake") == Label::Fake);
  CHECK(parse_label(" REAL ") == Label::Real);
  CHECK(parse_label("Fake") == Label::Fake);
  CHECK_THROWS_AS(parse_label("bogus"), LabelError);
}

TEST_CASE("load_dataset csv handles quoting, order and labels") {
  vtest::TempDir dir;
  const std::string path = dir.file("data.csv");
  vtest::write_file(path,
                    "id,tweet,label\n"
                    "1,\"hello, world\",fake\n"
                    "2,\"multi\nline \"\"tweet\"\"\",REAL\n"
                    "3,plain text,Fake\n");
  const Corpus corpus = load_dataset(path, FileFormat::Csv, "t");
  REQUIRE(corpus.size() == 3);
  CHECK(corpus.posts[0].id == "1");
  CHECK(corpus.posts[0].text == "hello, world");
  CHECK(corpus.posts[0].label == Label::Fake);
  CHECK(corpus.posts[1].text == "multi\nline \"tweet\"");
  CHECK(corpus.posts[1].label == Label::Real);
  CHECK(corpus.count(Label::Fake) == 2);
  CHECK(corpus.count(Label::Real) == 1);
}

TEST_CASE("load_dataset header-only file gives an empty corpus") {
  vtest::TempDir dir;
  const std::string path = dir.file("empty.csv");
  vtest::write_file(path, "id,tweet,label\n");
  CHECK(load_dataset(path, FileFormat::Csv, "t").size() == 0);
}

TEST_CASE("load_dataset tsv and extension detection") {
  vtest::TempDir dir;
  const std::string path = dir.file("data.tsv");
  vtest::write_file(path, "id\ttweet\tlabel\n10\tsome words here\treal\n");
  CHECK(format_from_path(path) == FileFormat::Tsv);
  CHECK(format_from_path(dir.file("x.csv")) == FileFormat::Csv);
  const Corpus corpus = load_dataset(path, FileFormat::Tsv, "t");
  REQUIRE(corpus.size() == 1);
  CHECK(corpus.posts[0].id == "10");
  CHECK(corpus.posts[0].label == Label::Real);
}

TEST_CASE("load_dataset error paths name the offender") {
  vtest::TempDir dir;

  const std::string bad_cols = dir.file("cols.csv");
  vtest::write_file(bad_cols, "id,tweet,label\n1,text only\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad_cols, FileFormat::Csv, "t"),
                       doctest::Contains("line 2"), ParseError);

  const std::string bad_label = dir.file("label.csv");
  vtest::write_file(bad_label, "id,tweet,label\n1,some text,maybe\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad_label, FileFormat::Csv, "t"),
                       doctest::Contains("maybe"), LabelError);

  const std::string dup = dir.file("dup.csv");
  vtest::write_file(dup, "id,tweet,label\n1,a a,fake\n1,b b,real\n");
  CHECK_THROWS_AS(load_dataset(dup, FileFormat::Csv, "t"), ParseError);

  CHECK_THROWS_AS(load_dataset(dir.file("missing.csv"), FileFormat::Csv, "t"),
                  IoError);
}

TEST_CASE("load_dataset is total over well-formed files") {
  vtest::TempDir dir;
  Rng rng(77);
  std::string content = "id,tweet,label\n";
  const int rows = 137;
  for (int i = 0; i < rows; ++i) {
    content += std::to_string(i) + ",word" + std::to_string(rng.below(50)) +
               " tail,";
    content += rng.below(2) == 0 ? "fake" : "real";
    content += "\n";
  }
  const std::string path = dir.file("gen.csv");
  vtest::write_file(path, content);
  CHECK(load_dataset(path, FileFormat::Csv, "t").size() == rows);
}

TEST_CASE("corpus_stats basics") {
  Corpus corpus;
  corpus.name = "toy";
  corpus.posts.push_back({"1", "a b c", Label::Fake});
  const CorpusStats stats = corpus_stats(corpus, Pipeline::Raw);
  CHECK(stats.sample_count == 1);
  CHECK(stats.avg_words == doctest::Approx(3.0));
  CHECK(stats.max_words == 3);
  CHECK(stats.min_words == 3);

  Corpus empty;
  CHECK_THROWS_AS(corpus_stats(empty, Pipeline::Raw), DomainError);
}

TEST_CASE("corpus_stats equal-length corpus collapses avg=max=min") {
  Corpus corpus;
  corpus.name = "k";
  for (int i = 0; i < 9; ++i)
    corpus.posts.push_back({std::to_string(i), "one two three four",
                            i % 2 ? Label::Fake : Label::Real});
  const CorpusStats stats = corpus_stats(corpus, Pipeline::Raw);
  CHECK(stats.avg_words == doctest::Approx(4.0));
  CHECK(stats.max_words == 4);
  CHECK(stats.min_words == 4);
  CHECK(stats.fake_count + stats.real_count == stats.sample_count);
}

TEST_CASE("classic stats are never larger than raw stats") {
  Corpus corpus;
  corpus.name = "mix";
  corpus.posts.push_back({"1", "The cats are on the mat", Label::Real});
  corpus.posts.push_back({"2", "#tag @user check this now!", Label::Fake});
  const CorpusStats raw = corpus_stats(corpus, Pipeline::Raw);
  const CorpusStats classic = corpus_stats(corpus, Pipeline::Classic);
  CHECK(classic.avg_words < raw.avg_words);
}

TEST_CASE("combine_and_split 10+10 at ratio 0.5 gives 5+5 vs 5+5") {
  const Corpus train = toy_corpus("train", 10, 0);
  const Corpus val = toy_corpus("val", 0, 10);
  SplitSpec spec;
  spec.ratio = 0.5;
  spec.seed = 9;
  auto [head, tail] = combine_and_split(train, val, spec);
  CHECK(head.size() == 10);
  CHECK(tail.size() == 10);
  CHECK(head.count(Label::Fake) == 5);
  CHECK(head.count(Label::Real) == 5);
  CHECK(tail.count(Label::Fake) == 5);
  CHECK(tail.count(Label::Real) == 5);
}

TEST_CASE("combine_and_split is deterministic and conserves ids") {
  const Corpus train = toy_corpus("train", 31, 40);
  const Corpus val = toy_corpus("val", 11, 13);
  SplitSpec spec;
  spec.ratio = 0.9;
  spec.seed = 42;

  auto [head1, tail1] = combine_and_split(train, val, spec);
  auto [head2, tail2] = combine_and_split(train, val, spec);

  auto ids = [](const Corpus& c) {
    std::set<std::string> s;
    for (const LabeledPost& p : c.posts) s.insert(p.id);
    return s;
  };
  CHECK(ids(head1) == ids(head2));
  CHECK(ids(tail1) == ids(tail2));

  // conservation: namespaced union of inputs equals union of outputs
  std::multiset<std::string> in, out;
  for (const LabeledPost& p : train.posts) in.insert("train:" + p.id);
  for (const LabeledPost& p : val.posts) in.insert("val:" + p.id);
  for (const LabeledPost& p : head1.posts) out.insert(p.id);
  for (const LabeledPost& p : tail1.posts) out.insert(p.id);
  CHECK(in == out);

  // per-label floor rule: head gets floor(0.9 * n_label)
  const size_t fake_total = 31 + 11, real_total = 40 + 13;
  CHECK(head1.count(Label::Fake) == static_cast<size_t>(0.9 * fake_total));
  CHECK(head1.count(Label::Real) == static_cast<size_t>(0.9 * real_total));
}

TEST_CASE("combine_and_split mirrors the published split arithmetic") {
  // 6420 train (3060/3360) + 2140 validation (1020/1120) at 0.9
  const Corpus train = toy_corpus("train", 3060, 3360);
  const Corpus val = toy_corpus("val", 1020, 1120);
  SplitSpec spec;
  auto [head, tail] = combine_and_split(train, val, spec);
  CHECK(head.size() == 7704);
  CHECK(tail.size() == 856);
  CHECK(head.count(Label::Fake) == 3672);  // floor(0.9 * 4080)
  CHECK(head.count(Label::Real) == 4032);  // floor(0.9 * 4480)
}

TEST_CASE("combine_and_split error paths") {
  const Corpus train = toy_corpus("train", 1, 1);
  const Corpus val = toy_corpus("val", 1, 1);
  SplitSpec spec;
  spec.ratio = 0.5;
  // floor(0.5 * 2) = 1 works; floor on a single-post label side fails
  const Corpus tiny = toy_corpus("train", 1, 4);
  const Corpus tiny_val = toy_corpus("val", 0, 4);
  CHECK_THROWS_AS(combine_and_split(tiny, tiny_val, spec), DomainError);

  // duplicate ids after namespacing
  Corpus same_a = toy_corpus("x", 2, 2);
  Corpus same_b = toy_corpus("x", 2, 2);
  CHECK_THROWS_AS(combine_and_split(same_a, same_b, spec), DomainError);

  SplitSpec bad;
  bad.ratio = 1.0;
  CHECK_THROWS_AS(combine_and_split(train, val, bad), DomainError);
}

TEST_CASE("stopword list is fixed and hashed") {
  CHECK(stopword_list().size() == 179);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("don't"));
  CHECK(!is_stopword("cdc"));
  CHECK(stopword_list_hash_hex().size() == 16);
  CHECK(stopword_list_hash() != 0);

  // shipped file matches the embedded list
  vtest::TempDir dir;
  const std::string path = dir.file("stopwords.txt");
  write_stopword_file(path);
  const std::string written = vtest::read_file(path);
  const std::string shipped =
      vtest::read_file(std::string(VERITEXT_SOURCE_DIR) + "/data/stopwords_en.txt");
  CHECK(written == shipped);
}
