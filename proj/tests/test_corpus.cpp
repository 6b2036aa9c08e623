#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mem2seq/corpus.hpp"
#include "mem2seq/text.hpp"

using namespace m2s;

namespace {

// Two short dialogs in the shared bAbI/DSTC2 line format; the second has KB
// result lines between exchanges.
const char* kTwoDialogs =
    "1 hi\thello what can i help you with today\n"
    "2 can you book a table\ti'm on it\n"
    "\n"
    "1 <SILENCE>\twhere should it be\n"
    "2 resto_a R_cuisine italian\n"
    "3 resto_a R_phone resto_a_phone\n"
    "4 paris please\twhat do you think of this option: resto_a\n"
    "5 give me the phone\there it is resto_a_phone\n";

DatasetSplit two_dialogs() {
  std::istringstream in(kTwoDialogs);
  return parse_babi(in, "fixture", "train");
}

// Table 1 of the navigation domain as an In-Car record.
const char* kKvrRecord = R"([
 {"dialogue": [
   {"turn": "driver", "data": {"end_dialogue": false, "utterance": "Where can I get tea?"}},
   {"turn": "assistant", "data": {"utterance": "Palo Alto Cafe is 4 miles away and serves coffee and tea."}},
   {"turn": "driver", "data": {"utterance": "Yes."}},
   {"turn": "assistant", "data": {"utterance": "Palo Alto is located at 436 Alger Dr."}}],
  "scenario": {"task": {"intent": "navigate"}, "uuid": "x",
   "kb": {"column_names": ["poi", "distance", "traffic_info", "poi_type", "address"],
    "items": [
     {"poi": "The Westin", "distance": "5 miles", "traffic_info": "moderate traffic", "poi_type": "rest stop", "address": "329 El Camino Real"},
     {"poi": "Round Table", "distance": "4 miles", "traffic_info": "no traffic", "poi_type": "pizza restaurant", "address": "113 Anton Ct"},
     {"poi": "Mandarin Roots", "distance": "5 miles", "traffic_info": "no traffic", "poi_type": "chinese restaurant", "address": "271 Springer Street"},
     {"poi": "Palo Alto Cafe", "distance": "4 miles", "traffic_info": "moderate traffic", "poi_type": "coffee or tea place", "address": "436 Alger Dr"},
     {"poi": "Dominos", "distance": "6 miles", "traffic_info": "heavy traffic", "poi_type": "pizza restaurant", "address": "776 Arastradero Rd"},
     {"poi": "Stanford Express Care", "distance": "6 miles", "traffic_info": "no traffic", "poi_type": "hospital", "address": "214 El Camino Real"},
     {"poi": "Hotel Keen", "distance": "2 miles", "traffic_info": "heavy traffic", "poi_type": "rest stop", "address": "578 Arbol Dr"}]}}},
 {"dialogue": [
   {"turn": "driver", "data": {"utterance": "what is the weather"}},
   {"turn": "assistant", "data": {"utterance": "which city"}}],
  "scenario": {"task": {"intent": "weather"}, "kb": {"items": null}}}
])";

EntityMatcher table_entities() {
  return EntityMatcher({"palo alto cafe", "palo alto", "4 miles", "436 alger dr", "5 miles", "tea"});
}

}  // namespace

TEST(TaskSpec, ParsesKnownTasks) {
  EXPECT_EQ(TaskSpec::parse("babi:3"), (TaskSpec{DatasetKind::Babi, 3}));
  EXPECT_EQ(TaskSpec::parse("dstc2").kind, DatasetKind::Dstc2);
  EXPECT_EQ(TaskSpec::parse("kvr").kind, DatasetKind::Kvr);
  EXPECT_EQ(TaskSpec::parse("babi:5").name(), "babi:5");
  EXPECT_THROW(TaskSpec::parse("babi:6"), std::invalid_argument);
  EXPECT_THROW(TaskSpec::parse("squad"), std::invalid_argument);
}

TEST(ParseBabi, EmptyInputGivesEmptySplit) {
  std::istringstream in("");
  DatasetSplit s = parse_babi(in, "empty");
  EXPECT_TRUE(s.samples.empty());
  EXPECT_EQ(s.dialog_count(), 0u);
}

TEST(ParseBabi, TwoDialogFixtureEnumerated) {
  DatasetSplit s = two_dialogs();
  ASSERT_EQ(s.samples.size(), 5u);
  EXPECT_EQ(s.dialog_count(), 2u);

  const DialogSample& a0 = s.samples[0];
  ASSERT_EQ(a0.history.size(), 1u);
  EXPECT_EQ(a0.history[0], (Turn{Speaker::User, 1, {"hi"}}));
  EXPECT_EQ(a0.response, (std::vector<std::string>{"hello", "what", "can", "i", "help", "you", "with", "today"}));
  EXPECT_TRUE(a0.kb.empty());

  const DialogSample& a1 = s.samples[1];
  ASSERT_EQ(a1.history.size(), 3u);
  EXPECT_EQ(a1.history[1].speaker, Speaker::System);
  EXPECT_EQ(a1.history[1].turn, 1u);
  EXPECT_EQ(a1.history[2], (Turn{Speaker::User, 2, {"can", "you", "book", "a", "table"}}));
  EXPECT_EQ(a1.dialog_id, a0.dialog_id);

  const DialogSample& b0 = s.samples[2];
  EXPECT_NE(b0.dialog_id, a0.dialog_id);
  EXPECT_EQ(b0.history, (std::vector<Turn>{{Speaker::User, 1, {"<silence>"}}}));
  EXPECT_TRUE(b0.kb.empty());

  const DialogSample& b1 = s.samples[3];
  EXPECT_EQ(b1.kb, (std::vector<KbTriple>{{"resto_a", "r_cuisine", "italian"}, {"resto_a", "r_phone", "resto_a_phone"}}));
  EXPECT_EQ(b1.history.size(), 3u);
  EXPECT_EQ(b1.history[2].turn, 2u);
  EXPECT_EQ(s.samples.back().response.back(), "resto_a_phone");
}

TEST(ParseBabi, DialogBoundaryOnLineNumberReset) {
  std::istringstream in("1 a\tb\n2 c\td\n1 e\tf\n");
  DatasetSplit s = parse_babi(in, "reset");
  EXPECT_EQ(s.dialog_count(), 2u);
  EXPECT_EQ(s.samples[2].history.size(), 1u);
}

TEST(ParseBabi, MalformedLinesNameTheLine) {
  std::istringstream no_number("1 a\tb\nhello\tthere\n");
  try {
    parse_babi(no_number, "bad.txt");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.txt:2"), std::string::npos) << e.what();
  }
  std::istringstream two_tabs("1 a\tb\tc\n");
  EXPECT_THROW(parse_babi(two_tabs, "tabs"), DataError);
  std::istringstream short_kb("1 a b\n");
  EXPECT_THROW(parse_babi(short_kb, "kb"), DataError);
}

TEST(ParseDstc2, SameFormatDifferentTag) {
  std::istringstream in(kTwoDialogs);
  DatasetSplit s = parse_dstc2(in, "dstc");
  EXPECT_EQ(s.format, "dstc2");
  EXPECT_EQ(s.samples.size(), 5u);
  EXPECT_EQ(s.samples[0].domain, "dstc2");
}

TEST(ParseKvr, TableExpandsToTwentyEightTriples) {
  DatasetSplit s = parse_kvr(kKvrRecord, "kvr", table_entities());
  ASSERT_EQ(s.samples.size(), 3u);
  EXPECT_EQ(s.dialog_count(), 2u);
  const DialogSample& first = s.samples[0];
  EXPECT_EQ(first.domain, "navigate");
  EXPECT_EQ(first.kb.size(), 28u);
  EXPECT_EQ(first.kb[0].subject, "the westin");
  EXPECT_TRUE(std::find(first.kb.begin(), first.kb.end(), KbTriple{"palo alto cafe", "distance", "4 miles"}) !=
              first.kb.end());
  EXPECT_EQ(first.response[0], "palo_alto_cafe");
  EXPECT_EQ(first.response[2], "4_miles");
  EXPECT_EQ(first.entities, (std::vector<std::string>{"palo alto cafe", "4 miles"}));
  EXPECT_EQ(s.samples[1].history.size(), 3u);
  EXPECT_EQ(s.samples[1].history[2].turn, 2u);
}

TEST(ParseKvr, EmptyKbGivesNoTriples) {
  DatasetSplit s = parse_kvr(kKvrRecord, "kvr", table_entities());
  EXPECT_EQ(s.samples[2].domain, "weather");
  EXPECT_TRUE(s.samples[2].kb.empty());
}

TEST(ParseKvr, SchemaErrors) {
  EXPECT_THROW(parse_kvr(R"([{"dialogue": [], "scenario": {"task": {"intent": "navigate"}}}])", "k", {}), DataError);
  EXPECT_THROW(parse_kvr(R"([{"dialogue": [], "scenario": {"task": {"intent": "music"}, "kb": {}}}])", "k", {}),
               DataError);
  EXPECT_THROW(parse_kvr("{not json", "k", {}), DataError);
}

TEST(ParseKvr, EntityFileFlattens) {
  auto e = parse_kvr_entities(R"({"poi": [{"address": "436 Alger Dr", "poi": "Palo Alto Cafe", "type": "coffee"}],
                                  "distance": ["4 miles"]})",
                              "ent");
  EXPECT_EQ(e, (std::set<std::string>{"436 alger dr", "palo alto cafe", "coffee", "4 miles"}));
}

TEST(BuildVocab, FirstOccurrenceOrder) {
  DatasetSplit s = two_dialogs();
  Vocab v = build_vocab(s);
  Vocab tags;
  tags.add_tags();
  ASSERT_GT(v.size(), tags.size());
  EXPECT_EQ(v.word(tags.size()), "hi");
  EXPECT_EQ(v.word(tags.size() + 1), "hello");
  EXPECT_TRUE(v.contains("resto_a_phone"));
  EXPECT_TRUE(v.contains("r_cuisine"));
  EXPECT_EQ(build_vocab(s), v);
}

TEST(BuildVocab, EmptySplitHasReservedAndTagsOnly) {
  Vocab v = build_vocab(DatasetSplit{});
  Vocab tags;
  tags.add_tags();
  EXPECT_EQ(v, tags);
  EXPECT_EQ(v.size(), Vocab::kReservedCount + 2 + Vocab::kMaxTimeTag);
}

TEST(ComputeStats, SingleSampleHandCount) {
  std::istringstream in(
      "1 resto_a R_phone resto_a_phone\n"
      "2 phone of resto_a\there it is resto_a_phone\n");
  DatasetSplit s = parse_babi(in, "one");
  Vocab v = build_vocab(s);
  CorpusStats st = compute_stats(s, v);
  EXPECT_EQ(st.dialogs, 1u);
  EXPECT_EQ(st.samples, 1u);
  EXPECT_DOUBLE_EQ(st.avg_user_turns, 1.0);
  EXPECT_DOUBLE_EQ(st.avg_system_turns, 1.0);
  EXPECT_DOUBLE_EQ(st.avg_kb_results, 1.0);
  EXPECT_DOUBLE_EQ(st.avg_system_words, 4.0);
  EXPECT_EQ(st.max_system_words, 4u);
  // Only "resto_a_phone" has a memory match.
  EXPECT_DOUBLE_EQ(st.pointer_ratio, 0.25);
  EXPECT_EQ(st.vocab_size, v.size());
}

TEST(ComputeStats, PointerRatioMatchesRawStringScan) {
  DatasetSplit s = two_dialogs();
  Vocab v = build_vocab(s);
  std::size_t total = 0, hits = 0;
  for (const auto& sample : s.samples) {
    std::set<std::string> words;
    for (const auto& t : sample.kb) words.insert(t.object);
    for (const auto& turn : sample.history) words.insert(turn.tokens.begin(), turn.tokens.end());
    for (const auto& y : sample.response) {
      ++total;
      hits += words.count(y);
    }
  }
  EXPECT_DOUBLE_EQ(compute_stats(s, v).pointer_ratio, static_cast<double>(hits) / static_cast<double>(total));
  CorpusStats st = compute_stats(s, v);
  EXPECT_DOUBLE_EQ(st.avg_user_turns, 2.0);
  EXPECT_DOUBLE_EQ(st.avg_system_turns, 2.5);
  EXPECT_DOUBLE_EQ(st.avg_kb_results, 1.0);
}

TEST(Canonical, RoundTripIsIdentity) {
  DatasetSplit s = two_dialogs();
  annotate_entities(s, EntityMatcher(std::set<std::string>{"resto_a_phone", "italian"}));
  std::stringstream buf;
  write_canonical(buf, s);
  DatasetSplit back = read_canonical(buf, "buf", "train");
  ASSERT_EQ(back.samples.size(), s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) EXPECT_EQ(back.samples[i], s.samples[i]) << i;

  DatasetSplit kvr = parse_kvr(kKvrRecord, "kvr", table_entities());
  std::stringstream kbuf;
  write_canonical(kbuf, kvr);
  DatasetSplit kback = read_canonical(kbuf, "kbuf");
  for (std::size_t i = 0; i < kvr.samples.size(); ++i) EXPECT_EQ(kback.samples[i], kvr.samples[i]);
}

TEST(Canonical, FieldOrderIsStable) {
  DatasetSplit s = two_dialogs();
  std::stringstream buf;
  write_canonical(buf, s);
  std::string first;
  std::getline(buf, first);
  EXPECT_EQ(first.find("{\"dialog_id\""), 0u);
  EXPECT_LT(first.find("\"domain\""), first.find("\"history\""));
  EXPECT_LT(first.find("\"kb\""), first.find("\"response\""));
  EXPECT_LT(first.find("\"response\""), first.find("\"entities\""));
}

TEST(Canonical, EmptySplitAndSchemaErrors) {
  std::stringstream empty;
  write_canonical(empty, DatasetSplit{});
  EXPECT_TRUE(empty.str().empty());
  EXPECT_TRUE(read_canonical(empty, "e").samples.empty());

  std::istringstream extra(
      R"({"dialog_id":"a","domain":"d","history":[],"kb":[],"response":["x"],"entities":[],"mood":"happy"})");
  try {
    read_canonical(extra, "extra.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown field 'mood'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("extra.jsonl:1"), std::string::npos);
  }
  std::istringstream missing(R"({"dialog_id":"a","domain":"d","history":[],"kb":[],"response":["x"]})");
  EXPECT_THROW(read_canonical(missing, "m"), DataError);
  std::istringstream bad_kb(R"({"dialog_id":"a","domain":"d","history":[],"kb":[["a","b"]],"response":[],"entities":[]})");
  EXPECT_THROW(read_canonical(bad_kb, "k"), DataError);
}

TEST(Entities, DerivedFromKbObjects) {
  DatasetSplit s = two_dialogs();
  const DatasetSplit* splits[] = {&s};
  EXPECT_EQ(kb_entities(splits), (std::set<std::string>{"italian", "resto a phone"}));
  EXPECT_EQ(count_words(splits), build_vocab(s).size() - (Vocab::kReservedCount + 2 + Vocab::kMaxTimeTag));
}

TEST(DataRoot, FlagThenEnvironment) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "m2s_root_test";
  fs::create_directories(dir);
  EXPECT_EQ(resolve_data_root(dir.string()), dir);
  ::setenv("M2S_DATA", dir.string().c_str(), 1);
  EXPECT_EQ(resolve_data_root(""), dir);
  ::unsetenv("M2S_DATA");
  EXPECT_THROW(resolve_data_root(""), DataError);
  EXPECT_THROW(resolve_data_root((dir / "missing").string()), DataError);
}

TEST(LoadDataset, FindsStandardFileNames) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "m2s_load_test" / "dialog-bAbI-tasks";
  fs::create_directories(dir);
  for (const char* suffix : {"trn", "dev", "tst", "tst-OOV"}) {
    std::ofstream(dir / ("dialog-babi-task1-API-calls-" + std::string(suffix) + ".txt")) << kTwoDialogs;
  }
  Dataset ds = load_dataset(TaskSpec::parse("babi:1"), dir.parent_path());
  EXPECT_EQ(ds.train.samples.size(), 5u);
  EXPECT_EQ(ds.val.name, "val");
  ASSERT_TRUE(ds.test_oov.has_value());
  EXPECT_EQ(&ds.split("test-oov"), &*ds.test_oov);
  EXPECT_FALSE(ds.entities.empty());
  EXPECT_EQ(ds.train.samples[4].entities, (std::vector<std::string>{"resto a phone"}));
  EXPECT_THROW(load_dataset(TaskSpec::parse("dstc2"), dir.parent_path()), DataError);
}
