#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lmf/ingest.hpp"
#include "lmf/kv_config.hpp"
#include "lmf/simulator.hpp"
#include "support.hpp"

using namespace lmf;

namespace {

IngestResult from_text(const std::string& text, std::int64_t min_tx = 0, int trim = 10) {
  std::istringstream in(text);
  IngestOptions o;
  o.min_transactions = min_tx;
  o.trim_minutes = trim;
  return ingest(in, o, "sample.csv");
}

std::string parse_error_text(const std::string& text) {
  try {
    from_text(text);
  } catch (const LmfError& e) {
    if (e.code() == ErrorCode::ParseError) return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("three valid rows make one datapoint") {
  auto r = from_text("seq,trader_id,sign,day\n0,A,+1,0\n1,B,-1,0\n2,A,+1,1\n");
  REQUIRE(r.datapoints.size() == 1);
  const auto& dp = r.datapoints[0];
  CHECK(dp.label == "sample");
  CHECK(dp.events.size() == 3);
  CHECK(dp.n_traders() == 2);
  CHECK(dp.events[2].day == 1);
  CHECK(r.dropped.empty());
}

TEST_CASE("small datapoints are dropped with a reason") {
  std::ostringstream csv;
  csv << "seq,trader_id,sign\n";
  for (int i = 0; i < 10'000; ++i) csv << i << ",t" << i % 7 << ',' << (i % 3 ? "B" : "S") << '\n';
  auto r = from_text(csv.str(), 500'000);
  CHECK(r.datapoints.empty());
  REQUIRE(r.dropped.size() == 1);
  CHECK(r.dropped[0].n_events == 10'000);
  CHECK(r.dropped[0].reason.rfind("InsufficientData", 0) == 0);
  auto exact = from_text(csv.str(), 10'000);
  CHECK(exact.datapoints.empty());
  CHECK(from_text(csv.str(), 9'999).datapoints.size() == 1);
}

TEST_CASE("unknown sign token reports its line") {
  const auto msg = parse_error_text("seq,trader_id,sign\n0,A,+1\n1,A,Z\n");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("'Z'") != std::string::npos);
}

TEST_CASE("malformed rows") {
  CHECK(parse_error_text("seq,trader_id,sign\n0,A\n").find("line 2") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign\nx,A,1\n").find("bad seq") != std::string::npos);
  CHECK(parse_error_text("seq,trader,sign\n0,A,1\n").find("unknown column") != std::string::npos);
  CHECK(parse_error_text("seq,sign\n0,1\n").find("header") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign\n0,A,1\n0,B,1\n").find("duplicate seq") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign,day\n0,A,1,3\n1,A,1,2\n").find("day decreases") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign,day\n0,A,1,3\n1,A,1,2024-01-02\n").find("mixed") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign,day\n0,A,1,3\n1,A,1,\n").find("day missing") != std::string::npos);
  CHECK(parse_error_text("seq,trader_id,sign,day\n0,A,1,2024-02-30\n").find("bad day") != std::string::npos);
  CHECK(parse_error_text("").find("missing header") != std::string::npos);
}

TEST_CASE("sign tokens") {
  CHECK(parse_sign_token("+1") == 1);
  CHECK(parse_sign_token("1") == 1);
  CHECK(parse_sign_token("-1") == -1);
  CHECK(parse_sign_token("B") == 1);
  CHECK(parse_sign_token("b") == 1);
  CHECK(parse_sign_token("S") == -1);
  CHECK(parse_sign_token("s") == -1);
  CHECK_FALSE(parse_sign_token("0"));
  CHECK_FALSE(parse_sign_token("Z"));
  CHECK_FALSE(parse_sign_token(""));
}

TEST_CASE("dates and clocks") {
  CHECK(parse_iso_date("1970-01-01") == 0);
  CHECK(parse_iso_date("2000-03-01") == 11017);
  CHECK(parse_iso_date("2024-02-29"));
  CHECK_FALSE(parse_iso_date("2023-02-29"));
  CHECK_FALSE(parse_iso_date("2023-13-01"));
  CHECK_FALSE(parse_iso_date("20230101"));
  CHECK(parse_clock("09:00:00") == 32400);
  CHECK(parse_clock("15:00:30") == 54030);
  CHECK_FALSE(parse_clock("25:00:00"));
  CHECK_FALSE(parse_clock("9:00"));
}

TEST_CASE("rows are ordered by seq and labels group datapoints") {
  auto r = from_text(
      "label,seq,trader_id,sign\n"
      "y,5,A,S\n"
      "x,2,A,B\n"
      "x,1,B,S\n"
      "y,4,C,B\n");
  REQUIRE(r.datapoints.size() == 2);
  CHECK(r.datapoints[0].label == "x");
  CHECK(r.datapoints[0].events[0].seq == 1);
  CHECK(r.datapoints[0].events[0].sign == -1);
  CHECK(r.datapoints[1].label == "y");
  CHECK(r.datapoints[1].events[1].seq == 5);
}

TEST_CASE("ISO dates become business-day ranks") {
  auto r = from_text(
      "seq,trader_id,sign,day\n"
      "0,A,1,2024-03-01\n"
      "1,A,1,2024-03-04\n"
      "2,A,1,2024-03-04\n"
      "3,A,1,2024-03-06\n");
  REQUIRE(r.datapoints.size() == 1);
  const auto& ev = r.datapoints[0].events;
  CHECK(ev[0].day == 0);
  CHECK(ev[1].day == 1);
  CHECK(ev[2].day == 1);
  CHECK(ev[3].day == 2);
}

TEST_CASE("session edges are trimmed per day") {
  auto clock = [](int seconds) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds / 3600, seconds / 60 % 60, seconds % 60);
    return std::string(buf);
  };
  std::ostringstream csv;
  csv << "seq,trader_id,sign,day,time\n";
  int seq = 0;
  for (int day = 0; day < 2; ++day)
    for (int minute = 0; minute <= 60; ++minute)
      csv << seq++ << ",A," << (minute % 2 ? "B" : "S") << ',' << day << ',' << clock(9 * 3600 + minute * 60) << '\n';
  auto r = from_text(csv.str(), 0, 10);
  REQUIRE(r.datapoints.size() == 1);
  CHECK(r.datapoints[0].events.size() == 2 * 41);
  CHECK(r.trimmed_events == 2 * 20);
  auto untrimmed = from_text(csv.str(), 0, 0);
  CHECK(untrimmed.datapoints[0].events.size() == 2 * 61);
}

TEST_CASE("events CSV and truth sidecar round trip") {
  SimConfig c;
  c.label = "roundtrip";
  c.n_st = 5;
  c.n_steps = 3000;
  c.rt_fraction = 0.2;
  c.n_rt = 3;
  c.steps_per_day = 500;
  c.seed = 61;
  auto dp = simulate(c);
  const auto dir = std::filesystem::temp_directory_path() / "lmf_ingest_rt";
  std::filesystem::create_directories(dir);
  write_events_csv(std::vector<MarketDatapoint>{dp}, dir / "events.csv");
  write_truth_json(std::vector<MarketDatapoint>{dp}, dir / "truth.json");
  auto r = ingest(dir / "events.csv", IngestOptions{0, 10, ""});
  REQUIRE(r.datapoints.size() == 1);
  auto& back = r.datapoints[0];
  CHECK(back.label == "roundtrip");
  REQUIRE(back.events.size() == dp.events.size());
  bool same = true;
  for (std::size_t i = 0; i < dp.events.size(); ++i) {
    same = same && back.events[i].seq == dp.events[i].seq && back.events[i].sign == dp.events[i].sign &&
           back.events[i].day == dp.events[i].day &&
           back.trader_names[back.events[i].trader] == dp.trader_names[dp.events[i].trader];
  }
  CHECK(same);
  attach_truth_json(r.datapoints, dir / "truth.json");
  REQUIRE(back.truth);
  CHECK(back.truth->n_st == 5);
  CHECK(back.truth->alpha == 1.5);
  CHECK(back.truth->intensities.size() == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("key-value config") {
  auto kv = KvConfig::parse("# comment\nalpha = 1.5\nlist = 1, 2,3\nflag = yes\nbig = 1e6\nname = a b\n");
  CHECK(kv.get_double("alpha", 0) == 1.5);
  CHECK(kv.get_doubles("list", {}) == std::vector<double>{1, 2, 3});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_int("big", 0) == 1'000'000);
  CHECK(kv.get_string("name", "") == "a b");
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK(kv.unused_keys().empty());
  auto kv2 = KvConfig::parse("a = 1\nb = 2\n");
  kv2.get_int("a", 0);
  CHECK(kv2.unused_keys() == std::vector<std::string>{"b"});
  CHECK_LMF_CODE(KvConfig::parse("a = 1\na = 2\n"), ErrorCode::ParseError);
  CHECK_LMF_CODE(KvConfig::parse("no equals sign\n"), ErrorCode::ParseError);
  CHECK_LMF_CODE(KvConfig::parse("x = abc\n").get_int("x", 0), ErrorCode::ParseError);
  CHECK_LMF_CODE(KvConfig::parse("x = 1.5\n").get_int("x", 0), ErrorCode::ParseError);
  CHECK_LMF_CODE(KvConfig::parse("x = maybe\n").get_bool("x", false), ErrorCode::ParseError);
}
