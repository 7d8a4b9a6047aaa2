#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "helpers.hpp"
#include "mpc/core.hpp"

using namespace mpc;

TEST_CASE("stance distribution admissible values") {
    const auto& all = StanceDistribution::admissible_values();
    REQUIRE(all.size() == 6);
    CHECK(all[0] == StanceDistribution{2, 2});
    for (const auto& d : all) {
        CHECK(d.admissible());
        CHECK(d.total() >= 4);
        CHECK(d.total() <= 6);
    }
    CHECK_FALSE(StanceDistribution{1, 1}.admissible());
    CHECK_FALSE(StanceDistribution{5, 1}.admissible());
    CHECK_FALSE(StanceDistribution{2, 5}.admissible());
    CHECK(StanceDistribution{3, 2}.label() == "3v2");
}

TEST_CASE("enum string round trips") {
    for (auto p : {Polarity::progressive, Polarity::conservative})
        CHECK(polarity_from_string(to_string(p)) == p);
    for (auto s : {StanceValue::pro, StanceValue::against})
        CHECK(stance_from_string(to_string(s)) == s);
    for (auto s : {Strategy::one_long, Strategy::turn_by_turn})
        CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_FALSE(strategy_from_string("zigzag").has_value());
}

TEST_CASE("minimal round trip identity") {
    Mpc x = testutil::make_mpc(4, 1);
    auto record = serialize_mpc(x);
    auto parsed = parse_mpc(record);
    REQUIRE(parsed.ok());
    CHECK(parsed.value() == x);
    CHECK(serialize_mpc(parsed.value()) == record);
}

TEST_CASE("unicode speaker names round trip byte-identically") {
    Mpc x = testutil::make_mpc(4, 3);
    x.speakers[0].name = "Åsa";
    x.speakers[1].name = "李雷";
    for (auto& t : x.turns) {
        if (t.speaker == "Ada") t.speaker = "Åsa";
        if (t.speaker == "Bo") t.speaker = "李雷";
        for (auto& a : t.addressees) {
            if (a == "Ada") a = "Åsa";
            if (a == "Bo") a = "李雷";
        }
        std::sort(t.addressees.begin(), t.addressees.end());
    }
    auto record = serialize_mpc(x);
    auto parsed = parse_mpc(record);
    REQUIRE(parsed.ok());
    CHECK(serialize_mpc(parsed.value()) == record);
}

TEST_CASE("canonical form is a fixpoint for a 6-speaker 15-turn fixture") {
    Mpc x = testutil::make_mpc(6, 15);
    auto once = serialize_mpc(x);
    auto twice = serialize_mpc(parse_mpc(once).value());
    CHECK(once == twice);
}

TEST_CASE("self-interaction rejected with named error") {
    Mpc x = testutil::make_mpc(4, 2);
    x.turns[1].addressees = {x.turns[1].speaker};
    auto record = serialize_mpc(x);
    auto parsed = parse_mpc(record);
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error().kind == "invariant");
    CHECK(parsed.error().message.find("self-interaction") != std::string::npos);
}

TEST_CASE("missing speakers field yields missing-field error") {
    Mpc x = testutil::make_mpc(4, 2);
    auto record = serialize_mpc(x);
    auto pos = record.find("\"speakers\"");
    REQUIRE(pos != std::string::npos);
    nlohmann::json j = nlohmann::json::parse(record);
    j.erase("speakers");
    auto parsed = parse_mpc(j.dump());
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error().kind == "missing_field");
    CHECK(parsed.error().field.find("speakers") != std::string::npos);
}

TEST_CASE("malformed syntax distinguishable") {
    auto parsed = parse_mpc("{not json");
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error().kind == "syntax");
}

TEST_CASE("lenient parse accepts what strict rejects") {
    Mpc x = testutil::make_mpc(4, 2);
    x.turns[1].addressees = {x.turns[1].speaker};
    auto record = serialize_mpc(x);
    CHECK_FALSE(parse_mpc(record, true).ok());
    CHECK(parse_mpc(record, false).ok());
}

TEST_CASE("validate_mpc catches duplicate names and index gaps") {
    Mpc x = testutil::make_mpc(4, 3);
    CHECK_FALSE(validate_mpc(x).has_value());
    Mpc dup = x;
    dup.speakers[1].name = dup.speakers[0].name;
    CHECK(validate_mpc(dup).has_value());
    Mpc gap = x;
    gap.turns[2].index = 5;
    CHECK(validate_mpc(gap).has_value());
}

TEST_CASE("property: 300 randomized valid MPCs round trip byte-identically") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 300; ++i) {
        Mpc x = testutil::random_mpc(rng, i);
        auto record = serialize_mpc(x);
        auto parsed = parse_mpc(record);
        REQUIRE(parsed.ok());
        CHECK(parsed.value() == x);
        CHECK(serialize_mpc(parsed.value()) == record);
    }
}

TEST_CASE("bundled topic statements: 38 pairs, 76 statements") {
    auto loaded = load_topic_statements(std::string(MPC_SOURCE_DIR) +
                                        "/data/topic_statements.json");
    REQUIRE(loaded.ok());
    CHECK(loaded.value().size() == 76);
    std::map<std::string, std::set<std::string>> by_topic;
    for (const auto& st : loaded.value())
        by_topic[st.topic_id].insert(to_string(st.polarity));
    CHECK(by_topic.size() == 38);
    for (const auto& [topic, polarities] : by_topic) {
        CHECK(polarities.count("progressive") == 1);
        CHECK(polarities.count("conservative") == 1);
    }
}

TEST_CASE("corpus append and read") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "mpc_test_corpus.jsonl").string();
    fs::remove(path);
    std::vector<Mpc> batch = {testutil::make_mpc(4, 5),
                              testutil::make_mpc(5, 7, "other-topic")};
    append_corpus(path, batch);
    append_corpus(path, {testutil::make_mpc(6, 15, "third-topic")});
    auto read = read_corpus(path);
    REQUIRE(read.ok());
    CHECK(read.value().size() == 3);
    CHECK(read.value()[0] == batch[0]);
    fs::remove(path);
}

TEST_CASE("make_id is deterministic and distinguishes provenance") {
    auto a = testutil::make_mpc(4, 5);
    auto b = testutil::make_mpc(4, 5);
    CHECK(a.id == b.id);
    auto c = testutil::make_mpc(4, 5, "civil-topic", Polarity::progressive, 1);
    CHECK(a.id != c.id);
}
