// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <mutex>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "driftdiff/cluster.hpp"
#include "driftdiff/datadiff.hpp"
#include "driftdiff/error.hpp"
#include "driftdiff/label.hpp"
#include "driftdiff/labeler_clients.hpp"
#include "support.hpp"

using namespace driftdiff;
using namespace driftdiff::label;
using nlohmann::json;

namespace {

datadiff::CellDiff cell(std::string key, std::string column, std::string_view a, std::string_view b, ValueType t) {
    auto d = datadiff::diff_raw(a, b, column, t);
    REQUIRE(d);
    d->key = RowKey{{std::move(key)}};
    return *d;
}

struct Fixture {
    std::vector<datadiff::CellDiff> diffs;
    std::vector<cluster::Cluster> clusters;

    explicit Fixture(std::vector<datadiff::CellDiff> d) : diffs(std::move(d)) {
        clusters = cluster::finalize_clusters(cluster::assign(diffs), diffs);
    }
    const cluster::Cluster& by_id(const std::string& id) const {
        for (const auto& c : clusters)
            if (c.id == id) return c;
        FAIL("no cluster " << id);
        return clusters.front();
    }
};

Fixture rounding_fixture(int n = 12) {
    std::vector<datadiff::CellDiff> d;
    for (int i = 0; i < n; ++i) {
        const auto src = std::to_string(100 + i) + ".4567";
        d.push_back(cell(std::to_string(i), "price", src, std::to_string(100 + i) + ".46", ValueType::Float));
    }
    return Fixture(std::move(d));
}

/// Replies with a fixed string to every prompt.
class FixedClient final : public LabelerClient {
public:
    explicit FixedClient(std::string reply) : reply_(std::move(reply)) {}
    std::string complete(const std::string& prompt, const json&, double) override {
        std::lock_guard lock(mutex_);
        prompts.push_back(prompt);
        return reply_;
    }
    std::vector<std::string> prompts;

private:
    std::string reply_;
    std::mutex mutex_;
};

class ThrowingClient final : public LabelerClient {
public:
    std::string complete(const std::string&, const json&, double) override {
        throw std::runtime_error("boom");
    }
};

LabelJudgment judgment(std::vector<std::string> labels, double conf) {
    LabelJudgment j;
    for (auto& l : labels) j.labels.push_back({l, l == "Other" ? "because" : ""});
    j.confidence = conf;
    j.origin = Origin::Model;
    return j;
}

} // namespace

TEST_CASE("ontology") {
    const auto& o = ontology();
    CHECK(o.size() == 10);
    CHECK(std::is_sorted(o.begin(), o.end()));
    for (const char* name : {"Rounding", "Truncation", "TypeCast", "TimeZoneShift", "KeyMismatch", "CategoricalRemap",
                             "NullInflation", "SchemaRename", "BusinessRuleChange", "Other"})
        CHECK(in_ontology(name));
    CHECK_FALSE(in_ontology("FooBar"));
    CHECK_FALSE(in_ontology("rounding"));
    CHECK(implied_labels({"Rounding", "TypeMismatch", "CaseChange"}) == std::vector<std::string>{"Rounding", "TypeCast"});
}

TEST_CASE("pseudonymize") {
    const auto a = pseudonymize("AB12", "salt");
    CHECK(a == pseudonymize("AB12", "salt"));
    REQUIRE(a.size() == 4);
    CHECK(std::isupper(static_cast<unsigned char>(a[0])));
    CHECK(std::isupper(static_cast<unsigned char>(a[1])));
    CHECK(std::isdigit(static_cast<unsigned char>(a[2])));
    CHECK(std::isdigit(static_cast<unsigned char>(a[3])));
    CHECK(pseudonymize("a-b c.", "s").substr(1, 1) == "-");
    CHECK(pseudonymize("AB12", "other") != a);
    // Shared prefixes stay shared.
    CHECK(pseudonymize("AB123", "salt").substr(0, 4) == a);
}

TEST_CASE("sample_evidence") {
    SUBCASE("single member") {
        Fixture f({cell("1", "price", "1.2345", "1.23", ValueType::Float)});
        auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s");
        CHECK(pack.rows.size() == 1);
        CHECK(pack.evidence_row_ids.size() == 1);
        CHECK(pack.rows[0].rounding_decimals == 2);
        CHECK(pack.candidate_patterns == std::vector<std::string>{"Rounding"});
    }
    SUBCASE("identical members stay within budget") {
        std::vector<datadiff::CellDiff> d;
        for (int i = 0; i < 100; ++i) d.push_back(cell(std::to_string(i), "price", "1.2345", "1.23", ValueType::Float));
        Fixture f(std::move(d));
        PackContext ctx;
        ctx.key_spec = "Primary(id)";
        ctx.column_types["price"] = "Float->Float";
        for (int i = 0; i < 400; ++i) ctx.column_stats["price"].push_back("stat line number " + std::to_string(i));
        auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s", ctx, 200);
        CHECK(pack.rows.size() == 8);
        for (std::size_t i = 0; i < pack.rows.size(); ++i)
            for (std::size_t j = i + 1; j < pack.rows.size(); ++j) {
                CHECK(pack.rows[i].source == pack.rows[j].source);
                CHECK(pack.rows[i].target == pack.rows[j].target);
            }
        CHECK(count_tokens(serialize_pack(pack)) <= 200);
        std::set<std::string> ids(pack.evidence_row_ids.begin(), pack.evidence_row_ids.end());
        CHECK(ids.size() == 8);
    }
    SUBCASE("farthest-point selection prefers diverse rows") {
        std::vector<datadiff::CellDiff> d;
        for (int i = 0; i < 10; ++i) d.push_back(cell(std::to_string(i), "name", "abcdefghij", "abcdefghiX", ValueType::Text));
        d.push_back(cell("99", "name", "abcdefghij", "zzzzzzzzzz", ValueType::Text));
        std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
        Fixture f(std::move(d));
        auto pack = sample_evidence(f.clusters[0], f.diffs, 2, "s");
        REQUIRE(pack.rows.size() == 2);
        CHECK(pack.rows[0].source != pack.rows[0].target);
        const auto far = std::count_if(pack.rows.begin(), pack.rows.end(),
                                       [](const EvidenceRow& r) { return r.target.size() == 10; });
        CHECK(far == 2);
    }
}

TEST_CASE("no identifier substring reaches a prompt") {
    std::vector<datadiff::CellDiff> d;
    std::vector<std::string> identifiers;
    std::mt19937_64 rng(77);
    for (int i = 0; i < 40; ++i) {
        std::string id = "CUST-";
        for (int k = 0; k < 4; ++k) id += static_cast<char>('A' + rng() % 26);
        for (int k = 0; k < 4; ++k) id += static_cast<char>('0' + rng() % 10);
        std::string changed = id;
        changed.back() = changed.back() == '9' ? '0' : static_cast<char>(changed.back() + 1);
        identifiers.push_back(id);
        identifiers.push_back(changed);
        d.push_back(cell(id, "customer_ref", id, changed, ValueType::Text));
    }
    std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    Fixture f(std::move(d));
    FixedClient client("not json");
    LabelConfig cfg;
    cfg.salt = "driftdiff:42";
    KnowledgeIndex none;
    for (const auto& c : f.clusters) label_cluster(c, f.diffs, cfg, &client, none);
    REQUIRE_FALSE(client.prompts.empty());
    std::size_t checked = 0;
    for (const auto& prompt : client.prompts) {
        for (const auto& id : identifiers) {
            for (std::size_t start = 0; start + 4 <= id.size(); ++start) {
                const auto sub = id.substr(start, 4);
                // Substrings made only of format characters carry no identity.
                if (std::none_of(sub.begin(), sub.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) continue;
                CHECK_MESSAGE(prompt.find(sub) == std::string::npos, "leaked " << sub);
                ++checked;
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("knowledge retrieval") {
    KnowledgeIndex index;
    CHECK(index.retrieve({"amount"}, {"Rounding"}).empty());

    index.add_document("billing.md", "The amount is rounded to cents before export.\n\nUnrelated paragraph here.");
    auto hits = index.retrieve({"amount"}, {"Rounding"});
    REQUIRE_FALSE(hits.empty());
    CHECK(hits[0].doc_id == "billing.md");
    CHECK(hits[0].passage == 0);
    CHECK(hits[0].score > 0);

    KnowledgeIndex tie;
    tie.add_document("b.txt", "status codes changed");
    tie.add_document("a.txt", "status values moved");
    auto both = tie.retrieve({"status"}, {});
    REQUIRE(both.size() == 2);
    CHECK(both[0].doc_id == "a.txt");
    CHECK(both[1].doc_id == "b.txt");

    auto tokens = tokenize("CustomerID amount_cents");
    std::sort(tokens.begin(), tokens.end());
    CHECK(tokens == std::vector<std::string>{"amount", "cents", "customer", "customerid", "id"});
}

TEST_CASE("knowledge index loads text and markdown files") {
    driftdiff::testing::TempDir dir;
    driftdiff::testing::write_file(dir / "kb" / "a.md", "price is rounded\n\nsecond");
    driftdiff::testing::write_file(dir / "kb" / "b.txt", "city names");
    driftdiff::testing::write_file(dir / "kb" / "c.bin", "price price price");
    auto index = KnowledgeIndex::load(dir / "kb");
    CHECK(index.passage_count() == 3);
    CHECK(KnowledgeIndex::load(dir / "missing").passage_count() == 0);
}

TEST_CASE("build_prompt") {
    auto f = rounding_fixture();
    auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s");
    std::vector<KnowledgeSnippet> snippets = {{"doc.md", 0, "prices are rounded", 2}};
    auto a = build_prompt(pack, snippets);
    auto b = build_prompt(pack, snippets);
    CHECK(a.text == b.text);
    CHECK(a.text.find("## Context") != std::string::npos);
    CHECK(build_prompt(pack, {}).text.find("## Context") == std::string::npos);
    CHECK(a.text.find("## System") < a.text.find("## Evidence"));

    const auto& allowed = a.output_schema["properties"]["labels"]["items"]["enum"];
    CHECK(allowed.size() == ontology().size());
    CHECK(std::find(allowed.begin(), allowed.end(), "Other") != allowed.end());
}

TEST_CASE("parse_judgment") {
    CHECK(parse_judgment(R"({"labels":["Rounding"],"rationale":"r","confidence":0.5,"evidence_row_ids":[]})"));
    CHECK_FALSE(parse_judgment("garbage"));
    CHECK_FALSE(parse_judgment(R"({"labels":["FooBar"],"rationale":"r","confidence":0.5,"evidence_row_ids":[]})"));
    CHECK_FALSE(parse_judgment(R"({"labels":[],"rationale":"r","confidence":0.5,"evidence_row_ids":[]})"));
    CHECK_FALSE(parse_judgment(R"({"labels":["Rounding"],"rationale":"r","confidence":1.5,"evidence_row_ids":[]})"));
    CHECK_FALSE(parse_judgment(R"({"labels":["Rounding"],"confidence":0.5,"evidence_row_ids":[]})"));
    auto j = parse_judgment(
        R"({"labels":["Truncation","Rounding","Rounding"],"rationale":"r","confidence":0.5,"evidence_row_ids":["x"]})");
    REQUIRE(j);
    CHECK(j->label_string() == "Rounding:Truncation");
}

TEST_CASE("decode_labels") {
    auto f = rounding_fixture();
    auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s");
    const std::string valid = json{{"labels", {"Rounding"}},
                                   {"rationale", "prices in `price` are rounded"},
                                   {"confidence", 0.9},
                                   {"evidence_row_ids", pack.evidence_row_ids}}
                                  .dump();
    FixedClient ok(valid);
    auto three = decode_labels(ok, pack, {}, 3);
    CHECK(three.candidates.size() == 3);
    CHECK(three.failures.empty());
    CHECK(three.candidates[0] == three.candidates[2]);
    // Rotations change the prompt.
    CHECK(ok.prompts[0] != ok.prompts[1]);

    FixedClient bad("{{{");
    auto none = decode_labels(bad, pack, {}, 3);
    CHECK(none.candidates.empty());
    CHECK(none.failures == std::vector<GuardFailure>(3, GuardFailure::MalformedOutput));

    CHECK(decode_labels(ok, pack, {}, 1).candidates.size() == 1);
}

TEST_CASE("aggregate_judgments") {
    auto same = aggregate_judgments({judgment({"Rounding"}, 0.9), judgment({"Rounding"}, 0.9), judgment({"Rounding"}, 0.9)});
    CHECK(same.label_names() == std::vector<std::string>{"Rounding"});
    CHECK(same.confidence == doctest::Approx(0.9));

    auto majority = aggregate_judgments(
        {judgment({"Rounding", "Truncation"}, 0.8), judgment({"Rounding"}, 0.8), judgment({"Rounding"}, 0.8)});
    CHECK(majority.label_names() == std::vector<std::string>{"Rounding"});

    auto split = aggregate_judgments({judgment({"Rounding"}, 0.5), judgment({"Truncation"}, 0.9), judgment({"TypeCast"}, 0.6)});
    CHECK(split.label_names() == std::vector<std::string>{"Truncation"});
    CHECK(split.confidence == doctest::Approx(0.9 * (1.0 / 3.0)));

    auto single = aggregate_judgments({judgment({"TypeCast"}, 0.7)});
    CHECK(single.label_names() == std::vector<std::string>{"TypeCast"});
    CHECK(single.confidence == doctest::Approx(0.7));
}

TEST_CASE("calibrate_confidence") {
    cluster::Cluster c;
    c.purity = 1.0;
    CHECK(calibrate_confidence(judgment({"Rounding"}, 1.0), c, {"Rounding"}) == doctest::Approx(1.0));
    c.purity = 0.6;
    CHECK(calibrate_confidence(judgment({"Rounding", "TypeCast"}, 0.8), c, {"Rounding"}) ==
          doctest::Approx(0.5 * 0.8 + 0.3 * 0.5 + 0.2 * 0.6));
    CHECK(calibrate_confidence(judgment({"Rounding", "TypeCast"}, 0.8), c, {"Rounding"}) == doctest::Approx(0.67));
    CHECK(calibrate_confidence(judgment({"Rounding"}, 0.8), c, {}) == doctest::Approx(0.5 * 0.8 + 0.2 * 0.6));
}

TEST_CASE("passes_guards") {
    auto f = rounding_fixture();
    auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s");
    auto ok = judgment({"Rounding"}, 0.9);
    ok.rationale = "values in `price` are rounded";
    ok.evidence_row_ids = pack.evidence_row_ids;
    CHECK(passes_guards(ok, pack).passed);

    auto foo = ok;
    foo.labels = {{"FooBar", ""}};
    CHECK(passes_guards(foo, pack).failures == std::vector<GuardFailure>{GuardFailure::WhitelistViolation});

    auto col = ok;
    col.rationale = "see `no_such_column`";
    CHECK(passes_guards(col, pack).failures == std::vector<GuardFailure>{GuardFailure::UnknownColumnReference});

    auto ids = ok;
    ids.evidence_row_ids.push_back("row-unknown");
    CHECK(passes_guards(ids, pack).failures == std::vector<GuardFailure>{GuardFailure::EvidenceIdUnknown});

    auto other = judgment({"Other"}, 0.5);
    other.labels[0].other_explanation.clear();
    CHECK(passes_guards(other, pack).failures == std::vector<GuardFailure>{GuardFailure::MalformedOutput});

    auto tz = judgment({"TimeZoneShift"}, 0.5);
    CHECK(passes_guards(tz, pack).failures == std::vector<GuardFailure>{GuardFailure::UnsupportedClaim});
    auto nul = judgment({"NullInflation"}, 0.5);
    CHECK(passes_guards(nul, pack).failures == std::vector<GuardFailure>{GuardFailure::UnsupportedClaim});
}

TEST_CASE("Rounding over three distinct signatures is unsupported") {
    std::vector<datadiff::CellDiff> d = {cell("1", "p", "1.2345", "1.2", ValueType::Float),
                                         cell("2", "p", "1.2345", "1.23", ValueType::Float),
                                         cell("3", "p", "1.23456", "1.235", ValueType::Float)};
    std::set<int> sigs;
    for (const auto& x : d) {
        const auto& fd = std::get<datadiff::FloatDelta>(x.detail);
        sigs.insert(*datadiff::rounding_signature(std::get<double>(x.source_value.payload),
                                                  std::get<double>(x.target_value.payload)));
        CHECK(fd.rounding_decimals);
    }
    REQUIRE(sigs.size() == 3);
    Fixture f(std::move(d));
    auto pack = sample_evidence(f.clusters[0], f.diffs, 8, "s");
    auto j = judgment({"Rounding"}, 0.9);
    CHECK(passes_guards(j, pack).failures == std::vector<GuardFailure>{GuardFailure::UnsupportedClaim});
}

TEST_CASE("template_label") {
    auto f = rounding_fixture();
    auto t = template_label(f.clusters[0], f.clusters[0].candidate_patterns);
    CHECK(t.label_names() == std::vector<std::string>{"Rounding"});
    CHECK(t.confidence == doctest::Approx(0.8));
    CHECK(t.origin == Origin::Template);

    cluster::Cluster dyn;
    dyn.id = "D:0";
    dyn.kind = cluster::ClusterKind::Dynamic;
    dyn.columns = {"category"};
    dyn.purity = 1.0;
    auto o = template_label(dyn, {});
    CHECK(o.label_names() == std::vector<std::string>{"Other"});
    CHECK_FALSE(o.labels[0].other_explanation.empty());

    auto mixed = template_label(dyn, {"Rounding", "Truncation"});
    CHECK(mixed.label_string() == "Rounding:Truncation");
}

TEST_CASE("label_cluster paths") {
    auto f = rounding_fixture();
    const auto& c = f.clusters[0];
    KnowledgeIndex index;
    MockLabelerClient mock;

    LabelConfig off;
    off.enabled = false;
    CHECK(label_cluster(c, f.diffs, off, &mock, index).origin == Origin::Template);
    CHECK(label_cluster(c, f.diffs, LabelConfig{}, nullptr, index).origin == Origin::Template);

    auto model = label_cluster(c, f.diffs, LabelConfig{}, &mock, index);
    CHECK(model.origin == Origin::Model);
    CHECK(model.label_names() == std::vector<std::string>{"Rounding"});
    auto pack = sample_evidence(c, f.diffs, LabelConfig{}.k, LabelConfig{}.salt, {}, LabelConfig{}.token_budget);
    CHECK(passes_guards(model, pack).passed);
    CHECK(model == label_cluster(c, f.diffs, LabelConfig{}, &mock, index));

    FixedClient foo(R"({"labels":["FooBar"],"rationale":"x","confidence":0.9,"evidence_row_ids":[]})");
    CHECK(label_cluster(c, f.diffs, LabelConfig{}, &foo, index).origin == Origin::Template);
    FixedClient unsupported(R"({"labels":["NullInflation"],"rationale":"x","confidence":0.9,"evidence_row_ids":[]})");
    CHECK(label_cluster(c, f.diffs, LabelConfig{}, &unsupported, index).origin == Origin::Template);
    ThrowingClient thrower;
    CHECK(label_cluster(c, f.diffs, LabelConfig{}, &thrower, index).origin == Origin::Template);
}

TEST_CASE("mock client labels dynamic clusters from the evidence") {
    std::vector<datadiff::CellDiff> d;
    const char* from[] = {"alpha", "bravo", "charlie", "delta"};
    const char* to[] = {"A1", "B2", "C3", "D4"};
    for (int i = 0; i < 12; ++i) d.push_back(cell(std::to_string(100 + i), "category", from[i % 4], to[i % 4], ValueType::Text));
    for (int i = 0; i < 12; ++i)
        d.push_back(cell(std::to_string(200 + i), "qty", std::to_string(i + 1), std::to_string((i + 1) * 10 + 7), ValueType::Integer));
    Fixture f(std::move(d));
    MockLabelerClient mock;
    KnowledgeIndex index;
    std::map<std::string, std::string> labels;
    for (const auto& c : f.clusters) {
        auto j = label_cluster(c, f.diffs, LabelConfig{}, &mock, index);
        labels[c.columns.front()] = j.label_string();
        CHECK(j.origin == Origin::Model);
    }
    CHECK(labels["category"] == "CategoricalRemap");
    CHECK(labels["qty"] == "BusinessRuleChange");
}

TEST_CASE("label_clusters keeps order and is deterministic across concurrency") {
    std::vector<datadiff::CellDiff> d;
    for (int i = 0; i < 10; ++i) d.push_back(cell(std::to_string(i), "price", "1.2345", "1.23", ValueType::Float));
    for (int i = 10; i < 20; ++i) d.push_back(cell(std::to_string(i), "city", "Springfield", "Spring", ValueType::Text));
    for (int i = 20; i < 30; ++i) d.push_back(cell(std::to_string(i), "n", "5", "", ValueType::Integer));
    Fixture f(std::move(d));
    MockLabelerClient mock;
    KnowledgeIndex index;
    LabelConfig one;
    one.concurrency = 1;
    LabelConfig many;
    many.concurrency = 8;
    auto a = label_clusters(f.clusters, f.diffs, one, &mock, index);
    auto b = label_clusters(f.clusters, f.diffs, many, &mock, index);
    REQUIRE(a.size() == f.clusters.size());
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == label_cluster(f.clusters[i], f.diffs, one, &mock, index));
}

TEST_CASE("fuzz client never breaks totality or closure") {
    auto f = rounding_fixture();
    std::vector<datadiff::CellDiff> d = f.diffs;
    for (int i = 0; i < 6; ++i) d.push_back(cell("z" + std::to_string(i), "n", "5", "", ValueType::Integer));
    for (int i = 0; i < 6; ++i) d.push_back(cell("y" + std::to_string(i), "cat", "alpha", "A1", ValueType::Text));
    std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.key < b.key || (a.key == b.key && a.column < b.column); });
    Fixture all(std::move(d));
    KnowledgeIndex index;
    LabelConfig cfg;
    int model = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        FuzzLabelerClient fuzz(seed);
        auto out = label_clusters(all.clusters, all.diffs, cfg, &fuzz, index);
        REQUIRE(out.size() == all.clusters.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK_FALSE(out[i].labels.empty());
            for (const auto& l : out[i].labels) CHECK(in_ontology(l.name));
            if (out[i].origin == Origin::Model) {
                ++model;
                auto pack = sample_evidence(all.clusters[i], all.diffs, cfg.k, cfg.salt, {}, cfg.token_budget);
                CHECK(passes_guards(out[i], pack).passed);
            }
        }
    }
    CHECK(model > 0);
}

TEST_CASE("http client") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/v1/label", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        auto body = json::parse(req.body);
        CHECK(body["temperature"] == 0.0);
        CHECK(body["schema"].is_object());
        json reply = {{"labels", {"Rounding"}}, {"rationale", "rounded"}, {"confidence", 0.9}, {"evidence_row_ids", json::array()}};
        res.set_content(json{{"text", reply.dump()}}.dump(), "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    server.Post("/shape", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"nope\":1}", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const auto base = "http://127.0.0.1:" + std::to_string(port);

    HttpLabelerClient good(base + "/v1/label");
    auto text = good.complete("prompt", output_schema(), 0.0);
    CHECK(parse_judgment(text));

    auto f = rounding_fixture();
    auto j = label_cluster(f.clusters[0], f.diffs, LabelConfig{}, &good, KnowledgeIndex{});
    CHECK(j.origin == Origin::Model);
    CHECK(calls.load() >= 4);

    auto code_of = [](HttpLabelerClient& c) {
        try {
            c.complete("p", output_schema(), 0.0);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::StageFailed;
    };
    HttpLabelerClient broken(base + "/broken");
    CHECK(code_of(broken) == ErrorCode::ClientUnavailable);
    HttpLabelerClient shape(base + "/shape");
    CHECK(code_of(shape) == ErrorCode::ClientUnavailable);

    server.stop();
    thread.join();

    HttpLabelerClient dead(base + "/v1/label", std::chrono::milliseconds(300));
    CHECK(code_of(dead) == ErrorCode::ClientUnavailable);
    CHECK(label_cluster(f.clusters[0], f.diffs, LabelConfig{}, &dead, KnowledgeIndex{}).origin == Origin::Template);
    CHECK_THROWS_AS(HttpLabelerClient("localhost:8080/x"), Error);
}
