#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "gnssrag/codec.hpp"
#include "gnssrag/service.hpp"
#include "test_support.hpp"

using namespace gnssrag;
using Json = nlohmann::json;

namespace {

struct Fixture {
    testing::TempDir dir;
    testing::Corpus corpus;
    std::shared_ptr<Pipeline> pipeline;
    std::unique_ptr<Service> service;
    int port = 0;

    explicit Fixture(bool remote_describer = false) {
        corpus = testing::build_corpus(dir.path(), 3, 700);
        std::ofstream(dir / "s.conf") << testing::corpus_config(corpus);
        auto cfg = load_config(dir / "s.conf");
        if (remote_describer) {
            cfg.describer = DescriberKind::Remote;
            cfg.describer_endpoint.url = "http://127.0.0.1:1/describe";
        }
        pipeline = std::make_shared<Pipeline>(Pipeline::open(cfg));
        service = std::make_unique<Service>(pipeline);
        port = service->start_background();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
};

httplib::Result post(const httplib::Client& c, const std::string& path, const Json& body) {
    return const_cast<httplib::Client&>(c).Post(path, body.dump(), "application/json");
}

}  // namespace

TEST_CASE("health and query") {
    Fixture f;
    auto c = f.client();
    auto r = c.Get("/healthz");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(Json::parse(r->body) == Json{{"status", "ok"}, {"index_size", f.corpus.size}});

    const Json body{{"snapshot_id", 703}, {"question", "What is present?"}, {"detail_level", "signal_info_general"}, {"k", 4}};
    r = post(c, "/query", body);
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const auto j = Json::parse(r->body);
    const auto direct = f.pipeline->query(f.pipeline->lookup_snapshot(703), {"What is present?", DetailLevel::SignalInfoGeneral},
                                          4, f.pipeline->config().params);
    CHECK(j["description"] == direct.description.text);
    CHECK(j["context"] == hits_to_json(direct.context.hits));
    CHECK(j["backend"] == "Templated");
    CHECK(j["latency_ms"].get<double>() >= 0.0);
    CHECK(j["stage_latency_ms"].contains("retrieve"));

    // Inline snapshot gives the same neighbours as the stored id.
    const auto snap = f.pipeline->lookup_snapshot(703);
    const auto b64 = codec::base64_encode(codec::floats_to_bytes(snap.data));
    r = post(c, "/query", {{"snapshot_b64", b64}, {"question", "What is present?"}, {"detail_level", "signal_info_general"}, {"k", 4}});
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(Json::parse(r->body)["context"] == j["context"]);
}

TEST_CASE("bad requests name the field") {
    Fixture f;
    auto c = f.client();
    auto field_of = [&](const std::string& path, const std::string& raw) {
        auto r = c.Post(path, raw, "application/json");
        REQUIRE(r);
        CHECK(r->status == 400);
        return Json::parse(r->body)["field"].get<std::string>();
    };
    CHECK(field_of("/query", R"({"snapshot_id": 700})") == "/question");
    CHECK(field_of("/query", R"({"question": "x"})") == "/snapshot_id");
    CHECK(field_of("/query", R"({"snapshot_id": 700, "question": "x", "k": 0})") == "/k");
    CHECK(field_of("/query", R"({"snapshot_id": 700, "question": "x", "detail_level": "verbose"})") == "/detail_level");
    CHECK(field_of("/query", R"({"snapshot_id": 700, "question": "x", "params": {"temperature": 3}})") == "/temperature");
    CHECK(field_of("/query", R"({"snapshot_b64": "AAAA", "question": "x"})") == "/snapshot_b64");
    CHECK(field_of("/query", "{not json") == "");
    CHECK(field_of("/classify", Json{{"vector", std::vector<float>(256, 0.1f)}}.dump()) == "/vector");
    CHECK(field_of("/classify", R"({"vector": [1, "a"]})") == "/vector");

    auto r = post(c, "/query", {{"snapshot_id", 123456}, {"question", "x"}});
    REQUIRE(r);
    CHECK(r->status == 404);
    CHECK(Json::parse(r->body)["stage"] == "load");
}

TEST_CASE("oversized bodies are refused") {
    Fixture f;
    auto c = f.client();
    const std::string big(kMaxRequestBytes + 1024, ' ');
    auto r = c.Post("/query", big, "application/json");
    REQUIRE(r);
    CHECK(r->status == 413);
}

TEST_CASE("classify by vector and by id") {
    Fixture f;
    auto c = f.client();
    const auto& idx = f.pipeline->index().snapshot();
    const auto pos = *idx.find(705);
    const auto v = idx.vector_at(pos);
    auto r = post(c, "/classify", {{"vector", std::vector<float>(v.begin(), v.end())}, {"k", 1}});
    REQUIRE(r);
    REQUIRE(r->status == 200);
    auto j = Json::parse(r->body);
    CHECK(j["intf_type"] == std::string(to_string(idx.metadata_at(pos).intf_type)));
    CHECK(j["neighbor_ids"][0] == 705);
    CHECK(j.contains("latency_ms"));
    r = post(c, "/classify", {{"snapshot_id", 705}, {"k", 1}});
    REQUIRE(r);
    CHECK(Json::parse(r->body)["neighbor_ids"] == j["neighbor_ids"]);
}

TEST_CASE("describer outage is a 502 with the stage") {
    Fixture f(true);
    auto c = f.client();
    auto r = post(c, "/query", {{"snapshot_id", 700}, {"question", "x"}});
    REQUIRE(r);
    CHECK(r->status == 502);
    CHECK(Json::parse(r->body)["stage"] == "describe");
}

TEST_CASE("concurrent requests agree") {
    Fixture f;
    const Json body{{"snapshot_id", 710}, {"question", "Which interference?"}, {"k", 5}};
    const auto expected = Json::parse(post(f.client(), "/query", body)->body)["description"];
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&] {
            auto c = f.client();
            for (int i = 0; i < 5; ++i) {
                auto r = post(c, "/query", body);
                if (r && r->status == 200 && Json::parse(r->body)["description"] == expected) ++ok;
            }
        });
    for (auto& t : threads) t.join();
    CHECK(ok == 40);
}
