#include <gtest/gtest.h>

#include "counqer/http_api.hpp"
#include "counqer/pipeline.hpp"
#include "support.hpp"

using namespace counqer;
using namespace testing_support;

namespace {

const std::string kWd = "http://www.wikidata.org/entity/";
const std::string kWdt = "http://www.wikidata.org/prop/direct/";

class Api : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    service_ = build_service(load_config(fixture("counqer.ini")));
    server_ = std::make_unique<ApiServer>(*service_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([] { server_->run(); });
    server_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    server_->stop();
    thread_.join();
    server_.reset();
    service_.reset();
  }

  static std::pair<int, json> get(const std::string& path, const httplib::Params& params = {}) {
    httplib::Client client("127.0.0.1", port_);
    auto res = client.Get(path, params, httplib::Headers{});
    if (!res) throw std::runtime_error("request failed: " + path);
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    return {res->status, json::parse(res->body)};
  }

  static void expect_error(const std::pair<int, json>& r, int status, const std::string& code) {
    EXPECT_EQ(r.first, status);
    ASSERT_TRUE(r.second.contains("error")) << r.second.dump();
    EXPECT_EQ(r.second["error"]["code"], code);
    EXPECT_FALSE(r.second["error"]["message"].get<std::string>().empty());
  }

  static inline std::unique_ptr<Service> service_;
  static inline std::unique_ptr<ApiServer> server_;
  static inline std::thread thread_;
  static inline int port_ = 0;
};

}  // namespace

TEST_F(Api, ListsKbs) {
  auto [status, body] = get("/api/kbs");
  EXPECT_EQ(status, 200);
  ASSERT_EQ(body.size(), 4u);
  EXPECT_EQ(body[0], (json{{"id", "wikidata"}, {"name", "Wikidata (truthy)"}}));
}

TEST_F(Api, QueryChaplin) {
  auto [status, body] = get("/api/query", {{"kb", "wikidata"}, {"subject", kWd + "Q882"}, {"predicate", kWdt + "P1971"}});
  ASSERT_EQ(status, 200);
  EXPECT_EQ(body["main"]["count_value"], 6);
  EXPECT_EQ(body["main"]["role"], "MAIN");
  EXPECT_EQ(body["main"]["inverse"], false);
  EXPECT_TRUE(body["main"]["stats"].contains("mean_value"));
  ASSERT_EQ(body["related"].size(), 3u);
  const auto& child = body["related"][0];
  EXPECT_EQ(child["iri"], kWdt + "P40");
  EXPECT_EQ(child["total_cardinality"], 9);
  EXPECT_EQ(child["enumeration"].size(), 9u);
  EXPECT_TRUE(child["enumeration"][0].contains("label"));
  EXPECT_DOUBLE_EQ(child["alignment_score"].get<double>(), 0.75);
  EXPECT_EQ(child["provenance"], "AUTOMATIC");
  EXPECT_EQ(child["sparql"], build_spo_query(kWd + "Q882", {kWdt + "P40", false}));
}

TEST_F(Api, QueryInverseFlag) {
  auto [status, body] = get("/api/query", {{"kb", "dbpedia-raw"},
                                           {"subject", "http://dbpedia.org/resource/Roger_Federer"},
                                           {"predicate", "http://dbpedia.org/property/gold"},
                                           {"inverse", "true"}});
  ASSERT_EQ(status, 200);
  EXPECT_EQ(body["main"]["inverse"], true);
  EXPECT_EQ(body["main"]["total_cardinality"], 0);
  EXPECT_TRUE(body["main"]["enumeration"].empty());
}

TEST_F(Api, QueryErrors) {
  expect_error(get("/api/query", {{"kb", "nope"}, {"subject", kWd + "Q882"}, {"predicate", kWdt + "P1971"}}), 404,
               "not_found");
  expect_error(get("/api/query", {{"kb", "wikidata"}, {"subject", kWd + "Q882"}}), 400, "invalid_request");
  expect_error(get("/api/query", {{"kb", "wikidata"}, {"subject", kWd + "Q882"}, {"predicate", kWdt + "P1971"},
                                  {"inverse", "maybe"}}),
               400, "invalid_request");
  expect_error(get("/api/query", {{"kb", "wikidata"}, {"subject", kWd + "Q882"}, {"predicate", kWdt + "P569"}}),
               404, "not_found");
}

TEST_F(Api, SuggestEntity) {
  auto [status, body] = get("/api/suggest/entity", {{"kb", "wikidata"}, {"prefix", "Charlie Chap"}});
  ASSERT_EQ(status, 200);
  ASSERT_EQ(body.size(), 1u);
  EXPECT_EQ(body[0]["iri"], kWd + "Q882");
  EXPECT_EQ(body[0]["label"], "Charlie Chaplin");
  auto limited = get("/api/suggest/entity", {{"kb", "wikidata"}, {"prefix", "Ch"}, {"limit", "1"}});
  EXPECT_EQ(limited.second.size(), 1u);
  expect_error(get("/api/suggest/entity", {{"kb", "wikidata"}, {"prefix", "Ch"}, {"limit", "-1"}}), 400,
               "invalid_request");
  expect_error(get("/api/suggest/entity", {{"kb", "wikidata"}, {"prefix", ""}}), 400, "invalid_request");
}

TEST_F(Api, SuggestPredicate) {
  auto [status, body] = get("/api/suggest/predicate", {{"kb", "wikidata"}, {"entity", kWd + "Q882"}});
  ASSERT_EQ(status, 200);
  ASSERT_EQ(body.size(), 5u);
  EXPECT_EQ(body[0]["tier"], 1);
  EXPECT_EQ(body[0]["variant"], "ENUMERATING");
  EXPECT_TRUE(body[4]["best_score"].is_null());
  for (std::size_t i = 1; i < body.size(); ++i) EXPECT_LE(body[i - 1]["tier"], body[i]["tier"]);
}

TEST_F(Api, Alignments) {
  auto [status, body] = get("/api/alignments", {{"kb", "wikidata"}, {"limit", "2"}});
  ASSERT_EQ(status, 200);
  EXPECT_EQ(body["total"], 3);
  ASSERT_EQ(body["rows"].size(), 2u);
  EXPECT_EQ(body["rows"][0]["counting"]["label"], "number of children");
  EXPECT_EQ(body["rows"][0]["support"], 3);
  EXPECT_TRUE(body["rows"][0].contains("sparql_cooccurrence"));
  auto manual = get("/api/alignments", {{"kb", "dbpedia-mapped"}, {"search", "occupation"}});
  ASSERT_EQ(manual.second["rows"].size(), 1u);
  EXPECT_EQ(manual.second["rows"][0]["provenance"], "MANUAL");
  EXPECT_FALSE(manual.second["rows"][0].contains("lexical"));
}

TEST_F(Api, Consistency) {
  auto [status, body] = get("/api/consistency", {{"kb", "wikidata"},
                                                 {"subject", kWd + "Q882"},
                                                 {"counting", kWdt + "P1971"},
                                                 {"enumerating", kWdt + "P40"}});
  ASSERT_EQ(status, 200);
  EXPECT_EQ(body["verdict"], "ENUM_EXCESS");
  EXPECT_EQ(body["count_value"], 6);
  EXPECT_EQ(body["cardinality"], 9);
  expect_error(get("/api/consistency", {{"kb", "wikidata"},
                                        {"subject", kWd + "Q882"},
                                        {"counting", kWdt + "P1971"},
                                        {"enumerating", kWdt + "P40"},
                                        {"enumerating_inverse", "false"},
                                        {"counting_inverse", "true"}}),
               400, "invalid_request");
}

TEST(ApiErrors, ExceptionMapping) {
  EXPECT_EQ(classify_error(NotFoundError("x")).status, 404);
  EXPECT_EQ(classify_error(ValidationError("x")).status, 400);
  EXPECT_EQ(classify_error(TimeoutError("x")).status, 504);
  EXPECT_EQ(classify_error(TransportError("x", 503)).status, 502);
  EXPECT_EQ(classify_error(ProtocolError("x")).status, 502);
  EXPECT_EQ(classify_error(std::runtime_error("x")).status, 500);
}

TEST(ApiStatic, MissingStaticDirIsRejected) {
  auto service = fanout_service(1);
  EXPECT_THROW(ApiServer(*service, std::filesystem::path("/nonexistent/counqer-static")), ValidationError);
  TempDir dir;
  spit(dir / "index.html", "<p>hi</p>");
  ApiServer server(*service, dir.path());
  int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.run(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/index.html");
  server.stop();
  t.join();
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, "<p>hi</p>");
}
