#include <gtest/gtest.h>

#include "counqer/kb.hpp"
#include "counqer/sparql_client.hpp"
#include "support.hpp"

using namespace counqer;
using namespace testing_support;

namespace {

TripleStore numbered_store(std::size_t n) {
  std::vector<Triple> triples;
  for (std::size_t i = 0; i < n; ++i)
    triples.push_back({Term::iri("http://x.test/hub"), "http://x.test/member",
                       Term::iri("http://x.test/m" + std::to_string(i))});
  return TripleStore(std::move(triples));
}

KBDescriptor remote(const std::string& url, std::size_t page_size = 1000, double timeout = 5) {
  KBDescriptor d;
  d.id = "remote";
  d.name = "Remote";
  d.source = EndpointSource{url};
  d.page_size = page_size;
  d.timeout_seconds = timeout;
  return d;
}

}  // namespace

TEST(SparqlClient, LimitZeroGivesEmptyResult) {
  FakeEndpoint ep(numbered_store(5));
  auto rows = sparql_select(remote(ep.url()), build_dump_query() + " LIMIT 0");
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(ep.requests(), 1);
}

TEST(SparqlClient, PaginatesInPageSizeChunks) {
  FakeEndpoint ep(numbered_store(2500));
  auto rows = sparql_select(remote(ep.url(), 1000), build_dump_query());
  EXPECT_EQ(rows.size(), 2500u);
  EXPECT_EQ(ep.requests(), 3);
  auto qs = ep.queries();
  EXPECT_EQ(qs[2], build_dump_query() + " LIMIT 1000 OFFSET 2000");
}

TEST(SparqlClient, PaginatedRowsEqualUnpaginatedRows) {
  auto store = numbered_store(2345);
  FakeEndpoint ep(store);
  auto paged = sparql_select(remote(ep.url(), 100), build_dump_query());
  auto whole = sparql_select(remote(ep.url(), 1'000'000), build_dump_query());
  std::multiset<std::string> a, b;
  for (const auto& r : paged) a.insert(to_ntriples(r.at("o")));
  for (const auto& r : whole) b.insert(to_ntriples(r.at("o")));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 2345u);
}

TEST(SparqlClient, ExactMultipleOfPageSizeNeedsOneExtraEmptyPage) {
  FakeEndpoint ep(numbered_store(2000));
  EXPECT_EQ(sparql_select(remote(ep.url(), 1000), build_dump_query()).size(), 2000u);
  EXPECT_EQ(ep.requests(), 3);
}

TEST(SparqlClient, ServerErrorIsRetriableTransportError) {
  FakeEndpoint ep(numbered_store(3), [](const std::string&, httplib::Response& res) {
    res.status = 503;
    res.set_content("busy", "text/plain");
    return true;
  });
  try {
    sparql_select(remote(ep.url()), build_dump_query());
    FAIL();
  } catch (const TimeoutError&) {
    FAIL() << "not a timeout";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 503);
    EXPECT_TRUE(e.retriable());
  }
}

TEST(SparqlClient, ClientErrorCarriesStatus) {
  FakeEndpoint ep(numbered_store(3), [](const std::string&, httplib::Response& res) {
    res.status = 400;
    return true;
  });
  try {
    sparql_select(remote(ep.url()), build_dump_query());
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 400);
  }
}

TEST(SparqlClient, MalformedResultsAreProtocolErrors) {
  FakeEndpoint ep(numbered_store(3), [](const std::string&, httplib::Response& res) {
    res.set_content("<html>not json</html>", "text/html");
    return true;
  });
  EXPECT_THROW(sparql_select(remote(ep.url()), build_dump_query()), ProtocolError);
}

TEST(SparqlClient, SlowEndpointIsTimeout) {
  FakeEndpoint ep(numbered_store(3), [](const std::string&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(results_to_json({"s"}, {}), "application/sparql-results+json");
    return true;
  });
  EXPECT_THROW(sparql_select(remote(ep.url(), 1000, 0.2), build_dump_query()), TimeoutError);
}

TEST(SparqlClient, UnreachableEndpointIsRetriableTransportError) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  try {
    sparql_select(remote("http://127.0.0.1:" + std::to_string(port) + "/sparql"), build_dump_query());
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_TRUE(e.retriable());
  }
}

TEST(SparqlClient, LongQueriesArePosted) {
  FakeEndpoint ep(numbered_store(3));
  std::vector<std::string> iris;
  for (int i = 0; i < 150; ++i) iris.push_back("http://x.test/m" + std::to_string(i));
  auto rows = sparql_select(remote(ep.url()), build_labels_query(iris));
  EXPECT_TRUE(rows.empty());
  EXPECT_GE(ep.requests(), 1);
}

TEST(SparqlClient, SendsSparqlJsonAcceptHeader) {
  std::string accept;
  httplib::Server server;
  server.Get("/q", [&](const httplib::Request& req, httplib::Response& res) {
    accept = req.get_header_value("Accept");
    res.set_content(results_to_json({"o"}, {}), "application/sparql-results+json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  SparqlClient client("http://127.0.0.1:" + std::to_string(port) + "/q", 5, 10);
  client.select_once("SELECT ?o WHERE { ?s ?p ?o }");
  server.stop();
  t.join();
  EXPECT_EQ(accept, "application/sparql-results+json");
}

TEST(SparqlClient, RejectsNonHttpEndpoint) {
  EXPECT_THROW(SparqlClient("ftp://x.test/sparql", 5, 10), ValidationError);
  KBDescriptor dump;
  dump.id = "d";
  dump.source = DumpSource{"x.nt"};
  EXPECT_THROW(sparql_select(dump, build_dump_query()), ValidationError);
}

TEST(RemoteKB, MatchesEmbeddedKBOverFakeEndpoint) {
  auto loaded = load_ntriples(fixture("wikidata_chaplin.nt"));
  auto shared = std::make_shared<const TripleStore>(loaded.store);
  FakeEndpoint ep(loaded.store);
  RemoteKB remote_kb(remote(ep.url(), 7));
  KBDescriptor local_desc;
  local_desc.id = "local";
  local_desc.source = DumpSource{fixture("wikidata_chaplin.nt")};
  EmbeddedKB local(local_desc, shared);

  const std::string chaplin = "http://www.wikidata.org/entity/Q882";
  for (const auto& p : shared->predicates())
    for (bool inv : {false, true})
      EXPECT_EQ(remote_kb.values(chaplin, {p, inv}), local.values(chaplin, {p, inv})) << p;
  EXPECT_EQ(remote_kb.populated(chaplin), local.populated(chaplin));
  EXPECT_EQ(remote_kb.suggest("charlie", 10), local.suggest("charlie", 10));
  std::vector<std::string> iris;
  for (const auto& [iri, _] : shared->labels()) iris.push_back(iri);
  iris.push_back("http://fixture.counqer.test/wikidata/Unlabelled");
  EXPECT_EQ(remote_kb.labels(iris), local.labels(iris));
  EXPECT_EQ(remote_kb.materialize()->triples().size(), shared->size());
  EXPECT_TRUE(std::equal(remote_kb.materialize()->triples().begin(), remote_kb.materialize()->triples().end(),
                         shared->triples().begin()));
}
