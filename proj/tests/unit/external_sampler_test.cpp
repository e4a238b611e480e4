#include <doctest.h>

#include "pseudoqe/error.hpp"
#include "pseudoqe/external_sampler.hpp"

using namespace pseudoqe;

namespace {

FillRequest simple_request() {
  FillRequest request;
  request.source = "a source";
  request.context = {"ein", "<mask>", "satz"};
  request.position = 1;
  request.mode = FillMode::Parallel;
  return request;
}

}  // namespace

TEST_CASE("echo-style child passes candidates through verbatim") {
  // Answers every request with the same two candidates.
  ExternalSampler sampler(
      R"(while read line; do echo '{"tokens":["x","y"],"probs":[0.6,0.4]}'; done)");
  for (int i = 0; i < 3; ++i) {
    const CandidateSet out = sampler.top_k(simple_request(), 5);
    REQUIRE(out.tokens.size() == 2);
    CHECK(out.tokens[0] == "x");
    CHECK(out.tokens[1] == "y");
    CHECK(out.probs[0] == 0.6);
    CHECK(out.probs[1] == 0.4);
  }
}

TEST_CASE("requests are serialized as json lines") {
  // The child echoes the received k back as a token, proving the request
  // fields arrive intact.
  ExternalSampler sampler(
      "while read line; do k=$(echo \"$line\" | sed 's/.*\"k\":\\([0-9]*\\).*/\\1/'); "
      "echo \"{\\\"tokens\\\":[\\\"k$k\\\"],\\\"probs\\\":[1.0]}\"; done");
  const CandidateSet out = sampler.top_k(simple_request(), 7);
  REQUIRE(out.tokens.size() == 1);
  CHECK(out.tokens[0] == "k7");
}

TEST_CASE("malformed response is a protocol error") {
  ExternalSampler sampler("while read line; do echo 'not json'; done");
  CHECK_THROWS_WITH_AS(static_cast<void>(sampler.top_k(simple_request(), 3)),
                       doctest::Contains("protocol"), SamplerError);
}

TEST_CASE("missing fields are a protocol error") {
  ExternalSampler sampler(
      R"(while read line; do echo '{"tokens":["x"]}'; done)");
  CHECK_THROWS_AS(static_cast<void>(sampler.top_k(simple_request(), 3)),
                  SamplerError);
}

TEST_CASE("child exiting mid-stream reports termination") {
  ExternalSampler sampler("exit 0");
  CHECK_THROWS_WITH_AS(static_cast<void>(sampler.top_k(simple_request(), 3)),
                       doctest::Contains("terminated"), SamplerError);
}

TEST_CASE("unresponsive child times out") {
  ExternalSampler sampler("sleep 60", std::chrono::milliseconds(150));
  CHECK_THROWS_WITH_AS(static_cast<void>(sampler.top_k(simple_request(), 3)),
                       doctest::Contains("timeout"), SamplerError);
}

TEST_CASE("over-long candidate lists are rejected") {
  ExternalSampler sampler(
      R"(while read line; do echo '{"tokens":["a","b","c"],"probs":[0.5,0.3,0.2]}'; done)");
  CHECK_THROWS_AS(static_cast<void>(sampler.top_k(simple_request(), 2)),
                  SamplerError);
}
