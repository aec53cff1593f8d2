#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "ucprop/ucprop.h"

namespace {

std::string tmpdir(const char* leaf) {
  return (std::filesystem::temp_directory_path() / leaf).string();
}

}  // namespace

TEST_CASE("version and error channel start clean") {
  CHECK(std::string(ucp_version()) == "1.0.0");
  ucp_config* cfg = nullptr;
  REQUIRE(ucp_config_parse("{}", &cfg) == UCP_OK);
  CHECK(std::string(ucp_last_error()).empty());
  ucp_config_free(cfg);
}

TEST_CASE("null arguments are rejected without touching last_error state") {
  CHECK(ucp_config_parse(nullptr, nullptr) == UCP_ERR_ARGUMENT);
  CHECK(std::string(ucp_last_error()) == "null argument");
  ucp_config* cfg = nullptr;
  CHECK(ucp_config_parse("{}", nullptr) == UCP_ERR_ARGUMENT);
  CHECK(ucp_config_serialize(nullptr, nullptr) == UCP_ERR_ARGUMENT);
  CHECK(ucp_config_set_experiment(nullptr, "solve") == UCP_ERR_ARGUMENT);
  CHECK(ucp_run_experiment(nullptr, nullptr) == UCP_ERR_ARGUMENT);
  CHECK(ucp_config_parse("{}", &cfg) == UCP_OK);
  ucp_config_free(cfg);
}

TEST_CASE("bad config text maps to UCP_ERR_PARSE with details") {
  ucp_config* cfg = nullptr;
  CHECK(ucp_config_parse("{ nope", &cfg) == UCP_ERR_PARSE);
  CHECK(cfg == nullptr);
  CHECK(std::string(ucp_last_error()).find("not valid JSON") !=
        std::string::npos);
  CHECK(ucp_config_parse(R"({"grid": {"dim": 7}})", &cfg) == UCP_ERR_PARSE);
  CHECK(std::string(ucp_last_error()).find("must be 2 or 3") !=
        std::string::npos);
  CHECK(ucp_config_load("/no/such/file.json", &cfg) == UCP_ERR_PARSE);
}

TEST_CASE("serialize round trips through parse") {
  ucp_config* a = nullptr;
  REQUIRE(ucp_config_parse(R"({"experiment": "dyadic", "dyadic_rank": 2})",
                           &a) == UCP_OK);
  char* text = nullptr;
  REQUIRE(ucp_config_serialize(a, &text) == UCP_OK);
  REQUIRE(text != nullptr);
  ucp_config* b = nullptr;
  REQUIRE(ucp_config_parse(text, &b) == UCP_OK);
  char* text2 = nullptr;
  REQUIRE(ucp_config_serialize(b, &text2) == UCP_OK);
  CHECK(std::string(text) == text2);
  ucp_string_free(text);
  ucp_string_free(text2);
  ucp_config_free(a);
  ucp_config_free(b);
}

TEST_CASE("setters validate and mutate") {
  ucp_config* cfg = nullptr;
  REQUIRE(ucp_config_parse("{}", &cfg) == UCP_OK);
  CHECK(ucp_config_set_experiment(cfg, "warp-drive") == UCP_ERR_PARSE);
  CHECK(ucp_config_set_experiment(cfg, "dyadic") == UCP_OK);
  CHECK(ucp_config_set_grid_nodes(cfg, 2) == UCP_ERR_PARSE);
  CHECK(ucp_config_set_grid_nodes(cfg, 33) == UCP_OK);
  CHECK(ucp_config_set_seed(cfg, 99) == UCP_OK);
  char* text = nullptr;
  REQUIRE(ucp_config_serialize(cfg, &text) == UCP_OK);
  std::string s(text);
  CHECK(s.find("\"experiment\": \"dyadic\"") != std::string::npos);
  CHECK(s.find("\"seed\": 99") != std::string::npos);
  ucp_string_free(text);
  ucp_config_free(cfg);
}

TEST_CASE("a run produces artifacts and a summary") {
  std::string out = tmpdir("ucprop_capi_run");
  std::filesystem::remove_all(out);
  ucp_config* cfg = nullptr;
  REQUIRE(ucp_config_parse(R"({"experiment": "dyadic", "dyadic_rank": 2,
                               "dyadic_families": 40, "quiet": true})",
                           &cfg) == UCP_OK);
  ucp_config_set_out_dir(cfg, out.c_str());

  ucp_run* run = nullptr;
  REQUIRE(ucp_run_experiment(cfg, &run) == UCP_OK);
  CHECK(ucp_run_failed(run) == 0);
  REQUIRE(ucp_run_file_count(run) >= 3);  // csv + config echo + summary
  bool saw_summary = false;
  for (size_t i = 0; i < ucp_run_file_count(run); ++i) {
    const char* f = ucp_run_file(run, i);
    REQUIRE(f != nullptr);
    if (std::string(f) == "summary.json") saw_summary = true;
    CHECK(std::filesystem::exists(out + "/" + f));
  }
  CHECK(saw_summary);
  CHECK(ucp_run_file(run, 1 << 20) == nullptr);
  std::string summary(ucp_run_summary_json(run));
  CHECK(summary.find("\"bruteforce_mismatches\": 0") != std::string::npos);
  ucp_run_free(run);
  ucp_config_free(cfg);
  std::filesystem::remove_all(out);
}

TEST_CASE("run failures surface typed status codes") {
  ucp_config* cfg = nullptr;
  // growth-linf on a unit box violates its documented domain requirement
  REQUIRE(ucp_config_parse(R"({"experiment": "growth-linf", "quiet": true})",
                           &cfg) == UCP_OK);
  std::string out = tmpdir("ucprop_capi_fail");
  ucp_config_set_out_dir(cfg, out.c_str());
  ucp_run* run = nullptr;
  CHECK(ucp_run_experiment(cfg, &run) == UCP_ERR_PARSE);
  CHECK(run == nullptr);
  CHECK(std::string(ucp_last_error()).find("grid must cover [-1,1]") !=
        std::string::npos);
  ucp_config_free(cfg);
  std::filesystem::remove_all(out);
}
