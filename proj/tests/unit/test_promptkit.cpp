#include <gtest/gtest.h>

#include <filesystem>

#include "carserver/error.hpp"
#include "carserver/promptkit.hpp"
#include "carserver/text.hpp"
#include "generators.hpp"

using namespace carserver;
using namespace carserver::promptkit;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(Templates, CatalogueAndPlaceholders) {
  EXPECT_EQ(all_templates().size(), 6u);
  EXPECT_EQ(get_template(TemplateId::ModelInstance).requiredParams,
            (std::vector<std::string>{"requirements", "metamodel"}));
  EXPECT_EQ(get_template(TemplateId::Dockerfile).requiredParams,
            (std::vector<std::string>{"script", "language", "deps"}));
  EXPECT_EQ(get_template(TemplateId::Deployment).requiredParams,
            (std::vector<std::string>{"descriptor", "containers", "instance"}));
  EXPECT_EQ(parse_template_id("OCL_EXTRACTION"), TemplateId::OclExtraction);
  EXPECT_EQ(code_of([] { parse_template_id("nope"); }), ErrorCode::UnknownTemplate);
  EXPECT_EQ(placeholders("[a] [b] [a] [not valid] [c_1]"),
            (std::vector<std::string>{"a", "b", "c_1"}));
}

TEST(Templates, ValorizeModelInstance) {
  EXPECT_EQ(valorize_template(TemplateId::ModelInstance,
                              {{"requirements", "six cameras"}, {"metamodel", "MM"}}),
            "Create XMI model instance for six cameras and MM");
}

TEST(Templates, ValorizeIsSinglePass) {
  const auto out = valorize_template(
      "ADAPTER", {{"language", "[source]"}, {"source", "RGB"}, {"target", "BGR"}});
  EXPECT_EQ(out, "Generate [source] code to convert RGB to BGR");
}

TEST(Templates, MissingAndExtraParams) {
  EXPECT_EQ(code_of([] { valorize_template(TemplateId::ModelInstance, {{"requirements", "x"}}); }),
            ErrorCode::MissingParam);
  EXPECT_EQ(code_of([] {
              valorize_template(TemplateId::ModelInstance,
                                {{"requirements", "x"}, {"metamodel", "y"}, {"z", "w"}});
            }),
            ErrorCode::ExtraParam);
}

TEST(Templates, EveryTemplateRendersWithItsOwnParameters) {
  for (TemplateId id : all_templates()) {
    Params p;
    for (const auto& name : get_template(id).requiredParams) p[name] = "<" + name + ">";
    const auto out = valorize_template(id, p);
    for (const auto& name : get_template(id).requiredParams)
      EXPECT_NE(out.find("<" + name + ">"), std::string::npos);
    EXPECT_TRUE(placeholders(out).empty()) << out;
  }
}

TEST(Hash, KnownSha256Vectors) {
  EXPECT_EQ(prompt_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(prompt_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(MockProvider, LooksUpByHash) {
  ProviderConfig c;
  c.fixtures[prompt_hash("hello")] = "world";
  const auto r = execute_prompt("hello", c);
  EXPECT_EQ(r.raw, "world");
  EXPECT_EQ(r.tokensUsed, 1);
  EXPECT_EQ(code_of([&] { execute_prompt("other", c); }), ErrorCode::UnknownFixture);
  c.defaultFixture = "fallback";
  EXPECT_EQ(execute_prompt("other", c).raw, "fallback");
}

TEST(MockProvider, TruncatesToTokenLimit) {
  ProviderConfig c;
  c.defaultFixture = "one two  three\nfour five";
  c.tokenLimit = 3;
  const auto r = execute_prompt("x", c);
  EXPECT_EQ(r.raw, "one two  three");
  EXPECT_EQ(r.tokensUsed, 3);
  c.tokenLimit = 0;
  EXPECT_EQ(code_of([&] { execute_prompt("x", c); }), ErrorCode::InvalidConfig);
}

TEST(MockProvider, FixtureFile) {
  const auto path = std::filesystem::temp_directory_path() / "carserver_fixture_test.yaml";
  text::write_file(path, prompt_hash("p") + ": |\n  line one\n  line two\n");
  ProviderConfig c;
  c.fixtureFile = path;
  EXPECT_EQ(execute_prompt("p", c).raw, "line one\nline two\n");
  text::write_file(path, "- not\n- a map\n");
  EXPECT_EQ(code_of([&] { execute_prompt("p", c); }), ErrorCode::InvalidConfig);
  text::write_file(path, "key: [unclosed\n");
  EXPECT_EQ(code_of([&] { load_fixtures(path); }), ErrorCode::InvalidConfig);
  std::filesystem::remove(path);
}

TEST(MockProvider, CheckedInFixturesLoad) {
  const auto table = load_fixtures(testkit::data_dir() / "fixtures" / "mock.yaml");
  EXPECT_EQ(table.size(), 3u);
  for (const auto& [hash, response] : table) {
    EXPECT_EQ(hash.size(), 64u);
    EXPECT_FALSE(response.empty());
  }
}

TEST(HttpProvider, ConfigurationErrorsBeforeAnyRequest) {
  ProviderConfig c;
  c.kind = ProviderKind::HttpChat;
  EXPECT_EQ(code_of([&] { execute_prompt("x", c); }), ErrorCode::InvalidConfig);
  c.endpointUrl = "http://127.0.0.1:1/v1/chat";
  c.apiKeyEnvVar = "CARSERVER_TEST_KEY_THAT_IS_NOT_SET";
  EXPECT_EQ(code_of([&] { execute_prompt("x", c); }), ErrorCode::MissingCredential);
}
