#include "carserver/promptkit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>
#include <set>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "carserver/error.hpp"
#include "carserver/ocl.hpp"
#include "carserver/text.hpp"
#include "carserver/xmi.hpp"
#include "carserver/xml.hpp"

namespace carserver::promptkit {

namespace {

struct TemplateEntry {
  TemplateId id;
  std::string_view name;
  std::string_view text;
};

constexpr TemplateEntry kTemplates[] = {
    {TemplateId::ModelInstance, "MODEL_INSTANCE",
     "Create XMI model instance for [requirements] and [metamodel]"},
    {TemplateId::OclExtraction, "OCL_EXTRACTION",
     "Based on reference requirements [standard] and metamodel [metamodel] extract OCL "
     "constraints"},
    {TemplateId::CarlaParametrize, "CARLA_PARAMETRIZE",
     "Based on Ecore instance [instance] fill in the template [template]"},
    {TemplateId::Dockerfile, "DOCKERFILE",
     "Write Dockerfile to containerize script [script] written in [language] using dependencies "
     "[deps]"},
    {TemplateId::Adapter, "ADAPTER", "Generate [language] code to convert [source] to [target]"},
    {TemplateId::Deployment, "DEPLOYMENT",
     "Generate [descriptor] to run containers:\n[containers]\nbased on model instance "
     "[instance]"},
};

const TemplateEntry& entry_of(TemplateId id) {
  for (const auto& t : kTemplates)
    if (t.id == id) return t;
  throw Error(ErrorCode::UnknownTemplate, "unknown template");
}

const std::regex& placeholder_re() {
  static const std::regex re(R"(\[([A-Za-z_][A-Za-z0-9_]*)\])");
  return re;
}

// ---------------------------------------------------------------------------
// Provider helpers

std::vector<std::pair<std::size_t, std::size_t>> token_spans(std::string_view s) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    spans.emplace_back(start, i);
  }
  return spans;
}

ProviderResponse mock_execute(std::string_view prompt, const ProviderConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  std::map<std::string, std::string> table = config.fixtures;
  if (config.fixtureFile)
    for (auto& [k, v] : load_fixtures(*config.fixtureFile)) table.emplace(k, v);
  const std::string hash = prompt_hash(prompt);
  std::string raw;
  if (auto it = table.find(hash); it != table.end()) {
    raw = it->second;
  } else if (config.defaultFixture) {
    raw = *config.defaultFixture;
  } else {
    throw Error(ErrorCode::UnknownFixture, "no mock fixture for prompt hash " + hash);
  }
  const auto spans = token_spans(raw);
  std::int64_t used = static_cast<std::int64_t>(spans.size());
  if (used > config.tokenLimit) {
    raw.resize(spans[static_cast<std::size_t>(config.tokenLimit) - 1].second);
    used = config.tokenLimit;
  }
  return {std::move(raw), used,
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                started)};
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re))
    throw Error(ErrorCode::InvalidConfig, "endpoint URL must be http(s)://host[:port]/path: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

ProviderResponse http_execute(std::string_view prompt, const ProviderConfig& config) {
  if (!config.endpointUrl || config.endpointUrl->empty())
    throw Error(ErrorCode::InvalidConfig, "HTTP_CHAT provider requires an endpoint URL");
  const char* key = std::getenv(config.apiKeyEnvVar.c_str());
  if (!key || !*key)
    throw Error(ErrorCode::MissingCredential,
                "environment variable " + config.apiKeyEnvVar + " is not set");
  const Endpoint ep = split_url(*config.endpointUrl);

  nlohmann::json body = {
      {"model", config.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"max_tokens", config.tokenLimit},
  };
  const std::string payload = body.dump();

  const int attempts = 1 + std::clamp(config.maxRetries, 0, 2);
  for (int attempt = 1;; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_bearer_token_auth(key);
    auto res = client.Post(ep.path, payload, "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= config.timeout * 9 / 10);
      if (timed_out) {
        if (attempt < attempts) continue;
        throw Error(ErrorCode::ProviderTimeout,
                    "provider did not answer within " + std::to_string(config.timeout.count()) +
                        " ms");
      }
      throw Error(ErrorCode::ProviderStatus, "request failed: " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300)
      throw Error(ErrorCode::ProviderStatus, "provider returned HTTP " +
                                                 std::to_string(res->status) + ": " +
                                                 res->body.substr(0, 200));
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderResponse, std::string("response is not JSON: ") + e.what());
    }
    const auto* content = [&]() -> const nlohmann::json* {
      if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
        return nullptr;
      const auto& first = reply["choices"][0];
      if (!first.contains("message") || !first["message"].contains("content")) return nullptr;
      const auto& c = first["message"]["content"];
      return c.is_string() ? &c : nullptr;
    }();
    if (!content)
      throw Error(ErrorCode::ProviderResponse, "response has no choices[0].message.content");
    ProviderResponse out;
    out.raw = content->get<std::string>();
    out.latency = elapsed;
    out.tokensUsed = static_cast<std::int64_t>(token_spans(out.raw).size());
    if (reply.contains("usage") && reply["usage"].contains("completion_tokens") &&
        reply["usage"]["completion_tokens"].is_number_integer())
      out.tokensUsed = reply["usage"]["completion_tokens"].get<std::int64_t>();
    if (out.tokensUsed > config.tokenLimit)
      throw Error(ErrorCode::ProviderResponse,
                  "provider used " + std::to_string(out.tokensUsed) + " tokens, limit is " +
                      std::to_string(config.tokenLimit));
    if (out.raw.empty()) throw Error(ErrorCode::ProviderResponse, "provider returned empty content");
    return out;
  }
}

// ---------------------------------------------------------------------------
// Post-processing

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> lines = text::split(text, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out += "\n";
    out += lines[k];
  }
  return out;
}

std::string rtrim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

std::string strip_blank_edges(std::string_view s) {
  auto lines = lines_of(s);
  std::size_t b = 0;
  std::size_t e = lines.size();
  while (b < e && text::trim(lines[b]).empty()) ++b;
  while (e > b && text::trim(lines[e - 1]).empty()) --e;
  return rtrim(join_lines(lines, b, e));
}

[[noreturn]] void extraction(TemplateId id, const std::string& why) {
  throw Error(ErrorCode::Extraction,
              std::string(to_string(id)) + ": " + why);
}

std::string extract_model_instance(std::string_view raw) {
  std::string first_problem;
  for (std::size_t pos = raw.find('<'); pos != std::string_view::npos;
       pos = raw.find('<', pos + 1)) {
    auto frag = xml::parse_element_at(raw, pos);
    if (!frag || frag->root.name != "CarServer") continue;
    std::string candidate(raw.substr(frag->begin, frag->end - frag->begin));
    auto parsed = xmi::parse_instance(candidate);
    if (parsed.ok()) return candidate;
    if (first_problem.empty()) first_problem = parsed.format_diagnostics("response");
    pos = frag->end - 1;
  }
  if (!first_problem.empty())
    extraction(TemplateId::ModelInstance, "model instance is invalid:\n" + first_problem);
  extraction(TemplateId::ModelInstance, "no well-formed <CarServer> element in response");
}

std::string accept_ocl(const std::string& candidate) {
  auto parsed = ocl::parse_ocl(candidate);
  if (!parsed.ok())
    extraction(TemplateId::OclExtraction,
               "constraints do not check:\n" + parsed.format_diagnostics("response"));
  return candidate;
}

std::string extract_ocl(std::string_view raw) {
  const std::string whole = strip_blank_edges(raw);
  if (!whole.empty() && ocl::is_syntactically_valid(whole)) {
    auto parsed = ocl::parse_ocl(whole);
    if (parsed.ok() && !parsed.document->invariants.empty()) return whole;
  }
  const auto lines = lines_of(raw);
  for (std::size_t start = 0; start < lines.size(); ++start) {
    if (!text::starts_with_word(text::trim(lines[start]), "context")) continue;
    for (std::size_t end = lines.size(); end > start; --end) {
      const std::string candidate = strip_blank_edges(join_lines(lines, start, end));
      if (ocl::is_syntactically_valid(candidate)) return accept_ocl(candidate);
    }
  }
  extraction(TemplateId::OclExtraction, "no OCL invariant block in response");
}

bool key_line(std::string_view line) {
  static const std::regex re(R"(^[A-Za-z_][A-Za-z0-9_.\-]*:(\s.*)?$)");
  return std::regex_match(line.begin(), line.end(), re);
}

bool yaml_continuation(std::string_view line) {
  if (text::trim(line).empty()) return true;
  if (line[0] == ' ' || line[0] == '\t' || line[0] == '#') return true;
  if (line.substr(0, 2) == "- " || line == "-") return true;
  return key_line(line);
}

std::string shrink_yaml(const std::vector<std::string>& lines) {
  for (std::size_t end = lines.size(); end > 0; --end) {
    const std::string candidate = strip_blank_edges(join_lines(lines, 0, end));
    if (!candidate.empty() && is_yaml_mapping(candidate)) return candidate;
  }
  return {};
}

// First YAML mapping that starts at a `key:` token (possibly mid-line) and
// runs until a document marker, a fence or unindented prose.
std::string scan_yaml(std::string_view text) {
  static const std::regex key_re(R"((^|\s)([A-Za-z_][A-Za-z0-9_\-]*):(\s|$))");
  const auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (text::trim(lines[k]).substr(0, 1) == "#") continue;
    for (auto it = std::sregex_iterator(lines[k].begin(), lines[k].end(), key_re);
         it != std::sregex_iterator(); ++it) {
      const auto offset = static_cast<std::size_t>(it->position(2));
      std::vector<std::string> doc{lines[k].substr(offset)};
      for (std::size_t n = k + 1; n < lines.size(); ++n) {
        const std::string& l = lines[n];
        const auto t = text::trim(l);
        if (t == "---" || t == "..." || t.substr(0, 3) == "```") break;
        if (!yaml_continuation(l)) break;
        doc.push_back(l);
      }
      std::string found = shrink_yaml(doc);
      if (!found.empty()) return found;
    }
  }
  return {};
}

std::string extract_deployment(std::string_view raw) {
  for (const auto& block : fenced_blocks(raw)) {
    std::string found = scan_yaml(block);
    if (!found.empty()) return found;
  }
  std::string found = scan_yaml(raw);
  if (!found.empty()) return found;
  extraction(TemplateId::Deployment, "no YAML mapping in response");
}

std::string extract_dockerfile(std::string_view raw) {
  for (const auto& block : fenced_blocks(raw)) {
    const std::string candidate = strip_blank_edges(block);
    if (is_dockerfile(candidate)) return candidate;
  }
  const std::string whole = strip_blank_edges(raw);
  if (is_dockerfile(whole)) return whole;
  const auto lines = lines_of(raw);
  for (std::size_t start = 0; start < lines.size(); ++start) {
    const auto t = text::trim(lines[start]);
    if (t.size() < 5 || !(t.substr(0, 5) == "FROM " || t.substr(0, 5) == "from ")) continue;
    for (std::size_t end = lines.size(); end > start; --end) {
      const std::string candidate = strip_blank_edges(join_lines(lines, start, end));
      if (is_dockerfile(candidate)) return candidate;
    }
  }
  extraction(TemplateId::Dockerfile, "no Dockerfile in response");
}

bool code_like(std::string_view text) {
  static const std::regex re(
      R"(^\s*(import |from \S+ import |def |class |return\b|#include|[A-Za-z_][\w.\[\]'"]*\s*=[^=]|[A-Za-z_][\w.]*\(.*\)\s*;?\s*$|\}|\{))");
  for (const auto& line : lines_of(text))
    if (std::regex_search(line.begin(), line.end(), re)) return true;
  return false;
}

bool has_model_placeholder(std::string_view text) {
  static const std::regex re(R"(\[[A-Za-z_][\w\-]*\.[A-Za-z_]\w*(:\w+)?\])");
  return std::regex_search(text.begin(), text.end(), re);
}

std::string extract_code(TemplateId id, std::string_view raw) {
  auto acceptable = [&](const std::string& c) {
    return !c.empty() && code_like(c) &&
           !(id == TemplateId::CarlaParametrize && has_model_placeholder(c));
  };
  const auto blocks = fenced_blocks(raw);
  for (const auto& block : blocks) {
    const std::string candidate = strip_blank_edges(block);
    if (acceptable(candidate)) return candidate;
  }
  if (blocks.empty()) {
    const std::string whole = strip_blank_edges(raw);
    const auto whole_lines = lines_of(whole);
    const bool stray_fence = std::any_of(whole_lines.begin(), whole_lines.end(),
                                         [](const std::string& l) {
                                           return text::trim(l).substr(0, 3) == "```";
                                         });
    if (!stray_fence && acceptable(whole)) return whole;
  }
  extraction(id, "no code block in response");
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates

std::string_view to_string(TemplateId id) { return entry_of(id).name; }

TemplateId parse_template_id(std::string_view name) {
  for (const auto& t : kTemplates)
    if (t.name == name) return t.id;
  throw Error(ErrorCode::UnknownTemplate, "unknown template '" + std::string(name) + "'");
}

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto it = std::cregex_iterator(text.data(), text.data() + text.size(), placeholder_re());
       it != std::cregex_iterator(); ++it) {
    std::string name = (*it)[1].str();
    if (seen.insert(name).second) out.push_back(std::move(name));
  }
  return out;
}

const PromptTemplate& get_template(TemplateId id) {
  static const std::vector<PromptTemplate> table = [] {
    std::vector<PromptTemplate> t;
    for (const auto& s : kTemplates) t.push_back({s.id, s.text, placeholders(s.text)});
    return t;
  }();
  for (const auto& t : table)
    if (t.id == id) return t;
  throw Error(ErrorCode::UnknownTemplate, "unknown template");
}

const std::vector<TemplateId>& all_templates() {
  static const std::vector<TemplateId> ids = [] {
    std::vector<TemplateId> v;
    for (const auto& s : kTemplates) v.push_back(s.id);
    return v;
  }();
  return ids;
}

std::string valorize_template(TemplateId id, const Params& params) {
  const PromptTemplate& t = get_template(id);
  for (const auto& name : t.requiredParams)
    if (!params.count(name))
      throw Error(ErrorCode::MissingParam, std::string(to_string(id)) + " requires parameter '" +
                                               name + "'");
  for (const auto& [name, value] : params)
    if (std::find(t.requiredParams.begin(), t.requiredParams.end(), name) ==
        t.requiredParams.end())
      throw Error(ErrorCode::ExtraParam, std::string(to_string(id)) +
                                             " has no parameter '" + name + "'");
  std::string out;
  const std::string_view text = t.text;
  std::size_t last = 0;
  for (auto it = std::cregex_iterator(text.data(), text.data() + text.size(), placeholder_re());
       it != std::cregex_iterator(); ++it) {
    const auto pos = static_cast<std::size_t>(it->position(0));
    out.append(text.substr(last, pos - last));
    out += params.at((*it)[1].str());
    last = pos + static_cast<std::size_t>(it->length(0));
  }
  out.append(text.substr(last));
  return out;
}

std::string valorize_template(std::string_view id, const Params& params) {
  return valorize_template(parse_template_id(id), params);
}

// ---------------------------------------------------------------------------
// Providers

std::string prompt_hash(std::string_view prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::map<std::string, std::string> load_fixtures(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::Load(text::read_file(path));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig,
                "fixture file " + path.string() + " is not valid YAML: " + e.what());
  }
  std::map<std::string, std::string> out;
  if (root.IsNull()) return out;
  if (!root.IsMap())
    throw Error(ErrorCode::InvalidConfig, "fixture file " + path.string() + " must be a map");
  for (const auto& kv : root) {
    if (!kv.second.IsScalar())
      throw Error(ErrorCode::InvalidConfig,
                  "fixture " + kv.first.as<std::string>() + " must be a string");
    out.emplace(kv.first.as<std::string>(), kv.second.as<std::string>());
  }
  return out;
}

ProviderResponse execute_prompt(std::string_view prompt, const ProviderConfig& config) {
  if (config.tokenLimit <= 0)
    throw Error(ErrorCode::InvalidConfig, "tokenLimit must be positive");
  if (config.kind == ProviderKind::Mock) return mock_execute(prompt, config);
  return http_execute(prompt, config);
}

// ---------------------------------------------------------------------------
// Post-processing

std::vector<std::string> fenced_blocks(std::string_view text) {
  std::vector<std::string> out;
  const auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto open = text::trim(lines[k]);
    if (open.substr(0, 3) != "```") continue;
    std::size_t close = k + 1;
    while (close < lines.size() && text::trim(lines[close]).substr(0, 3) != "```") ++close;
    if (close >= lines.size()) break;
    out.push_back(join_lines(lines, k + 1, close));
    k = close;
  }
  return out;
}

bool is_dockerfile(std::string_view text) {
  static const std::set<std::string> instructions = {
      "FROM",   "RUN",        "CMD",     "LABEL",       "EXPOSE",      "ENV",
      "ADD",    "COPY",       "ENTRYPOINT", "VOLUME",  "USER",        "WORKDIR",
      "ARG",    "ONBUILD",    "STOPSIGNAL", "HEALTHCHECK", "SHELL",   "MAINTAINER",
  };
  bool continuation = false;
  bool seen_from = false;
  bool any = false;
  for (const auto& line : lines_of(text)) {
    const auto t = text::trim(line);
    if (continuation) {
      continuation = !t.empty() && t.back() == '\\';
      continue;
    }
    if (t.empty() || t[0] == '#') continue;
    const auto space = t.find_first_of(" \t");
    std::string word(t.substr(0, space));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (!instructions.count(word) || space == std::string_view::npos) return false;
    if (!seen_from && word != "FROM" && word != "ARG") return false;
    if (word == "FROM") seen_from = true;
    any = true;
    continuation = t.back() == '\\';
  }
  return any && seen_from;
}

bool is_yaml_mapping(std::string_view text) {
  if (text::trim(text).empty()) return false;
  try {
    const YAML::Node node = YAML::Load(std::string(text));
    return node.IsMap() && node.size() > 0;
  } catch (const YAML::Exception&) {
    return false;
  }
}

std::string post_process(TemplateId id, std::string_view raw) {
  if (text::trim(raw).empty()) extraction(id, "empty response");
  switch (id) {
    case TemplateId::ModelInstance: return extract_model_instance(raw);
    case TemplateId::OclExtraction: return extract_ocl(raw);
    case TemplateId::Deployment: return extract_deployment(raw);
    case TemplateId::Dockerfile: return extract_dockerfile(raw);
    case TemplateId::Adapter:
    case TemplateId::CarlaParametrize: return extract_code(id, raw);
  }
  extraction(id, "unsupported template");
}

}  // namespace carserver::promptkit
