#include "carserver/pipeline.hpp"

#include <cstdio>
#include <regex>
#include <sstream>

#include "carserver/error.hpp"
#include "carserver/ocl.hpp"
#include "carserver/text.hpp"
#include "carserver/xmi.hpp"

namespace carserver::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kLockName = ".carserver.lock";

class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / kLockName) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
      throw Error(ErrorCode::Locked,
                  "output directory is in use (remove " + path_.string() + " if stale)");
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

bool is_stage_artifact(const std::string& name) {
  static const std::regex re(
      R"(^(prompt\..*\.txt|response\..*\.txt|instance\.carxmi|rules\.ocl|verify\.txt|allocation\.json|compose\..*\.yaml|k8s\..*\.yaml)$)");
  return std::regex_match(name, re);
}

void clear_previous(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_stage_artifact(entry.path().filename().string()))
      fs::remove(entry.path());
}

struct StageFailure {
  Stage stage;
  std::string cause;
};

class Run {
 public:
  Run(const PipelineConfig& config, PipelineResult& result) : config_(config), result_(result) {}

  void write(const std::string& name, std::string_view contents) {
    text::write_file(config_.outputDir / name, contents);
    result_.written.push_back(name);
  }

  std::string ask(promptkit::TemplateId id, const promptkit::Params& params,
                  const std::string& tag) {
    const std::string prompt = promptkit::valorize_template(id, params);
    write("prompt." + tag + ".txt", prompt);
    const auto response = promptkit::execute_prompt(prompt, config_.provider);
    write("response." + tag + ".txt", response.raw);
    return promptkit::post_process(id, response.raw);
  }

 private:
  const PipelineConfig& config_;
  PipelineResult& result_;
};

template <typename F>
auto stage(Stage s, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw StageFailure{s, std::string(to_string(e.code())) + ": " + e.what()};
  } catch (const std::exception& e) {
    throw StageFailure{s, e.what()};
  }
}

std::string structural_report(const std::vector<metamodel::StructuralViolation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations)
    os << "STRUCTURE " << v.elementId << (v.field.empty() ? "" : "." + v.field) << ": "
       << v.message << "\n";
  return os.str();
}

std::int64_t parse_positive(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(std::string(v), &used);
    if (used == v.size() && n >= 0) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidConfig,
              std::string(key) + " must be a non-negative integer, got '" + std::string(v) + "'");
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Setup: return "setup";
    case Stage::ModelInstance: return "model-instance";
    case Stage::Constraints: return "constraints";
    case Stage::Verify: return "verify";
    case Stage::Allocate: return "allocate";
    case Stage::Generate: return "generate";
  }
  return "?";
}

void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value,
                   const fs::path& base) {
  const std::string v(text::trim(value));
  auto path = [&]() { return fs::path(v).is_absolute() ? fs::path(v) : base / v; };
  auto bad = [&]() {
    return Error(ErrorCode::InvalidConfig,
                 "invalid value '" + v + "' for " + std::string(key));
  };
  if (key == "provider") {
    if (v == "mock" || v == "MOCK")
      c.provider.kind = promptkit::ProviderKind::Mock;
    else if (v == "http_chat" || v == "HTTP_CHAT")
      c.provider.kind = promptkit::ProviderKind::HttpChat;
    else
      throw bad();
  } else if (key == "endpoint") {
    c.provider.endpointUrl = v;
  } else if (key == "api_key_env") {
    c.provider.apiKeyEnvVar = v;
  } else if (key == "model") {
    c.provider.model = v;
  } else if (key == "token_limit") {
    c.provider.tokenLimit = parse_positive(key, v);
  } else if (key == "timeout_ms") {
    c.provider.timeout = std::chrono::milliseconds(parse_positive(key, v));
  } else if (key == "retries") {
    c.provider.maxRetries = static_cast<int>(std::min<std::int64_t>(parse_positive(key, v), 2));
  } else if (key == "fixtures") {
    c.provider.fixtureFile = path();
  } else if (key == "default_fixture") {
    c.provider.defaultFixture = text::read_file(path());
  } else if (key == "metamodel") {
    c.metamodelDoc = path();
  } else if (key == "standard") {
    c.standardDoc = path();
  } else if (key == "output_dir") {
    c.outputDir = path();
  } else if (key == "objective") {
    auto o = allocator::parse_objective(v);
    if (!o) throw bad();
    c.objective = *o;
  } else if (key == "realtime") {
    auto r = allocator::parse_realtime(v);
    if (!r) throw bad();
    c.realtime = *r;
  } else if (key == "generation") {
    if (v == "rule_based" || v == "RULE_BASED")
      c.generation = GenerationMode::RuleBased;
    else if (v == "llm" || v == "LLM")
      c.generation = GenerationMode::Llm;
    else
      throw bad();
  } else if (key == "target") {
    if (v == "compose")
      c.target = codegen::DeploymentTarget::DockerCompose;
    else if (v == "k8s")
      c.target = codegen::DeploymentTarget::Kubernetes;
    else
      throw bad();
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown setting '" + std::string(key) + "'");
  }
}

PipelineConfig load_config(const fs::path& path) {
  PipelineConfig config;
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text::read_file(path), '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, path.string() + ":" + std::to_string(line_no) +
                                                ": expected key=value");
    try {
      apply_setting(config, text::trim(line.substr(0, eq)), line.substr(eq + 1), base);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

metamodel::ModelInstance apply_allocation(const metamodel::ModelInstance& instance,
                                          const allocator::Problem& problem,
                                          const allocator::Allocation& allocation) {
  metamodel::ModelInstance out = instance;
  for (auto& [id, zone] : out.zoneControllers) zone.containers.clear();
  for (std::size_t j = 0; j < problem.components.size(); ++j) {
    const std::string& cid = problem.components[j].id;
    if (!instance.containers.count(cid)) continue;
    const std::string& nid = problem.nodes[allocation.assignment[j]].id;
    std::string zone_id = nid;
    if (auto co = instance.coProcessors.find(nid); co != instance.coProcessors.end())
      zone_id = co->second.masterId;
    if (auto z = out.zoneControllers.find(zone_id); z != out.zoneControllers.end())
      z->second.containers.push_back(cid);
  }
  return out;
}

PipelineResult run_pipeline(std::string_view requirement, const PipelineConfig& config) {
  PipelineResult result;
  std::optional<DirectoryLock> lock;
  try {
    stage(Stage::Setup, [&] {
      if (text::trim(requirement).empty())
        throw Error(ErrorCode::EmptyRequirement, "requirement text is empty");
      for (const auto& [what, p] : {std::pair{"metamodel", config.metamodelDoc},
                                    std::pair{"standard", config.standardDoc}})
        if (p.empty() || !fs::is_regular_file(p))
          throw Error(ErrorCode::InvalidConfig,
                      std::string(what) + " document not found: " + p.string());
      fs::create_directories(config.outputDir);
      lock.emplace(config.outputDir);
      clear_previous(config.outputDir);
    });
    Run run(config, result);
    const std::string metamodel_text = stage(Stage::Setup, [&] {
      return text::read_file(config.metamodelDoc);
    });

    const metamodel::ModelInstance instance = stage(Stage::ModelInstance, [&] {
      const std::string xml = run.ask(promptkit::TemplateId::ModelInstance,
                                      {{"requirements", std::string(text::trim(requirement))},
                                       {"metamodel", metamodel_text}},
                                      "model_instance");
      auto parsed = xmi::parse_instance(xml);
      if (!parsed.ok())
        throw Error(ErrorCode::InvalidInstance, parsed.format_diagnostics("instance"));
      run.write("instance.carxmi", xmi::serialize_instance(*parsed.instance));
      return std::move(*parsed.instance);
    });

    const ocl::Document rules = stage(Stage::Constraints, [&] {
      const std::string standard = text::read_file(config.standardDoc);
      const std::string text = run.ask(promptkit::TemplateId::OclExtraction,
                                       {{"standard", standard}, {"metamodel", metamodel_text}},
                                       "constraints");
      auto parsed = ocl::parse_ocl(text);
      if (!parsed.ok()) throw Error(ErrorCode::Extraction, parsed.format_diagnostics("rules"));
      run.write("rules.ocl", text + "\n");
      return std::move(*parsed.document);
    });

    const bool pass = stage(Stage::Verify, [&] {
      const auto report = ocl::check_all(rules, instance);
      const auto violations = metamodel::validate_structure(instance);
      run.write("verify.txt", structural_report(violations) + report.format());
      return report.overall && violations.empty();
    });
    if (!pass) {
      result.exitCode = 2;
      result.failedStage = Stage::Verify;
      result.message = std::string(kNotCompliant);
      return result;
    }

    const auto allocation = stage(Stage::Allocate, [&] {
      const auto problem =
          allocator::problem_from_instance(instance, config.objective, config.realtime);
      const auto solved = allocator::solve(problem);
      run.write("allocation.json", allocator::to_json(problem, solved));
      return std::pair{problem, solved};
    });
    if (const auto* inf = std::get_if<allocator::Infeasible>(&allocation.second)) {
      result.exitCode = 2;
      result.failedStage = Stage::Allocate;
      result.message = "Allocation infeasible: " + inf->detail;
      return result;
    }

    stage(Stage::Generate, [&] {
      const auto hosted = apply_allocation(instance, allocation.first,
                                           std::get<allocator::Allocation>(allocation.second));
      const std::string prefix(codegen::to_string(config.target));
      const std::string instance_text = xmi::serialize_instance(hosted);
      for (const auto& [zone, controller] : hosted.zoneControllers) {
        std::string doc;
        if (config.generation == GenerationMode::RuleBased) {
          doc = config.target == codegen::DeploymentTarget::DockerCompose
                    ? codegen::generate_compose(hosted, zone)
                    : codegen::generate_k8s(hosted, zone);
        } else {
          const std::string prompt_lines = codegen::deployment_prompt_lines(hosted, zone);
          doc = run.ask(promptkit::TemplateId::Deployment,
                        {{"descriptor", config.target == codegen::DeploymentTarget::DockerCompose
                                            ? "Docker Compose file"
                                            : "Kubernetes descriptor (a single YAML document of "
                                              "kind List)"},
                         {"containers", prompt_lines},
                         {"instance", instance_text}},
                        "deployment." + zone);
          codegen::validate_llm_deployment(hosted, zone, config.target, doc);
          doc += "\n";
        }
        run.write(prefix + "." + zone + ".yaml", doc);
      }
    });
    result.message = "Deployment descriptors written to " + config.outputDir.string();
  } catch (const StageFailure& f) {
    result.exitCode = 1;
    result.failedStage = f.stage;
    result.message = "stage " + std::string(to_string(f.stage)) + " failed: " + f.cause;
  }
  return result;
}

}  // namespace carserver::pipeline
