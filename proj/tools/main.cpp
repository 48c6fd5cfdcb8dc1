// carserver: command-line front end for the model-driven car server toolchain.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carserver/allocator.hpp"
#include "carserver/codegen.hpp"
#include "carserver/dataset.hpp"
#include "carserver/error.hpp"
#include "carserver/metamodel.hpp"
#include "carserver/ocl.hpp"
#include "carserver/pipeline.hpp"
#include "carserver/promptkit.hpp"
#include "carserver/text.hpp"
#include "carserver/xmi.hpp"

namespace fs = std::filesystem;
using namespace carserver;

namespace {

constexpr int kOk = 0;
constexpr int kStageError = 1;
constexpr int kCheckFailed = 2;

std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& items,
                                               std::string_view what) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::InvalidArgument,
                  std::string(what) + " must look like key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

void write_output(const fs::path& dir, const std::string& name, std::string_view contents) {
  fs::create_directories(dir);
  text::write_file(dir / name, contents);
  std::cout << (dir / name).string() << "\n";
}

int cmd_verify(const std::string& instance_path, const std::string& rules_path) {
  const auto instance = xmi::load_instance(instance_path);
  auto parsed = ocl::parse_ocl(text::read_file(rules_path));
  if (!parsed.ok()) {
    std::cerr << parsed.format_diagnostics(rules_path);
    return kStageError;
  }
  for (const auto& v : metamodel::validate_structure(instance))
    std::cerr << "warning: " << v.elementId << (v.field.empty() ? "" : "." + v.field) << ": "
              << v.message << "\n";
  const auto report = ocl::check_all(*parsed.document, instance);
  std::cout << report.format();
  return report.overall ? kOk : kCheckFailed;
}

int cmd_allocate(const std::string& instance_path, const std::string& objective,
                 const std::string& realtime, const std::string& output) {
  const auto obj = allocator::parse_objective(objective);
  if (!obj) throw Error(ErrorCode::InvalidArgument, "unknown objective '" + objective + "'");
  const auto rt = allocator::parse_realtime(realtime);
  if (!rt) throw Error(ErrorCode::InvalidArgument, "unknown realtime mode '" + realtime + "'");
  const auto instance = xmi::load_instance(instance_path);
  const auto problem = allocator::problem_from_instance(instance, *obj, *rt);
  const auto result = allocator::solve(problem);
  const std::string json = allocator::to_json(problem, result);
  if (output.empty())
    std::cout << json;
  else
    text::write_file(output, json);
  if (const auto* inf = std::get_if<allocator::Infeasible>(&result)) {
    std::cerr << "infeasible: " << inf->detail << "\n";
    return kCheckFailed;
  }
  return kOk;
}

struct EmitOptions {
  std::string instance;
  std::string target = "compose";
  std::string outDir = ".";
  std::string container;
  std::string templateFile;
  std::vector<std::string> aliases;
};

int cmd_emit(const EmitOptions& o) {
  const auto instance = xmi::load_instance(o.instance);
  const fs::path dir = o.outDir;
  if (o.target == "compose" || o.target == "k8s") {
    const auto target = o.target == "compose" ? codegen::DeploymentTarget::DockerCompose
                                              : codegen::DeploymentTarget::Kubernetes;
    const auto descriptor = codegen::generate_deployment(instance, target);
    for (const auto& [zone, doc] : descriptor.perZone)
      write_output(dir, o.target + "." + zone + ".yaml", doc);
  } else if (o.target == "idl") {
    write_output(dir, "interfaces.idl", codegen::emit_interfaces(instance));
  } else if (o.target == "dockerfile") {
    bool any = false;
    for (const auto& [id, c] : instance.containers) {
      if (!o.container.empty() && id != o.container) continue;
      if (o.container.empty() && (!c.script || !c.dependencies)) continue;
      write_output(dir, "Dockerfile." + id, codegen::generate_dockerfile(c));
      any = true;
    }
    if (!any)
      throw Error(o.container.empty() ? ErrorCode::MissingField : ErrorCode::UnknownId,
                  o.container.empty() ? "no container declares a script and dependencies"
                                      : "unknown container '" + o.container + "'");
  } else if (o.target == "carla") {
    if (o.templateFile.empty())
      throw Error(ErrorCode::InvalidArgument, "--template is required for --target carla");
    codegen::CodeTemplate tmpl;
    tmpl.id = fs::path(o.templateFile).filename().string();
    tmpl.text = text::read_file(o.templateFile);
    tmpl.aliases = parse_pairs(o.aliases, "--alias");
    write_output(dir, fs::path(o.templateFile).stem().string() + ".py",
                 codegen::parametrize_carla(instance, tmpl));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown target '" + o.target + "'");
  }
  return kOk;
}

struct DatasetAdd {
  std::string file;
  std::string requirement;
  std::string feature;
  std::string scenario;
  std::string metamodel;
  std::string oclFile;
  std::string instanceFile;
};

int cmd_dataset_add(const DatasetAdd& a) {
  auto row = dataset::from_user_form(a.requirement, a.feature, a.scenario, a.metamodel);
  if (!a.oclFile.empty()) row.oclRule = text::read_file(a.oclFile);
  if (!a.instanceFile.empty()) row.modelInstance = text::read_file(a.instanceFile);
  std::cout << dataset::append_row(a.file, row) << "\n";
  return kOk;
}

int cmd_dataset_get(const std::string& file, std::size_t index) {
  const auto row = dataset::get_row(file, index);
  nlohmann::ordered_json j;
  j["requirement"] = row.requirementText;
  j["feature"] = row.feature;
  j["scenario"] = row.scenario;
  j["metamodel"] = row.metamodel;
  j["ocl"] = row.oclRule ? nlohmann::ordered_json(*row.oclRule) : nullptr;
  j["instance"] = row.modelInstance ? nlohmann::ordered_json(*row.modelInstance) : nullptr;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_prompt(const std::string& id, const std::vector<std::string>& params,
               const std::vector<std::string>& param_files, bool hash_only) {
  auto values = parse_pairs(params, "--param");
  for (const auto& [key, path] : parse_pairs(param_files, "--param-file"))
    values[key] = text::read_file(path);
  const std::string prompt = promptkit::valorize_template(id, values);
  if (!hash_only) std::cout << prompt << "\n";
  std::cout << promptkit::prompt_hash(prompt) << "\n";
  return kOk;
}

struct GenerateOptions {
  std::string requirement;
  std::string config;
  std::map<std::string, std::string> overrides;
};

int cmd_generate(const GenerateOptions& g) {
  pipeline::PipelineConfig config;
  if (!g.config.empty()) config = pipeline::load_config(g.config);
  for (const auto& [key, value] : g.overrides)
    pipeline::apply_setting(config, key, value, fs::current_path());
  const auto result = pipeline::run_pipeline(g.requirement, config);
  if (result.exitCode == kOk || result.failedStage == pipeline::Stage::Verify)
    std::cout << result.message << "\n";
  else
    std::cerr << result.message << "\n";
  return result.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-driven toolchain for centralized car server deployments"};
  app.require_subcommand(1);

  std::string instance_path;
  std::string rules_path;
  auto* verify = app.add_subcommand("verify", "Check an instance against OCL invariants");
  verify->add_option("instance", instance_path, "Model instance (.carxmi)")->required();
  verify->add_option("rules", rules_path, "Invariants (.ocl)")->required();

  std::string objective = "PER_ASSIGNMENT_COST";
  std::string realtime = "EXACT_MATCH";
  std::string alloc_output;
  auto* allocate = app.add_subcommand("allocate", "Place containers and tasks on nodes");
  allocate->add_option("instance", instance_path, "Model instance (.carxmi)")->required();
  allocate->add_option("--objective", objective,
                       "PER_ASSIGNMENT_COST or NODE_ACTIVATION_COST");
  allocate->add_option("--realtime-mode", realtime,
                       "EXACT_MATCH or REQUIREMENT_IMPLIES_CAPABILITY");
  allocate->add_option("-o,--output", alloc_output, "Write the JSON report here");

  EmitOptions emit_opts;
  auto* emit = app.add_subcommand("emit", "Generate code artifacts from an instance");
  emit->add_option("instance", emit_opts.instance, "Model instance (.carxmi)")->required();
  emit->add_option("--target", emit_opts.target)
      ->check(CLI::IsMember({"compose", "k8s", "idl", "dockerfile", "carla"}));
  emit->add_option("-o,--out-dir", emit_opts.outDir, "Output directory");
  emit->add_option("--container", emit_opts.container, "Container id (dockerfile target)");
  emit->add_option("--template", emit_opts.templateFile, "Script template (carla target)");
  emit->add_option("--alias", emit_opts.aliases, "Placeholder alias prefix=elementId");

  auto* ds = app.add_subcommand("dataset", "Requirements dataset operations");
  ds->require_subcommand(1);
  DatasetAdd add_opts;
  auto* ds_add = ds->add_subcommand("add", "Append a row");
  ds_add->add_option("file", add_opts.file, "Dataset CSV")->required();
  ds_add->add_option("--requirement", add_opts.requirement)->required();
  ds_add->add_option("--feature", add_opts.feature);
  ds_add->add_option("--scenario", add_opts.scenario);
  ds_add->add_option("--metamodel", add_opts.metamodel);
  ds_add->add_option("--ocl", add_opts.oclFile, "File with the OCL rule");
  ds_add->add_option("--instance", add_opts.instanceFile, "File with the model instance");
  std::string get_file;
  std::size_t get_index = 0;
  auto* ds_get = ds->add_subcommand("get", "Print a row as JSON");
  ds_get->add_option("file", get_file, "Dataset CSV")->required();
  ds_get->add_option("index", get_index, "0-based row index")->required();

  std::string prompt_id;
  std::vector<std::string> prompt_params;
  std::vector<std::string> prompt_param_files;
  bool hash_only = false;
  auto* prompt = app.add_subcommand("prompt", "Render a prompt template and print its hash");
  prompt->add_option("template", prompt_id, "Template id, e.g. MODEL_INSTANCE")->required();
  prompt->add_option("--param", prompt_params, "name=value");
  prompt->add_option("--param-file", prompt_param_files, "name=path");
  prompt->add_flag("--hash-only", hash_only, "Print only the SHA-256 of the prompt");

  GenerateOptions gen;
  std::string flag_output, flag_provider, flag_fixtures, flag_objective, flag_realtime,
      flag_generation, flag_target;
  auto* generate = app.add_subcommand("generate", "Run the full requirement-to-deployment flow");
  generate->add_option("requirement", gen.requirement, "Requirement text")->required();
  generate->add_option("--config", gen.config, "key=value configuration file");
  generate->add_option("-o,--output-dir", flag_output);
  generate->add_option("--provider", flag_provider, "mock or http_chat");
  generate->add_option("--fixtures", flag_fixtures, "Mock fixture YAML");
  generate->add_option("--objective", flag_objective);
  generate->add_option("--realtime-mode", flag_realtime);
  generate->add_option("--generation", flag_generation, "rule_based or llm");
  generate->add_option("--target", flag_target, "compose or k8s");

  auto* describe = app.add_subcommand("metamodel", "Print the metamodel description");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*describe) {
      std::cout << metamodel::describe_metamodel();
      return kOk;
    }
    if (*verify) return cmd_verify(instance_path, rules_path);
    if (*allocate) return cmd_allocate(instance_path, objective, realtime, alloc_output);
    if (*emit) return cmd_emit(emit_opts);
    if (*ds_add) return cmd_dataset_add(add_opts);
    if (*ds_get) return cmd_dataset_get(get_file, get_index);
    if (*prompt) return cmd_prompt(prompt_id, prompt_params, prompt_param_files, hash_only);
    if (*generate) {
      for (const auto& [key, value] :
           {std::pair{"output_dir", &flag_output}, std::pair{"provider", &flag_provider},
            std::pair{"fixtures", &flag_fixtures}, std::pair{"objective", &flag_objective},
            std::pair{"realtime", &flag_realtime}, std::pair{"generation", &flag_generation},
            std::pair{"target", &flag_target}})
        if (!value->empty()) gen.overrides[key] = *value;
      return cmd_generate(gen);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kStageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageError;
  }
  return kStageError;
}
