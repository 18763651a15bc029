#include "limerick/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "limerick/evaluation.hpp"
#include "limerick/generator.hpp"
#include "limerick/langmodel.hpp"
#include "limerick/phonetics.hpp"
#include "limerick/storyline.hpp"
#include "limerick/templates.hpp"

namespace limerick {

using nlohmann::json;

namespace {

struct ResourceOptions {
  std::string lexicon;
  std::string overrides;
  std::string tags;
  std::string literals;
  std::string bank;
  std::string embeddings;
  std::string names;
  std::string patterns;
  std::string lm_spec;
  int ngram_order = 2;
  double alpha = 0.01;
  int timeout_ms = 2000;
  int top_k = 50;
};

struct LoadedResources {
  Lexicon lexicon;
  Tagger tagger;
  TemplateBank bank;
  EmbeddingSpace embeddings;
  NameLexicon names;
  std::vector<FirstLinePattern> patterns;
  std::unique_ptr<LanguageModel> model;
  MeterSpec meter;
};

std::unique_ptr<LanguageModel> load_model(const ResourceOptions& options) {
  const std::string& spec = options.lm_spec;
  if (spec.rfind("ngram:", 0) == 0) {
    std::string path = spec.substr(6);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
      return std::make_unique<NgramModel>(NgramModel::load_file(path));
    return std::make_unique<NgramModel>(
        train_ngram_file(path, options.ngram_order, options.alpha));
  }
  if (spec.rfind("remote:", 0) == 0) {
    RemoteEndpointConfig config;
    config.base_url = spec.substr(7);
    config.timeout_ms = options.timeout_ms;
    config.top_k = options.top_k;
    return std::make_unique<RemoteModel>(config);
  }
  throw LoadError("bad --lm spec (want ngram:<path> or remote:<url>): " + spec);
}

void emit_manifest(const std::string& subcommand, const json& options,
                   const std::string& manifest_out, std::ostream& err) {
  json manifest;
  manifest["tool"] = "limerick";
  manifest["version"] = kToolVersion;
  manifest["subcommand"] = subcommand;
  manifest["options"] = options;
  auto now = std::chrono::system_clock::now().time_since_epoch();
  manifest["timestamp_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  std::string line = manifest.dump();
  err << "manifest: " << line << "\n";
  if (!manifest_out.empty()) {
    std::ofstream file(manifest_out);
    if (!file) throw LoadError("cannot write manifest: " + manifest_out);
    file << line << "\n";
  }
}

json options_json(const ResourceOptions& r) {
  json out;
  if (!r.lexicon.empty()) out["lexicon"] = r.lexicon;
  if (!r.overrides.empty()) out["overrides"] = r.overrides;
  if (!r.tags.empty()) out["tags"] = r.tags;
  if (!r.literals.empty()) out["literals"] = r.literals;
  if (!r.bank.empty()) out["bank"] = r.bank;
  if (!r.embeddings.empty()) out["embeddings"] = r.embeddings;
  if (!r.names.empty()) out["names"] = r.names;
  if (!r.patterns.empty()) out["patterns"] = r.patterns;
  if (!r.lm_spec.empty()) out["lm"] = r.lm_spec;
  out["ngram_order"] = r.ngram_order;
  out["alpha"] = r.alpha;
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ','))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open list: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.push_back(case_fold(line));
  }
  if (words.empty()) throw LoadError("empty list: " + path);
  return words;
}

Limerick record_from_json(const std::string& line) {
  json parsed;
  try {
    parsed = json::parse(line);
  } catch (const json::exception& e) {
    throw LoadError(std::string("bad poem record: ") + e.what());
  }
  Limerick poem;
  poem.prompt = parsed.value("prompt", "");
  if (parsed.contains("mode")) poem.mode = parse_mode(parsed["mode"]);
  poem.seed = parsed.value("seed", 0ULL);
  poem.score = parsed.value("score", 0.0);
  const auto& lines = parsed.at("lines");
  if (!lines.is_array() || lines.size() != 5)
    throw LoadError("poem record needs 5 lines");
  for (std::size_t i = 0; i < 5; ++i) {
    std::istringstream in(lines[i].get<std::string>());
    std::string word;
    while (in >> word) poem.lines[i].push_back(case_fold(word));
  }
  if (parsed.contains("templates"))
    poem.template_ids = parsed["templates"].get<std::vector<int>>();
  if (parsed.contains("storyline")) {
    const auto& story = parsed["storyline"];
    poem.storyline.prompt = story.value("y0", "");
    for (int i = 1; i <= 5; ++i)
      poem.storyline.y(i) = story.value("y" + std::to_string(i), "");
  }
  return poem;
}

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = nullptr;

  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream = &fallback;
    } else {
      file.open(path);
      if (!file) throw LoadError("cannot write output: " + path);
      stream = &file;
    }
  }
  std::ostream& out() { return *stream; }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"constrained limerick generation engine"};
  app.require_subcommand(1);

  ResourceOptions res;
  std::string out_path;
  std::string manifest_out;
  std::uint64_t seed = 0;
  int beam = 360;
  int per_template = 12;
  std::string mode_text = "full";

  auto add_resource_flags = [&](CLI::App* cmd) {
    cmd->add_option("--lexicon", res.lexicon, "pronunciation dictionary");
    cmd->add_option("--overrides", res.overrides, "rhyme override csv");
    cmd->add_option("--tags", res.tags, "tag lexicon (word<TAB>TAG)");
    cmd->add_option("--literals", res.literals, "literal closed-class list");
    cmd->add_option("--bank", res.bank, "template bank json");
    cmd->add_option("--embeddings", res.embeddings, "word vector file");
    cmd->add_option("--names", res.names, "names file");
    cmd->add_option("--patterns", res.patterns, "first-line patterns");
    cmd->add_option("--lm", res.lm_spec, "ngram:<path> or remote:<url>");
    cmd->add_option("--ngram-order", res.ngram_order, "ngram order when training");
    cmd->add_option("--alpha", res.alpha, "additive smoothing constant");
    cmd->add_option("--timeout-ms", res.timeout_ms, "remote timeout");
    cmd->add_option("--top-k", res.top_k, "remote top-k");
    cmd->add_option("--out", out_path, "write primary output to a file");
    cmd->add_option("--manifest-out", manifest_out, "write the run manifest");
  };

  // extract-templates
  std::string corpus_path;
  auto* extract = app.add_subcommand("extract-templates",
                                     "build a template bank from a corpus");
  extract->add_option("--corpus", corpus_path, "tagged corpus jsonl")
      ->required();
  add_resource_flags(extract);

  // generate
  std::string prompt;
  bool include_line1_score = false;
  auto* generate = app.add_subcommand("generate", "generate one limerick");
  generate->add_option("--prompt", prompt, "prompt word")->required();
  generate->add_option("--seed", seed, "rng seed");
  generate->add_option("--mode", mode_text,
                       "full | no-story | single-template | candidate-rank");
  generate->add_option("--beam", beam, "total beam size N");
  generate->add_option("--per-template", per_template, "per-template beam n");
  generate->add_flag("--score-line1", include_line1_score,
                     "include line 1 tokens in the poem score");
  add_resource_flags(generate);

  // storyline
  int storyline_count = 1;
  auto* storyline_cmd =
      app.add_subcommand("storyline", "sample storyline tuples for a prompt");
  storyline_cmd->add_option("--prompt", prompt, "prompt word")->required();
  storyline_cmd->add_option("--seed", seed, "rng seed");
  storyline_cmd->add_option("--count", storyline_count, "tuples to sample");
  add_resource_flags(storyline_cmd);

  // validate
  std::string records_path;
  auto* validate = app.add_subcommand("validate", "validate poem records");
  validate->add_option("--in", records_path, "records jsonl (default stdin)");
  add_resource_flags(validate);

  // compare
  std::string modes_text = "full,candidate-rank";
  std::string prompts_path;
  std::string n_text = "2,3";
  int sample_size = 50;
  auto* compare = app.add_subcommand("compare",
                                     "diversity comparison between modes");
  compare->add_option("--modes", modes_text, "two modes, comma separated");
  compare->add_option("--prompts", prompts_path, "prompt list file")
      ->required();
  compare->add_option("--n", n_text, "ngram orders, comma separated");
  compare->add_option("--sample-size", sample_size, "last-line sample size");
  compare->add_option("--seed", seed, "rng seed");
  compare->add_option("--beam", beam, "total beam size N");
  compare->add_option("--per-template", per_template, "per-template beam n");
  add_resource_flags(compare);

  // serve-check
  auto* serve_check =
      app.add_subcommand("serve-check", "ping a remote scoring endpoint");
  add_resource_flags(serve_check);

  std::vector<const char*> argv;
  argv.push_back("limerick");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  auto require = [&](const std::string& value, const std::string& flag) {
    if (value.empty()) throw LoadError("missing required flag " + flag);
    return value;
  };

  try {
    if (extract->parsed()) {
      emit_manifest("extract-templates",
                    {{"corpus", corpus_path}, {"out", out_path}}, manifest_out,
                    err);
      auto corpus = load_corpus_file(corpus_path);
      ExtractionReport report;
      TemplateBank bank = extract_templates(corpus, &report);
      OutputTarget target(out_path, out);
      save_bank(bank, target.out());
      std::ostream& counts_out = out_path.empty() ? err : out;
      for (const auto& [line_idx, count] : report.templates_per_line)
        counts_out << "line " << line_idx << ": " << count << " templates\n";
      return 0;
    }

    if (generate->parsed() || compare->parsed() || storyline_cmd->parsed() ||
        validate->parsed()) {
      // Resources shared by the poem-level subcommands.
      LoadedResources loaded;
      loaded.meter = limerick_meter();
      loaded.lexicon = load_lexicon_file(require(res.lexicon, "--lexicon"));
      if (!res.overrides.empty())
        load_rhyme_overrides_file(res.overrides, loaded.lexicon);

      if (storyline_cmd->parsed()) {
        loaded.embeddings =
            load_embeddings_file(require(res.embeddings, "--embeddings"));
        loaded.names =
            load_names_file(require(res.names, "--names"), loaded.lexicon);
        json echo = options_json(res);
        echo["prompt"] = prompt;
        echo["seed"] = seed;
        echo["count"] = storyline_count;
        emit_manifest("storyline", echo, manifest_out, err);
        if (!loaded.lexicon.contains(prompt) ||
            !loaded.embeddings.contains(case_fold(prompt)))
          throw LoadError("prompt not usable (needs lexicon + embedding): " +
                          prompt);
        OutputTarget target(out_path, out);
        int produced = 0;
        for (int i = 0; i < storyline_count; ++i) {
          auto story = sample_storyline(prompt, loaded.lexicon,
                                        loaded.embeddings, loaded.names,
                                        mix_seed(seed, static_cast<std::uint64_t>(i)));
          if (!story) continue;
          json tuple;
          tuple["y0"] = story->prompt;
          for (int k = 1; k <= 5; ++k)
            tuple["y" + std::to_string(k)] = story->y(k);
          target.out() << tuple.dump() << "\n";
          ++produced;
        }
        if (produced == 0) {
          err << "no storyline survived sampling\n";
          return 1;
        }
        return 0;
      }

      loaded.tagger = load_tagger_files(require(res.tags, "--tags"),
                                        require(res.literals, "--literals"));
      loaded.bank = load_bank_file(require(res.bank, "--bank"));

      if (validate->parsed()) {
        json echo = options_json(res);
        echo["in"] = records_path.empty() ? "<stdin>" : records_path;
        emit_manifest("validate", echo, manifest_out, err);
        std::ifstream file;
        std::istream* in = &std::cin;
        if (!records_path.empty()) {
          file.open(records_path);
          if (!file) throw LoadError("cannot open records: " + records_path);
          in = &file;
        }
        OutputTarget target(out_path, out);
        bool all_pass = true;
        std::string line;
        std::size_t count = 0;
        while (std::getline(*in, line)) {
          if (line.empty()) continue;
          Limerick poem = record_from_json(line);
          ValidationReport report = validate_limerick(
              poem, loaded.lexicon, loaded.meter, loaded.bank, loaded.tagger);
          target.out() << to_json_report(report) << "\n";
          all_pass = all_pass && report.hard_pass;
          ++count;
        }
        if (count == 0) throw LoadError("no records to validate");
        return all_pass ? 0 : 1;
      }

      loaded.embeddings =
          load_embeddings_file(require(res.embeddings, "--embeddings"));
      loaded.names =
          load_names_file(require(res.names, "--names"), loaded.lexicon);
      loaded.patterns =
          load_patterns_file(require(res.patterns, "--patterns"));
      loaded.model = load_model(res);

      GenerationResources resources;
      resources.lexicon = &loaded.lexicon;
      resources.bank = &loaded.bank;
      resources.meter = &loaded.meter;
      resources.tagger = &loaded.tagger;
      resources.model = loaded.model.get();
      resources.embeddings = &loaded.embeddings;
      resources.names = &loaded.names;
      resources.patterns = &loaded.patterns;

      if (generate->parsed()) {
        json echo = options_json(res);
        echo["prompt"] = prompt;
        echo["seed"] = seed;
        echo["mode"] = mode_text;
        echo["beam"] = beam;
        echo["per_template"] = per_template;
        emit_manifest("generate", echo, manifest_out, err);
        if (!loaded.lexicon.contains(prompt) ||
            !loaded.embeddings.contains(case_fold(prompt)))
          throw LoadError("prompt not usable (needs lexicon + embedding): " +
                          prompt);
        GenerationRequest request;
        request.prompt = prompt;
        request.mode = parse_mode(mode_text);
        request.search.rng_seed = seed;
        request.search.total_beam = beam;
        request.search.per_template = per_template;
        request.include_line1_in_score = include_line1_score;
        auto poems = generate_limericks(request, resources);
        OutputTarget target(out_path, out);
        target.out() << to_json_record(poems.front()) << "\n";
        return 0;
      }

      // compare
      auto modes = split_list(modes_text);
      if (modes.size() != 2) throw LoadError("--modes needs exactly two modes");
      auto prompts = read_word_list(require(prompts_path, "--prompts"));
      std::vector<int> n_values;
      for (const auto& part : split_list(n_text)) {
        try {
          n_values.push_back(std::stoi(part));
        } catch (const std::exception&) {
          throw LoadError("bad --n value: " + part);
        }
      }
      if (n_values.empty()) throw LoadError("--n needs at least one order");
      json echo = options_json(res);
      echo["modes"] = modes;
      echo["prompts"] = prompts_path;
      echo["n"] = n_text;
      echo["seed"] = seed;
      echo["beam"] = beam;
      echo["per_template"] = per_template;
      emit_manifest("compare", echo, manifest_out, err);

      std::vector<std::vector<Limerick>> runs(2);
      for (std::size_t m = 0; m < 2; ++m) {
        Mode mode = parse_mode(modes[m]);
        for (std::size_t p = 0; p < prompts.size(); ++p) {
          if (!loaded.lexicon.contains(prompts[p]) ||
              !loaded.embeddings.contains(prompts[p])) {
            err << "skipping prompt without resources: " << prompts[p] << "\n";
            continue;
          }
          GenerationRequest request;
          request.prompt = prompts[p];
          request.mode = mode;
          request.search.rng_seed = mix_seed(seed, p);  // same seed per mode
          request.search.total_beam = beam;
          request.search.per_template = per_template;
          try {
            auto poems = generate_limericks(request, resources);
            runs[m].insert(runs[m].end(), poems.begin(), poems.end());
          } catch (const GenerationError& e) {
            err << "prompt " << prompts[p] << " (" << modes[m]
                << "): " << e.what() << "\n";
          }
        }
      }
      if (runs[0].empty() || runs[1].empty())
        throw GenerationError("a compare run produced no poems", 5);
      auto rows = compare_runs(runs[0], runs[1], n_values, sample_size, seed,
                               modes[0], modes[1]);
      OutputTarget target(out_path, out);
      write_comparison_csv(rows, target.out());
      return 0;
    }

    if (serve_check->parsed()) {
      emit_manifest("serve-check", options_json(res), manifest_out, err);
      if (res.lm_spec.rfind("remote:", 0) != 0)
        throw LoadError("serve-check needs --lm remote:<url>");
      RemoteEndpointConfig config;
      config.base_url = res.lm_spec.substr(7);
      config.timeout_ms = res.timeout_ms;
      config.top_k = res.top_k;
      auto start = std::chrono::steady_clock::now();
      TokenDistribution dist = remote_next_distribution(config, {});
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      json report;
      report["ok"] = true;
      report["tokens"] = dist.support.size();
      report["latency_ms"] = elapsed.count();
      out << report.dump() << "\n";
      return 0;
    }
  } catch (const GenerationError& e) {
    err << "generation failure: " << e.what() << "\n";
    return 1;
  } catch (const ScoringBackendError& e) {
    err << "scoring backend failure: " << e.what() << "\n";
    return 1;
  } catch (const UndefinedMetricError& e) {
    err << "metric failure: " << e.what() << "\n";
    return 1;
  } catch (const LoadError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    err << "internal contract violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace limerick
