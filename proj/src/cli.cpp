#include "docseed/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "docseed/active_learning.hpp"
#include "docseed/error.hpp"
#include "docseed/ingest.hpp"
#include "docseed/json_io.hpp"
#include "docseed/pipeline.hpp"
#include "docseed/service.hpp"
#include "docseed/store.hpp"
#include "docseed/synth.hpp"

namespace docseed {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Files given directly, plus every file with `ext` directly inside a given directory.
std::vector<fs::path> expand(const std::vector<std::string>& inputs, const std::string& ext) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ext) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw Error("no such file or directory: " + in);
    }
  }
  return out;
}

std::optional<fs::path> sibling_image(const fs::path& file) {
  for (const char* ext : {".png", ".jpg", ".jpeg", ".tif", ".tiff"}) {
    fs::path candidate = file;
    candidate.replace_extension(ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

struct ConfigFlags {
  std::string classifier;
  std::string endpoint;
  std::string strategy;
  std::string max_distance;
  std::optional<double> vertical_weight;

  void add_to(CLI::App* cmd, bool link_flags) {
    cmd->add_option("--classifier", classifier, "gold_replay | rule_based | remote");
    cmd->add_option("--endpoint", endpoint, "classifier service base URL");
    if (!link_flags) return;
    cmd->add_option("--strategy", strategy, "mean_entropy | min_margin");
    cmd->add_option("--max-link-distance", max_distance, "fraction of the page diagonal, or 'unbounded'");
    cmd->add_option("--vertical-weight", vertical_weight, "weight of vertical offsets in link distance");
  }

  void apply(ProjectConfig& c) const {
    if (!classifier.empty()) {
      auto choice = parse_classifier_choice(classifier);
      if (!choice) throw UsageError("unknown classifier " + classifier);
      c.classifier = *choice;
    }
    if (!endpoint.empty()) c.endpoint = endpoint;
    if (!strategy.empty()) {
      auto s = parse_uncertainty_strategy(strategy);
      if (!s) throw UsageError("unknown strategy " + strategy);
      c.strategy = *s;
    }
    if (max_distance == "unbounded") {
      c.link.max_link_distance_ratio = std::nullopt;
    } else if (!max_distance.empty()) {
      try {
        std::size_t used = 0;
        c.link.max_link_distance_ratio = std::stod(max_distance, &used);
        if (used != max_distance.size()) throw std::invalid_argument(max_distance);
      } catch (const std::exception&) {
        throw UsageError("--max-link-distance must be a number or 'unbounded'");
      }
    }
    if (vertical_weight) c.link.vertical_weight = *vertical_weight;
    try {
      c.link.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (c.classifier == ClassifierChoice::remote && c.endpoint.empty())
      throw UsageError("the remote classifier needs --endpoint");
  }
};

std::string fixed4(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << v;
  return ss.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstraps document-specific key/value annotations and runs the review loop.", "docseed"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string root;
  const char* env_root = std::getenv("PROJECT_ROOT");
  app.add_option("--root", root, "project directory (default: $PROJECT_ROOT)");

  ConfigFlags flags;

  auto* init = app.add_subcommand("init", "create an empty project");
  flags.add_to(init, true);

  auto* ingest = app.add_subcommand("ingest", "add OCR TSV or FUNSD files to the project");
  std::vector<std::string> funsd_inputs, tsv_inputs;
  ingest->add_option("--funsd", funsd_inputs, "FUNSD JSON files or directories");
  ingest->add_option("--tsv", tsv_inputs, "Tesseract TSV files or directories");

  auto* bootstrap = app.add_subcommand("bootstrap", "classify, link and generate annotations");
  flags.add_to(bootstrap, false);
  bool force = false;
  unsigned jobs = 1;
  bootstrap->add_flag("--force", force, "redo documents that have no review actions yet");
  bootstrap->add_option("--jobs", jobs, "documents processed in parallel")->check(CLI::Range(1u, 256u));

  auto* serve = app.add_subcommand("serve", "run the review HTTP API");
  std::string bind = "127.0.0.1:8080";
  serve->add_option("--bind", bind, "host:port (port 0 picks a free one)");

  auto* sample = app.add_subcommand("sample", "print the next review batch");
  std::size_t k = 10;
  std::string sample_strategy;
  bool sample_json = false;
  sample->add_option("--k", k, "batch size")->check(CLI::PositiveNumber);
  sample->add_option("--strategy", sample_strategy, "mean_entropy | min_margin");
  sample->add_flag("--json", sample_json, "print JSON");

  auto* iterate = app.add_subcommand("iterate", "export reviewed documents as a training iteration");

  auto* score = app.add_subcommand("score", "entity and linking scores against gold data");
  bool score_json = false;
  score->add_flag("--json", score_json, "print JSON");

  auto* synth = app.add_subcommand("synth", "write synthetic FUNSD forms");
  std::string synth_out;
  int count = 20;
  std::uint64_t seed = 1;
  std::string prefix = "synth";
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", count, "number of forms")->check(CLI::Range(0, 100000));
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--prefix", prefix, "file name prefix");

  if (!args.empty() && !args.front().starts_with("-")) {
    const auto subs = app.get_subcommands([&](CLI::App* s) { return s->get_name() == args.front(); });
    if (subs.empty()) {
      err << "docseed: unknown subcommand \"" << args.front() << "\"\nrun with --help for usage\n";
      return kExitUsage;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    }
    err << "docseed: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  auto project_root = [&]() -> fs::path {
    if (!root.empty()) return root;
    if (env_root && *env_root) return env_root;
    throw UsageError("no project: pass --root or set PROJECT_ROOT");
  };

  try {
    if (synth->parsed()) {
      fs::create_directories(synth_out);
      std::mt19937_64 rng(seed);
      for (int i = 0; i < count; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s-%03d", prefix.c_str(), i);
        auto [doc, gold] = synth_form(rng, name);
        std::ofstream f(fs::path(synth_out) / (std::string(name) + ".json"), std::ios::binary);
        f << export_funsd(doc, gold);
        if (!f) throw Error("cannot write into " + synth_out);
      }
      out << "wrote " << count << " forms to " << synth_out << "\n";
      return kExitOk;
    }

    if (init->parsed()) {
      ProjectConfig config;
      flags.apply(config);
      ProjectStore::create(project_root(), config);
      out << "initialized project at " << project_root().string() << "\n";
      return kExitOk;
    }

    ProjectStore store = ProjectStore::open(project_root());

    if (ingest->parsed()) {
      if (funsd_inputs.empty() && tsv_inputs.empty()) throw UsageError("ingest needs --funsd or --tsv");
      int added = 0, present = 0;
      for (const fs::path& file : expand(funsd_inputs, ".json")) {
        try {
          auto [doc, gold] = parse_funsd(read_text(file), file.stem().string());
          store.put_document(doc, gold, sibling_image(file)) ? ++added : ++present;
        } catch (const FormatError& e) {
          throw FormatError(file.string() + ": " + e.what());
        }
      }
      for (const fs::path& file : expand(tsv_inputs, ".tsv")) {
        try {
          const auto pages = parse_ocr_tsv_pages(read_text(file), file.stem().string());
          const auto image = pages.size() == 1 ? sibling_image(file) : std::nullopt;
          for (const Document& doc : pages) store.put_document(doc, std::nullopt, image) ? ++added : ++present;
        } catch (const FormatError& e) {
          throw FormatError(file.string() + ": " + e.what());
        }
      }
      out << "ingested " << added << " document(s), " << present << " already present\n";
      return kExitOk;
    }

    if (bootstrap->parsed()) {
      ProjectConfig config = store.config();
      flags.apply(config);
      const BootstrapSummary s = bootstrap_project(store, config, force, jobs);
      out << "bootstrapped " << s.processed.size() << " document(s), skipped " << s.skipped.size() << ", "
          << s.annotations << " annotation(s), " << store.schema().labels.size() << " label(s)\n";
      return kExitOk;
    }

    if (serve->parsed()) {
      const auto colon = bind.rfind(':');
      int port = -1;
      if (colon != std::string::npos) {
        try {
          std::size_t used = 0;
          port = std::stoi(bind.substr(colon + 1), &used);
          if (used != bind.size() - colon - 1) port = -1;
        } catch (const std::exception&) {
          port = -1;
        }
      }
      if (port < 0 || port > 65535) throw UsageError("--bind must be host:port");
      const std::string host = bind.substr(0, colon);
      ReviewServer server(store);
      server.start(host, port);
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      out << "listening on http://" << host << ":" << server.port() << std::endl;
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      server.stop();
      out << "stopped" << std::endl;
      return kExitOk;
    }

    if (sample->parsed()) {
      UncertaintyStrategy strategy = store.config().strategy;
      if (!sample_strategy.empty()) {
        auto s = parse_uncertainty_strategy(sample_strategy);
        if (!s) throw UsageError("unknown strategy " + sample_strategy);
        strategy = *s;
      }
      const auto batch = review_queue(store, strategy, k);
      if (sample_json) {
        json items = json::array();
        for (const QueueItem& q : batch) items.push_back({{"doc_id", q.doc_id}, {"score", q.score}});
        out << items.dump() << "\n";
      } else {
        for (const QueueItem& q : batch) out << q.doc_id << "\t" << fixed4(q.score) << "\n";
      }
      return kExitOk;
    }

    if (iterate->parsed()) {
      const IterationManifest m = export_iteration(store);
      out << "iteration " << m.iteration << ": " << m.doc_ids.size() << " document(s) -> " << m.export_path
          << " (accepted " << m.counts.accepted << ", edited " << m.counts.edited << ", rejected "
          << m.counts.rejected << ")\n";
      return kExitOk;
    }

    if (score->parsed()) {
      const ScoreReport report = score_project(store);
      if (score_json) {
        out << report.to_json().dump(2) << "\n";
      } else {
        out << report.to_table();
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "docseed: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "docseed: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace docseed
