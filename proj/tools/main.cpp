// vidcurate: frame sampling, detection evaluation, stability analysis and the
// label review service.
//
// The fine-tuning step is external: `sample` writes plan files, the trainer
// fine-tunes on the listed frames and writes `<combination>.preds` into the
// predictions directory, then `eval` / `lipschitz` read them back.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>

#include "vidcurate/error.hpp"
#include "vidcurate/experiment.hpp"
#include "vidcurate/ingest.hpp"
#include "vidcurate/review.hpp"
#include "vidcurate/review_server.hpp"

namespace {

using namespace vidcurate;
namespace fs = std::filesystem;

struct GridFlags {
  std::string config;
  std::string frames, labels, preds, out;
  std::string strategy, fraction, seed, pairs;
  std::size_t runs = 0;
  double conf_min = 0, iou = 0;
  int target_class = 0;
  bool emit_list = false, dump_quotients = false;

  std::vector<CLI::Option*> options;
};

void add_grid_flags(CLI::App* cmd, GridFlags& f) {
  cmd->add_option("--config", f.config, "Key-value config file; flags override it");
  auto add = [&](const char* name, auto& target, const char* help) {
    f.options.push_back(cmd->add_option(name, target, help));
  };
  add("--frames", f.frames, "Frame directory or manifest");
  add("--labels", f.labels, "Ground-truth label directory");
  add("--preds", f.preds, "Directory of <combination>.preds files");
  add("--out", f.out, "Output directory");
  add("--strategy", f.strategy, "Comma list: uniform,frame_diff,random");
  add("--fraction", f.fraction, "Comma list of label budgets in (0,1]");
  add("--seed", f.seed, "Comma list of seeds for the random strategy");
  add("--runs", f.runs, "Random runs when --seed is not given (default 5)");
  add("--conf-min", f.conf_min, "Drop predictions below this confidence");
  add("--iou", f.iou, "IoU match threshold (default 0.5)");
  add("--pairs", f.pairs, "Lipschitz pair set: all_pairs or consecutive");
  add("--class", f.target_class, "Class id for IoU curves (default 0)");
  f.options.push_back(cmd->add_flag("--emit-list", f.emit_list, "Also write selected frame names"));
  f.options.push_back(
      cmd->add_flag("--dump-quotients", f.dump_quotients, "Write raw Lipschitz quotients"));
}

ExperimentConfig resolve_config(const GridFlags& f) {
  ExperimentConfig config;
  if (!f.config.empty()) config = load_config(f.config);
  for (const CLI::Option* opt : f.options) {
    if (opt->count() == 0) continue;
    std::string key = opt->get_name();  // "--conf-min"
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    const auto& results = opt->results();
    std::string value = results.empty() ? "true" : results.back();
    if (opt->get_expected_min() == 0) value = "true";
    apply_config_value(config, key, value, fs::current_path());
  }
  return config;
}

int report(const CommandOutcome& outcome, std::string_view what) {
  for (const auto& failure : outcome.failures) std::cerr << "failed: " << failure << '\n';
  std::cout << fmt::format("{}: {} files written, {} combination(s) failed\n", what,
                           outcome.written.size(), outcome.failures.size());
  return outcome.exit_code();
}

ReviewServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted frame selection and detection-label curation"};
  app.require_subcommand(1);

  GridFlags sample_flags, eval_flags, lip_flags;
  auto* sample = app.add_subcommand("sample", "Write sampling plans for the configured grid");
  add_grid_flags(sample, sample_flags);
  auto* eval = app.add_subcommand("eval", "Precision / recall / mAP@0.5 per combination");
  add_grid_flags(eval, eval_flags);
  auto* lip = app.add_subcommand("lipschitz", "Empirical Lipschitz percentiles per combination");
  add_grid_flags(lip, lip_flags);

  std::string diff_frames, diff_out;
  auto* diffplot = app.add_subcommand("diffplot", "Dump `t D_t` frame-difference lines");
  diffplot->add_option("--frames", diff_frames, "Frame directory or manifest")->required();
  diffplot->add_option("--out", diff_out, "Output file (default stdout)");

  std::string serve_frames, serve_plan, serve_preds, serve_labels, serve_journal, serve_export,
      serve_ui, serve_bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Run the label review service");
  serve->add_option("--frames", serve_frames, "Frame directory or manifest")->required();
  serve->add_option("--plan", serve_plan, "Plan file produced by `sample`")->required();
  serve->add_option("--preds", serve_preds, "Prediction file for the frames (optional)");
  serve->add_option("--labels", serve_labels, "Label directory whose classes.txt names classes");
  serve->add_option("--journal", serve_journal, "Journal file (default <plan>.journal)");
  serve->add_option("--out,--export-dir", serve_export, "Export directory for corrected labels");
  serve->add_option("--ui", serve_ui, "Directory with the review UI bundle");
  serve->add_option("--bind", serve_bind, "host:port (default 127.0.0.1:8080)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) return report(cmd_sample(resolve_config(sample_flags)), "sample");
    if (eval->parsed()) return report(cmd_eval(resolve_config(eval_flags)), "eval");
    if (lip->parsed()) return report(cmd_lipschitz(resolve_config(lip_flags)), "lipschitz");

    if (diffplot->parsed()) {
      const std::string text = cmd_diffplot(diff_frames);
      if (diff_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(diff_out, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error(Errc::IoError, "cannot write " + diff_out);
      }
      return 0;
    }

    if (serve->parsed()) {
      const auto files = list_frame_files(serve_frames);
      const FrameSequence seq = load_sequence(serve_frames);
      ReviewSession::Source src;
      src.plan = import_plan(serve_plan);
      src.frame_files = files;
      src.width = seq.width();
      src.height = seq.height();
      if (!serve_preds.empty()) src.predictions = load_predictions(serve_preds, seq.size());
      if (!serve_labels.empty()) {
        src.class_names = load_annotations(serve_labels, seq).class_names;
      }
      const fs::path journal = serve_journal.empty() ? fs::path(serve_plan + ".journal")
                                                     : fs::path(serve_journal);
      ReviewSession session(std::move(src), journal);

      ReviewServerOptions opts;
      const auto colon = serve_bind.rfind(':');
      if (colon == std::string::npos) throw Error(Errc::ConfigError, "--bind expects host:port");
      opts.host = serve_bind.substr(0, colon);
      opts.port = std::stoi(serve_bind.substr(colon + 1));
      opts.ui_dir = serve_ui;
      opts.export_dir = serve_export;
      ReviewServer server(session, opts);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const auto counts = session.snapshot()->counts();
      std::cout << fmt::format("serving {} plan frames on http://{}:{}/ ({} reviewed, journal {})\n",
                               session.plan().selected.size(), opts.host, port,
                               counts.accepted + counts.corrected, journal.string())
                << std::flush;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
