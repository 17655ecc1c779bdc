// intona -- measure the intervals actually performed in monophonic vocal
// recordings, from an F0 trace aligned to a quartertone transcription.
//
// Subcommands: analyze, corpus, compare, scales, plot-data.
// Exit codes: 0 success, 1 input error, 2 analysis failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "intona/intona.hpp"

namespace {

void log_line(const std::string& msg) { std::cerr << "[intona] " << msg << "\n"; }

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  double bin_width = 0.0;
  int window = 0;
  double min_prominence = 0.0;
  double min_mass = 0.0;
  long min_samples = 0;
  double unvoiced_penalty = 0.0;
  long band = -1;
  long jobs = -1;
  bool multistart = false;
  std::string tonic;
  std::string scales;
  std::string type3;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "configuration file");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--bin-width", opt.bin_width, "histogram bin width, cents");
  cmd->add_option("--window", opt.window, "smoothing window, bins (odd)");
  cmd->add_option("--min-prominence", opt.min_prominence,
                  "mountain prominence threshold, fraction of max");
  cmd->add_option("--min-mass", opt.min_mass,
                  "mountain mass threshold, fraction of total");
  cmd->add_option("--min-samples", opt.min_samples,
                  "drop interval pairs with fewer samples");
  cmd->add_option("--unvoiced-penalty", opt.unvoiced_penalty,
                  "DTW distance for unvoiced frames, cents");
  cmd->add_option("--band", opt.band, "DTW band half-width, frames (0 = off)");
  cmd->add_option("--jobs", opt.jobs, "parallel pieces (0 = all cores)");
  cmd->add_flag("--multistart", opt.multistart,
                "try five perturbed fit starts per mountain");
  cmd->add_option("--tonic", opt.tonic,
                  "tonic note (label like C4 or doubled midi)");
  cmd->add_option("--scales", opt.scales,
                  "comma-separated reference scales for comparison");
  cmd->add_option("--type3", opt.type3,
                  "type-III peak policy: higher|midpoint");
}

intona::RunConfig build_config(const CommonOptions& opt) {
  intona::RunConfig cfg;
  if (!opt.config_path.empty()) cfg = intona::load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  if (opt.bin_width > 0.0) cfg.bin_width_cents = opt.bin_width;
  if (opt.window > 0) cfg.smoothing_window_bins = opt.window;
  if (opt.min_prominence > 0.0) cfg.min_prominence = opt.min_prominence;
  if (opt.min_mass > 0.0) cfg.min_mass = opt.min_mass;
  if (opt.min_samples > 0) cfg.min_samples = opt.min_samples;
  if (opt.unvoiced_penalty > 0.0) {
    cfg.dtw_unvoiced_penalty_cents = opt.unvoiced_penalty;
  }
  if (opt.band >= 0) cfg.dtw_band = static_cast<size_t>(opt.band);
  if (opt.jobs >= 0) cfg.jobs = static_cast<size_t>(opt.jobs);
  if (opt.multistart) cfg.fit_multistart = true;
  if (!opt.tonic.empty()) cfg.tonic = opt.tonic;
  if (!opt.scales.empty()) {
    intona::apply_config_key(cfg, "reference_scales", opt.scales);
  }
  if (!opt.type3.empty()) {
    intona::apply_config_key(cfg, "type3_peak_choice", opt.type3);
  }
  intona::validate_config(cfg);
  return cfg;
}

// A one-piece corpus so the analyze subcommand gets the same report
// pipeline (rows, comparisons) as a full corpus run.
intona::CorpusResult run_single(const intona::PieceInput& input,
                                const intona::RunConfig& cfg) {
  intona::CorpusResult corpus = intona::analyze_corpus({input}, cfg);
  if (corpus.bundles.empty()) {
    throw intona::analysis_error("piece analysis failed");
  }
  return corpus;
}

int run(int argc, char** argv) {
  CLI::App app{
      "intona: performed-interval measurement from pitch histograms"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "analyze one piece");
  std::string f0_path, transcription_path, onsets_path, piece_id = "piece";
  bool json_to_stdout = false;
  CommonOptions analyze_opt;
  analyze->add_option("--f0", f0_path, "F0 trace CSV (time_sec,f0_hz)")
      ->required();
  analyze
      ->add_option("--transcription", transcription_path,
                   "transcription CSV (note_doubled_midi,duration_sec,label)")
      ->required();
  analyze->add_option("--onsets", onsets_path,
                      "ground-truth onsets CSV (onset_sec)");
  analyze->add_option("--id", piece_id, "piece identifier");
  analyze->add_flag("--json", json_to_stdout, "mirror the report to stdout");
  add_common_options(analyze, analyze_opt);

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "analyze many pieces");
  std::string manifest_path;
  bool corpus_json = false;
  CommonOptions corpus_opt;
  corpus_cmd
      ->add_option("--manifest", manifest_path,
                   "manifest CSV (id,f0_path,transcription_path[,onsets_path])")
      ->required();
  corpus_cmd->add_flag("--json", corpus_json, "mirror the report to stdout");
  add_common_options(corpus_cmd, corpus_opt);

  // compare
  auto* compare_cmd =
      app.add_subcommand("compare", "compare measured rows against scales");
  std::string rows_path, report_path, compare_out;
  std::vector<std::string> compare_scales;
  compare_cmd->add_option("--rows", rows_path,
                          "measured rows CSV (degree,cents)");
  compare_cmd->add_option("--report", report_path,
                          "report.json from a previous run");
  compare_cmd->add_option("--scale", compare_scales,
                          "reference scale name (repeatable)");
  compare_cmd->add_option("--out", compare_out,
                          "directory for comparison CSVs (default: stdout)");

  // scales
  auto* scales_cmd =
      app.add_subcommand("scales", "dump the built-in reference scales");
  std::string scales_out;
  scales_cmd->add_option("--out", scales_out, "output JSON file (default: stdout)");

  // plot-data
  auto* plot_cmd =
      app.add_subcommand("plot-data", "emit figure data for one piece");
  std::string plot_f0, plot_transcription, plot_kind, plot_id = "piece";
  CommonOptions plot_opt;
  plot_cmd->add_option("--f0", plot_f0, "F0 trace CSV")->required();
  plot_cmd->add_option("--transcription", plot_transcription,
                       "transcription CSV")
      ->required();
  plot_cmd
      ->add_option("--kind", plot_kind,
                   "histogram | note-histogram | alignment")
      ->required();
  plot_cmd->add_option("--id", plot_id, "piece identifier");
  add_common_options(plot_cmd, plot_opt);

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    intona::RunConfig cfg = build_config(analyze_opt);
    intona::PieceInput input{piece_id, f0_path, transcription_path,
                             onsets_path};
    intona::CorpusResult corpus = run_single(input, cfg);
    const auto& bundle = corpus.bundles.front();
    std::filesystem::path out_dir(cfg.output_dir);
    intona::write_piece_outputs(bundle, out_dir / bundle.id);
    intona::write_corpus_outputs(corpus, out_dir);
    for (const auto& w : corpus.warnings) log_line("warning: " + w);
    for (const auto& w : bundle.warnings) log_line("warning: " + w);
    log_line("piece '" + bundle.id + "': " +
             std::to_string(bundle.note_peaks.size()) + " note peaks, " +
             std::to_string(bundle.intervals.size()) + " intervals -> " +
             out_dir.string());
    if (json_to_stdout) {
      std::cout << intona::report_json(corpus.report).dump(2) << "\n";
    }
    return 0;
  }

  if (corpus_cmd->parsed()) {
    intona::RunConfig cfg = build_config(corpus_opt);
    auto inputs = intona::load_manifest(manifest_path);
    intona::CorpusResult corpus = intona::analyze_corpus(inputs, cfg);
    std::filesystem::path out_dir(cfg.output_dir);
    for (const auto& b : corpus.bundles) {
      intona::write_piece_outputs(b, out_dir / b.id);
    }
    intona::write_corpus_outputs(corpus, out_dir);
    for (const auto& w : corpus.warnings) log_line("warning: " + w);
    log_line("corpus: " + std::to_string(corpus.bundles.size()) + "/" +
             std::to_string(inputs.size()) + " pieces analyzed -> " +
             out_dir.string());
    if (corpus_json) {
      std::cout << intona::report_json(corpus.report).dump(2) << "\n";
    }
    return 0;
  }

  if (compare_cmd->parsed()) {
    if ((rows_path.empty()) == (report_path.empty())) {
      throw intona::input_error("compare: give exactly one of --rows/--report");
    }
    if (compare_scales.empty()) {
      throw intona::input_error("compare: at least one --scale is required");
    }
    std::vector<intona::ScaleRow> rows;
    if (!rows_path.empty()) {
      rows = intona::load_rows_csv(rows_path);
      // Rows given by label only: match against reference labels directly.
    } else {
      std::ifstream in(report_path);
      if (!in) {
        throw intona::input_error("cannot open report: " + report_path);
      }
      nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
      if (doc.is_discarded() || !doc.contains("scale_rows")) {
        throw intona::input_error(report_path +
                                  ": not a report.json with scale_rows");
      }
      for (const auto& r : doc["scale_rows"]) {
        intona::ScaleRow row;
        row.note.name = r.at("degree").get<std::string>();
        row.cents_from_tonic = r.at("cents").get<double>();
        rows.push_back(row);
      }
    }
    for (const auto& name : compare_scales) {
      intona::ReferenceScale scale = intona::reference_scale(name);
      // Degree labels come straight from the rows file here.
      intona::ScaleComparison cmp;
      cmp.scale_name = scale.name;
      std::vector<bool> used(scale.degrees.size(), false);
      size_t from = 0;
      for (const auto& row : rows) {
        bool matched = false;
        for (size_t i = from; i < scale.degrees.size(); ++i) {
          if (!used[i] && scale.degrees[i].label == row.note.name) {
            used[i] = true;
            from = i + 1;
            cmp.shared.push_back(
                {row.note.name, row.cents_from_tonic, scale.degrees[i].cents,
                 row.cents_from_tonic - scale.degrees[i].cents});
            matched = true;
            break;
          }
        }
        if (!matched) cmp.unmatched_measured.push_back(row.note.name);
      }
      if (cmp.shared.empty()) {
        throw intona::analysis_error(
            "compare: no shared degrees with '" + name + "'");
      }
      if (compare_out.empty()) {
        std::cout << "# " << name << "\n";
        intona::write_comparison_csv(std::cout, cmp);
      } else {
        std::filesystem::create_directories(compare_out);
        auto out = intona::open_output(
            (std::filesystem::path(compare_out) /
             ("comparison_" + name + ".csv"))
                .string());
        intona::write_comparison_csv(out, cmp);
        log_line("wrote comparison_" + name + ".csv");
      }
    }
    return 0;
  }

  if (scales_cmd->parsed()) {
    nlohmann::ordered_json doc = intona::scales_json();
    if (scales_out.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      auto out = intona::open_output(scales_out);
      out << doc.dump(2) << "\n";
      log_line("wrote " + scales_out);
    }
    return 0;
  }

  if (plot_cmd->parsed()) {
    intona::RunConfig cfg = build_config(plot_opt);
    intona::PlotKind kind = intona::parse_plot_kind(plot_kind);
    intona::PieceInput input{plot_id, plot_f0, plot_transcription, ""};
    intona::PieceBundle bundle = intona::analyze_piece(input, cfg);
    std::filesystem::path out_dir =
        std::filesystem::path(cfg.output_dir) / bundle.id;
    intona::emit_plot_data(bundle, kind, out_dir);
    log_line("wrote " + plot_kind + " data -> " + out_dir.string());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const intona::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const intona::analysis_error& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
