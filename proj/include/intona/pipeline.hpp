#pragma once

// Piece and corpus orchestration: run the histogram -> mountains ->
// calibration -> alignment -> note peaks -> intervals chain, aggregate
// across pieces, and emit the file artifacts.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "intona/alignment.hpp"
#include "intona/analysis.hpp"
#include "intona/config.hpp"
#include "intona/errors.hpp"
#include "intona/histogram.hpp"
#include "intona/io.hpp"
#include "intona/peakfit.hpp"
#include "intona/scales.hpp"

namespace intona {

struct PieceInput {
  std::string id;
  std::string f0_path;
  std::string transcription_path;
  std::string onsets_path;  // optional
};

struct MountainReport {
  MountainRange range;
  PeakModel model;
};

struct PieceBundle {
  std::string id;
  PitchTrace trace;
  Transcription transcription;
  Histogram hist_raw;
  Histogram hist_smoothed;
  std::vector<MountainReport> mountains;
  size_t shahed_index = 0;
  CalibrationResult calibration;
  double dtw_cost = 0.0;
  std::vector<NoteSpan> spans;
  std::vector<NoteHistogram> note_hists;
  std::vector<Histogram> note_hists_smoothed;  // parallel to note_hists
  std::vector<PeakModel> note_models;          // parallel to note_hists
  std::vector<NotePeak> note_peaks;            // sorted by nominal pitch
  std::vector<IntervalMeasurement> intervals;
  std::optional<AlignmentEvaluation> alignment_eval;
  std::vector<std::string> warnings;
};

// "C4"/"Ek4" style label or a doubled-midi number.
inline QuartertoneNote parse_note_spec(const std::string& spec) {
  if (spec.empty()) {
    throw input_error("empty note spec");
  }
  bool digits = true;
  for (char c : spec) {
    if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
  }
  if (digits) {
    long dm = std::stol(spec);
    if (dm < 0 || dm > kMaxDoubledMidi) {
      throw input_error("note spec out of range: " + spec);
    }
    return make_note(static_cast<int>(dm));
  }
  for (int dm = 0; dm <= kMaxDoubledMidi; ++dm) {
    if (note_label(dm) == spec) return make_note(dm);
  }
  throw input_error("unrecognized note spec: '" + spec +
                    "' (use a label like Ek4 or a doubled-midi number)");
}

// Run the full per-piece pipeline on in-memory data. Deterministic:
// identical inputs and config produce identical bundles.
inline PieceBundle analyze_piece_data(
    const std::string& id, PitchTrace trace, Transcription transcription,
    const std::optional<std::vector<double>>& onsets, const RunConfig& config) {
  validate_config(config);
  validate_transcription(transcription);

  PieceBundle b;
  b.id = id;
  b.trace = std::move(trace);
  b.transcription = std::move(transcription);

  auto fail = [&](const std::string& what) -> analysis_error {
    return analysis_error("piece '" + id + "': " + what);
  };

  if (b.trace.frames.empty() || b.trace.voiced_count() == 0) {
    throw fail("no voiced frames");
  }

  // Piece-level histogram and its mountains.
  b.hist_raw = build_histogram(b.trace, config.bin_width_cents,
                               config.smoothing_window_bins);
  b.hist_smoothed = smooth(b.hist_raw, config.smoothing_window_bins);
  auto ranges = find_mountain_ranges(b.hist_smoothed, config.min_prominence,
                                     config.min_mass);
  if (ranges.empty()) {
    throw fail("no mountain ranges detected");
  }

  FitOptions fit_options;
  fit_options.multistart = config.fit_multistart;

  b.mountains.reserve(ranges.size());
  for (const auto& r : ranges) {
    b.mountains.push_back({r, refine_peak(b.hist_smoothed, r, fit_options)});
  }

  MountainRange shahed = find_shahed(b.hist_smoothed, ranges);
  b.shahed_index = 0;
  for (size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].lo == shahed.lo) b.shahed_index = i;
  }

  // Calibration: map the transcription onto the performance.
  b.calibration = calibrate_offset(
      b.mountains[b.shahed_index].model.peak_cents, b.transcription);

  // Alignment against the offset-corrected reference.
  if (b.trace.frames.size() < b.transcription.notes.size()) {
    throw fail("trace shorter than the note list");
  }
  ExpandedReference reference =
      expand_transcription(b.transcription, b.trace.frames.size());
  std::vector<double> ref_shifted = reference.cents;
  for (double& c : ref_shifted) c += b.calibration.offset_cents;
  std::vector<double> trace_cents(b.trace.frames.size());
  for (size_t i = 0; i < b.trace.frames.size(); ++i) {
    trace_cents[i] = b.trace.frames[i].voiced
                         ? b.trace.frames[i].cents
                         : std::numeric_limits<double>::quiet_NaN();
  }
  DtwOptions dtw_options;
  dtw_options.unvoiced_penalty_cents = config.dtw_unvoiced_penalty_cents;
  dtw_options.band = config.dtw_band;
  DtwResult dtw = dtw_align(trace_cents, ref_shifted, dtw_options);
  b.dtw_cost = dtw.cost;
  b.spans = note_spans_from_path(dtw.path, reference.note_counts);

  // Per-note histograms and refined peaks.
  b.note_hists = note_histograms(b.trace, b.transcription, b.spans,
                                 config.bin_width_cents,
                                 config.smoothing_window_bins);
  for (const auto& nh : b.note_hists) {
    Histogram sm = smooth(nh.hist, config.smoothing_window_bins);
    auto note_ranges =
        find_mountain_ranges(sm, config.min_prominence, config.min_mass);
    if (note_ranges.empty()) {
      b.warnings.push_back("note " + nh.note.label() +
                           ": no mountain in its own histogram; skipped");
      b.note_hists_smoothed.push_back(std::move(sm));
      b.note_models.push_back({});
      continue;
    }
    MountainRange main = find_shahed(sm, note_ranges);
    PeakModel model = refine_peak(sm, main, fit_options);

    NotePeak peak;
    peak.note = nh.note;
    peak.peak_cents = model.peak_cents;
    peak.mass = nh.mass;
    peak.piece_id = id;
    double calibrated_nominal =
        nh.note.nominal_cents() + b.calibration.offset_cents;
    if (std::fabs(model.peak_cents - calibrated_nominal) >= 100.0) {
      b.warnings.push_back(
          "note " + nh.note.label() + ": peak " +
          format_number(model.peak_cents) + " is over 100 cents from its " +
          "calibrated nominal " + format_number(calibrated_nominal) +
          "; dropped");
      b.note_hists_smoothed.push_back(std::move(sm));
      b.note_models.push_back(std::move(model));
      continue;
    }
    b.note_peaks.push_back(std::move(peak));
    b.note_hists_smoothed.push_back(std::move(sm));
    b.note_models.push_back(std::move(model));
  }

  // Classify the piece-level mountains with the aligned-note context.
  for (auto& m : b.mountains) {
    std::vector<AlignedNoteMass> aligned;
    for (const auto& nh : b.note_hists) {
      double cents = nh.note.nominal_cents() + b.calibration.offset_cents;
      if (cents >= m.range.lo && cents <= m.range.hi) {
        aligned.push_back({nh.note, cents, nh.mass});
      }
    }
    Classification cls = classify_peak(b.hist_smoothed, m.range, m.model,
                                       aligned, config.classify);
    m.model.typology = cls.type;
    m.model.low_confidence = cls.low_confidence;
    m.model.candidate_peaks = cls.candidate_peaks;
    if (cls.type == PeakType::III && cls.candidate_peaks.size() >= 2) {
      // Two defensible peaks; the configured policy picks one.
      if (config.type3_peak_choice == Type3Choice::Higher) {
        m.model.peak_cents = cls.candidate_peaks[0];
      } else {
        m.model.peak_cents =
            (cls.candidate_peaks[0] + cls.candidate_peaks[1]) / 2.0;
      }
    }
  }

  // Hand each note peak the typology of the mountain it falls in.
  for (auto& peak : b.note_peaks) {
    for (const auto& m : b.mountains) {
      if (peak.peak_cents >= m.range.lo && peak.peak_cents <= m.range.hi) {
        peak.typology = m.model.typology;
        break;
      }
    }
  }

  if (b.note_peaks.size() >= 2) {
    b.intervals = extract_intervals(b.note_peaks);
  } else {
    b.warnings.push_back("fewer than two usable note peaks; no intervals");
  }

  if (onsets) {
    if (onsets->size() != b.spans.size()) {
      throw fail("onset count " + std::to_string(onsets->size()) +
                 " does not match note count " +
                 std::to_string(b.spans.size()));
    }
    b.alignment_eval = evaluate_alignment(b.spans, b.trace, *onsets);
  }
  return b;
}

inline PieceBundle analyze_piece(const PieceInput& input,
                                 const RunConfig& config) {
  PitchTrace trace = ingest_f0(input.f0_path);
  Transcription transcription = load_transcription(input.transcription_path);
  std::optional<std::vector<double>> onsets;
  if (!input.onsets_path.empty()) {
    onsets = load_onsets(input.onsets_path);
  }
  try {
    return analyze_piece_data(input.id, std::move(trace),
                              std::move(transcription), onsets, config);
  } catch (const analysis_error&) {
    throw;
  } catch (const input_error&) {
    throw;
  } catch (const std::exception& e) {
    throw analysis_error("piece '" + input.id + "': " + e.what());
  }
}

struct CorpusResult {
  IntervalReport report;
  std::vector<PieceBundle> bundles;           // successful pieces, input order
  std::vector<std::string> warnings;          // per-piece failures etc.
};

namespace detail {

inline QuartertoneNote choose_corpus_tonic(
    const std::vector<PieceBundle>& bundles, const RunConfig& config) {
  if (!config.tonic.empty()) {
    return parse_note_spec(config.tonic);
  }
  // The most frequent transcription shahed across pieces, lower on ties.
  std::map<int, size_t> votes;
  for (const auto& b : bundles) {
    votes[b.calibration.transcription_shahed.doubled_midi] += 1;
  }
  int best_dm = votes.begin()->first;
  size_t best_votes = votes.begin()->second;
  for (const auto& [dm, n] : votes) {
    if (n > best_votes) {
      best_dm = dm;
      best_votes = n;
    }
  }
  return make_note(best_dm);
}

}  // namespace detail

// Analyze every piece (worker pool sized by config.jobs), merge the
// measurements in input order, and build the aggregate report. Failing
// pieces are skipped with a warning; if every piece fails the corpus
// fails.
inline CorpusResult analyze_corpus(const std::vector<PieceInput>& inputs,
                                   const RunConfig& config) {
  validate_config(config);
  if (inputs.empty()) {
    throw input_error("corpus: no pieces given");
  }
  for (const auto& name : config.reference_scales) {
    reference_scale(name);  // validate early
  }

  std::vector<std::optional<PieceBundle>> results(inputs.size());
  std::vector<std::string> errors(inputs.size());
  std::atomic<size_t> next{0};
  size_t jobs = config.jobs != 0
                    ? config.jobs
                    : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, inputs.size());

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= inputs.size()) break;
      try {
        results[i] = analyze_piece(inputs[i], config);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CorpusResult corpus;
  std::vector<IntervalMeasurement> measurements;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (results[i]) {
      for (const auto& m : results[i]->intervals) measurements.push_back(m);
      corpus.bundles.push_back(std::move(*results[i]));
    } else {
      corpus.warnings.push_back("piece '" + inputs[i].id +
                                "' failed: " + errors[i]);
    }
  }
  if (corpus.bundles.empty()) {
    throw analysis_error("corpus: every piece failed");
  }
  if (measurements.empty()) {
    throw analysis_error("corpus: no interval measurements");
  }

  corpus.report = aggregate(measurements, config.min_samples);
  QuartertoneNote tonic = detail::choose_corpus_tonic(corpus.bundles, config);
  corpus.report.tonic = tonic;
  try {
    corpus.report.rows = scale_rows(corpus.report, tonic);
  } catch (const analysis_error& e) {
    corpus.warnings.push_back(std::string("scale rows unavailable: ") +
                              e.what());
  }
  if (!corpus.report.rows.empty()) {
    for (const auto& name : config.reference_scales) {
      try {
        corpus.report.comparisons.push_back(
            compare_to_reference(corpus.report.rows, reference_scale(name)));
      } catch (const analysis_error& e) {
        corpus.warnings.push_back("comparison with " + name +
                                  " unavailable: " + e.what());
      }
    }
  }
  return corpus;
}

// --- artifact emission -----------------------------------------------

inline nlohmann::ordered_json tilted_gaussian_json(
    const TiltedGaussianParams& p) {
  return {{"baseline", p.baseline},
          {"tilt", p.tilt},
          {"amplitude", p.amplitude},
          {"center", p.center},
          {"width_sq", p.width_sq}};
}

inline nlohmann::ordered_json peaks_json(const PieceBundle& b) {
  nlohmann::ordered_json doc;
  doc["piece"] = b.id;
  doc["transcription_shahed"] =
      b.calibration.transcription_shahed.label();
  doc["calibration_offset_cents"] = b.calibration.offset_cents;
  doc["shahed_peak_cents"] = b.mountains[b.shahed_index].model.peak_cents;
  doc["dtw_cost"] = b.dtw_cost;
  doc["mountains"] = nlohmann::ordered_json::array();
  for (const auto& m : b.mountains) {
    nlohmann::ordered_json j;
    j["range"] = {m.range.lo, m.range.hi};
    j["peak_bin_cents"] = m.range.peak_bin_cents;
    j["area"] = m.range.area;
    j["model"] = to_string(m.model.kind);
    if (m.model.gaussian) {
      j["params"] = tilted_gaussian_json(*m.model.gaussian);
    } else if (m.model.quadratic) {
      j["params"] = {{"a", m.model.quadratic->a},
                     {"b", m.model.quadratic->b},
                     {"c", m.model.quadratic->c}};
    } else {
      j["params"] = nullptr;
    }
    j["peak_cents"] = m.model.peak_cents;
    j["rms_residual"] = m.model.rms_residual;
    j["typology"] = to_string(m.model.typology);
    j["low_confidence"] = m.model.low_confidence;
    if (!m.model.candidate_peaks.empty()) {
      j["candidate_peaks"] = m.model.candidate_peaks;
    }
    doc["mountains"].push_back(std::move(j));
  }
  doc["note_peaks"] = nlohmann::ordered_json::array();
  for (const auto& p : b.note_peaks) {
    doc["note_peaks"].push_back(
        {{"note", p.note.label()},
         {"doubled_midi", p.note.doubled_midi},
         {"peak_cents", p.peak_cents},
         {"peak_cents_calibrated", p.peak_cents - b.calibration.offset_cents},
         {"mass", p.mass},
         {"typology", to_string(p.typology)}});
  }
  doc["intervals"] = nlohmann::ordered_json::array();
  for (const auto& iv : b.intervals) {
    doc["intervals"].push_back({{"lower", iv.lower_note.label()},
                                {"upper", iv.upper_note.label()},
                                {"size_cents", iv.size_cents}});
  }
  if (b.alignment_eval) {
    doc["alignment_eval"] = {{"max_ms", b.alignment_eval->max_ms},
                             {"mean_ms", b.alignment_eval->mean_ms},
                             {"per_note_ms", b.alignment_eval->deviations_ms}};
  }
  doc["warnings"] = b.warnings;
  return doc;
}

// Write <dir>/histogram.csv, peaks.json, alignment.csv and notes/<label>.csv.
inline void write_piece_outputs(const PieceBundle& b,
                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "notes");
  {
    std::vector<double> peaks;
    for (const auto& m : b.mountains) peaks.push_back(m.model.peak_cents);
    auto out = open_output((dir / "histogram.csv").string());
    write_histogram_csv(out, b.hist_raw, b.hist_smoothed, peaks);
  }
  {
    auto out = open_output((dir / "peaks.json").string());
    out << peaks_json(b).dump(2) << "\n";
  }
  {
    auto out = open_output((dir / "alignment.csv").string());
    write_alignment_csv(out, b.trace, b.spans, b.transcription);
  }
  for (size_t i = 0; i < b.note_hists.size(); ++i) {
    auto out = open_output(
        (dir / "notes" / (b.note_hists[i].note.label() + ".csv")).string());
    write_note_histogram_csv(out, b.note_hists[i].hist,
                             b.note_hists_smoothed[i]);
  }
}

inline void write_corpus_outputs(const CorpusResult& corpus,
                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output((dir / "report.json").string());
    nlohmann::ordered_json doc = report_json(corpus.report);
    doc["pieces"] = nlohmann::ordered_json::array();
    for (const auto& b : corpus.bundles) doc["pieces"].push_back(b.id);
    doc["warnings"] = corpus.warnings;
    out << doc.dump(2) << "\n";
  }
  {
    auto out = open_output((dir / "report.csv").string());
    write_report_csv(out, corpus.report);
  }
  for (const auto& cmp : corpus.report.comparisons) {
    auto out = open_output(
        (dir / ("comparison_" + cmp.scale_name + ".csv")).string());
    write_comparison_csv(out, cmp);
  }
}

enum class PlotKind { Histogram, NoteHistogram, Alignment };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "histogram") return PlotKind::Histogram;
  if (s == "note-histogram") return PlotKind::NoteHistogram;
  if (s == "alignment") return PlotKind::Alignment;
  throw input_error("unknown plot-data kind '" + s +
                    "' (histogram|note-histogram|alignment)");
}

// Emit just the figure data of one kind from an analyzed bundle.
inline void emit_plot_data(const PieceBundle& b, PlotKind kind,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  switch (kind) {
    case PlotKind::Histogram: {
      if (b.hist_raw.counts.empty()) {
        throw analysis_error("bundle has no histogram data");
      }
      std::vector<double> peaks;
      for (const auto& m : b.mountains) peaks.push_back(m.model.peak_cents);
      auto out = open_output((dir / "histogram.csv").string());
      write_histogram_csv(out, b.hist_raw, b.hist_smoothed, peaks);
      break;
    }
    case PlotKind::NoteHistogram: {
      if (b.note_hists.empty()) {
        throw analysis_error("bundle has no note histograms");
      }
      std::filesystem::create_directories(dir / "notes");
      for (size_t i = 0; i < b.note_hists.size(); ++i) {
        auto out = open_output(
            (dir / "notes" / (b.note_hists[i].note.label() + ".csv"))
                .string());
        write_note_histogram_csv(out, b.note_hists[i].hist,
                                 b.note_hists_smoothed[i]);
      }
      break;
    }
    case PlotKind::Alignment: {
      if (b.spans.empty()) {
        throw analysis_error("bundle has no alignment data");
      }
      auto out = open_output((dir / "alignment.csv").string());
      write_alignment_csv(out, b.trace, b.spans, b.transcription);
      break;
    }
  }
}

// Manifest for the corpus subcommand: header id,f0_path,transcription_path
// with an optional onsets_path column. Relative paths resolve against the
// manifest's directory.
inline std::vector<PieceInput> load_manifest(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "id" ||
      table.header[1] != "f0_path" || table.header[2] != "transcription_path") {
    throw input_error(
        path + ": expected header id,f0_path,transcription_path[,onsets_path]");
  }
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return std::string();
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  std::vector<PieceInput> inputs;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < 3) {
      throw input_error(path + ": line " +
                        std::to_string(table.row_numbers[r]) +
                        ": expected at least 3 fields");
    }
    PieceInput in;
    in.id = row[0];
    in.f0_path = resolve(row[1]);
    in.transcription_path = resolve(row[2]);
    if (row.size() >= 4) in.onsets_path = resolve(row[3]);
    if (in.id.empty()) {
      throw input_error(path + ": line " +
                        std::to_string(table.row_numbers[r]) + ": empty id");
    }
    inputs.push_back(std::move(in));
  }
  if (inputs.empty()) {
    throw input_error(path + ": no pieces listed");
  }
  return inputs;
}

}  // namespace intona
