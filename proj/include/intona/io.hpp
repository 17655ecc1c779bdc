#pragma once

// File ingestion and artifact writers.
//
// Input formats:
//   F0 trace      CSV, header time_sec,f0_hz (f0 <= 0 marks unvoiced)
//   Transcription CSV, header note_doubled_midi,duration_sec,label
//   Onsets        CSV, header onset_sec, one row per note

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "intona/alignment.hpp"
#include "intona/analysis.hpp"
#include "intona/cents.hpp"
#include "intona/csv.hpp"
#include "intona/errors.hpp"
#include "intona/histogram.hpp"
#include "intona/scales.hpp"

namespace intona {

// Voiced frames outside this band are treated as tracker glitches and
// demoted to unvoiced (kept for timing).
inline constexpr double kMinVoicedHz = 50.0;
inline constexpr double kMaxVoicedHz = 2000.0;

// Ingest an F0 trace. The hop is inferred from the median time delta;
// rows must be strictly time-sorted with deltas within 1% of the median.
inline PitchTrace ingest_f0(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "time_sec" ||
      table.header[1] != "f0_hz") {
    throw input_error(path + ": expected header time_sec,f0_hz");
  }
  if (table.rows.empty()) {
    throw input_error(path + ": no data rows");
  }
  PitchTrace trace;
  trace.frames.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    size_t line_no = table.row_numbers[r];
    if (row.size() < 2) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": expected 2 fields");
    }
    TraceFrame f;
    f.time_sec = parse_double(row[0], path, line_no, "time_sec");
    f.f0_hz = parse_double(row[1], path, line_no, "f0_hz");
    if (!trace.frames.empty() &&
        !(f.time_sec > trace.frames.back().time_sec)) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": time_sec not strictly increasing");
    }
    f.voiced = f.f0_hz >= kMinVoicedHz && f.f0_hz <= kMaxVoicedHz;
    if (f.voiced) f.cents = hz_to_cents(f.f0_hz);
    trace.frames.push_back(f);
  }

  if (trace.frames.size() >= 2) {
    std::vector<double> deltas;
    deltas.reserve(trace.frames.size() - 1);
    for (size_t i = 1; i < trace.frames.size(); ++i) {
      deltas.push_back(trace.frames[i].time_sec -
                       trace.frames[i - 1].time_sec);
    }
    std::vector<double> sorted = deltas;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    double hop = sorted[sorted.size() / 2];
    for (size_t i = 0; i < deltas.size(); ++i) {
      if (std::fabs(deltas[i] - hop) > 0.01 * hop) {
        throw input_error(path + ": line " +
                          std::to_string(table.row_numbers[i + 1]) +
                          ": non-uniform hop (" + format_number(deltas[i]) +
                          " s vs median " + format_number(hop) + " s)");
      }
    }
    trace.hop_sec = hop;
  }
  return trace;
}

inline Transcription load_transcription(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "note_doubled_midi" ||
      table.header[1] != "duration_sec") {
    throw input_error(path +
                      ": expected header note_doubled_midi,duration_sec[,label]");
  }
  if (table.rows.empty()) {
    throw input_error(path + ": no notes");
  }
  Transcription t;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    size_t line_no = table.row_numbers[r];
    if (row.size() < 2) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": expected at least 2 fields");
    }
    long dm = parse_long(row[0], path, line_no, "note_doubled_midi");
    if (dm < 0 || dm > kMaxDoubledMidi) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": note_doubled_midi out of [0, 254]");
    }
    double dur = parse_double(row[1], path, line_no, "duration_sec");
    if (!(dur > 0.0)) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": duration_sec must be > 0");
    }
    std::string label = row.size() >= 3 ? row[2] : "";
    t.notes.push_back({make_note(static_cast<int>(dm), label), dur});
  }
  return t;
}

inline std::vector<double> load_onsets(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.empty() || table.header[0] != "onset_sec") {
    throw input_error(path + ": expected header onset_sec");
  }
  std::vector<double> onsets;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    onsets.push_back(
        parse_double(table.rows[r][0], path, table.row_numbers[r],
                     "onset_sec"));
  }
  return onsets;
}

// --- writers ---------------------------------------------------------

// Columns: bin_center_cents,raw_count,smoothed_count,peak_marker.
// peak_marker flags bins holding a refined mountain peak.
inline void write_histogram_csv(std::ostream& out, const Histogram& raw,
                                const Histogram& smoothed,
                                const std::vector<double>& peak_cents = {}) {
  out << "bin_center_cents,raw_count,smoothed_count,peak_marker\n";
  for (size_t i = 0; i < raw.counts.size(); ++i) {
    int marker = 0;
    for (double p : peak_cents) {
      if (raw.bin_of(p) == static_cast<long>(i)) marker = 1;
    }
    out << format_number(raw.center(i)) << ',' << format_number(raw.counts[i])
        << ',' << format_number(smoothed.counts[i]) << ',' << marker << '\n';
  }
}

inline void write_note_histogram_csv(std::ostream& out, const Histogram& raw,
                                     const Histogram& smoothed) {
  out << "bin_center_cents,raw_count,smoothed_count\n";
  for (size_t i = 0; i < raw.counts.size(); ++i) {
    out << format_number(raw.center(i)) << ',' << format_number(raw.counts[i])
        << ',' << format_number(smoothed.counts[i]) << '\n';
  }
}

inline void write_alignment_csv(std::ostream& out, const PitchTrace& trace,
                                const std::vector<NoteSpan>& spans,
                                const Transcription& transcription) {
  out << "trace_frame,time_sec,note_index,note_label\n";
  for (size_t k = 0; k < spans.size(); ++k) {
    for (size_t f = spans[k].begin; f < spans[k].end; ++f) {
      out << f << ',' << format_number(trace.frames[f].time_sec) << ',' << k
          << ',' << transcription.notes[k].note.label() << '\n';
    }
  }
}

inline void write_report_csv(std::ostream& out, const IntervalReport& report) {
  out << "interval,n,mean_cents,sd_cents,group\n";
  for (const auto& s : report.intervals) {
    out << s.label() << ',' << s.n_samples << ','
        << format_number(s.mean_cents) << ',' << format_number(s.sd_cents)
        << ',' << to_string(s.group) << '\n';
  }
}

inline void write_comparison_csv(std::ostream& out,
                                 const ScaleComparison& cmp) {
  out << "degree,measured,reference,delta\n";
  for (const auto& d : cmp.shared) {
    out << d.degree << ',' << format_number(d.measured) << ','
        << format_number(d.reference) << ',' << format_number(d.delta)
        << '\n';
  }
}

inline void write_rows_csv(std::ostream& out,
                           const std::vector<ScaleRow>& rows) {
  out << "degree,cents\n";
  for (const auto& r : rows) {
    out << pitch_class_label(r.note.doubled_midi) << ','
        << format_number(r.cents_from_tonic) << '\n';
  }
}

// Measured scale rows for the compare subcommand: header degree,cents.
inline std::vector<ScaleRow> load_rows_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "degree" ||
      table.header[1] != "cents") {
    throw input_error(path + ": expected header degree,cents");
  }
  if (table.rows.empty()) {
    throw input_error(path + ": no rows");
  }
  std::vector<ScaleRow> rows;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    ScaleRow row;
    row.note.name = table.rows[r][0];
    row.cents_from_tonic = parse_double(table.rows[r][1], path,
                                        table.row_numbers[r], "cents");
    rows.push_back(row);
  }
  return rows;
}

// All built-in reference scales as one JSON document:
// { "name": [["label", cents], ...], ... }
inline nlohmann::ordered_json scales_json() {
  nlohmann::ordered_json doc;
  for (const auto& name : reference_scale_names()) {
    ReferenceScale s = reference_scale(name);
    nlohmann::ordered_json degrees = nlohmann::ordered_json::array();
    for (const auto& d : s.degrees) {
      degrees.push_back({d.label, d.cents});
    }
    doc[name] = degrees;
  }
  return doc;
}

inline nlohmann::ordered_json report_json(const IntervalReport& report) {
  nlohmann::ordered_json doc;
  doc["intervals"] = nlohmann::ordered_json::array();
  for (const auto& s : report.intervals) {
    doc["intervals"].push_back({{"interval", s.label()},
                                {"lower", s.lower_note.label()},
                                {"upper", s.upper_note.label()},
                                {"n", s.n_samples},
                                {"mean_cents", s.mean_cents},
                                {"sd_cents", s.sd_cents},
                                {"group", to_string(s.group)}});
  }
  if (report.tonic) doc["tonic"] = report.tonic->label();
  doc["scale_rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    doc["scale_rows"].push_back(
        {{"degree", pitch_class_label(r.note.doubled_midi)},
         {"cents", r.cents_from_tonic}});
  }
  doc["comparisons"] = nlohmann::ordered_json::object();
  for (const auto& cmp : report.comparisons) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& d : cmp.shared) {
      rows.push_back({{"degree", d.degree},
                      {"measured", d.measured},
                      {"reference", d.reference},
                      {"delta", d.delta}});
    }
    doc["comparisons"][cmp.scale_name] = rows;
  }
  return doc;
}

}  // namespace intona
