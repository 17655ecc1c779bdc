#pragma once

// Interval statistics: calibrate the audio against the transcription via
// the shahed, turn per-note peaks into interval measurements, aggregate
// across pieces, and compare measured scale rows against reference scales.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "intona/alignment.hpp"
#include "intona/cents.hpp"
#include "intona/errors.hpp"
#include "intona/histogram.hpp"
#include "intona/peakfit.hpp"
#include "intona/scales.hpp"

namespace intona {

// The measured pitch of one note in one piece.
struct NotePeak {
  QuartertoneNote note;
  double peak_cents = 0.0;  // absolute, uncalibrated
  double mass = 0.0;        // voiced frames behind the measurement
  PeakType typology = PeakType::I;
  std::string piece_id;
};

struct IntervalMeasurement {
  QuartertoneNote lower_note;
  QuartertoneNote upper_note;
  double size_cents = 0.0;
  std::string piece_id;
};

enum class VarianceGroup { Low, High, Ungrouped };

inline const char* to_string(VarianceGroup g) {
  switch (g) {
    case VarianceGroup::Low:
      return "low-variance";
    case VarianceGroup::High:
      return "high-variance";
    default:
      return "ungrouped";
  }
}

struct IntervalStats {
  QuartertoneNote lower_note;
  QuartertoneNote upper_note;
  size_t n_samples = 0;
  double mean_cents = 0.0;
  double sd_cents = 0.0;  // sample (n-1) standard deviation
  VarianceGroup group = VarianceGroup::Ungrouped;

  std::string label() const {
    return lower_note.label() + "-" + upper_note.label();
  }
};

struct ScaleRow {
  QuartertoneNote note;
  double cents_from_tonic = 0.0;
};

struct DegreeDelta {
  std::string degree;
  double measured = 0.0;
  double reference = 0.0;
  double delta = 0.0;
};

struct ScaleComparison {
  std::string scale_name;
  std::vector<DegreeDelta> shared;
  std::vector<std::string> unmatched_measured;
  std::vector<std::string> unmatched_reference;
};

struct IntervalReport {
  std::vector<IntervalStats> intervals;
  std::optional<QuartertoneNote> tonic;
  std::vector<ScaleRow> rows;  // cumulative cents from the tonic
  std::vector<ScaleComparison> comparisons;
};

struct CalibrationResult {
  QuartertoneNote transcription_shahed;
  double offset_cents = 0.0;  // audio shahed peak minus nominal shahed
};

// The transcription shahed is the note with the greatest total written
// duration (earlier note on ties). The offset maps nominal cents onto the
// performance: nominal + offset lines up with the audio.
inline CalibrationResult calibrate_offset(double audio_shahed_peak_cents,
                                          const Transcription& transcription) {
  validate_transcription(transcription);
  std::map<int, double> duration_by_dm;
  for (const auto& n : transcription.notes) {
    duration_by_dm[n.note.doubled_midi] += n.duration_sec;
  }
  int best_dm = -1;
  double best_duration = -1.0;
  for (const auto& n : transcription.notes) {  // note order breaks ties
    double d = duration_by_dm[n.note.doubled_midi];
    if (d > best_duration) {
      best_duration = d;
      best_dm = n.note.doubled_midi;
    }
  }
  CalibrationResult result;
  for (const auto& n : transcription.notes) {
    if (n.note.doubled_midi == best_dm) {
      result.transcription_shahed = n.note;
      break;
    }
  }
  result.offset_cents =
      audio_shahed_peak_cents - result.transcription_shahed.nominal_cents();
  return result;
}

// Consecutive peak differences between adjacent degrees present in the
// piece. Degrees missing from the input yield no measurement; nothing is
// interpolated. Peaks must be sorted by nominal pitch, without duplicates.
inline std::vector<IntervalMeasurement> extract_intervals(
    const std::vector<NotePeak>& peaks) {
  if (peaks.size() < 2) {
    throw std::invalid_argument("extract_intervals: needs >= 2 peaks");
  }
  for (size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i].note.doubled_midi <= peaks[i - 1].note.doubled_midi) {
      throw std::invalid_argument(
          "extract_intervals: peaks must be sorted by nominal pitch");
    }
  }
  std::vector<IntervalMeasurement> out;
  for (size_t i = 1; i < peaks.size(); ++i) {
    double size = peaks[i].peak_cents - peaks[i - 1].peak_cents;
    if (!(size > 0.0)) continue;  // inverted measurement, not a usable interval
    IntervalMeasurement m;
    m.lower_note = peaks[i - 1].note;
    m.upper_note = peaks[i].note;
    m.size_cents = size;
    m.piece_id = peaks[i].piece_id;
    out.push_back(std::move(m));
  }
  return out;
}

// Group bounds observed in performance data: intervals whose spread falls
// in (5, 8) cents are the stable group, (11, 14) the loose group, and
// everything else stays ungrouped.
inline VarianceGroup variance_group(double sd_cents) {
  if (sd_cents > 5.0 && sd_cents < 8.0) return VarianceGroup::Low;
  if (sd_cents > 11.0 && sd_cents < 14.0) return VarianceGroup::High;
  return VarianceGroup::Ungrouped;
}

// Mean and sample standard deviation per note pair; pairs with fewer than
// min_samples measurements are dropped.
inline IntervalReport aggregate(
    const std::vector<IntervalMeasurement>& measurements,
    size_t min_samples = 3) {
  if (min_samples < 1) {
    throw std::invalid_argument("aggregate: min_samples must be >= 1");
  }
  if (measurements.empty()) {
    throw std::invalid_argument("aggregate: no measurements");
  }
  std::map<std::pair<int, int>, std::vector<const IntervalMeasurement*>> by_pair;
  for (const auto& m : measurements) {
    by_pair[{m.lower_note.doubled_midi, m.upper_note.doubled_midi}].push_back(
        &m);
  }
  IntervalReport report;
  for (const auto& [key, items] : by_pair) {
    if (items.size() < min_samples) continue;
    IntervalStats stats;
    stats.lower_note = items.front()->lower_note;
    stats.upper_note = items.front()->upper_note;
    stats.n_samples = items.size();
    double sum = 0.0;
    for (const auto* m : items) sum += m->size_cents;
    stats.mean_cents = sum / items.size();
    if (items.size() >= 2) {
      double ss = 0.0;
      for (const auto* m : items) {
        double d = m->size_cents - stats.mean_cents;
        ss += d * d;
      }
      stats.sd_cents = std::sqrt(ss / (items.size() - 1));
    }
    stats.group = variance_group(stats.sd_cents);
    report.intervals.push_back(std::move(stats));
  }
  return report;
}

// Cumulative cents from the tonic along the chain of mean intervals.
// Requires an unbroken chain of consecutive measured degrees upward from
// the tonic; degrees below the tonic are not included.
inline std::vector<ScaleRow> scale_rows(const IntervalReport& report,
                                        const QuartertoneNote& tonic) {
  std::map<int, QuartertoneNote> notes;
  std::map<std::pair<int, int>, double> means;
  for (const auto& s : report.intervals) {
    notes.emplace(s.lower_note.doubled_midi, s.lower_note);
    notes.emplace(s.upper_note.doubled_midi, s.upper_note);
    means[{s.lower_note.doubled_midi, s.upper_note.doubled_midi}] =
        s.mean_cents;
  }
  notes.emplace(tonic.doubled_midi, tonic);
  std::vector<ScaleRow> rows;
  rows.push_back({tonic, 0.0});
  std::vector<int> chain;
  for (const auto& [dm, note] : notes) {
    if (dm >= tonic.doubled_midi) chain.push_back(dm);
  }
  double cumulative = 0.0;
  for (size_t i = 1; i < chain.size(); ++i) {
    auto it = means.find({chain[i - 1], chain[i]});
    if (it == means.end()) {
      throw analysis_error("scale_rows: no measured interval into degree " +
                           notes.at(chain[i]).label() + " (missing " +
                           notes.at(chain[i - 1]).label() + "-" +
                           notes.at(chain[i]).label() + ")");
    }
    cumulative += it->second;
    rows.push_back({notes.at(chain[i]), cumulative});
  }
  return rows;
}

// Measured minus reference per shared degree. Labels are matched in
// ascending order so an octave-repeated degree name (the upper C) pairs
// with the right occurrence.
inline ScaleComparison compare_to_reference(const std::vector<ScaleRow>& rows,
                                            const ReferenceScale& scale) {
  ScaleComparison cmp;
  cmp.scale_name = scale.name;
  std::vector<bool> used(scale.degrees.size(), false);
  size_t search_from = 0;
  for (const auto& row : rows) {
    std::string label = pitch_class_label(row.note.doubled_midi);
    bool matched = false;
    for (size_t i = search_from; i < scale.degrees.size(); ++i) {
      if (!used[i] && scale.degrees[i].label == label) {
        used[i] = true;
        search_from = i + 1;
        cmp.shared.push_back({label, row.cents_from_tonic,
                              scale.degrees[i].cents,
                              row.cents_from_tonic - scale.degrees[i].cents});
        matched = true;
        break;
      }
    }
    if (!matched) cmp.unmatched_measured.push_back(label);
  }
  for (size_t i = 0; i < scale.degrees.size(); ++i) {
    if (!used[i]) cmp.unmatched_reference.push_back(scale.degrees[i].label);
  }
  if (cmp.shared.empty()) {
    throw analysis_error("compare_to_reference: no shared degrees with '" +
                         scale.name + "'");
  }
  return cmp;
}

}  // namespace intona
