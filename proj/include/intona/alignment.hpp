#pragma once

// Score-to-audio alignment: expand a transcription to frame rate, align
// it against the F0 trace with dynamic time warping, cut the trace into
// per-note spans, and build per-note histograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "intona/cents.hpp"
#include "intona/errors.hpp"
#include "intona/histogram.hpp"

namespace intona {

struct TranscriptionNote {
  QuartertoneNote note;
  double duration_sec = 0.0;
};

struct Transcription {
  std::vector<TranscriptionNote> notes;

  double total_duration() const {
    double d = 0.0;
    for (const auto& n : notes) d += n.duration_sec;
    return d;
  }
};

inline void validate_transcription(const Transcription& t) {
  if (t.notes.empty()) {
    throw input_error("transcription: no notes");
  }
  for (size_t i = 0; i < t.notes.size(); ++i) {
    if (!(t.notes[i].duration_sec > 0.0)) {
      throw input_error("transcription: note " + std::to_string(i + 1) +
                        " has non-positive duration");
    }
  }
}

// Per-note frame counts by largest-remainder apportionment: counts sum
// exactly to total_frames and each differs from the exact proportional
// share by less than one frame.
inline std::vector<size_t> expansion_counts(const Transcription& t,
                                            size_t total_frames) {
  validate_transcription(t);
  if (total_frames < t.notes.size()) {
    throw std::invalid_argument(
        "expand_transcription: fewer frames than notes");
  }
  double total_duration = t.total_duration();
  const size_t n = t.notes.size();
  std::vector<size_t> counts(n);
  std::vector<std::pair<double, size_t>> remainders(n);
  size_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    double exact = total_frames * (t.notes[i].duration_sec / total_duration);
    counts[i] = static_cast<size_t>(std::floor(exact));
    remainders[i] = {exact - counts[i], i};
    assigned += counts[i];
  }
  // Hand out the leftover frames to the largest remainders, earlier notes
  // first on ties.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  size_t leftover = total_frames - assigned;
  for (size_t k = 0; k < leftover; ++k) {
    counts[remainders[k % n].second] += 1;
  }
  return counts;
}

struct ExpandedReference {
  std::vector<double> cents;          // one value per frame
  std::vector<size_t> note_counts;    // frames per transcription note
};

// Repeat each note's nominal cents so the reference has exactly
// total_frames entries, proportional to the written durations.
inline ExpandedReference expand_transcription(const Transcription& t,
                                              size_t total_frames) {
  ExpandedReference out;
  out.note_counts = expansion_counts(t, total_frames);
  out.cents.reserve(total_frames);
  for (size_t i = 0; i < t.notes.size(); ++i) {
    out.cents.insert(out.cents.end(), out.note_counts[i],
                     t.notes[i].note.nominal_cents());
  }
  return out;
}

struct AlignmentPath {
  std::vector<std::pair<size_t, size_t>> pairs;  // (trace frame, ref frame)
};

struct DtwOptions {
  double unvoiced_penalty_cents = 600.0;  // distance for NaN trace frames
  size_t band = 0;                        // 0 = unconstrained
};

struct DtwResult {
  AlignmentPath path;
  double cost = 0.0;
};

// Classic DTW with steps {(1,0),(0,1),(1,1)} and |delta cents| local
// distance. NaN trace values (unvoiced frames) cost a fixed penalty
// against any reference value. On cost ties the diagonal step wins, then
// the trace step, then the reference step, so backtracking is
// deterministic.
inline DtwResult dtw_align(const std::vector<double>& trace_cents,
                           const std::vector<double>& reference_cents,
                           const DtwOptions& options = {}) {
  const size_t n = trace_cents.size();
  const size_t m = reference_cents.size();
  if (n == 0 || m == 0) {
    throw std::invalid_argument("dtw_align: sequences must be non-empty");
  }
  const double inf = std::numeric_limits<double>::infinity();

  auto dist = [&](size_t i, size_t j) {
    if (std::isnan(trace_cents[i])) return options.unvoiced_penalty_cents;
    return std::fabs(trace_cents[i] - reference_cents[j]);
  };
  auto window = [&](size_t i) -> std::pair<size_t, size_t> {
    if (options.band == 0) return {0, m - 1};
    double center = (n == 1) ? 0.0
                             : static_cast<double>(i) * (m - 1) / (n - 1);
    long lo = static_cast<long>(std::floor(center)) -
              static_cast<long>(options.band);
    long hi = static_cast<long>(std::ceil(center)) +
              static_cast<long>(options.band);
    return {static_cast<size_t>(std::max(lo, 0L)),
            static_cast<size_t>(std::min(hi, static_cast<long>(m) - 1))};
  };

  // Backpointers: 1 = diagonal, 2 = trace step (i-1,j), 3 = ref step (i,j-1).
  std::vector<uint8_t> back(n * m, 0);
  std::vector<double> prev(m, inf), cur(m, inf);

  for (size_t i = 0; i < n; ++i) {
    auto [jlo, jhi] = window(i);
    std::fill(cur.begin(), cur.end(), inf);
    for (size_t j = jlo; j <= jhi; ++j) {
      double d = dist(i, j);
      if (i == 0 && j == 0) {
        cur[0] = d;
        continue;
      }
      double via_diag = (i > 0 && j > 0) ? prev[j - 1] : inf;
      double via_trace = (i > 0) ? prev[j] : inf;
      double via_ref = (j > 0) ? cur[j - 1] : inf;
      double best = via_diag;
      uint8_t step = 1;
      if (via_trace < best) {
        best = via_trace;
        step = 2;
      }
      if (via_ref < best) {
        best = via_ref;
        step = 3;
      }
      if (best == inf) continue;  // unreachable under the band
      cur[j] = best + d;
      back[i * m + j] = step;
    }
    std::swap(prev, cur);
  }

  double total = prev[m - 1];
  if (!(total < inf)) {
    throw analysis_error("dtw_align: no path within the band constraint");
  }

  AlignmentPath path;
  size_t i = n - 1, j = m - 1;
  while (true) {
    path.pairs.push_back({i, j});
    uint8_t step = back[i * m + j];
    if (step == 0) break;
    if (step == 1) {
      --i;
      --j;
    } else if (step == 2) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return {std::move(path), total};
}

// Half-open range of trace frames assigned to one transcription note.
struct NoteSpan {
  size_t begin = 0;
  size_t end = 0;

  size_t frames() const { return end - begin; }
};

// Cut the trace into one span per transcription note. A trace frame
// matched to several reference frames takes the note owning the majority
// of them; ties go to the earlier note. Spans partition [0, n) in note
// order (a note squeezed out of the path gets an empty span).
inline std::vector<NoteSpan> note_spans_from_path(
    const AlignmentPath& path, const std::vector<size_t>& note_counts) {
  if (path.pairs.empty()) {
    throw std::invalid_argument("note_spans_from_path: empty path");
  }
  const size_t note_count = note_counts.size();
  std::vector<size_t> block_begin(note_count + 1, 0);
  for (size_t k = 0; k < note_count; ++k) {
    block_begin[k + 1] = block_begin[k] + note_counts[k];
  }
  const size_t n = path.pairs.back().first + 1;

  std::vector<size_t> chosen(n, 0);
  size_t idx = 0;
  while (idx < path.pairs.size()) {
    size_t f = path.pairs[idx].first;
    size_t j_first = path.pairs[idx].second;
    size_t j_last = j_first;
    while (idx + 1 < path.pairs.size() && path.pairs[idx + 1].first == f) {
      ++idx;
      j_last = path.pairs[idx].second;
    }
    ++idx;
    // Majority note over the matched reference block [j_first, j_last].
    size_t best_note = 0;
    size_t best_overlap = 0;
    for (size_t k = 0; k < note_count; ++k) {
      size_t lo = std::max(j_first, block_begin[k]);
      size_t hi = std::min(j_last + 1, block_begin[k + 1]);
      size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_note = k;
      }
    }
    chosen[f] = best_note;
  }

  std::vector<NoteSpan> spans(note_count);
  std::vector<bool> seen(note_count, false);
  for (size_t f = 0; f < n; ++f) {
    size_t k = chosen[f];
    if (!seen[k]) {
      spans[k].begin = f;
      seen[k] = true;
    }
    spans[k].end = f + 1;
  }
  // Empty spans sit at the boundary of their successor.
  size_t next_begin = n;
  for (size_t k = note_count; k-- > 0;) {
    if (!seen[k]) {
      spans[k].begin = next_begin;
      spans[k].end = next_begin;
    }
    next_begin = spans[k].begin;
  }
  return spans;
}

struct NoteHistogram {
  QuartertoneNote note;
  Histogram hist;
  double mass = 0.0;  // voiced frames merged into this note
};

// Histogram of each distinct note, merging every occurrence across the
// piece. Notes that received no voiced frames are omitted.
inline std::vector<NoteHistogram> note_histograms(
    const PitchTrace& trace, const Transcription& transcription,
    const std::vector<NoteSpan>& spans, double bin_width, int pad_bins = 15) {
  if (spans.size() != transcription.notes.size()) {
    throw std::invalid_argument("note_histograms: span/note count mismatch");
  }
  std::map<int, std::vector<double>> per_note_cents;
  std::map<int, QuartertoneNote> note_by_dm;
  for (size_t k = 0; k < spans.size(); ++k) {
    const auto& note = transcription.notes[k].note;
    auto& bucket = per_note_cents[note.doubled_midi];
    note_by_dm.emplace(note.doubled_midi, note);
    for (size_t f = spans[k].begin; f < spans[k].end; ++f) {
      if (trace.frames[f].voiced) bucket.push_back(trace.frames[f].cents);
    }
  }
  std::vector<NoteHistogram> out;
  for (auto& [dm, cents] : per_note_cents) {
    if (cents.empty()) continue;
    NoteHistogram nh;
    nh.note = note_by_dm.at(dm);
    nh.mass = static_cast<double>(cents.size());
    nh.hist = build_histogram_from_cents(cents, bin_width, pad_bins);
    out.push_back(std::move(nh));
  }
  return out;
}

struct AlignmentEvaluation {
  std::vector<double> deviations_ms;  // one per note
  double max_ms = 0.0;
  double mean_ms = 0.0;
};

// Compare detected note onsets (span starts) against annotated ground
// truth, in milliseconds.
inline AlignmentEvaluation evaluate_alignment(
    const std::vector<NoteSpan>& spans, const PitchTrace& trace,
    const std::vector<double>& ground_truth_onsets_sec) {
  if (spans.size() != ground_truth_onsets_sec.size()) {
    throw std::invalid_argument(
        "evaluate_alignment: onset count does not match note count");
  }
  AlignmentEvaluation eval;
  eval.deviations_ms.reserve(spans.size());
  double sum = 0.0;
  for (size_t k = 0; k < spans.size(); ++k) {
    double detected =
        spans[k].begin < trace.frames.size()
            ? trace.frames[spans[k].begin].time_sec
            : trace.frames.back().time_sec + trace.hop_sec;
    double dev_ms =
        std::fabs(detected - ground_truth_onsets_sec[k]) * 1000.0;
    eval.deviations_ms.push_back(dev_ms);
    eval.max_ms = std::max(eval.max_ms, dev_ms);
    sum += dev_ms;
  }
  eval.mean_ms = spans.empty() ? 0.0 : sum / spans.size();
  return eval;
}

}  // namespace intona
