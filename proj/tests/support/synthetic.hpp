#pragma once

// Synthetic piece generation and independent oracles shared by the unit
// and acceptance suites. Pitch material is generated in cents around the
// MIDI-anchored axis and converted to Hz only when a CSV has to be
// written, so the generator doubles as the ground truth.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "intona/alignment.hpp"
#include "intona/cents.hpp"
#include "intona/histogram.hpp"

namespace synth {

struct NoteEvent {
  int doubled_midi = 0;
  double duration_sec = 0.0;
  double performed_cents = 0.0;  // 0 = sing the nominal pitch
  bool vibrato = false;
};

struct PieceOptions {
  double hop_sec = 256.0 / 44100.0;
  double jitter_sd_cents = 10.0;
  double detune_cents = 0.0;
  double vibrato_amp_cents = 35.0;  // triangle wave, uniform pitch spread
  double vibrato_hz = 5.5;
  double tempo_jitter = 0.0;  // per-note duration scale in [1-x, 1+x]
  int tekye_frames = 0;       // ornament frames at each note start
  double tekye_jump_cents = 120.0;
  unsigned seed = 1;
};

struct SyntheticPiece {
  intona::PitchTrace trace;
  intona::Transcription transcription;
  std::vector<double> onsets_sec;  // true note starts in the trace
};

// Triangle wave in [-1, 1]; its value distribution is uniform, which is
// what makes a vibrato note's histogram top flat.
inline double triangle(double phase01) {
  return 4.0 * std::fabs(phase01 - 0.5) - 1.0;
}

inline SyntheticPiece make_piece(const std::vector<NoteEvent>& events,
                                 const PieceOptions& opt = {}) {
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> jitter(0.0, opt.jitter_sd_cents);
  std::uniform_real_distribution<double> tempo(1.0 - opt.tempo_jitter,
                                               1.0 + opt.tempo_jitter);
  SyntheticPiece piece;
  piece.trace.hop_sec = opt.hop_sec;
  size_t frame = 0;
  for (const auto& ev : events) {
    intona::QuartertoneNote note = intona::make_note(ev.doubled_midi);
    piece.transcription.notes.push_back({note, ev.duration_sec});
    double base = ev.performed_cents != 0.0 ? ev.performed_cents
                                            : note.nominal_cents();
    base += opt.detune_cents;
    double actual_dur =
        opt.tempo_jitter > 0.0 ? ev.duration_sec * tempo(rng) : ev.duration_sec;
    size_t n_frames =
        std::max<size_t>(1, std::llround(actual_dur / opt.hop_sec));
    piece.onsets_sec.push_back(frame * opt.hop_sec);
    for (size_t k = 0; k < n_frames; ++k) {
      double t = frame * opt.hop_sec;
      double cents = base;
      // A deliberate wide vibrato IS the frame-level variation of its
      // note; the random jitter models the pitch instability of the rest.
      if (ev.vibrato) {
        cents += opt.vibrato_amp_cents *
                 triangle(std::fmod(opt.vibrato_hz * t, 1.0));
      } else if (opt.jitter_sd_cents > 0.0) {
        cents += jitter(rng);
      }
      if (opt.tekye_frames > 0 && k < static_cast<size_t>(opt.tekye_frames)) {
        cents += opt.tekye_jump_cents;
      }
      intona::TraceFrame f;
      f.time_sec = t;
      f.cents = cents;
      f.f0_hz = intona::cents_to_hz(cents);
      f.voiced = true;
      piece.trace.frames.push_back(f);
      ++frame;
    }
  }
  return piece;
}

// The shur octave used by the corpus tests: doubled-midi degrees on C4
// and target scale rows (cents from the tonic).
inline const std::vector<int>& shur_degrees() {
  static const std::vector<int> d = {120, 124, 127, 130, 134, 137, 140, 144};
  return d;
}

inline const std::vector<double>& shur_rows() {
  static const std::vector<double> r = {0, 210, 347, 498, 696, 836, 985, 1190};
  return r;
}

// One gushe-like melody visiting every shur degree up and down, with the
// tonic carrying the largest total duration (it is the shahed). The
// vibrato_degree (1..7, index into shur_degrees) marks one note as sung
// with vibrato; -1 disables it.
inline std::vector<NoteEvent> shur_melody(double tonic_cents_base,
                                          int vibrato_degree) {
  const auto& dms = shur_degrees();
  const auto& rows = shur_rows();
  auto ev = [&](int idx, double dur) {
    NoteEvent e;
    e.doubled_midi = dms[idx];
    e.duration_sec = dur;
    e.performed_cents = tonic_cents_base + rows[idx];
    e.vibrato = idx == vibrato_degree;
    return e;
  };
  std::vector<NoteEvent> events;
  events.push_back(ev(0, 2.0));
  for (int i = 1; i < 8; ++i) events.push_back(ev(i, 0.9));
  for (int i = 6; i >= 1; --i) events.push_back(ev(i, 0.9));
  events.push_back(ev(0, 2.0));
  return events;
}

// --- oracles ----------------------------------------------------------

// Exhaustive DTW: enumerate every monotone path with steps
// {(1,0),(0,1),(1,1)} by plain recursion, no DP table shared with the
// implementation under test.
inline double dtw_brute_force(const std::vector<double>& a,
                              const std::vector<double>& b, double penalty) {
  const double inf = std::numeric_limits<double>::infinity();
  std::function<double(size_t, size_t)> go = [&](size_t i,
                                                 size_t j) -> double {
    double d = std::isnan(a[i]) ? penalty : std::fabs(a[i] - b[j]);
    if (i == 0 && j == 0) return d;
    double best = inf;
    if (i > 0 && j > 0) best = std::min(best, go(i - 1, j - 1));
    if (i > 0) best = std::min(best, go(i - 1, j));
    if (j > 0) best = std::min(best, go(i, j - 1));
    return d + best;
  };
  return go(a.size() - 1, b.size() - 1);
}

// Two-pass sample standard deviation.
inline double sd_two_pass(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return xs.size() >= 2 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
}

// Gaussian mountain histogram: n_frames samples of N(mean, sd) binned at
// bin_width, deterministic seed.
inline intona::Histogram gaussian_histogram(double mean, double sd,
                                            size_t n_frames, double bin_width,
                                            unsigned seed, int pad = 15) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> cents(n_frames);
  for (auto& c : cents) c = dist(rng);
  return intona::build_histogram_from_cents(cents, bin_width, pad);
}

}  // namespace synth
