#pragma once

// Pitch mathematics on the cents axis (1200 cents per octave) and
// quartertone note identities at 50-cent resolution.

#include <cmath>
#include <stdexcept>
#include <string>

namespace intona {

inline constexpr double kCentsPerOctave = 1200.0;

// Absolute cents are anchored to MIDI: semitone n sits at exactly 100*n
// cents, so A4 (midi 69) at the default 440 Hz reference is 6900 cents.
inline constexpr double kDefaultReferenceHz = 440.0;
inline constexpr double kReferenceAnchorCents = 6900.0;

inline constexpr int kMaxDoubledMidi = 254;

// Interval between two string lengths (or frequencies) in cents:
// 1200 * log2(numerator / denominator).
inline double ratio_to_cents(double numerator, double denominator) {
  if (!(numerator > 0.0) || !(denominator > 0.0)) {
    throw std::domain_error("ratio_to_cents: arguments must be positive");
  }
  return kCentsPerOctave * std::log2(numerator / denominator);
}

// Absolute cents of a frequency on the MIDI-anchored axis.
inline double hz_to_cents(double frequency_hz,
                          double reference_hz = kDefaultReferenceHz) {
  if (!(frequency_hz > 0.0) || !(reference_hz > 0.0)) {
    throw std::domain_error("hz_to_cents: frequencies must be positive");
  }
  return kReferenceAnchorCents + ratio_to_cents(frequency_hz, reference_hz);
}

// Inverse of hz_to_cents.
inline double cents_to_hz(double cents,
                          double reference_hz = kDefaultReferenceHz) {
  if (!(reference_hz > 0.0)) {
    throw std::domain_error("cents_to_hz: reference must be positive");
  }
  return reference_hz *
         std::exp2((cents - kReferenceAnchorCents) / kCentsPerOctave);
}

namespace detail {
inline constexpr const char* kSemitoneNames[12] = {
    "C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
}

// Pitch-class label of a doubled-MIDI value (one unit = 50 cents).
// Even values use the 12-tone name; odd values are spelled as the koron
// (half-flat, "k") of the semitone above, e.g. 127 -> "Ek".
inline std::string pitch_class_label(int doubled_midi) {
  if (doubled_midi < 0 || doubled_midi > kMaxDoubledMidi) {
    throw std::domain_error("pitch_class_label: doubled midi out of range");
  }
  if (doubled_midi % 2 == 0) {
    return detail::kSemitoneNames[(doubled_midi / 2) % 12];
  }
  int upper = (doubled_midi + 1) / 2;
  return std::string(detail::kSemitoneNames[upper % 12]) + "k";
}

// Octave-qualified label, e.g. 120 -> "C4", 127 -> "Ek4".
inline std::string note_label(int doubled_midi) {
  if (doubled_midi < 0 || doubled_midi > kMaxDoubledMidi) {
    throw std::domain_error("note_label: doubled midi out of range");
  }
  int semitone = (doubled_midi + 1) / 2;  // koron borrows the upper name
  int octave = semitone / 12 - 1;
  return pitch_class_label(doubled_midi) + std::to_string(octave);
}

// A pitch at quartertone resolution. doubled_midi is the MIDI number
// multiplied by two, so neutral (koron) degrees get integer indices.
struct QuartertoneNote {
  int doubled_midi = 0;
  std::string name;  // display label; canonical note_label() if empty

  double nominal_cents() const { return 50.0 * doubled_midi; }
  std::string label() const {
    return name.empty() ? note_label(doubled_midi) : name;
  }

  // Identity is pitch only; the label is presentation.
  friend bool operator==(const QuartertoneNote& a, const QuartertoneNote& b) {
    return a.doubled_midi == b.doubled_midi;
  }
  friend bool operator<(const QuartertoneNote& a, const QuartertoneNote& b) {
    return a.doubled_midi < b.doubled_midi;
  }
};

inline QuartertoneNote make_note(int doubled_midi, std::string name = {}) {
  if (doubled_midi < 0 || doubled_midi > kMaxDoubledMidi) {
    throw std::domain_error("make_note: doubled midi out of [0, 254]");
  }
  return QuartertoneNote{doubled_midi, std::move(name)};
}

// Nearest quartertone to an absolute cents value.
inline QuartertoneNote nearest_quartertone(double cents) {
  int dm = static_cast<int>(std::lround(cents / 50.0));
  if (dm < 0) dm = 0;
  if (dm > kMaxDoubledMidi) dm = kMaxDoubledMidi;
  return QuartertoneNote{dm, {}};
}

}  // namespace intona
