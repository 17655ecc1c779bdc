#pragma once

// Built-in historical reference scales and circle-of-fifths generation.
//
// Scale values are stored digit-for-digit as published. Farhat and Talai
// measured tar/setar fret positions in the twentieth century; Vaziri's is
// the 24-EDO quartertone proposal; Maraghi's is the medieval Pythagorean
// division (fifth = 702 cents); Farabi-I/II/III are the three seven-note
// octave species he singles out (the third degree at 408, 355 = vosta
// zalzal, or 303 = vosta fars). Maraghi's large/small mojannab are also
// reported as 182/114 in some readings; the 180-based values are the ones
// stored here.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "intona/cents.hpp"
#include "intona/errors.hpp"

namespace intona {

struct ScaleDegree {
  std::string label;
  double cents = 0.0;
};

struct ReferenceScale {
  std::string name;
  std::vector<ScaleDegree> degrees;  // ascending, 0 .. 1200
};

// Degrees must rise strictly from 0 to 1200.
inline void validate_scale(const ReferenceScale& s) {
  if (s.degrees.size() < 2) {
    throw input_error("scale '" + s.name + "': needs at least two degrees");
  }
  if (s.degrees.front().cents != 0.0) {
    throw input_error("scale '" + s.name + "': first degree must be 0");
  }
  if (s.degrees.back().cents != 1200.0) {
    throw input_error("scale '" + s.name + "': last degree must be 1200");
  }
  for (size_t i = 1; i < s.degrees.size(); ++i) {
    if (!(s.degrees[i].cents > s.degrees[i - 1].cents)) {
      throw input_error("scale '" + s.name + "': degrees must increase");
    }
  }
}

namespace detail {

inline ReferenceScale farhat_scale() {
  return {"Farhat",
          {{"Sol", 0},    {"La b", 90},  {"La k", 135}, {"La", 205},
           {"Si b", 295}, {"Si k", 340}, {"Si", 410},   {"Do", 500},
           {"Re b", 565}, {"Re k", 630}, {"Re", 700},   {"Mi b", 790},
           {"Mi k", 835}, {"Mi", 905},   {"Fa", 995},   {"-", 1040},
           {"Fa#", 1110}, {"Sol", 1200}}};
}

// Rows published without a value ("-") are simply absent degrees.
inline ReferenceScale talai_scale() {
  return {"Talai",
          {{"Sol", 0},    {"La k", 140}, {"La", 200},  {"Si b", 280},
           {"Si k", 350}, {"Si", 380},   {"Do", 500},  {"Re b", 580},
           {"Re k", 640}, {"Re", 700},   {"Mi k", 840}, {"Mi", 900},
           {"Fa", 980},   {"-", 1050},   {"Sol", 1200}}};
}

inline ReferenceScale maraghi_scale() {
  return {"Maraghi",
          {{"Sol", 0},    {"La b", 90},  {"La k", 180}, {"La", 204},
           {"Si b", 294}, {"Si k", 384}, {"Si", 408},   {"Do", 498},
           {"Re b", 588}, {"Re k", 678}, {"Re", 702},   {"Mi b", 792},
           {"Mi k", 882}, {"Mi", 906},   {"Fa", 996},   {"-", 1086},
           {"Fa#", 1176}, {"Sol", 1200}}};
}

inline ReferenceScale vaziri_scale() {
  return {"Vaziri",
          {{"C", 0},   {"D", 200},  {"Ek", 350},  {"F", 500},
           {"G", 700}, {"Ak", 850}, {"Bb", 1000}, {"C", 1200}}};
}

inline ReferenceScale farabi_scale(int type) {
  static const double third[3] = {408, 355, 303};
  static const double sixth[3] = {906, 853, 801};
  static const char* names[3] = {"Farabi-I", "Farabi-II", "Farabi-III"};
  return {names[type - 1],
          {{"I", 0},
           {"II", 204},
           {"III", third[type - 1]},
           {"IV", 498},
           {"V", 702},
           {"VI", sixth[type - 1]},
           {"VII", 996},
           {"VIII", 1200}}};
}

}  // namespace detail

// The shur-scale octave species of a Sol-rooted scale: degrees
// Sol, La, Si k, Do, Re, Mi k, Fa, Sol relabelled C, D, Ek, F, G, Ak, Bb, C.
inline ReferenceScale shur_subset(const ReferenceScale& full) {
  static const char* wanted[8] = {"Sol", "La",   "Si k", "Do",
                                  "Re",  "Mi k", "Fa",   "Sol"};
  static const char* relabel[8] = {"C", "D", "Ek", "F", "G", "Ak", "Bb", "C"};
  ReferenceScale out{full.name + "-shur", {}};
  size_t from = 0;
  for (int d = 0; d < 8; ++d) {
    bool found = false;
    for (size_t i = from; i < full.degrees.size(); ++i) {
      if (full.degrees[i].label == wanted[d]) {
        out.degrees.push_back({relabel[d], full.degrees[i].cents});
        from = i + 1;
        found = true;
        break;
      }
    }
    if (!found) {
      throw analysis_error("shur_subset: scale '" + full.name +
                           "' lacks degree '" + wanted[d] + "'");
    }
  }
  validate_scale(out);
  return out;
}

inline std::vector<std::string> reference_scale_names() {
  return {"Farhat",   "Talai",     "Maraghi",    "Vaziri",     "Farabi-I",
          "Farabi-II", "Farabi-III", "Farhat-shur", "Talai-shur"};
}

// Look up a built-in scale by name. Every returned scale passes
// validate_scale().
inline ReferenceScale reference_scale(const std::string& name) {
  ReferenceScale s;
  if (name == "Farhat") {
    s = detail::farhat_scale();
  } else if (name == "Talai") {
    s = detail::talai_scale();
  } else if (name == "Maraghi") {
    s = detail::maraghi_scale();
  } else if (name == "Vaziri") {
    s = detail::vaziri_scale();
  } else if (name == "Farabi-I") {
    s = detail::farabi_scale(1);
  } else if (name == "Farabi-II") {
    s = detail::farabi_scale(2);
  } else if (name == "Farabi-III") {
    s = detail::farabi_scale(3);
  } else if (name == "Farhat-shur") {
    s = shur_subset(detail::farhat_scale());
  } else if (name == "Talai-shur") {
    s = shur_subset(detail::talai_scale());
  } else {
    std::string known;
    for (const auto& n : reference_scale_names()) {
      known += known.empty() ? n : ", " + n;
    }
    throw input_error("unknown reference scale '" + name + "' (known: " +
                      known + ")");
  }
  validate_scale(s);
  return s;
}

// Pitches {(k * fifth) mod 1200} for k in [-descending, +ascending],
// sorted ascending in [0, 1200) and deduplicated within 0.5 cents.
inline std::vector<double> circle_of_fifths_scale(int ascending_steps,
                                                  int descending_steps,
                                                  double fifth_cents) {
  if (ascending_steps < 0 || descending_steps < 0) {
    throw std::invalid_argument("circle_of_fifths_scale: negative step count");
  }
  if (!(fifth_cents > 0.0) || !(fifth_cents < 1200.0)) {
    throw std::invalid_argument(
        "circle_of_fifths_scale: fifth must lie in (0, 1200)");
  }
  std::vector<double> pitches;
  pitches.reserve(ascending_steps + descending_steps + 1);
  for (int k = -descending_steps; k <= ascending_steps; ++k) {
    double v = std::fmod(k * fifth_cents, kCentsPerOctave);
    if (v < 0.0) v += kCentsPerOctave;
    pitches.push_back(v);
  }
  std::sort(pitches.begin(), pitches.end());
  std::vector<double> out;
  for (double v : pitches) {
    if (out.empty() || v - out.back() >= 0.5) out.push_back(v);
  }
  return out;
}

}  // namespace intona
