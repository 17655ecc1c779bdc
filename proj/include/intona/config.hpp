#pragma once

// Run configuration with documented defaults, loadable from a plain
// key = value text file ('#' starts a comment, every key optional).

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "intona/csv.hpp"
#include "intona/errors.hpp"
#include "intona/peakfit.hpp"

namespace intona {

enum class Type3Choice { Higher, Midpoint };

struct RunConfig {
  double bin_width_cents = 1.0;
  int smoothing_window_bins = 15;
  double min_prominence = 0.05;  // fraction of the histogram maximum
  double min_mass = 0.02;        // fraction of total histogram mass
  ClassifyParams classify;
  Type3Choice type3_peak_choice = Type3Choice::Higher;
  double dtw_unvoiced_penalty_cents = 600.0;
  size_t dtw_band = 0;  // 0 disables the band constraint
  bool fit_multistart = false;
  size_t min_samples = 3;
  // Scales the corpus report is compared against.
  std::vector<std::string> reference_scales = {"Vaziri", "Farhat-shur",
                                               "Talai-shur"};
  std::string tonic;  // note label or doubled-midi number; empty = automatic
  std::string output_dir = "out";
  size_t jobs = 0;  // 0 = hardware concurrency
};

inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& what) {
    throw input_error("config: " + what);
  };
  if (!(c.bin_width_cents > 0.0)) fail("bin_width_cents must be > 0");
  if (c.smoothing_window_bins < 1 || c.smoothing_window_bins % 2 == 0) {
    fail("smoothing_window_bins must be odd and >= 1");
  }
  if (!(c.min_prominence > 0.0 && c.min_prominence < 1.0)) {
    fail("min_prominence must lie in (0, 1)");
  }
  if (!(c.min_mass > 0.0 && c.min_mass < 1.0)) {
    fail("min_mass must lie in (0, 1)");
  }
  if (!(c.classify.interior_prominence_frac > 0.0 &&
        c.classify.interior_prominence_frac < 1.0)) {
    fail("classify_interior_prominence must lie in (0, 1)");
  }
  if (!(c.classify.plateau_level > 0.0 && c.classify.plateau_level <= 1.0)) {
    fail("classify_plateau_level must lie in (0, 1]");
  }
  if (!(c.classify.plateau_min_cents > 0.0)) {
    fail("classify_plateau_min_cents must be > 0");
  }
  if (!(c.classify.pair_max_gap_cents > 0.0)) {
    fail("classify_pair_max_gap_cents must be > 0");
  }
  if (!(c.classify.minor_mass_frac > 0.0 && c.classify.minor_mass_frac < 1.0)) {
    fail("classify_minor_mass_frac must lie in (0, 1)");
  }
  if (!(c.classify.max_residual_frac > 0.0)) {
    fail("classify_max_residual_frac must be > 0");
  }
  if (!(c.dtw_unvoiced_penalty_cents > 0.0)) {
    fail("dtw_unvoiced_penalty_cents must be > 0");
  }
  if (c.min_samples < 1) fail("min_samples must be >= 1");
  if (c.reference_scales.empty()) fail("reference_scales must not be empty");
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

inline std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += out.empty() ? s : "," + s;
  return out;
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace detail

// Apply one key/value pair; unknown keys are rejected so typos surface.
inline void apply_config_key(RunConfig& c, const std::string& key,
                             const std::string& raw_value) {
  const std::string value = detail::unquote(raw_value);
  auto as_double = [&]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw input_error("config: bad number for " + key + ": '" + value + "'");
    }
  };
  auto as_long = [&]() {
    try {
      return std::stol(value);
    } catch (const std::exception&) {
      throw input_error("config: bad integer for " + key + ": '" + value +
                        "'");
    }
  };
  auto as_bool = [&]() {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw input_error("config: bad boolean for " + key + ": '" + value + "'");
  };

  if (key == "bin_width_cents") {
    c.bin_width_cents = as_double();
  } else if (key == "smoothing_window_bins") {
    c.smoothing_window_bins = static_cast<int>(as_long());
  } else if (key == "min_prominence") {
    c.min_prominence = as_double();
  } else if (key == "min_mass") {
    c.min_mass = as_double();
  } else if (key == "classify_interior_prominence") {
    c.classify.interior_prominence_frac = as_double();
  } else if (key == "classify_plateau_level") {
    c.classify.plateau_level = as_double();
  } else if (key == "classify_plateau_min_cents") {
    c.classify.plateau_min_cents = as_double();
  } else if (key == "classify_pair_max_gap_cents") {
    c.classify.pair_max_gap_cents = as_double();
  } else if (key == "classify_minor_mass_frac") {
    c.classify.minor_mass_frac = as_double();
  } else if (key == "classify_max_residual_frac") {
    c.classify.max_residual_frac = as_double();
  } else if (key == "type3_peak_choice") {
    if (value == "higher") {
      c.type3_peak_choice = Type3Choice::Higher;
    } else if (value == "midpoint") {
      c.type3_peak_choice = Type3Choice::Midpoint;
    } else {
      throw input_error("config: type3_peak_choice must be higher|midpoint");
    }
  } else if (key == "dtw_unvoiced_penalty_cents") {
    c.dtw_unvoiced_penalty_cents = as_double();
  } else if (key == "dtw_band") {
    c.dtw_band = static_cast<size_t>(as_long());
  } else if (key == "fit_multistart") {
    c.fit_multistart = as_bool();
  } else if (key == "min_samples") {
    c.min_samples = static_cast<size_t>(as_long());
  } else if (key == "reference_scales") {
    c.reference_scales = detail::split_list(value);
  } else if (key == "tonic") {
    c.tonic = value;
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "jobs") {
    c.jobs = static_cast<size_t>(as_long());
  } else {
    throw input_error("config: unknown key '" + key + "'");
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open config file: " + path);
  }
  RunConfig c;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw input_error(path + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    apply_config_key(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  validate_config(c);
  return c;
}

// Writes every key; load_config(save_config(c)) reproduces c exactly.
inline void save_config(const RunConfig& c, std::ostream& out) {
  out << "bin_width_cents = " << format_number(c.bin_width_cents) << "\n";
  out << "smoothing_window_bins = " << c.smoothing_window_bins << "\n";
  out << "min_prominence = " << format_number(c.min_prominence) << "\n";
  out << "min_mass = " << format_number(c.min_mass) << "\n";
  out << "classify_interior_prominence = "
      << format_number(c.classify.interior_prominence_frac) << "\n";
  out << "classify_plateau_level = "
      << format_number(c.classify.plateau_level) << "\n";
  out << "classify_plateau_min_cents = "
      << format_number(c.classify.plateau_min_cents) << "\n";
  out << "classify_pair_max_gap_cents = "
      << format_number(c.classify.pair_max_gap_cents) << "\n";
  out << "classify_minor_mass_frac = "
      << format_number(c.classify.minor_mass_frac) << "\n";
  out << "classify_max_residual_frac = "
      << format_number(c.classify.max_residual_frac) << "\n";
  out << "type3_peak_choice = "
      << (c.type3_peak_choice == Type3Choice::Higher ? "higher" : "midpoint")
      << "\n";
  out << "dtw_unvoiced_penalty_cents = "
      << format_number(c.dtw_unvoiced_penalty_cents) << "\n";
  out << "dtw_band = " << c.dtw_band << "\n";
  out << "fit_multistart = " << (c.fit_multistart ? "true" : "false") << "\n";
  out << "min_samples = " << c.min_samples << "\n";
  out << "reference_scales = " << detail::join_list(c.reference_scales)
      << "\n";
  out << "tonic = " << c.tonic << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "jobs = " << c.jobs << "\n";
}

}  // namespace intona
