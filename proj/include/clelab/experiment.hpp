#pragma once

#include <map>

#include "clelab/estimators.hpp"

namespace clelab {

// Experiment configuration: a single human-readable file of
// [section] key = value tables. Geometry is written in continuum units
// with the spacing declared once under [lattice].
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  std::string serialize() const;  // canonical; parse(serialize()) round-trips

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section,
                         const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key) const;
  double get_number_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long get_integer_or(const std::string& section, const std::string& key,
                      long fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;
  std::vector<double> get_numbers(const std::string& section,
                                  const std::string& key) const;
  Cplx get_complex_or(const std::string& section, const std::string& key,
                      Cplx fallback) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  friend bool operator==(const ConfigFile& a, const ConfigFile& b) {
    return a.sections_ == b.sections_;
  }

 private:
  using Section = std::vector<std::pair<std::string, std::string>>;
  std::vector<std::pair<std::string, Section>> sections_;  // ordered
  const std::string* find(const std::string& section,
                          const std::string& key) const;
};

struct ExperimentConfig {
  ModelParams model = ModelParams::critical(1.0);
  LatticeJob lattice;
  MCParams mc;
  std::string task;
  std::string out_dir = ".";
  std::string prefix = "run";
  int workers = 0;  // 0: hardware concurrency
  ConfigFile raw;

  // Parses, schema-validates, and checks every geometric precondition that
  // can be checked before sampling starts.
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_config(const ConfigFile& cfg);
};

// One CSV row per measured grid point; the third column carries whichever
// knob the task varies (eta, eps, theta or width), as documented in
// docs/formats.md.
struct ResultRow {
  std::string task;
  std::string geometry_id;
  double knob = 0.0;
  double value_re = 0.0;
  double value_im = 0.0;
  double stderror = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  int chain_count = 0;
};

std::string csv_render(const std::vector<ResultRow>& rows);
void write_text_file(const std::string& path, const std::string& text);

// CLI entry point; returns the process exit code (0 success, 2 validation
// error, 3 statistical-resolution failure).
int run_cli(int argc, char** argv);

// Self-test suite: analytic and oracle checks, one pass/fail line each.
bool run_selftest(std::ostream& out);

}  // namespace clelab
