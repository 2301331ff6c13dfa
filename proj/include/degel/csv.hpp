#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace degel {

/// Minimal CSV emitter with pinned float formatting so that identical runs
/// produce bitwise-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path);
  }

  void header(const std::vector<std::string>& cols) { line(cols); }

  void field(const std::string& s) {
    if (!first_) row_ += ',';
    row_ += s;
    first_ = false;
  }
  void field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    field(std::string(buf));
  }
  void field(int v) { field(std::to_string(v)); }
  void field(long v) { field(std::to_string(v)); }
  void field(bool v) { field(std::string(v ? "1" : "0")); }

  void end_row() {
    out_ << row_ << '\n';
    row_.clear();
    first_ = true;
  }

 private:
  void line(const std::vector<std::string>& cols) {
    for (const auto& c : cols) field(c);
    end_row();
  }
  std::ofstream out_;
  std::string row_;
  bool first_ = true;
};

}  // namespace degel
