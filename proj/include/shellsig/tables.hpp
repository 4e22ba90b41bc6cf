#pragma once

#include <string>
#include <vector>

namespace shellsig {

// Minimal fixed-width text table for report rendering.
class TextTable {
 public:
  void header(std::vector<std::string> cells);
  void row(std::vector<std::string> cells);
  void separator();  // horizontal rule before the next row
  std::string str() const;

 private:
  struct Row {
    std::vector<std::string> cells;
    bool rule_before = false;
  };
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

std::string format_double(double v, int precision);
std::string format_percent(double fraction, int precision);

}  // namespace shellsig
