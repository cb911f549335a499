#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transq/qmodel.hpp"
#include "transq/sim.hpp"

namespace transq::tools {

// Shortest-safe text for a double: 17 significant digits, "%.17g".
std::string format_real(double v);

// Builds a CSV document row by row. Values are written verbatim; callers
// pass numbers through format_real.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& str() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::string text_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

/// Dataset layout: traj_id,S1,A1,R1,S2,A2,R2,x1_1..x1_p,x2_1..x2_p with S2
/// read from the stage-2 covariates.
std::string dataset_to_csv(const TaskDataset& ds);
TaskDataset dataset_from_csv(const std::string& text, int task_id = 0);

std::string spec_to_json(const TwoStageMdpSpec& spec, int indent = -1);

// {schema_version, spec, seed, n, created_from}
std::string manifest_json(const TwoStageMdpSpec& spec, std::uint64_t seed, Eigen::Index n,
                          const std::string& created_from);

}  // namespace transq::tools
