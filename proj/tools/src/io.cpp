#include "transq/tools/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "transq/error.hpp"
#include "transq/tools/config.hpp"

namespace transq::tools {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(ErrorCode::DimensionMismatch, "CSV row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::Io, "CSV has no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size()) throw Error(ErrorCode::Io, "CSV row width differs from header");
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorCode::Io, "CSV has no header");
  return table;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + path + "': " + ec.message());
}

std::string dataset_to_csv(const TaskDataset& ds) {
  ds.validate();
  if (ds.horizon() != 2) throw Error(ErrorCode::DimensionMismatch, "dataset CSV holds two-stage data only");
  const Eigen::Index p = ds.dim();
  if (p < 5) throw Error(ErrorCode::DimensionMismatch, "two-stage covariates need p >= 5");
  std::vector<std::string> header{"traj_id", "S1", "A1", "R1", "S2", "A2", "R2"};
  for (int t = 1; t <= 2; ++t) {
    for (Eigen::Index j = 1; j <= p; ++j) header.push_back("x" + std::to_string(t) + "_" + std::to_string(j));
  }
  CsvWriter w(header);
  const StageData& s1 = ds.stages[0];
  const StageData& s2 = ds.stages[1];
  std::vector<std::string> cells;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    cells.clear();
    cells.push_back(std::to_string(i));
    cells.push_back(format_real(s1.X(i, 1)));
    cells.push_back(std::to_string(s1.a[i]));
    cells.push_back(format_real(s1.r[i]));
    cells.push_back(format_real(s2.X(i, 4)));
    cells.push_back(std::to_string(s2.a[i]));
    cells.push_back(format_real(s2.r[i]));
    for (const StageData* sd : {&s1, &s2}) {
      for (Eigen::Index j = 0; j < p; ++j) cells.push_back(format_real(sd->X(i, j)));
    }
    w.row(cells);
  }
  return w.str();
}

TaskDataset dataset_from_csv(const std::string& text, int task_id) {
  const CsvTable table = parse_csv(text);
  const std::size_t fixed = 7;
  if (table.header.size() < fixed + 2 || (table.header.size() - fixed) % 2 != 0) {
    throw Error(ErrorCode::Io, "dataset CSV has an unexpected number of columns");
  }
  const auto p = static_cast<Eigen::Index>((table.header.size() - fixed) / 2);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n < 1) throw Error(ErrorCode::InsufficientData, "dataset CSV has no rows");

  const std::size_t a1 = table.column("A1"), r1 = table.column("R1");
  const std::size_t a2 = table.column("A2"), r2 = table.column("R2");
  const std::size_t x1 = table.column("x1_1"), x2 = table.column("x2_1");

  TaskDataset ds;
  ds.task_id = task_id;
  ds.stages.resize(2);
  for (auto& sd : ds.stages) {
    sd.X.resize(n, p);
    sd.a.resize(n);
    sd.r.resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    try {
      ds.stages[0].a[i] = std::stoi(row[a1]);
      ds.stages[0].r[i] = std::stod(row[r1]);
      ds.stages[1].a[i] = std::stoi(row[a2]);
      ds.stages[1].r[i] = std::stod(row[r2]);
      for (Eigen::Index j = 0; j < p; ++j) {
        ds.stages[0].X(i, j) = std::stod(row[x1 + static_cast<std::size_t>(j)]);
        ds.stages[1].X(i, j) = std::stod(row[x2 + static_cast<std::size_t>(j)]);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Io, "dataset CSV row " + std::to_string(i + 1) + " has a malformed number");
    }
  }
  ds.validate();
  return ds;
}

namespace {

nlohmann::ordered_json spec_object(const TwoStageMdpSpec& spec) {
  nlohmann::ordered_json j;
  j["b1"] = spec.b1;
  j["b2"] = spec.b2;
  j["kappa"] = spec.kappa;
  j["gamma"] = spec.gamma;
  j["p"] = spec.p;
  j["noise_sd"] = spec.noise_sd;
  return j;
}

}  // namespace

std::string spec_to_json(const TwoStageMdpSpec& spec, int indent) { return spec_object(spec).dump(indent); }

std::string manifest_json(const TwoStageMdpSpec& spec, std::uint64_t seed, Eigen::Index n,
                          const std::string& created_from) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["spec"] = spec_object(spec);
  j["seed"] = seed;
  j["n"] = n;
  j["created_from"] = created_from;
  return j.dump(2) + "\n";
}

}  // namespace transq::tools
