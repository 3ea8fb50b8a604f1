#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtransport/core.hpp"

namespace qtransport::cli {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Header lines shared by every CSV file.
struct Provenance {
  std::string command;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> fields;  // in print order
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(const std::vector<double>& values) {
    require(values.size() == columns_.size(), "csv row has the wrong number of columns");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_number(values[i]);
    }
    rows_.push_back(std::move(line));
  }

  [[nodiscard]] std::string render(const Provenance& prov) const {
    std::string out = "# qtransport " + std::string(kVersion) + "\n";
    out += "# command " + prov.command + "\n";
    out += "# config_hash " + prov.config_hash + "\n";
    for (const auto& [k, v] : prov.fields) out += "# " + k + " " + v + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
    out += '\n';
    for (const auto& r : rows_) out += r + '\n';
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

/// Files are held in memory and only written once the whole command succeeded.
/// Each lands under a temporary name first and is renamed into place.
class OutputSet {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  void add_json(const std::string& name, const nlohmann::json& doc) { add(name, doc.dump(2) + "\n"); }

  [[nodiscard]] const std::map<std::string, std::string>& files() const { return files_; }

  void commit(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> staged;
    auto discard = [&] {
      for (const auto& p : staged) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files_) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) {
        discard();
        fs::remove(tmp, ec);
        throw ConfigError("cannot write '" + (dir / name).string() + "'");
      }
      staged.push_back(tmp);
    }
    for (const auto& [name, content] : files_) {
      fs::rename(dir / ("." + name + ".tmp"), dir / name, ec);
      if (ec) {
        discard();
        throw ConfigError("cannot rename into '" + (dir / name).string() + "': " + ec.message());
      }
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace qtransport::cli
