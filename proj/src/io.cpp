#include "metaiot/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace metaiot {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for checksum: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return "fnv1a:" + fnv1a_hex(buffer.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

}  // namespace

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  if (ds.records.empty()) throw ConfigError("refusing to write an empty dataset");
  auto out = open_output(path);
  const std::size_t n_cond = ds.records[0].condition.size();
  const std::size_t n_freq = ds.records[0].power_db.size();

  out << "# power unit: dBm (reference 1 mW)\n";
  out << "# structure_mm:";
  for (double g : ds.structure) out << ' ' << format_double(g);
  out << "\n# seed: " << ds.seed << '\n';
  for (std::size_t k = 1; k <= n_cond; ++k) out << "cond_" << k << ',';
  out << "meas_idx";
  for (std::size_t i = 1; i <= n_freq; ++i) out << ",p_" << i << "_db";
  out << '\n';

  for (const auto& rec : ds.records) {
    for (std::size_t k = 0; k < n_cond; ++k) out << format_double(rec.condition[k]) << ',';
    out << rec.measurement_index;
    for (std::size_t i = 0; i < n_freq; ++i) out << ',' << format_double(rec.power_db[i]);
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing dataset: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);

  Dataset ds;
  std::string line;
  bool header_seen = false;
  std::size_t n_cond = 0;
  std::size_t n_freq = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string structure_tag = "# structure_mm:";
      const std::string seed_tag_label = "# seed:";
      if (line.rfind(structure_tag, 0) == 0) {
        std::stringstream ss(line.substr(structure_tag.size()));
        double v;
        while (ss >> v) ds.structure.push_back(v);
      } else if (line.rfind(seed_tag_label, 0) == 0) {
        ds.seed = std::stoull(line.substr(seed_tag_label.size()));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      const auto cells = split_csv_line(line);
      for (const auto& cell : cells) {
        if (cell.rfind("cond_", 0) == 0) ++n_cond;
        if (cell.rfind("p_", 0) == 0) ++n_freq;
      }
      if (n_cond == 0 || n_freq == 0 || cells.size() != n_cond + 1 + n_freq) {
        throw ConfigError("unrecognized dataset header in " + path);
      }
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != n_cond + 1 + n_freq) {
      throw ConfigError("dataset row has wrong column count in " + path);
    }
    DatasetRecord rec;
    rec.condition.reserve(n_cond);
    for (std::size_t k = 0; k < n_cond; ++k) rec.condition.push_back(std::stod(cells[k]));
    rec.measurement_index = std::stoi(cells[n_cond]);
    rec.power_db.reserve(n_freq);
    for (std::size_t i = 0; i < n_freq; ++i) {
      rec.power_db.push_back(std::stod(cells[n_cond + 1 + i]));
    }
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty()) throw ConfigError("dataset has no records: " + path);
  ds.n_freq = static_cast<int>(n_freq);
  return ds;
}

void write_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
  auto out = open_output(path);
  const std::size_t dims = trace.empty() ? 0 : trace[0].d.size();
  out << "eval_idx";
  for (std::size_t k = 1; k <= dims; ++k) out << ",d_" << k << "_mm";
  out << ",objective\n";
  for (const auto& point : trace) {
    out << point.eval_index;
    for (double g : point.d) out << ',' << format_double(g);
    out << ',' << format_double(point.value) << '\n';
  }
  if (!out) throw ConfigError("failed writing trace: " + path);
}

void write_history_csv(const std::vector<double>& train_rmse,
                       const std::vector<double>& val_rmse, const std::string& path) {
  auto out = open_output(path);
  out << "epoch,train_rmse,val_rmse\n";
  for (std::size_t e = 0; e < train_rmse.size(); ++e) {
    out << (e + 1) << ',' << format_double(train_rmse[e]) << ','
        << format_double(e < val_rmse.size() ? val_rmse[e] : train_rmse[e]) << '\n';
  }
  if (!out) throw ConfigError("failed writing history: " + path);
}

void write_tau_csv(const SystemModel& system, const ConditionGrid& grid,
                   const StructureVector& d, const std::string& path) {
  auto out = open_output(path);
  out << "# power unit: dBm (reference 1 mW)\n";
  const std::size_t n_cond = static_cast<std::size_t>(grid.dims());
  for (std::size_t k = 1; k <= n_cond; ++k) out << "cond_" << k << ',';
  out << "f_idx,tau_db\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto tau = expected_spectrum_db(system, grid.point(j), d);
    for (std::size_t i = 0; i < tau.size(); ++i) {
      for (std::size_t k = 0; k < n_cond; ++k) {
        out << format_double(grid.point(j)[k]) << ',';
      }
      out << (i + 1) << ',' << format_double(tau[i]) << '\n';
    }
  }
  if (!out) throw ConfigError("failed writing tau dump: " + path);
}

std::vector<ReceivedPowerVector> load_power_vectors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open power vector file: " + path);

  std::string line;
  std::vector<std::size_t> power_columns;
  std::vector<ReceivedPowerVector> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].rfind("p_", 0) == 0) power_columns.push_back(i);
      }
      if (power_columns.empty()) {
        throw ConfigError("no p_* columns found in " + path);
      }
      continue;
    }
    ReceivedPowerVector p;
    p.reserve(power_columns.size());
    for (std::size_t column : power_columns) {
      if (column >= cells.size()) {
        throw ConfigError("short row in power vector file " + path);
      }
      p.push_back(std::stod(cells[column]));
    }
    rows.push_back(std::move(p));
  }
  if (rows.empty()) throw ConfigError("no power vectors in " + path);
  return rows;
}

}  // namespace metaiot
