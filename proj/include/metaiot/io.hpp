#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metaiot/discernibility.hpp"
#include "metaiot/sensefn.hpp"
#include "metaiot/structopt.hpp"
#include "metaiot/types.hpp"

namespace metaiot {

/// Shortest-exact decimal form; parsing it back recovers the double bit for bit.
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);

/// Checksum string "fnv1a:<hex>" over a file's bytes.
std::string file_checksum(const std::string& path);

/// Dataset CSV: comment lines carry the dBm reference and provenance, then
/// `cond_1,...,cond_NT,meas_idx,p_1_db,...,p_NF_db`.
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

/// Optimization trace CSV: `eval_idx,d_1_mm,...,d_NT_mm,objective`.
void write_trace_csv(const std::vector<TracePoint>& trace, const std::string& path);

/// Training curve CSV: `epoch,train_rmse,val_rmse`.
void write_history_csv(const std::vector<double>& train_rmse,
                       const std::vector<double>& val_rmse, const std::string& path);

/// Expected-spectrum debug dump: `cond_1,...,cond_NT,f_idx,tau_db`.
void write_tau_csv(const SystemModel& system, const ConditionGrid& grid,
                   const StructureVector& d, const std::string& path);

/// Reads the `p_*_db` columns of a CSV (a dataset file or a bare spectrum
/// table), one power vector per row.
std::vector<ReceivedPowerVector> load_power_vectors_csv(const std::string& path);

}  // namespace metaiot
