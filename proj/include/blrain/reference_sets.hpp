#pragma once

#include <array>
#include <optional>
#include <span>

#include "blrain/model.hpp"

namespace blrain::reference {

/// One month of a published monthly parameter table, exactly as printed:
/// `inputs` are the table's parameter columns (random-eta tables print the
/// mean eta, alpha/nu, in place of nu), `decimals` their printed precision,
/// and `derived` the MSIT/MSD/MCIT/MCD/MCS/MPC columns (MPC absent for
/// rectangular variants).
struct TableRow {
  int month;
  std::array<double, 7> inputs;
  std::array<double, 6> derived;
};

struct Table {
  Variant variant;
  std::span<const TableRow> rows;
  std::span<const int> decimals;  // per input column
  int derived_decimals;           // MPC is printed as an integer
};

/// Monthly sets fitted to a 69-year record of 5-minute rainfall (central
/// Europe). BLIPR rows were fitted with common within-cell pulse depths and
/// mu_x held at 0.001; BLIPR and BLRPR_X with alpha > 2.
const Table& blrp_table();
const Table& blip_table();
const Table& blipr_table();
const Table& blrprx_table();

/// Converts a printed row (with its alpha/nu column) into model parameters.
ModelParams to_params(Variant v, std::span<const double> inputs);
ModelParams row_params(const Table& t, int month);

}  // namespace blrain::reference
