#include "blrain/reference_sets.hpp"

#include <cmath>
#include <string>

#include "blrain/error.hpp"

namespace blrain::reference {

namespace {

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

// lambda, mu_x, beta, gamma, eta | MSIT MSD MCIT MCD MCS
constexpr TableRow kBlrp[] = {
    {1, {0.022, 0.960, 5.422, 0.231, 5.975}, {45.0, 4.3, 11.1, 10.0, 24.5, kNone}},
    {2, {0.021, 0.942, 5.142, 0.260, 5.310}, {47.1, 3.8, 11.7, 11.3, 20.7, kNone}},
    {3, {0.021, 1.334, 4.478, 0.262, 7.061}, {47.2, 3.8, 13.4, 8.5, 18.1, kNone}},
    {4, {0.022, 1.944, 3.829, 0.271, 8.387}, {45.7, 3.7, 15.7, 7.2, 15.1, kNone}},
    {5, {0.023, 3.662, 3.157, 0.370, 9.239}, {44.3, 2.7, 19.0, 6.5, 9.5, kNone}},
    {6, {0.025, 6.431, 2.694, 0.413, 11.154}, {39.2, 2.4, 22.3, 5.4, 7.5, kNone}},
    {7, {0.023, 10.136, 1.672, 0.356, 12.011}, {43.5, 2.8, 35.9, 5.0, 5.7, kNone}},
    {8, {0.023, 7.072, 2.411, 0.408, 11.066}, {43.4, 2.5, 24.9, 5.4, 6.9, kNone}},
    {9, {0.021, 5.306, 2.945, 0.379, 10.470}, {47.1, 2.6, 20.4, 5.7, 8.8, kNone}},
    {10, {0.019, 2.209, 4.071, 0.275, 8.104}, {53.3, 3.6, 14.7, 7.4, 15.8, kNone}},
    {11, {0.023, 1.207, 5.884, 0.276, 6.741}, {42.8, 3.6, 10.2, 8.9, 22.3, kNone}},
    {12, {0.024, 1.059, 5.475, 0.265, 5.906}, {41.1, 3.8, 11.0, 10.2, 21.7, kNone}},
};
constexpr int kBlrpDecimals[] = {3, 3, 3, 3, 3};

// lambda, mu_x, beta, gamma, eta, xi | MSIT MSD MCIT MCD MCS MPC
constexpr TableRow kBlip[] = {
    {1, {0.023, 0.013, 0.220, 0.078, 1.166, 124.9}, {43.0, 12.9, 272.2, 51.5, 2.8, 100}},
    {2, {0.025, 0.008, 1.387, 0.239, 2.547, 182.7}, {39.7, 4.2, 43.3, 23.6, 5.8, 66}},
    {3, {0.022, 0.020, 0.188, 0.079, 1.393, 97.8}, {44.7, 12.7, 319.8, 43.1, 2.4, 66}},
    {4, {0.024, 0.033, 0.209, 0.094, 1.684, 77.3}, {41.0, 10.7, 287.6, 35.6, 2.2, 43}},
    {5, {0.028, 0.038, 1.452, 0.420, 5.696, 144.1}, {35.8, 2.4, 41.3, 10.5, 3.5, 24}},
    {6, {0.033, 0.086, 1.237, 0.488, 6.101, 100.8}, {30.0, 2.1, 48.5, 9.8, 2.5, 15}},
    {7, {0.032, 0.141, 0.707, 0.423, 6.558, 100.9}, {30.8, 2.4, 84.9, 9.1, 1.7, 14}},
    {8, {0.031, 0.095, 1.042, 0.477, 6.023, 103.2}, {32.2, 2.1, 57.6, 10.0, 2.2, 16}},
    {9, {0.027, 0.068, 1.355, 0.442, 5.826, 105.3}, {37.1, 2.3, 44.3, 10.3, 3.1, 17}},
    {10, {0.021, 0.022, 1.652, 0.282, 4.758, 145.8}, {46.5, 3.6, 36.3, 12.6, 5.9, 29}},
    {11, {0.029, 0.018, 0.237, 0.107, 1.208, 107.4}, {34.8, 9.4, 253.0, 49.7, 2.2, 82}},
    {12, {0.028, 0.014, 0.213, 0.093, 1.183, 129.4}, {35.2, 10.8, 281.4, 50.7, 2.3, 101}},
};
constexpr int kBlipDecimals[] = {3, 3, 3, 3, 3, 1};

// lambda, mu_x, alpha, alpha/nu, kappa, phi, omega | MSIT MSD MCIT MCD MCS MPC
constexpr TableRow kBlipr[] = {
    {1, {0.024, 0.001, 2.147, 4.591, 1.027, 0.046, 173}, {42.3, 8.9, 23.8, 24.5, 22.4, 165}},
    {2, {0.023, 0.001, 3.680, 4.394, 1.096, 0.058, 187}, {42.6, 5.4, 17.1, 18.8, 18.8, 177}},
    {3, {0.023, 0.001, 2.000, 5.525, 0.712, 0.043, 204}, {44.1, 8.3, 30.5, 21.7, 16.4, 195}},
    {4, {0.024, 0.001, 2.000, 6.740, 0.517, 0.039, 248}, {41.7, 7.7, 34.4, 17.8, 13.4, 239}},
    {5, {0.027, 0.001, 2.000, 7.760, 0.437, 0.054, 413}, {37.3, 4.8, 35.4, 15.5, 8.1, 392}},
    {6, {0.031, 0.001, 2.000, 9.607, 0.310, 0.050, 606}, {32.1, 4.1, 40.3, 12.5, 6.2, 576}},
    {7, {0.030, 0.001, 2.000, 10.413, 0.167, 0.039, 908}, {33.4, 4.9, 69.2, 11.5, 4.2, 874}},
    {8, {0.029, 0.001, 2.000, 9.683, 0.293, 0.053, 663}, {34.4, 3.9, 42.2, 12.4, 5.6, 630}},
    {9, {0.025, 0.001, 2.000, 8.901, 0.345, 0.047, 534}, {40.1, 4.8, 39.1, 13.5, 7.4, 510}},
    {10, {0.021, 0.001, 2.126, 6.698, 0.580, 0.041, 286}, {48.4, 6.9, 29.2, 16.9, 14.3, 274}},
    {11, {0.025, 0.001, 2.000, 5.389, 1.055, 0.049, 182}, {39.9, 7.6, 21.1, 22.3, 21.5, 173}},
    {12, {0.026, 0.001, 2.035, 4.584, 1.093, 0.054, 188}, {37.9, 7.9, 23.6, 25.7, 20.1, 179}},
};
constexpr int kBliprDecimals[] = {3, 3, 3, 3, 3, 3, 0};

// lambda, iota, alpha, alpha/nu, kappa, phi | MSIT MSD MCIT MCD MCS
constexpr TableRow kBlrprX[] = {
    {1, {0.022, 0.164, 2.075, 5.014, 0.996, 0.042}, {46.2, 9.1, 23.2, 23.1, 24.6, kNone}},
    {2, {0.021, 0.177, 3.451, 4.818, 1.063, 0.053}, {47.5, 5.5, 16.5, 17.5, 20.9, kNone}},
    {3, {0.020, 0.196, 2.000, 5.910, 0.695, 0.041}, {48.8, 8.3, 29.2, 20.3, 18.0, kNone}},
    {4, {0.022, 0.241, 2.000, 7.083, 0.509, 0.037}, {46.5, 7.6, 33.3, 16.9, 14.8, kNone}},
    {5, {0.023, 0.400, 2.000, 8.127, 0.434, 0.052}, {43.9, 4.7, 34.0, 14.8, 9.4, kNone}},
    {6, {0.026, 0.586, 2.000, 10.015, 0.311, 0.049}, {38.9, 4.1, 38.5, 12.0, 7.3, kNone}},
    {7, {0.024, 0.879, 2.000, 10.777, 0.173, 0.040}, {42.3, 4.6, 64.3, 11.1, 5.3, kNone}},
    {8, {0.024, 0.639, 2.000, 10.109, 0.299, 0.052}, {42.3, 3.8, 39.7, 11.9, 6.8, kNone}},
    {9, {0.021, 0.518, 2.000, 9.257, 0.343, 0.045}, {47.4, 4.8, 37.7, 13.0, 8.6, kNone}},
    {10, {0.019, 0.277, 2.051, 7.006, 0.575, 0.039}, {53.8, 7.1, 29.1, 16.7, 15.7, kNone}},
    {11, {0.023, 0.175, 2.000, 5.832, 1.018, 0.045}, {43.9, 7.6, 20.2, 20.6, 23.5, kNone}},
    {12, {0.024, 0.179, 2.000, 5.018, 1.056, 0.050}, {42.0, 8.0, 22.6, 23.9, 22.2, kNone}},
};
constexpr int kBlrprXDecimals[] = {3, 3, 3, 3, 3, 3};

}  // namespace

const Table& blrp_table() {
  static const Table t{Variant::BLRP, kBlrp, kBlrpDecimals, 1};
  return t;
}
const Table& blip_table() {
  static const Table t{Variant::BLIP, kBlip, kBlipDecimals, 1};
  return t;
}
const Table& blipr_table() {
  static const Table t{Variant::BLIPR, kBlipr, kBliprDecimals, 1};
  return t;
}
const Table& blrprx_table() {
  static const Table t{Variant::BLRPR_X, kBlrprX, kBlrprXDecimals, 1};
  return t;
}

ModelParams to_params(Variant v, std::span<const double> in) {
  const std::size_t n = field_names(v).size();
  std::vector<double> x(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n));
  if (is_random_eta(v)) {
    // printed column is the mean of eta, alpha / nu
    x[3] = x[2] / x[3];
  }
  return make_params(v, x);
}

ModelParams row_params(const Table& t, int month) {
  for (const auto& row : t.rows) {
    if (row.month == month) return to_params(t.variant, row.inputs);
  }
  throw Error(ErrorCode::InvalidArgument, "month", "no reference row for month " + std::to_string(month));
}

}  // namespace blrain::reference
