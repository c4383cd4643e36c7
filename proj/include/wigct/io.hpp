#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wigct/bolometry.hpp"
#include "wigct/mlp.hpp"
#include "wigct/tomography.hpp"
#include "wigct/voigt.hpp"
#include "wigct/wigner.hpp"

namespace wigct {

using Json = nlohmann::ordered_json;

// --- JSON object mappings ---------------------------------------------------

Json params_to_json(const GaussianParams& p);
GaussianParams params_from_json(const Json& j);

Json chain_to_json(const ChainConfig& c);
ChainConfig chain_from_json(const Json& j);

Json calibration_to_json(const CalibrationCurves& c);
CalibrationCurves calibration_from_json(const Json& j);

Json voigt_to_json(const VoigtParams& p);
VoigtParams voigt_from_json(const Json& j);

// --- Files -------------------------------------------------------------------

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Spectrum CSV: header "f_hz,re_s11,im_s11", one row per frequency point.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

/// Wigner grid CSV: "M,extent" header pair, then M rows of M values
/// (row i = x index, column j = p index).
void write_grid_csv(const std::filesystem::path& path, const WignerGrid& grid);
WignerGrid read_grid_csv(const std::filesystem::path& path);

/// 16-bit binary PGM, min/max scaled; the scale goes to "<path>.json".
void write_grid_pgm16(const std::filesystem::path& path, const WignerGrid& grid);

/// Sinogram CSV: "mode,...", "bins,...", "range,..." header lines, then one
/// row per angle: angle_deg followed by bins samples (sampled mode) or
/// mean,variance (gaussian mode).
void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& s);
Sinogram read_sinogram_csv(const std::filesystem::path& path);

/// Calibration samples CSV: header "mu_hz,sigma2,n_mean,n_var".
std::vector<CalibrationSample> read_calibration_samples_csv(const std::filesystem::path& path);
void write_calibration_samples_csv(const std::filesystem::path& path,
                                   const std::vector<CalibrationSample>& samples);

/// Versioned model file: dims, base64 little-endian doubles, normalization
/// constants, training config hash.
void write_model_json(const std::filesystem::path& path, const NNModel& model);
NNModel read_model_json(const std::filesystem::path& path);

/// Dataset record file: one JSON header line, then raw little-endian doubles,
/// (2N features + 5 labels) per record.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

std::string base64_encode(const unsigned char* data, size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

} // namespace wigct
