#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mwtrap/fields.hpp"
#include "mwtrap/fitting.hpp"

namespace mwtrap::io {

// Touchstone v1 one-port files (.s1p). Formats RI, MA, and DB are accepted;
// DB files produce dB-magnitude traces, the others complex traces.
fitting::FrequencyTrace read_touchstone_s1p(const std::filesystem::path& path);

enum class TouchstoneFormat { RI, MA, DB };
void write_touchstone_s1p(const std::filesystem::path& path,
                          const fitting::FrequencyTrace& trace,
                          TouchstoneFormat format = TouchstoneFormat::RI);

// CSV `freq_hz,s11_db` -> dB-magnitude trace.
fitting::FrequencyTrace read_s11_csv(const std::filesystem::path& path);
void write_s11_csv(const std::filesystem::path& path, const fitting::FrequencyTrace& trace);

// CSV `x_um,bpar_uT,power_w`; every row must carry the same power.
fitting::FieldProfile read_profile_csv(const std::filesystem::path& path);
void write_profile_csv(const std::filesystem::path& path,
                       const fitting::FieldProfile& profile);

// CSV `temp_k,rate_q_per_s`.
std::vector<std::pair<double, double>> read_heating_csv(const std::filesystem::path& path);

// CSV `temp_k,q_int`.
std::vector<std::pair<double, double>> read_qint_csv(const std::filesystem::path& path);

// CSV `temp_k,q_tot,q_ext,q_int` (q_int may be empty).
std::vector<std::pair<double, lumped::ResonatorParams>> read_params_csv(
    const std::filesystem::path& path);

// Wire layout JSON:
// {name, power_watts, segments: [{start: [x,y,z], end: [x,y,z], current: {re, im}}]}
fields::WireLayout read_layout_json(const std::filesystem::path& path);
void write_layout_json(const std::filesystem::path& path, const fields::WireLayout& layout);

// Field map CSV with header `x_m,y_m,z_m,Bpar_re_T,Bpar_im_T,Bperp_T`.
// Reading restores positions, the parallel phasor, and the perpendicular
// magnitude (stored on the y component with zero z).
void write_field_map_csv(const std::filesystem::path& path,
                         const std::vector<fields::FieldSample>& samples);
std::vector<fields::FieldSample> read_field_map_csv(const std::filesystem::path& path);

// Whole-file helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mwtrap::io
