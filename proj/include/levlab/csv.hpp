#pragma once

#include <filesystem>
#include <string>

#include "levlab/response.hpp"

namespace levlab {

/// Spectrum CSV schema: header `omega_rad_s,re_amp,im_amp,source_idx,probe_idx`,
/// one row per grid point, 17 significant digits (bit-exact round trip).
std::string spectrum_to_csv(const ResponseSpectrum& s);
ResponseSpectrum spectrum_from_csv(const std::string& text, const std::string& origin = "<string>");

/// Write one CSV per spectrum plus a JSON manifest {mode, fixed_idx, files[]}.
/// Returns the written file names (manifest last).
std::vector<std::string> write_campaign(const Campaign& c, const std::filesystem::path& dir,
                                        const std::string& stem);

/// Rebuild a campaign from a manifest; SchemaMismatch on any deviation.
Campaign read_campaign(const std::filesystem::path& manifest_path);

/// Generic numeric table for plotting.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string table_to_csv(const Table& t);
Table table_from_csv(const std::string& text, const std::string& origin = "<string>");

}  // namespace levlab
