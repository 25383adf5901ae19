#include "levlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

constexpr const char* kHeader = "omega_rad_s,re_amp,im_amp,source_idx,probe_idx";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[noreturn]] void mismatch(const std::string& origin, std::size_t row, std::size_t col, const std::string& why) {
    throw SchemaMismatch(origin + ": row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + why);
}

double parse_double(const std::string& origin, std::size_t row, std::size_t col, const std::string& field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) mismatch(origin, row, col, "not a number: '" + field + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SchemaMismatch("cannot open file: " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

std::string spectrum_to_csv(const ResponseSpectrum& s) {
    std::string out = kHeader;
    out += '\n';
    for (std::size_t i = 0; i < s.omega_grid.size(); ++i) {
        out += fmt17(s.omega_grid[i]);
        out += ',';
        out += fmt17(s.amplitudes[i].real());
        out += ',';
        out += fmt17(s.amplitudes[i].imag());
        out += ',';
        out += std::to_string(s.source_idx);
        out += ',';
        out += std::to_string(s.probe_idx);
        out += '\n';
    }
    return out;
}

ResponseSpectrum spectrum_from_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) mismatch(origin, 1, 1, "header must be '" + std::string(kHeader) + "'");
    ResponseSpectrum s;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 5) mismatch(origin, row, f.size(), "expected 5 fields");
        const double omega = parse_double(origin, row, 1, f[0]);
        const double re = parse_double(origin, row, 2, f[1]);
        const double im = parse_double(origin, row, 3, f[2]);
        const int src = static_cast<int>(parse_double(origin, row, 4, f[3]));
        const int prb = static_cast<int>(parse_double(origin, row, 5, f[4]));
        if (!s.omega_grid.empty()) {
            if (!(omega > s.omega_grid.back())) mismatch(origin, row, 1, "omega grid must be strictly ascending");
            if (src != s.source_idx || prb != s.probe_idx)
                mismatch(origin, row, 4, "source/probe indices must be constant within one spectrum");
        } else {
            s.source_idx = src;
            s.probe_idx = prb;
        }
        s.omega_grid.push_back(omega);
        s.amplitudes.emplace_back(re, im);
    }
    if (s.omega_grid.empty()) throw SchemaMismatch(origin + ": no data rows");
    return s;
}

std::vector<std::string> write_campaign(const Campaign& c, const std::filesystem::path& dir,
                                        const std::string& stem) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    nlohmann::json manifest;
    manifest["mode"] = c.mode == CampaignMode::Lev ? "lev" : "rev";
    manifest["fixed_idx"] = c.fixed_idx;
    manifest["files"] = nlohmann::json::array();
    for (std::size_t k = 0; k < c.spectra.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%02zu.csv", stem.c_str(), k + 1);
        std::ofstream out(dir / name, std::ios::binary);
        out << spectrum_to_csv(c.spectra[k]);
        manifest["files"].push_back(name);
        files.emplace_back(name);
    }
    const std::string mname = stem + "_manifest.json";
    std::ofstream mf(dir / mname, std::ios::binary);
    mf << manifest.dump(2) << '\n';
    files.push_back(mname);
    return files;
}

Campaign read_campaign(const std::filesystem::path& manifest_path) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("mode") || !manifest.contains("fixed_idx") || !manifest.contains("files"))
        throw SchemaMismatch(manifest_path.string() + ": manifest needs keys mode, fixed_idx, files");
    Campaign c;
    const std::string mode = manifest["mode"].get<std::string>();
    if (mode == "lev") c.mode = CampaignMode::Lev;
    else if (mode == "rev") c.mode = CampaignMode::Rev;
    else throw SchemaMismatch(manifest_path.string() + ": mode must be 'lev' or 'rev'");
    c.fixed_idx = manifest["fixed_idx"].get<int>();
    const auto dir = manifest_path.parent_path();
    for (const auto& f : manifest["files"]) {
        const auto path = dir / f.get<std::string>();
        if (!std::filesystem::exists(path))
            throw SchemaMismatch(manifest_path.string() + ": referenced file missing: " + path.string());
        c.spectra.push_back(spectrum_from_csv(read_file(path), path.string()));
    }
    if (c.spectra.empty()) throw SchemaMismatch(manifest_path.string() + ": manifest lists no files");
    for (std::size_t k = 0; k < c.spectra.size(); ++k) {
        const auto& s = c.spectra[k];
        const int moving = c.mode == CampaignMode::Lev ? s.source_idx : s.probe_idx;
        const int fixed = c.mode == CampaignMode::Lev ? s.probe_idx : s.source_idx;
        if (moving != static_cast<int>(k) + 1)
            throw SchemaMismatch(manifest_path.string() + ": spectrum " + std::to_string(k + 1) +
                                 " has moving index " + std::to_string(moving));
        if (fixed != c.fixed_idx)
            throw SchemaMismatch(manifest_path.string() + ": spectrum " + std::to_string(k + 1) +
                                 " does not keep the fixed site " + std::to_string(c.fixed_idx));
    }
    return c;
}

std::string table_to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += fmt17(row[i]);
        }
        out += '\n';
    }
    return out;
}

Table table_from_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Table t;
    for (auto& name : split_fields(line)) t.columns.push_back(std::move(name));
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != t.columns.size()) mismatch(origin, row, f.size(), "column count mismatch");
        std::vector<double> vals(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) vals[i] = parse_double(origin, row, i + 1, f[i]);
        t.rows.push_back(std::move(vals));
    }
    return t;
}

}  // namespace levlab
