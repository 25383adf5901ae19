#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "levlab/csv.hpp"
#include "levlab/errors.hpp"
#include "levlab/run.hpp"
#include "levlab/serialize.hpp"
#include "levlab/svg.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw levlab::ConfigError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

levlab::ModeSelector parse_selector(const std::string& text) {
    if (text.rfind("omega:", 0) == 0) return levlab::ModeSelector::nearest(std::stod(text.substr(6)));
    return levlab::ModeSelector::by_index(std::stoi(text));
}

int run_cmd(const std::string& config_path, const std::string& out_dir, long long seed, bool verbose) {
    levlab::RunConfig cfg = levlab::parse_config(slurp(config_path), config_path);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (seed >= 0) cfg.campaign.seed = static_cast<std::uint64_t>(seed);
    if (verbose)
        std::cerr << "levlab: experiment " << cfg.experiment << " -> " << cfg.output.directory << "\n";
    levlab::ResultBundle bundle = levlab::run(cfg);
    if (verbose)
        for (const auto& a : bundle.artifacts) std::cerr << "  wrote " << a.file << " (" << a.sha256 << ")\n";
    std::cout << cfg.output.directory << "/result.json\n";
    return 0;
}

int ingest_cmd(const std::string& manifest, const std::string& selector, int n_modes,
               const std::string& method, const std::string& out_path) {
    levlab::Campaign c = levlab::read_campaign(manifest);
    levlab::RetrieveOptions opt;
    opt.n_modes = n_modes;
    if (method == "peak") opt.method = levlab::RetrieveOptions::Method::PeakOnly;
    else if (method == "fit") opt.method = levlab::RetrieveOptions::Method::FitOnly;
    else if (method != "auto") throw levlab::ConfigError("--method must be auto, peak, or fit");
    levlab::RetrievedMode mode = levlab::retrieve_eigvec(c, parse_selector(selector), opt);
    const std::string text = levlab::retrieved_mode_to_json(mode);
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << text;
        std::cout << out_path << "\n";
    }
    return 0;
}

int plot_cmd(const std::string& csv_path, const std::string& kind_name, const std::string& out_path) {
    levlab::PlotKind kind;
    if (kind_name == "line") kind = levlab::PlotKind::Line;
    else if (kind_name == "scatter") kind = levlab::PlotKind::Scatter;
    else if (kind_name == "complex-plane") kind = levlab::PlotKind::ComplexPlane;
    else throw levlab::ConfigError("--kind must be line, scatter, or complex-plane");

    levlab::Table t = levlab::table_from_csv(slurp(csv_path), csv_path);
    if (t.columns.size() < 2) throw levlab::SchemaMismatch(csv_path + ": need at least two columns");
    std::vector<levlab::Series> series;
    if (kind == levlab::PlotKind::ComplexPlane) {
        for (std::size_t c = 1; c + 1 < t.columns.size(); c += 2) {
            levlab::Series s{t.columns[c] + "/" + t.columns[c + 1], {}, {}};
            for (const auto& row : t.rows) {
                s.x.push_back(row[c]);
                s.y.push_back(row[c + 1]);
            }
            series.push_back(std::move(s));
        }
    } else {
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
            levlab::Series s{t.columns[c], {}, {}};
            for (const auto& row : t.rows) {
                s.x.push_back(row[0]);
                s.y.push_back(row[c]);
            }
            series.push_back(std::move(s));
        }
    }
    const std::string svg = levlab::render_svg(series, kind, csv_path, t.columns[0], "");
    std::string target = out_path;
    if (target.empty()) {
        target = csv_path;
        const auto dot = target.rfind('.');
        if (dot != std::string::npos) target.resize(dot);
        target += ".svg";
    }
    std::ofstream out(target, std::ios::binary);
    out << svg;
    std::cout << target << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"levlab: steady-state response simulation and eigenvector retrieval for non-Hermitian systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long long seed = -1;
    bool verbose = false;
    CLI::App* run = app.add_subcommand("run", "execute an experiment described by a config file");
    run->add_option("config", config_path, "config JSON path")->required();
    run->add_option("--out-dir", out_dir, "override the output directory");
    run->add_option("--seed", seed, "override the campaign noise seed");
    run->add_flag("--verbose", verbose, "progress to stderr");

    std::string manifest, selector = "0", method = "auto", ingest_out;
    int n_modes = 0;
    CLI::App* ingest = app.add_subcommand("ingest", "retrieve an eigenvector from external spectrum CSV files");
    ingest->add_option("--manifest", manifest, "campaign manifest JSON")->required();
    ingest->add_option("--retrieve", selector, "mode selector: index or omega:<value>")->required();
    ingest->add_option("--n-modes", n_modes, "modes for the fit (0: campaign size)");
    ingest->add_option("--method", method, "auto|peak|fit");
    ingest->add_option("--out", ingest_out, "output JSON path ('-' for stdout)");

    std::string csv_path, kind = "line", plot_out;
    CLI::App* plot = app.add_subcommand("plot", "render a CSV table to SVG");
    plot->add_option("csv", csv_path, "input CSV path")->required();
    plot->add_option("--kind", kind, "line|scatter|complex-plane");
    plot->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return run_cmd(config_path, out_dir, seed, verbose);
        if (ingest->parsed()) return ingest_cmd(manifest, selector, n_modes, method, ingest_out);
        if (plot->parsed()) return plot_cmd(csv_path, kind, plot_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const levlab::ConfigError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const levlab::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
