#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "superatom/detection.hpp"
#include "superatom/dynamics.hpp"
#include "superatom/ensemble.hpp"
#include "superatom/fitting.hpp"
#include "superatom/spectra.hpp"

// Plot-ready CSV and flat JSON. Every number goes through format_number /
// round_sig (12 significant digits) so reruns are byte-identical.
namespace superatom::io {

using Json = nlohmann::ordered_json;

std::string format_number(double v);
double round_sig(double v);
/// Rounded number, or null for non-finite values.
Json number(double v);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header);
    CsvWriter& row(const std::vector<double>& values);
    CsvWriter& row(const std::vector<std::string>& cells);
    const std::string& str() const { return out_; }

private:
    std::string out_;
    std::size_t columns_;
};

/// Header `delta_MHz,transmission,reflectivity,phase_rad`.
std::string spectrum_csv(const spectra::SpectrumTable& table);

/// Header `shot,prepared,jump_time_us,bin_start_us,value`, one row per bin.
std::string batch_csv(const std::vector<dynamics::ShotRecord>& records);

/// Header `x_um,y_um,z_um`.
std::string cloud_csv(const ensemble::CloudSample& cloud);

struct HistogramRow {
    double n_or_x = 0.0;
    double model_p = 0.0;
    double empirical_p = 0.0;
};
/// Header `n_or_x,model_p,empirical_p`.
std::string histogram_csv(const std::vector<HistogramRow>& rows);

Json to_json(const SystemParams& p);
Json to_json(const ensemble::BlockadeStats& s);
Json to_json(const detection::ErrorRates& r);
Json to_json(const detection::CountModel& m);
Json to_json(const detection::QuadratureModel& m);
Json to_json(const fitting::FitResult& r);

std::string dump(const Json& j);

}  // namespace superatom::io
