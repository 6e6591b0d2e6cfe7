#include "superatom/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "superatom/units.hpp"

namespace superatom::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round_sig(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_sig(v);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write `" + tmp.string() + "`");
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("failed writing `" + tmp.string() + "`");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot move output into place at `" + path.string() + "`: " + ec.message());
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    return row(cells);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CsvWriter: wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ += ',';
        out_ += cells[i];
    }
    out_ += '\n';
    return *this;
}

std::string spectrum_csv(const spectra::SpectrumTable& table) {
    CsvWriter csv({"delta_MHz", "transmission", "reflectivity", "phase_rad"});
    for (const auto& r : table)
        csv.row(std::vector<double>{units::mhz_from_angular(r.delta), r.transmission, r.reflectivity, r.phase});
    return csv.str();
}

std::string batch_csv(const std::vector<dynamics::ShotRecord>& records) {
    CsvWriter csv({"shot", "prepared", "jump_time_us", "bin_start_us", "value"});
    for (std::size_t s = 0; s < records.size(); ++s) {
        const auto& rec = records[s];
        const std::string prepared = rec.prepared == dynamics::State::rydberg ? "R" : "G";
        const std::string jump = rec.jump_time ? format_number(*rec.jump_time) : "";
        for (const auto& b : rec.bins)
            csv.row(std::vector<std::string>{std::to_string(s), prepared, jump, format_number(b.start),
                                             format_number(b.value)});
    }
    return csv.str();
}

std::string cloud_csv(const ensemble::CloudSample& cloud) {
    CsvWriter csv({"x_um", "y_um", "z_um"});
    for (const auto& r : cloud.positions) csv.row(std::vector<double>{r[0], r[1], r[2]});
    return csv.str();
}

std::string histogram_csv(const std::vector<HistogramRow>& rows) {
    CsvWriter csv({"n_or_x", "model_p", "empirical_p"});
    for (const auto& r : rows) csv.row(std::vector<double>{r.n_or_x, r.model_p, r.empirical_p});
    return csv.str();
}

Json to_json(const SystemParams& p) {
    using namespace units;
    Json j;
    j["g_MHz"] = number(mhz_from_angular(p.g));
    j["kappa_MHz"] = number(mhz_from_angular(p.kappa));
    j["kappa0_MHz"] = number(mhz_from_angular(p.kappa0));
    j["gamma_MHz"] = number(mhz_from_angular(p.gamma));
    j["gamma_r_MHz"] = number(mhz_from_angular(p.gamma_r));
    j["omega_c_MHz"] = number(mhz_from_angular(p.omega_c));
    j["omega_d2_MHz"] = number(mhz_from_angular(p.omega_d2));
    j["omega_109s_MHz"] = number(mhz_from_angular(p.omega_109s));
    j["delta_int_MHz"] = number(mhz_from_angular(p.delta_int));
    j["n_atoms"] = p.n_atoms;
    j["sigma_a_um"] = number(p.sigma_a);
    j["c_rr_THzum6"] = number(thz_um6_from_mhz_um6(p.c_rr));
    j["c_rrp_THzum6"] = number(thz_um6_from_mhz_um6(p.c_rrp));
    j["c_rprp_THzum6"] = number(thz_um6_from_mhz_um6(p.c_rprp));
    j["tau_r_us"] = number(p.tau_r);
    j["temperature_uK"] = number(p.temperature);
    j["angle_drive_deg"] = number(deg_from_rad(p.drive_angle));
    j["lambda_d2_nm"] = number(nm_from_wavevector(p.k_d2));
    j["lambda_109s_nm"] = number(nm_from_wavevector(p.k_109s));
    return j;
}

Json to_json(const ensemble::BlockadeStats& s) {
    Json j;
    if (s.fraction_blockaded) {
        j["fraction_blockaded"] = number(*s.fraction_blockaded);
    } else {
        j["fraction_blockaded"] = nullptr;
        j["fraction_note"] = "undefined: the cloud has fewer than two atoms, so there are no pairs";
    }
    j["shift_at_quantile_MHz"] = number(s.shift_at_ref);
    j["mean_neighbors_within"] = number(s.mean_neighbors_within);
    j["pair_count"] = s.pair_count;
    return j;
}

Json to_json(const detection::ErrorRates& r) {
    Json j;
    j["eps_g"] = number(r.eps_g);
    j["eps_r"] = number(r.eps_r);
    j["fidelity"] = number(r.fidelity);
    return j;
}

Json to_json(const detection::CountModel& m) {
    Json j;
    j["t_i_us"] = number(m.t_i);
    j["phi_g_per_us"] = number(m.phi_g);
    j["phi_r_per_us"] = number(m.phi_r);
    j["tau_r_us"] = number(m.tau_r);
    j["eta_r"] = number(m.eta_r);
    return j;
}

Json to_json(const detection::QuadratureModel& m) {
    Json j;
    j["t_i_us"] = number(m.t_i);
    j["phi_per_us"] = number(m.phi);
    j["refl_g"] = number(m.refl_g);
    j["refl_r"] = number(m.refl_r);
    j["tau_r_us"] = number(m.tau_r);
    j["eta_r"] = number(m.eta_r);
    return j;
}

Json to_json(const fitting::FitResult& r) {
    Json j;
    Json params = Json::array();
    for (const auto& p : r.parameters) {
        Json e;
        e["name"] = p.name;
        e["value"] = number(p.value);
        e["error"] = number(p.error);
        e["error_lower"] = number(p.error_lower);
        e["error_upper"] = number(p.error_upper);
        e["at_bound"] = p.at_bound;
        e["fixed"] = p.fixed;
        if (p.bootstrap_error > 0.0) e["bootstrap_error"] = number(p.bootstrap_error);
        params.push_back(e);
    }
    j["parameters"] = params;
    j["objective"] = number(r.objective);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["gradient_norm"] = number(r.gradient_norm);
    j["gradient_tolerance"] = number(r.gradient_tolerance);
    j["warnings"] = r.warnings;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace superatom::io
