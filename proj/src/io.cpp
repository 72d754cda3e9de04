#include "delaykit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace delaykit {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json OutputMeta::to_json() const {
    nlohmann::json j;
    j["schema"] = kSchema;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    return j;
}

std::string OutputMeta::csv_comment_block() const {
    std::string out;
    out += "# schema: ";
    out += kSchema;
    out += "\n# version: ";
    out += kVersion;
    out += "\n# command: ";
    out += command;
    out += "\n# config: ";
    out += config.dump();
    out += "\n# seed: ";
    out += std::to_string(seed);
    out += "\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string series_to_csv(const TimeSeries& ts, const OutputMeta& meta) {
    std::string out = meta.csv_comment_block();
    out += "value\n";
    for (const double v : ts.values) {
        out += format_double(v);
        out += "\n";
    }
    return out;
}

std::string profile_to_csv(const LagProfile& profile, const OutputMeta& meta) {
    std::string out = meta.csv_comment_block();
    out += "m,tau,value,n_used,gap_flag\n";
    const auto m_it = profile.params.find("m");
    const std::string m_field = m_it == profile.params.end() ? "" : m_it->second;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out += m_field;
        out += ",";
        out += std::to_string(profile.taus[i]);
        out += ",";
        out += format_double(profile.values[i]);
        out += ",";
        out += std::to_string(profile.n_used[i]);
        out += ",";
        out += profile.gap[i] ? "1" : "0";
        out += "\n";
    }
    return out;
}

std::string grid_to_csv(const GridProfile& grid, const OutputMeta& meta) {
    std::string out = meta.csv_comment_block();
    out += "m,tau,value,n_used,gap_flag\n";
    for (std::size_t mi = 0; mi < grid.ms.size(); ++mi) {
        for (std::size_t ti = 0; ti < grid.taus.size(); ++ti) {
            const std::size_t c = grid.index(mi, ti);
            out += std::to_string(grid.ms[mi]);
            out += ",";
            out += std::to_string(grid.taus[ti]);
            out += ",";
            out += format_double(grid.values[c]);
            out += ",";
            out += std::to_string(grid.n_used[c]);
            out += ",";
            out += grid.gap[c] ? "1" : "0";
            out += "\n";
        }
    }
    return out;
}

std::string spectrum_to_csv(const SignificanceSpectrum& spec, const OutputMeta& meta) {
    std::string out = meta.csv_comment_block();
    out += "tau,p_mean,s_mean,s_std,alpha_mean,gamma_mean,n_valid\n";
    for (std::size_t i = 0; i < spec.size(); ++i) {
        out += std::to_string(spec.taus[i]);
        out += ",";
        out += format_double(spec.p_mean[i]);
        out += ",";
        out += format_double(spec.s_mean[i]);
        out += ",";
        out += format_double(spec.s_std[i]);
        out += ",";
        out += format_double(spec.alpha_mean[i]);
        out += ",";
        out += format_double(spec.gamma_mean[i]);
        out += ",";
        out += std::to_string(spec.n_valid[i]);
        out += "\n";
    }
    return out;
}

std::string recurrence_to_csv(const RecurrenceMatrix& rm, const OutputMeta& meta) {
    std::string out = meta.csv_comment_block();
    out += "row,bits\n";
    std::string row;
    for (std::size_t i = 0; i < rm.size; ++i) {
        row.clear();
        for (std::size_t j = 0; j < rm.size; ++j) row += rm.at(i, j) ? '1' : '0';
        out += std::to_string(i);
        out += ",";
        out += row;
        out += "\n";
    }
    return out;
}

namespace {

nlohmann::json double_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return nullptr;
    return v;
}

}  // namespace

nlohmann::json profile_to_json(const LagProfile& profile) {
    nlohmann::json j;
    j["kind"] = "lag_profile";
    j["method"] = profile.method;
    j["taus"] = profile.taus;
    nlohmann::json values = nlohmann::json::array();
    for (const double v : profile.values) values.push_back(double_or_null(v));
    j["values"] = values;
    j["n_used"] = profile.n_used;
    j["gap"] = profile.gap;
    j["params"] = profile.params;
    return j;
}

nlohmann::json grid_to_json(const GridProfile& grid) {
    nlohmann::json j;
    j["kind"] = "grid_profile";
    j["method"] = grid.method;
    j["ms"] = grid.ms;
    j["taus"] = grid.taus;
    nlohmann::json values = nlohmann::json::array();
    for (const double v : grid.values) values.push_back(double_or_null(v));
    j["values"] = values;
    j["n_used"] = grid.n_used;
    j["gap"] = grid.gap;
    j["params"] = grid.params;
    return j;
}

nlohmann::json spectrum_to_json(const SignificanceSpectrum& spec) {
    nlohmann::json j;
    j["kind"] = "significance_spectrum";
    j["taus"] = spec.taus;
    auto arr = [](const std::vector<double>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const double x : v) a.push_back(double_or_null(x));
        return a;
    };
    j["p_mean"] = arr(spec.p_mean);
    j["s_mean"] = arr(spec.s_mean);
    j["s_std"] = arr(spec.s_std);
    j["alpha_mean"] = arr(spec.alpha_mean);
    j["gamma_mean"] = arr(spec.gamma_mean);
    j["n_valid"] = spec.n_valid;
    j["params"] = spec.params;
    return j;
}

nlohmann::json sequence_to_json(const LagSequence& seq) {
    nlohmann::json j;
    j["kind"] = "lag_sequence";
    j["method"] = seq.method;
    j["lags"] = seq.lags;
    j["scores"] = seq.scores;
    j["terminated_by"] = to_string(seq.terminated_by);
    j["params"] = seq.params;
    return j;
}

nlohmann::json continuity_to_json(const ContinuityProfile& profile) {
    nlohmann::json j;
    j["kind"] = "continuity_profile";
    j["taus"] = profile.taus;
    nlohmann::json values = nlohmann::json::array();
    for (const double v : profile.eps_star) values.push_back(double_or_null(v));
    j["eps_star"] = values;
    j["n_used"] = profile.n_used;
    j["gap"] = profile.gap;
    j["delta_points"] = profile.delta_points;
    j["alpha"] = profile.alpha;
    return j;
}

nlohmann::json diagram_to_json(const PersistenceDiagram& diagram) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : diagram.features) {
        nlohmann::json jf;
        jf["dim"] = f.dim;
        jf["birth"] = f.birth;
        jf["death"] = std::isinf(f.death) ? nlohmann::json(nullptr) : nlohmann::json(f.death);
        jf["representative"] = f.representative;
        features.push_back(std::move(jf));
    }
    return nlohmann::json{{"kind", "persistence_diagram"}, {"features", features}};
}

nlohmann::json report_to_json(const PredictionReport& report) {
    nlohmann::json j;
    j["kind"] = "prediction_report";
    j["horizon"] = report.horizon;
    j["method_label"] = report.method_label;
    j["mean"] = report.mean;
    j["median"] = report.median;
    j["errors"] = report.errors;
    return j;
}

std::string wrap_result(const OutputMeta& meta, nlohmann::json result) {
    nlohmann::json j = meta.to_json();
    j["result"] = std::move(result);
    return j.dump(2) + "\n";
}

}  // namespace delaykit
