#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "delaykit/lag_nonuniform.hpp"
#include "delaykit/persistence.hpp"
#include "delaykit/predictor.hpp"
#include "delaykit/profiles.hpp"
#include "delaykit/series.hpp"
#include "delaykit/stops.hpp"

namespace delaykit {

inline constexpr const char* kSchema = "delaykit/1";
inline constexpr const char* kVersion = "1.0.0";

/// Shortest round-trip decimal for doubles; "nan"/"inf"/"-inf" spelled out.
std::string format_double(double v);

/// Reproducibility header embedded in every output: schema, tool version,
/// the semantic run configuration and the master seed. Thread counts and
/// timings are execution details and stay out of it.
struct OutputMeta {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    std::string csv_comment_block() const;
};

void write_text_file(const std::string& path, const std::string& content);

std::string series_to_csv(const TimeSeries& ts, const OutputMeta& meta);
std::string profile_to_csv(const LagProfile& profile, const OutputMeta& meta);
std::string grid_to_csv(const GridProfile& grid, const OutputMeta& meta);
std::string spectrum_to_csv(const SignificanceSpectrum& spec, const OutputMeta& meta);
std::string recurrence_to_csv(const RecurrenceMatrix& rm, const OutputMeta& meta);

nlohmann::json profile_to_json(const LagProfile& profile);
nlohmann::json grid_to_json(const GridProfile& grid);
nlohmann::json spectrum_to_json(const SignificanceSpectrum& spec);
nlohmann::json sequence_to_json(const LagSequence& seq);
nlohmann::json continuity_to_json(const ContinuityProfile& profile);
/// Infinite deaths serialize as null.
nlohmann::json diagram_to_json(const PersistenceDiagram& diagram);
nlohmann::json report_to_json(const PredictionReport& report);

/// meta + payload under "result", dumped with a trailing newline.
std::string wrap_result(const OutputMeta& meta, nlohmann::json result);

}  // namespace delaykit
