#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace railmon {

/// Physical quantities presented to a node's sensors at one instant.
struct StimulusSample {
    double ax_g = 0.0;
    double ay_g = 0.0;
    double az_g = 0.0;
    double temp_c = 0.0;
    double pressure_kpa = 0.0;

    friend bool operator==(const StimulusSample&, const StimulusSample&) = default;
};

/// Time series with zero-order hold. CSV columns:
///   t_s, ax_g, ay_g, az_g, temp_c, pressure_kpa
/// A header row is optional. Rows must have non-decreasing t_s.
class StimulusTrace {
public:
    StimulusTrace() = default;

    static StimulusTrace parse_csv(std::string_view text);
    static StimulusTrace load_csv(const std::filesystem::path& path);

    void push(double t_s, const StimulusSample& s);

    /// Latest row with t_s <= t; the first row before the trace starts; the
    /// zero stimulus when empty.
    StimulusSample sample_at(double t_s) const;

    bool empty() const { return rows_.empty(); }
    std::size_t size() const { return rows_.size(); }

private:
    struct Row {
        double t_s;
        StimulusSample sample;
    };
    std::vector<Row> rows_;
};

}  // namespace railmon
