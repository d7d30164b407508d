#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/mac.hpp"
#include "cbfsim/phy.hpp"
#include "cbfsim/spatial_reuse.hpp"
#include "cbfsim/units.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbfsim
{

struct DeploymentConfig
{
    std::vector<Position3D> ap_positions{{10.0, 10.0, 3.0}, {25.0, 10.0, 3.0}};
    /// Room extent in metres (x, y, z).
    Position3D room{35.0, 20.0, 3.0};
    double sta_height{1.0};
    int n_broadband{16};
    int n_ar{8};
};

struct TrafficConfig
{
    double ftp3_offered_mbps{100.0};
    std::size_t ftp3_size_bytes{500000};
    double ar_period_ms{10.0};
    std::size_t ar_size_bytes{32};
};

struct RadioConfig
{
    ChannelParams channel{};
    PhyParams phy{};
    /// Empty: thresholds derived from the Shannon gap.
    std::vector<double> mcs_thresholds_db;
    int ap_antennas{8};
    PowerDbm ap_power{24.0};
    PowerDbm sta_power{15.0};
    GainDb nf_ap{7.0};
    GainDb nf_sta{9.0};
};

struct AccessConfig
{
    MacTiming timing{};
    /// Per-class permission for STAs to contend for single-user uplink.
    bool edca_broadband{false};
    bool edca_ar{true};
};

struct ReuseConfig
{
    SpatialReuseParams params{};
    /// Only AR-class OBSS STAs take spatial-reuse opportunities.
    bool ar_only{true};
};

struct RunConfig
{
    DeploymentConfig deployment{};
    TrafficConfig traffic{};
    RadioConfig radio{};
    AccessConfig mac{};
    ReuseConfig sr{};
    double duration_s{30.0};
    double warmup_s{1.0};
};

/// Error raised for invalid configuration; names the offending key.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_{std::move(key)}
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Parses flat `key = value` text ('#' starts a comment). Every mandatory
/// key must be present; unknown keys, malformed values and out-of-range
/// values throw ConfigError.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first out-of-range field.
void validate_config(const RunConfig& cfg);

/// Canonical `key = value` rendering of every field, in schema order.
std::string render_config(const RunConfig& cfg);

/// FNV-1a hash of render_config().
std::uint64_t config_hash(const RunConfig& cfg);

/// Keys that must appear in a config file.
std::vector<std::string> mandatory_config_keys();

} // namespace cbfsim
