#include "cbfsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace cbfsim
{

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;)
    {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos)
        {
            return out;
        }
        pos = next + 1;
    }
}

double parse_double(const std::string& key, std::string_view v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    {
        throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

long long parse_int(const std::string& key, std::string_view v)
{
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
    {
        throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, std::string_view v)
{
    if (v == "true" || v == "1")
    {
        return true;
    }
    if (v == "false" || v == "0")
    {
        return false;
    }
    throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

Position3D parse_triple(const std::string& key, std::string_view v)
{
    const auto parts = split(v, ',');
    if (parts.size() != 3)
    {
        throw ConfigError(key, "expected x,y,z");
    }
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

/// 15 significant digits so unit scaling noise does not leak into the rendering.
std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

std::string fmt_triple(const Position3D& p)
{
    return fmt(p.x) + "," + fmt(p.y) + "," + fmt(p.z);
}

struct Field
{
    std::string key;
    bool mandatory;
    std::function<void(RunConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Field num(std::string key, bool mandatory, Member member)
{
    return {std::move(key), mandatory,
            [member](RunConfig& c, const std::string& k, std::string_view v) { member(c) = parse_double(k, v); },
            [member](const RunConfig& c) { return fmt(member(const_cast<RunConfig&>(c))); }};
}

template <class T, class Member>
Field integer(std::string key, bool mandatory, Member member)
{
    return {std::move(key), mandatory,
            [member](RunConfig& c, const std::string& k, std::string_view v) {
                const auto x = parse_int(k, v);
                if (x < 0 && std::is_unsigned_v<T>)
                {
                    throw ConfigError(k, "must be non-negative");
                }
                member(c) = static_cast<T>(x);
            },
            [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Field flag(std::string key, bool mandatory, Member member)
{
    return {std::move(key), mandatory,
            [member](RunConfig& c, const std::string& k, std::string_view v) { member(c) = parse_bool(k, v); },
            [member](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

/// Durations stored as SimTime, exchanged in the given unit (1e3 = us, 1e6 = ms).
template <class Member>
Field duration(std::string key, bool mandatory, double ns_per_unit, Member member)
{
    return {std::move(key), mandatory,
            [member, ns_per_unit](RunConfig& c, const std::string& k, std::string_view v) {
                member(c) = SimTime{static_cast<std::int64_t>(std::llround(parse_double(k, v) * ns_per_unit))};
            },
            [member, ns_per_unit](const RunConfig& c) {
                return fmt(static_cast<double>(member(const_cast<RunConfig&>(c)).count()) / ns_per_unit);
            }};
}

const std::vector<Field>& schema()
{
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back({"deployment.ap_positions", true,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.deployment.ap_positions.clear();
                         for (auto part : split(v, ';'))
                         {
                             c.deployment.ap_positions.push_back(parse_triple(k, part));
                         }
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (const auto& p : c.deployment.ap_positions)
                         {
                             s += (s.empty() ? "" : ";") + fmt_triple(p);
                         }
                         return s;
                     }});
        f.push_back({"deployment.room", true,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.deployment.room = parse_triple(k, v);
                     },
                     [](const RunConfig& c) { return fmt_triple(c.deployment.room); }});
        f.push_back(num("deployment.sta_height_m", false, [](RunConfig& c) -> double& { return c.deployment.sta_height; }));
        f.push_back(integer<int>("deployment.n_broadband", true, [](RunConfig& c) -> int& { return c.deployment.n_broadband; }));
        f.push_back(integer<int>("deployment.n_ar", true, [](RunConfig& c) -> int& { return c.deployment.n_ar; }));

        f.push_back(num("traffic.ftp3.offered_mbps", true, [](RunConfig& c) -> double& { return c.traffic.ftp3_offered_mbps; }));
        f.push_back(integer<std::size_t>("traffic.ftp3.size_bytes", true,
                                         [](RunConfig& c) -> std::size_t& { return c.traffic.ftp3_size_bytes; }));
        f.push_back(num("traffic.ar.period_ms", true, [](RunConfig& c) -> double& { return c.traffic.ar_period_ms; }));
        f.push_back(integer<std::size_t>("traffic.ar.size_bytes", true,
                                         [](RunConfig& c) -> std::size_t& { return c.traffic.ar_size_bytes; }));

        f.push_back(num("channel.fc_ghz", true, [](RunConfig& c) -> double& { return c.radio.channel.fc_ghz; }));
        f.push_back(num("channel.shadowing_los_db", false,
                        [](RunConfig& c) -> double& { return c.radio.channel.shadowing.los_db; }));
        f.push_back(num("channel.shadowing_nlos_db", false,
                        [](RunConfig& c) -> double& { return c.radio.channel.shadowing.nlos_db; }));

        f.push_back({"phy.bandwidth_mhz", true,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.radio.phy.bandwidth_hz = parse_double(k, v) * 1e6;
                     },
                     [](const RunConfig& c) { return fmt(c.radio.phy.bandwidth_hz / 1e6); }});
        f.push_back(integer<int>("phy.data_subcarriers", false, [](RunConfig& c) -> int& { return c.radio.phy.data_subcarriers; }));
        f.push_back({"phy.symbol_us", false,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.radio.phy.symbol_s = parse_double(k, v) * 1e-6;
                     },
                     [](const RunConfig& c) { return fmt(c.radio.phy.symbol_s * 1e6); }});
        f.push_back({"phy.preamble_us", false,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.radio.phy.preamble_s = parse_double(k, v) * 1e-6;
                     },
                     [](const RunConfig& c) { return fmt(c.radio.phy.preamble_s * 1e6); }});
        f.push_back(num("phy.shannon_gap_db", false, [](RunConfig& c) -> double& { return c.radio.phy.shannon_gap.value; }));
        f.push_back({"phy.mcs_thresholds_db", false,
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.radio.mcs_thresholds_db.clear();
                         if (trim(v).empty())
                         {
                             return;
                         }
                         for (auto part : split(v, ','))
                         {
                             c.radio.mcs_thresholds_db.push_back(parse_double(k, part));
                         }
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (double t : c.radio.mcs_thresholds_db)
                         {
                             s += (s.empty() ? "" : ",") + fmt(t);
                         }
                         return s;
                     }});
        f.push_back(integer<int>("phy.ap_antennas", true, [](RunConfig& c) -> int& { return c.radio.ap_antennas; }));

        f.push_back(num("power.ap_dbm", true, [](RunConfig& c) -> double& { return c.radio.ap_power.value; }));
        f.push_back(num("power.sta_dbm", true, [](RunConfig& c) -> double& { return c.radio.sta_power.value; }));
        f.push_back(num("noise.nf_ap_db", true, [](RunConfig& c) -> double& { return c.radio.nf_ap.value; }));
        f.push_back(num("noise.nf_sta_db", true, [](RunConfig& c) -> double& { return c.radio.nf_sta.value; }));

        f.push_back(duration("mac.txop_ms", true, 1e6, [](RunConfig& c) -> SimTime& { return c.mac.timing.txop_limit; }));
        f.push_back(duration("mac.slot_us", false, 1e3, [](RunConfig& c) -> SimTime& { return c.mac.timing.slot; }));
        f.push_back(duration("mac.sifs_us", false, 1e3, [](RunConfig& c) -> SimTime& { return c.mac.timing.sifs; }));
        f.push_back(duration("mac.aifs_us", false, 1e3, [](RunConfig& c) -> SimTime& { return c.mac.timing.aifs; }));
        f.push_back(duration("mac.ack_us", false, 1e3, [](RunConfig& c) -> SimTime& { return c.mac.timing.ack; }));
        f.push_back(duration("mac.trigger_us", false, 1e3, [](RunConfig& c) -> SimTime& { return c.mac.timing.trigger; }));
        f.push_back(integer<int>("mac.cw_min", false, [](RunConfig& c) -> int& { return c.mac.timing.cw_min; }));
        f.push_back(integer<int>("mac.cw_max", false, [](RunConfig& c) -> int& { return c.mac.timing.cw_max; }));
        f.push_back(integer<int>("mac.retry_limit", false, [](RunConfig& c) -> int& { return c.mac.timing.retry_limit; }));
        f.push_back(num("mac.cca_dbm", false, [](RunConfig& c) -> double& { return c.mac.timing.cca_threshold.value; }));
        f.push_back(flag("mac.edca_broadband", false, [](RunConfig& c) -> bool& { return c.mac.edca_broadband; }));
        f.push_back(flag("mac.edca_ar", false, [](RunConfig& c) -> bool& { return c.mac.edca_ar; }));

        f.push_back(num("sr.suppression_db", true, [](RunConfig& c) -> double& { return c.sr.params.suppression.value; }));
        f.push_back(integer<int>("sr.max_nulls", true, [](RunConfig& c) -> int& { return c.sr.params.max_nulls; }));
        f.push_back(num("sr.safety_margin_db", false, [](RunConfig& c) -> double& { return c.sr.params.safety_margin.value; }));
        f.push_back(num("sr.floor_below_noise_db", false,
                        [](RunConfig& c) -> double& { return c.sr.params.floor_below_noise.value; }));
        f.push_back(num("sr.min_usable_dbm", false, [](RunConfig& c) -> double& { return c.sr.params.min_usable_power.value; }));
        f.push_back(num("sr.trigger_sensitivity_dbm", false,
                        [](RunConfig& c) -> double& { return c.sr.params.trigger_sensitivity.value; }));
        f.push_back(num("sr.coordination_threshold_dbm", false,
                        [](RunConfig& c) -> double& { return c.sr.params.coordination_threshold.value; }));
        f.push_back(integer<int>("sr.refresh_txops", false, [](RunConfig& c) -> int& { return c.sr.params.refresh_period_txops; }));
        f.push_back(duration("sr.coordination_overhead_us", false, 1e3,
                             [](RunConfig& c) -> SimTime& { return c.sr.params.coordination_overhead; }));
        f.push_back(duration("sr.sounding_overhead_us", false, 1e3,
                             [](RunConfig& c) -> SimTime& { return c.sr.params.sounding_overhead; }));
        f.push_back(duration("sr.csi_validity_ms", false, 1e6, [](RunConfig& c) -> SimTime& { return c.sr.params.csi_validity; }));
        f.push_back(duration("sr.min_reuse_window_us", false, 1e3,
                             [](RunConfig& c) -> SimTime& { return c.sr.params.min_reuse_window; }));
        f.push_back(flag("sr.ar_only", false, [](RunConfig& c) -> bool& { return c.sr.ar_only; }));

        f.push_back(num("sim.duration_s", false, [](RunConfig& c) -> double& { return c.duration_s; }));
        f.push_back(num("sim.warmup_s", false, [](RunConfig& c) -> double& { return c.warmup_s; }));
        return f;
    }();
    return fields;
}

void require(bool ok, const char* key, const char* what)
{
    if (!ok)
    {
        throw ConfigError(key, what);
    }
}

bool inside_room(const Position3D& p, const Position3D& room)
{
    return p.x >= 0 && p.x <= room.x && p.y >= 0 && p.y <= room.y && p.z >= 0 && p.z <= room.z;
}

} // namespace

void validate_config(const RunConfig& c)
{
    const auto& d = c.deployment;
    require(d.room.x > 0 && d.room.y > 0 && d.room.z > 0, "deployment.room", "dimensions must be positive");
    require(!d.ap_positions.empty(), "deployment.ap_positions", "at least one AP is required");
    for (const auto& p : d.ap_positions)
    {
        require(inside_room(p, d.room), "deployment.ap_positions", "AP outside the room");
    }
    require(d.sta_height >= 0 && d.sta_height <= d.room.z, "deployment.sta_height_m", "must lie within the room height");
    require(d.n_broadband >= 0, "deployment.n_broadband", "must be non-negative");
    require(d.n_ar >= 0, "deployment.n_ar", "must be non-negative");

    require(c.traffic.ftp3_offered_mbps > 0, "traffic.ftp3.offered_mbps", "must be positive");
    require(c.traffic.ftp3_size_bytes > 0, "traffic.ftp3.size_bytes", "must be positive");
    require(c.traffic.ar_period_ms > 0, "traffic.ar.period_ms", "must be positive");
    require(c.traffic.ar_size_bytes > 0, "traffic.ar.size_bytes", "must be positive");

    require(c.radio.channel.fc_ghz > 0, "channel.fc_ghz", "must be positive");
    require(c.radio.channel.shadowing.los_db >= 0, "channel.shadowing_los_db", "must be non-negative");
    require(c.radio.channel.shadowing.nlos_db >= 0, "channel.shadowing_nlos_db", "must be non-negative");
    require(c.radio.phy.bandwidth_hz > 0, "phy.bandwidth_mhz", "must be positive");
    require(c.radio.phy.data_subcarriers > 0, "phy.data_subcarriers", "must be positive");
    require(c.radio.phy.symbol_s > 0, "phy.symbol_us", "must be positive");
    require(c.radio.phy.preamble_s >= 0, "phy.preamble_us", "must be non-negative");
    require(c.radio.phy.shannon_gap.value >= 0, "phy.shannon_gap_db", "must be non-negative");
    if (!c.radio.mcs_thresholds_db.empty())
    {
        try
        {
            (void)make_mcs_table(c.radio.phy, c.radio.mcs_thresholds_db);
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError("phy.mcs_thresholds_db", e.what());
        }
    }
    require(c.radio.ap_antennas >= 1 && c.radio.ap_antennas <= 64, "phy.ap_antennas", "must be in [1, 64]");
    require(c.radio.ap_power.value <= 40, "power.ap_dbm", "must not exceed 40 dBm");
    require(c.radio.sta_power.value <= 40, "power.sta_dbm", "must not exceed 40 dBm");
    require(c.radio.nf_ap.value >= 0, "noise.nf_ap_db", "must be non-negative");
    require(c.radio.nf_sta.value >= 0, "noise.nf_sta_db", "must be non-negative");

    const auto& t = c.mac.timing;
    require(t.txop_limit > SimTime::zero(), "mac.txop_ms", "must be positive");
    require(t.slot > SimTime::zero(), "mac.slot_us", "must be positive");
    require(t.sifs > SimTime::zero(), "mac.sifs_us", "must be positive");
    require(t.aifs >= t.sifs, "mac.aifs_us", "must be at least SIFS");
    require(t.ack > SimTime::zero(), "mac.ack_us", "must be positive");
    require(t.trigger > SimTime::zero(), "mac.trigger_us", "must be positive");
    require(t.txop_limit > t.trigger + 2 * t.sifs + t.ack, "mac.txop_ms", "too short for trigger, SIFS and ACK");
    require(t.cw_min >= 0, "mac.cw_min", "must be non-negative");
    require(t.cw_max >= t.cw_min, "mac.cw_max", "must be at least cw_min");
    require(t.retry_limit >= 0, "mac.retry_limit", "must be non-negative");

    const auto& s = c.sr.params;
    require(s.suppression.value >= 0, "sr.suppression_db", "must be non-negative");
    require(s.max_nulls >= 0 && s.max_nulls < c.radio.ap_antennas, "sr.max_nulls", "must be in [0, ap_antennas)");
    require(s.safety_margin.value >= 0, "sr.safety_margin_db", "must be non-negative");
    require(s.floor_below_noise.value >= 0, "sr.floor_below_noise_db", "must be non-negative");
    require(s.refresh_period_txops >= 1, "sr.refresh_txops", "must be at least 1");
    require(s.coordination_overhead >= SimTime::zero(), "sr.coordination_overhead_us", "must be non-negative");
    require(s.sounding_overhead >= SimTime::zero(), "sr.sounding_overhead_us", "must be non-negative");
    require(s.csi_validity > SimTime::zero(), "sr.csi_validity_ms", "must be positive");
    require(s.min_reuse_window >= SimTime::zero(), "sr.min_reuse_window_us", "must be non-negative");

    require(c.duration_s >= 0 && c.duration_s <= 1e5, "sim.duration_s", "must be in [0, 1e5]");
    require(c.warmup_s >= 0, "sim.warmup_s", "must be non-negative");
}

RunConfig parse_config_text(std::string_view text)
{
    RunConfig cfg;
    std::map<std::string, const Field*, std::less<>> by_key;
    for (const auto& f : schema())
    {
        by_key.emplace(f.key, &f);
    }
    std::set<std::string> seen;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n'))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = trim(line.substr(0, hash));
        }
        if (line.empty())
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        }
        const std::string key{trim(line.substr(0, eq))};
        const auto value = trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end())
        {
            throw ConfigError(key, "unknown key");
        }
        if (!seen.insert(key).second)
        {
            throw ConfigError(key, "duplicate key");
        }
        it->second->set(cfg, key, value);
    }
    for (const auto& f : schema())
    {
        if (f.mandatory && !seen.contains(f.key))
        {
            throw ConfigError(f.key, "missing mandatory key");
        }
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError(path.string(), "cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string render_config(const RunConfig& cfg)
{
    std::string out;
    for (const auto& f : schema())
    {
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : render_config(cfg))
    {
        h = (h ^ ch) * 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> mandatory_config_keys()
{
    std::vector<std::string> out;
    for (const auto& f : schema())
    {
        if (f.mandatory)
        {
            out.push_back(f.key);
        }
    }
    return out;
}

} // namespace cbfsim
