#include "cbfsim/simulator.hpp"

#include "cbfsim/event_queue.hpp"
#include "cbfsim/mac.hpp"
#include "cbfsim/spatial_reuse.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace cbfsim
{

std::string_view to_string(Mode m)
{
    switch (m)
    {
    case Mode::NoSr:
        return "no-sr";
    case Mode::Psr:
        return "psr";
    case Mode::Cbf:
        return "cbf";
    }
    return "?";
}

Mode mode_from_string(std::string_view s)
{
    if (s == "no-sr")
    {
        return Mode::NoSr;
    }
    if (s == "psr")
    {
        return Mode::Psr;
    }
    if (s == "cbf")
    {
        return Mode::Cbf;
    }
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

Scenario make_scenario(const RunConfig& cfg, std::uint64_t seed)
{
    validate_config(cfg);
    const RngStreams streams(seed);
    Rng placement = streams.stream(RngStreams::kDeployment);
    const auto positions = place_nodes(cfg.deployment, placement);
    ChannelMap channel(positions, cfg.radio.channel, streams.stream(RngStreams::kShadowing),
                       streams.stream(RngStreams::kFading));
    const std::size_t ap_count = cfg.deployment.ap_positions.size();
    const auto serving = associate(channel, ap_count, cfg.radio.sta_power);
    auto nodes = make_nodes(cfg, positions, serving);
    auto table = make_mcs_table(cfg.radio.phy, cfg.radio.mcs_thresholds_db);
    return Scenario{std::move(nodes), ap_count, std::move(channel), std::move(table)};
}

namespace
{

enum class Ev : std::uint8_t
{
    Arrival,
    Expiry,
    NavEnd,
    Step,
    TxEnd,
    SrAttempt,
    SuDone,
};

enum class Step : std::uint8_t
{
    Trigger,
    Ppdu,
    BlockAck,
    Ack,
};

struct Payload
{
    Ev kind{Ev::Arrival};
    NodeId node{0};
    std::uint64_t a{0};
    std::uint64_t b{0};
};

enum class TxKind : std::uint8_t
{
    Overhead,
    Trigger,
    TbPpdu,
    BlockAck,
    SuData,
    Ack,
};

struct TxInfo
{
    Transmission t;
    TxKind kind{TxKind::SuData};
    /// Received power at every node, milliwatts (0 at the sender).
    std::vector<double> rx_mw;
};

struct Reception
{
    TxId tx{0};
    NodeId rx{0};
    TxKind kind{TxKind::SuData};
    std::uint64_t tag{0};
    ReceiveConfig cfg;
    McsEntry mcs;
    GainDb worst{std::numeric_limits<double>::infinity()};
    bool failed{false};
};

struct ReceptionRequest
{
    ReceiveConfig cfg;
    McsEntry mcs;
};

struct NodeRt
{
    ContentionState cs;
    Rng rng;
    bool counting{false};
    SimTime idle_since{};
    SimTime expiry{};
    std::uint64_t gen{0};
    SimTime nav_until{};
    int tx_active{0};
    int rx_active{0};
    bool in_exchange{false};
    UplinkQueue queue;
    std::vector<Packet> arrivals;
    std::size_t next_arrival{0};
    TrafficClass rr_next{TrafficClass::Broadband};
    PowerDbm sr_power{};
    StaCounters counters{};
};

struct MuTxop
{
    std::uint64_t tag{0};
    TriggerFrame tf;
    SimTime ppdu_start{};
    SimTime data_end{};
    SimTime ba_start{};
    SimTime end{};
    std::vector<bool> ok;
    std::vector<double> rpl_mw;
    ReceiveConfig shared_cfg;
};

struct SuExchange
{
    std::uint64_t tag{0};
    NodeId ap{0};
    std::size_t bytes{0};
    bool sr{false};
    /// Donor TXOP whose reuse window carried this exchange.
    NodeId donor{0};
    std::uint64_t donor_tag{0};
    bool decoded{false};
    bool acked{false};
};

TrafficClass other(TrafficClass c)
{
    return c == TrafficClass::Broadband ? TrafficClass::AugmentedReality : TrafficClass::Broadband;
}

class Engine
{
public:
    Engine(const RunConfig& cfg, Mode mode, std::uint64_t seed)
        : cfg_{cfg}, mode_{mode}, seed_{seed}, scen_{make_scenario(cfg, seed)}, t_{cfg.mac.timing},
          sr_{cfg.sr.params}, duration_{from_seconds(cfg.duration_s)}, warmup_{from_seconds(cfg.warmup_s)}
    {
        const RngStreams streams(seed);
        const std::size_t n = scen_.nodes.size();
        rt_.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            rt_.push_back(NodeRt{ContentionState(t_.cw_min, t_.cw_max),
                                 streams.stream(RngStreams::kBackoff, i), false, {}, {}, 0, {}, 0, 0, false, {}, {},
                                 0, TrafficClass::Broadband, {}, {}});
        }
        mu_.resize(n);
        su_.resize(n);
        members_.resize(scen_.ap_count);

        PacketIdAllocator ids;
        const double ftp_rate = ftp3_rate(cfg.traffic.ftp3_offered_mbps * 1e6, cfg.traffic.ftp3_size_bytes);
        const SimTime period = from_seconds(cfg.traffic.ar_period_ms * 1e-3);
        for (const auto& node : scen_.nodes)
        {
            views_.push_back(NodeView{node.id, node.is_ap, node.bss, node.tx_power, node.cls});
            if (node.is_ap)
            {
                continue;
            }
            members_[node.bss].push_back(node.id);
            auto& r = rt_[node.id];
            Rng traffic = streams.stream(RngStreams::kTraffic, node.id);
            if (node.cls == TrafficClass::Broadband)
            {
                r.arrivals = ftp3_arrivals(ftp_rate, cfg.traffic.ftp3_size_bytes, duration_, traffic, node.id, ids);
            }
            else
            {
                const SimTime offset{uniform_int(traffic, 0, period.count() - 1)};
                r.arrivals = cbr_arrivals(period, cfg.traffic.ar_size_bytes, offset, duration_, node.id, ids);
            }
            for (auto& p : r.arrivals)
            {
                p.cls = node.cls;
            }
            r.counters.sta = node.id;
            r.counters.bss = node.bss;
            r.counters.cls = node.cls;
        }

        if (mode_ == Mode::Cbf)
        {
            coord_ = establish_coordination_set(views_, mean_rx_fn(), sr_.coordination_threshold,
                                                sr_.refresh_period_txops, 0);
        }
    }

    RunResult run()
    {
        for (const auto& node : scen_.nodes)
        {
            schedule_next_arrival(node.id);
        }
        while (!queue_.empty() && queue_.next_time() <= duration_)
        {
            const auto e = queue_.dispatch_next();
            dispatch(e.payload);
        }
        return finish();
    }

private:
    // ---- helpers -------------------------------------------------------

    MeanRxFn mean_rx_fn() const
    {
        return [this](NodeId from, NodeId to, PowerDbm p) { return scen_.channel.mean_rx_power(p, from, to); };
    }

    SimTime now() const { return queue_.now(); }
    const Node& node(NodeId id) const { return scen_.nodes[id]; }
    int antennas(NodeId ap) const { return scen_.nodes[ap].antennas; }

    bool edca_allowed(TrafficClass c) const
    {
        return c == TrafficClass::Broadband ? cfg_.mac.edca_broadband : cfg_.mac.edca_ar;
    }

    bool trigger_eligible(NodeId sta) const
    {
        return rt_[sta].queue.has_sendable() && !rt_[sta].in_exchange;
    }

    bool wants(NodeId n) const
    {
        const auto& r = rt_[n];
        if (r.in_exchange)
        {
            return false;
        }
        if (node(n).is_ap)
        {
            return std::any_of(members_[n].begin(), members_[n].end(),
                               [this](NodeId s) { return trigger_eligible(s); });
        }
        return edca_allowed(node(n).cls) && r.queue.has_sendable();
    }

    bool cca(NodeId n, std::optional<std::uint64_t> ignore_tag = std::nullopt) const
    {
        double total = 0.0;
        bool any = false;
        for (const auto& [id, info] : txs_)
        {
            const auto& tx = info.t;
            if (tx.tx == n || (ignore_tag && tx.txop_tag == *ignore_tag))
            {
                continue;
            }
            total += info.rx_mw[n];
            any = true;
        }
        return any && total >= dbm_to_mw(t_.cca_threshold) * (1.0 - 1e-12);
    }

    bool access_idle(NodeId n) const
    {
        const auto& r = rt_[n];
        return !r.in_exchange && r.tx_active == 0 && r.rx_active == 0 && now() >= r.nav_until && !cca(n);
    }

    void update(NodeId n)
    {
        auto& r = rt_[n];
        const bool go = wants(n) && access_idle(n);
        if (go && !r.counting)
        {
            r.counting = true;
            r.idle_since = now();
            if (!r.cs.armed())
            {
                r.cs.draw_backoff(r.rng);
            }
            r.expiry = countdown_expiry(now(), r.cs.backoff_counter(), t_);
            ++r.gen;
            queue_.schedule(r.expiry, EventClass::Timer, {Ev::Expiry, n, r.gen, 0});
        }
        else if (!go && r.counting)
        {
            if (r.expiry <= now())
            {
                // Countdown ends in this very slot: the node transmits anyway.
                return;
            }
            r.cs.consume_slots(slots_elapsed(r.idle_since, now(), t_));
            r.counting = false;
            ++r.gen;
        }
    }

    void refresh_all()
    {
        for (NodeId n = 0; n < rt_.size(); ++n)
        {
            update(n);
        }
    }

    // ---- medium --------------------------------------------------------

    TxId start_tx(Transmission t, TxKind kind, std::optional<ReceptionRequest> rx = std::nullopt)
    {
        t.id = ++next_tx_;
        medium_.add(t);
        TxInfo info{t, kind, std::vector<double>(scen_.nodes.size(), 0.0)};
        for (NodeId n = 0; n < scen_.nodes.size(); ++n)
        {
            if (n != t.tx)
            {
                info.rx_mw[n] = dbm_to_mw(scen_.channel.rx_power(t.power, t.tx, n));
            }
        }
        txs_.emplace(t.id, std::move(info));
        ++rt_[t.tx].tx_active;
        for (auto& rec : receptions_)
        {
            if (rec.rx == t.tx)
            {
                rec.failed = true;
            }
        }
        if (rx && t.rx)
        {
            Reception rec;
            rec.tx = t.id;
            rec.rx = *t.rx;
            rec.kind = kind;
            rec.tag = t.txop_tag;
            rec.cfg = rx->cfg;
            rec.mcs = rx->mcs;
            rec.failed = rt_[rec.rx].tx_active > 0;
            ++rt_[rec.rx].rx_active;
            receptions_.push_back(std::move(rec));
        }
        for (auto& rec : receptions_)
        {
            rec.worst = std::min(rec.worst, current_sinr(rec));
        }
        queue_.schedule(t.end, EventClass::FrameEnd, {Ev::TxEnd, t.tx, t.id, 0});
        return t.id;
    }

    std::vector<Interferer> interferers_at(NodeId rx, const ReceiveConfig& cfg, std::optional<TxId> exclude,
                                           std::optional<std::uint64_t> mu_tag) const
    {
        std::vector<Interferer> out;
        for (const auto& [id, info] : txs_)
        {
            const auto& u = info.t;
            if ((exclude && id == *exclude) || !u.interferes || u.tx == rx)
            {
                continue;
            }
            // Streams of the same multi-user PPDU are separated by the ZF filter.
            if (mu_tag && info.kind == TxKind::TbPpdu && u.txop_tag == *mu_tag)
            {
                continue;
            }
            const bool nulled = std::find(cfg.nulled_ids.begin(), cfg.nulled_ids.end(), u.tx) != cfg.nulled_ids.end();
            out.push_back({mw_to_dbm(info.rx_mw[rx]), nulled});
        }
        return out;
    }

    GainDb current_sinr(const Reception& rec) const
    {
        const auto& info = txs_.at(rec.tx);
        const auto mu_tag = rec.kind == TxKind::TbPpdu ? std::optional<std::uint64_t>{rec.tag} : std::nullopt;
        const auto ints = interferers_at(rec.rx, rec.cfg, rec.tx, mu_tag);
        return post_filter_sinr(mw_to_dbm(info.rx_mw[rec.rx]), ints, node(rec.rx).noise, rec.cfg, sr_.suppression,
                                sr_.max_nulls);
    }

    void end_tx(TxId id)
    {
        const auto it = txs_.find(id);
        if (it == txs_.end())
        {
            throw InvariantViolation("transmission ended twice");
        }
        const TxInfo info = std::move(it->second);
        txs_.erase(it);
        medium_.remove(id);
        --rt_[info.t.tx].tx_active;

        std::optional<bool> decoded;
        const auto rit = std::find_if(receptions_.begin(), receptions_.end(),
                                      [id](const Reception& r) { return r.tx == id; });
        if (rit != receptions_.end())
        {
            decoded = !rit->failed && decode_success(rit->worst, rit->mcs);
            --rt_[rit->rx].rx_active;
            receptions_.erase(rit);
        }

        switch (info.kind)
        {
        case TxKind::Trigger:
            on_trigger_end(info);
            break;
        case TxKind::TbPpdu:
            on_ppdu_end(info, decoded.value_or(false));
            break;
        case TxKind::BlockAck:
            finish_mu(info.t.tx, info.t.txop_tag);
            break;
        case TxKind::SuData:
            on_su_data_end(info, decoded.value_or(false));
            break;
        case TxKind::Overhead:
        case TxKind::Ack:
            break;
        }
        refresh_all();
    }

    // ---- events --------------------------------------------------------

    void dispatch(const Payload& p)
    {
        switch (p.kind)
        {
        case Ev::Arrival:
            on_arrival(p.node);
            break;
        case Ev::Expiry:
            on_expiry(p.node, p.a);
            break;
        case Ev::NavEnd:
            update(p.node);
            break;
        case Ev::Step:
            on_step(p.node, static_cast<Step>(p.a), p.b);
            break;
        case Ev::TxEnd:
            end_tx(p.a);
            break;
        case Ev::SrAttempt:
            on_sr_attempt(p.node, p.a, static_cast<NodeId>(p.b));
            break;
        case Ev::SuDone:
            on_su_done(p.node, p.a);
            break;
        }
    }

    void schedule_next_arrival(NodeId n)
    {
        auto& r = rt_[n];
        if (r.next_arrival < r.arrivals.size())
        {
            queue_.schedule(r.arrivals[r.next_arrival].arrival_time, EventClass::Arrival, {Ev::Arrival, n, 0, 0});
        }
    }

    void on_arrival(NodeId n)
    {
        auto& r = rt_[n];
        r.queue.push(r.arrivals[r.next_arrival++]);
        ++r.counters.generated;
        schedule_next_arrival(n);
        update(n);
        update(node(n).bss);
    }

    void on_expiry(NodeId n, std::uint64_t gen)
    {
        auto& r = rt_[n];
        if (!r.counting || gen != r.gen)
        {
            return;
        }
        r.counting = false;
        ++r.gen;
        r.cs.consume_slots(r.cs.backoff_counter());
        if (!wants(n) || r.tx_active > 0 || r.rx_active > 0 || now() < r.nav_until)
        {
            update(n);
            return;
        }
        r.cs.granted();
        if (node(n).is_ap)
        {
            start_mu(n);
        }
        else
        {
            start_su(n);
        }
    }

    // ---- multi-user TXOP ----------------------------------------------

    TriggerParams trigger_params(NodeId ap, int nulls, SimTime overhead) const
    {
        TriggerParams p;
        p.antennas = antennas(ap);
        p.nulls = nulls;
        p.max_nulls = sr_.max_nulls;
        p.noise = node(ap).noise;
        p.overhead = overhead;
        p.timing = t_;
        p.preamble_s = cfg_.radio.phy.preamble_s;
        p.mcs_table = scen_.mcs_table;
        return p;
    }

    void start_mu(NodeId ap)
    {
        if (txs_.empty())
        {
            scen_.channel.begin_block();
        }
        ++txops_;
        ++ap_txops_;
        auto& r = rt_[ap];

        std::vector<TriggerCandidate> cands;
        for (NodeId s : members_[ap])
        {
            if (trigger_eligible(s))
            {
                const auto& q = rt_[s].queue;
                cands.push_back({s, node(s).cls, q.queued_bytes(), q.head_remaining(),
                                 scen_.channel.rx_power(node(s).tx_power, s, ap)});
            }
        }
        auto tf = build_trigger(ap, cands, r.rr_next, trigger_params(ap, 0, SimTime::zero()));
        if (!tf)
        {
            update(ap);
            return;
        }

        SimTime overhead{};
        std::vector<NodeId> protect;
        bool cbf = false;
        if (mode_ == Mode::Cbf && coord_)
        {
            if (coord_->refresh_due(ap_txops_))
            {
                coord_ = establish_coordination_set(views_, mean_rx_fn(), sr_.coordination_threshold,
                                                    sr_.refresh_period_txops, ap_txops_);
            }
            if (coord_ && tf->data_duration >= sr_.min_reuse_window)
            {
                cbf = true;
                ++reuse_.cbf_txops;
                std::vector<NominationCandidate> nominees;
                for (const auto& nd : scen_.nodes)
                {
                    if (!nd.is_ap && nd.bss != ap)
                    {
                        nominees.push_back({nd.id, nd.cls, trigger_eligible(nd.id),
                                            scen_.channel.mean_rx_power(nd.tx_power, nd.id, ap)});
                    }
                }
                protect = dynamic_coordination(*coord_, nominees, std::min(sr_.max_nulls, antennas(ap) - 1));
                overhead = sr_.coordination_overhead;
                if (!protect.empty())
                {
                    std::vector<std::pair<NodeId, NodeId>> targets;
                    for (NodeId p : protect)
                    {
                        targets.emplace_back(ap, p);
                    }
                    for (NodeId shared : coord_->shared_aps(ap))
                    {
                        for (const auto& s : tf->schedule)
                        {
                            targets.emplace_back(shared, s.sta);
                        }
                    }
                    overhead += sequential_sounding(csi_, targets, now(), sr_.csi_validity, sr_.sounding_overhead,
                                                    mean_rx_fn(), views_);
                }
                auto rebuilt = build_trigger(ap, cands, r.rr_next,
                                             trigger_params(ap, static_cast<int>(protect.size()), overhead));
                if (!rebuilt)
                {
                    throw InvariantViolation("trigger vanished after coordination");
                }
                tf = std::move(rebuilt);
            }
        }
        r.rr_next = other(tf->cls);

        MuTxop m;
        m.tag = ++next_tag_;
        m.shared_cfg = single_stream_config(cfg_.radio.ap_antennas);
        if (mode_ != Mode::NoSr)
        {
            const PsrField base = compute_psr_field(node(ap).tx_power, *tf, node(ap).noise, sr_.safety_margin,
                                                    sr_.floor_below_noise);
            tf->psr_field = base;
            if (cbf && !protect.empty())
            {
                std::vector<NodeId> ranked;
                for (const auto& s : tf->schedule)
                {
                    ranked.push_back(s.sta);
                }
                const auto shared_aps = coord_->shared_aps(ap);
                auto strength = [&](NodeId s) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (NodeId a : shared_aps)
                    {
                        best = std::max(best, scen_.channel.mean_rx_power(node(s).tx_power, s, a).value);
                    }
                    return best;
                };
                std::stable_sort(ranked.begin(), ranked.end(),
                                 [&](NodeId a, NodeId b) { return strength(a) > strength(b); });
                const auto c = configure_cbf_txop(antennas(ap), tf->rx_config.streams, protect, base,
                                                  cfg_.radio.ap_antennas, ranked, sr_.suppression, sr_.max_nulls);
                tf->rx_config = c.donor;
                tf->psr_field = c.relaxed;
                m.shared_cfg.nulls = c.shared.nulls;
                m.shared_cfg.nulled_ids = c.shared.nulled_ids;
                reuse_.protected_stas += c.protected_stas.size();
                if (!zf_feasible(c.donor, sr_.max_nulls) || !zf_feasible(c.shared, sr_.max_nulls) ||
                    !zf_feasible(m.shared_cfg, sr_.max_nulls))
                {
                    throw InvariantViolation("coordinated beamforming produced an infeasible receive configuration");
                }
            }
        }

        const SimTime start = now();
        const SimTime trig_start = start + overhead;
        m.ppdu_start = trig_start + t_.trigger + t_.sifs;
        m.data_end = m.ppdu_start + tf->data_duration;
        m.ba_start = m.data_end + t_.sifs;
        m.end = m.ba_start + t_.ack;
        if (m.end - start != tf->txop_duration || tf->txop_duration > t_.txop_limit)
        {
            throw InvariantViolation("TXOP exceeds its limit");
        }
        for (const auto& s : tf->schedule)
        {
            if (m.ppdu_start + s.duration > m.data_end)
            {
                throw InvariantViolation("scheduled uplink extends past the TXOP");
            }
            rt_[s.sta].in_exchange = true;
            rt_[s.sta].queue.set_in_flight(true);
        }
        m.ok.assign(tf->schedule.size(), false);
        m.tf = std::move(*tf);
        r.in_exchange = true;
        const std::uint64_t tag = m.tag;
        mu_[ap] = std::move(m);

        if (overhead > SimTime::zero())
        {
            start_tx(Transmission{0, ap, std::nullopt, node(ap).tx_power, start, trig_start, tag, true},
                     TxKind::Overhead);
            queue_.schedule(trig_start, EventClass::FrameStart, {Ev::Step, ap, static_cast<std::uint64_t>(Step::Trigger), tag});
        }
        else
        {
            on_step(ap, Step::Trigger, tag);
        }
        refresh_all();
    }

    void on_step(NodeId n, Step step, std::uint64_t tag)
    {
        if (step == Step::Ack)
        {
            on_su_ack(n, tag);
            return;
        }
        auto& m = mu_[n];
        if (!m || m->tag != tag)
        {
            throw InvariantViolation("stale TXOP step");
        }
        const Node& ap = node(n);
        switch (step)
        {
        case Step::Trigger:
            start_tx(Transmission{0, n, std::nullopt, ap.tx_power, now(), now() + t_.trigger, tag, true},
                     TxKind::Trigger);
            queue_.schedule(m->ppdu_start, EventClass::FrameStart, {Ev::Step, n, static_cast<std::uint64_t>(Step::Ppdu), tag});
            break;
        case Step::Ppdu:
            for (const auto& s : m->tf.schedule)
            {
                start_tx(Transmission{0, s.sta, n, node(s.sta).tx_power, now(), now() + s.duration, tag, true},
                         TxKind::TbPpdu, ReceptionRequest{m->tf.rx_config, s.mcs});
            }
            open_reuse_window(n);
            queue_.schedule(m->ba_start, EventClass::FrameStart, {Ev::Step, n, static_cast<std::uint64_t>(Step::BlockAck), tag});
            break;
        case Step::BlockAck:
            start_tx(Transmission{0, n, std::nullopt, ap.tx_power, now(), now() + t_.ack, tag, true}, TxKind::BlockAck);
            break;
        case Step::Ack:
            break;
        }
        refresh_all();
    }

    void on_trigger_end(const TxInfo& info)
    {
        const NodeId ap = info.t.tx;
        auto& m = mu_[ap];
        if (!m)
        {
            throw InvariantViolation("trigger without TXOP");
        }
        m->rpl_mw = info.rx_mw;
        for (NodeId n = 0; n < scen_.nodes.size(); ++n)
        {
            if (n == ap || info.rx_mw[n] <= 0.0)
            {
                continue;
            }
            const bool scheduled = std::any_of(m->tf.schedule.begin(), m->tf.schedule.end(),
                                               [n](const ScheduledUplink& s) { return s.sta == n; });
            if (!scheduled && mw_to_dbm(info.rx_mw[n]) >= sr_.trigger_sensitivity)
            {
                rt_[n].nav_until = std::max(rt_[n].nav_until, m->end);
                queue_.schedule(m->end, EventClass::Timer, {Ev::NavEnd, n, 0, 0});
            }
        }
    }

    void on_ppdu_end(const TxInfo& info, bool decoded)
    {
        const NodeId ap = *info.t.rx;
        auto& m = mu_[ap];
        if (!m || m->tag != info.t.txop_tag)
        {
            throw InvariantViolation("uplink PPDU outside its TXOP");
        }
        for (std::size_t i = 0; i < m->tf.schedule.size(); ++i)
        {
            if (m->tf.schedule[i].sta == info.t.tx)
            {
                m->ok[i] = decoded;
            }
        }
    }

    void finish_mu(NodeId ap, std::uint64_t tag)
    {
        auto& m = mu_[ap];
        if (!m || m->tag != tag)
        {
            throw InvariantViolation("block ack outside its TXOP");
        }
        bool any_ok = false;
        for (std::size_t i = 0; i < m->tf.schedule.size(); ++i)
        {
            const auto& s = m->tf.schedule[i];
            auto& sr = rt_[s.sta];
            const auto rec = register_outcome(sr.queue, s.bytes, m->ok[i], now(), t_.retry_limit);
            record(s.sta, rec, s.bytes, m->ok[i]);
            sr.in_exchange = false;
            any_ok = any_ok || m->ok[i];
        }
        auto& r = rt_[ap];
        if (any_ok)
        {
            r.cs.on_success();
        }
        else
        {
            r.cs.on_failure();
        }
        r.in_exchange = false;
        m.reset();
    }

    // ---- spatial reuse -------------------------------------------------

    void open_reuse_window(NodeId ap)
    {
        const auto& m = *mu_[ap];
        if (!m.tf.psr_field)
        {
            return;
        }
        ++reuse_.windows;
        const PsrField& field = *m.tf.psr_field;
        for (const auto& nd : scen_.nodes)
        {
            if (nd.is_ap || nd.bss == ap || (cfg_.sr.ar_only && nd.cls != TrafficClass::AugmentedReality))
            {
                continue;
            }
            auto& r = rt_[nd.id];
            if (!r.queue.has_sendable() || r.in_exchange || r.tx_active > 0 || m.rpl_mw[nd.id] <= 0.0)
            {
                continue;
            }
            const PowerDbm rpl = mw_to_dbm(m.rpl_mw[nd.id]);
            if (rpl < sr_.trigger_sensitivity)
            {
                continue;
            }
            const auto allowed = evaluate_opportunity(nd.id, rpl, field, nd.tx_power, sr_.min_usable_power);
            if (!allowed)
            {
                continue;
            }
            ++reuse_.opportunities;
            r.sr_power = *allowed;
            arm_reuse(nd.id, ap, m.ppdu_start);
        }
    }

    /// Fresh short backoff inside the donor's window; nothing if it would not start before the window ends.
    void arm_reuse(NodeId n, NodeId donor, SimTime from)
    {
        const auto& m = *mu_[donor];
        const auto slots = uniform_int(rt_[n].rng, 0, t_.cw_min);
        const SimTime at = from + t_.aifs + slots * t_.slot;
        if (at < m.data_end)
        {
            queue_.schedule(at, EventClass::Timer, {Ev::SrAttempt, n, m.tag, donor});
        }
    }

    void on_sr_attempt(NodeId n, std::uint64_t tag, NodeId donor)
    {
        const auto& m = mu_[donor];
        auto& r = rt_[n];
        if (!m || m->tag != tag || now() >= m->data_end)
        {
            return;
        }
        if (!r.queue.has_sendable() || r.in_exchange || r.tx_active > 0)
        {
            return;
        }
        if (r.rx_active > 0 || cca(n, tag))
        {
            arm_reuse(n, donor, now());
            return;
        }
        const NodeId shared = node(n).bss;
        const ReceiveConfig& rx_cfg = m->shared_cfg;
        const PowerDbm signal = scen_.channel.rx_power(r.sr_power, n, shared);
        const auto ints = interferers_at(shared, rx_cfg, std::nullopt, std::nullopt);
        const GainDb predicted = post_filter_sinr(signal, ints, node(shared).noise, rx_cfg, sr_.suppression, sr_.max_nulls);
        const auto chosen = select_mcs(predicted, scen_.mcs_table);
        if (!chosen)
        {
            // The opportunity cannot carry even the most robust MCS.
            return;
        }
        const McsEntry mcs = *chosen;

        const SimTime left = m->data_end - now() - t_.sifs - t_.ack;
        if (left <= from_seconds(cfg_.radio.phy.preamble_s) + SimTime{1})
        {
            return;
        }
        const std::size_t bytes =
            std::min(r.queue.head_remaining(),
                     bytes_that_fit(to_seconds(left - SimTime{1}), mcs, 1, cfg_.radio.phy.preamble_s));
        if (bytes == 0)
        {
            return;
        }
        ++reuse_.attempts;
        begin_su(n, shared, r.sr_power, mcs, bytes, rx_cfg, true);
        su_[n]->donor = donor;
        su_[n]->donor_tag = tag;
        if (now() + airtime_from_seconds(tx_duration(bytes, mcs, 1, cfg_.radio.phy.preamble_s)) + t_.sifs + t_.ack >
            m->data_end)
        {
            throw InvariantViolation("reuse exchange overruns its window");
        }
    }

    // ---- single-user exchange -----------------------------------------

    void start_su(NodeId n)
    {
        if (txs_.empty())
        {
            scen_.channel.begin_block();
        }
        ++txops_;
        const NodeId ap = node(n).bss;
        const ReceiveConfig rx_cfg = single_stream_config(antennas(ap));
        const PowerDbm power = node(n).tx_power;
        const GainDb predicted = (scen_.channel.rx_power(power, n, ap) + array_gain(rx_cfg)) - node(ap).noise;
        const McsEntry mcs = select_mcs(predicted, scen_.mcs_table).value_or(scen_.mcs_table.front());
        const SimTime budget = t_.txop_limit - t_.sifs - t_.ack - SimTime{1};
        const std::size_t bytes = std::min(
            rt_[n].queue.head_remaining(), bytes_that_fit(to_seconds(budget), mcs, 1, cfg_.radio.phy.preamble_s));
        if (bytes == 0)
        {
            throw InvariantViolation("TXOP too short for any payload");
        }
        begin_su(n, ap, power, mcs, bytes, rx_cfg, false);
    }

    void begin_su(NodeId n, NodeId ap, PowerDbm power, const McsEntry& mcs, std::size_t bytes,
                  const ReceiveConfig& rx_cfg, bool sr)
    {
        auto& r = rt_[n];
        SuExchange x;
        x.tag = ++next_tag_;
        x.ap = ap;
        x.bytes = bytes;
        x.sr = sr;
        r.in_exchange = true;
        r.queue.set_in_flight(true);
        const SimTime dur = airtime_from_seconds(tx_duration(bytes, mcs, 1, cfg_.radio.phy.preamble_s));
        su_[n] = x;
        start_tx(Transmission{0, n, ap, power, now(), now() + dur, x.tag, true}, TxKind::SuData,
                 ReceptionRequest{rx_cfg, mcs});
        queue_.schedule(now() + dur + t_.sifs + t_.ack, EventClass::FrameEnd, {Ev::SuDone, n, x.tag, 0});
        refresh_all();
    }

    void on_su_data_end(const TxInfo& info, bool decoded)
    {
        auto& x = su_[info.t.tx];
        if (!x || x.value().tag != info.t.txop_tag)
        {
            throw InvariantViolation("data frame outside its exchange");
        }
        x->decoded = decoded;
        queue_.schedule(now() + t_.sifs, EventClass::FrameStart,
                        {Ev::Step, info.t.tx, static_cast<std::uint64_t>(Step::Ack), x->tag});
    }

    void on_su_ack(NodeId sta, std::uint64_t tag)
    {
        auto& x = su_[sta];
        if (!x || x->tag != tag)
        {
            throw InvariantViolation("acknowledgement outside its exchange");
        }
        const auto& ap = rt_[x->ap];
        if (x->decoded && ap.tx_active == 0 && !ap.in_exchange)
        {
            start_tx(Transmission{0, x->ap, sta, node(x->ap).tx_power, now(), now() + t_.ack, tag, !x->sr},
                     TxKind::Ack);
            x->acked = true;
        }
        refresh_all();
    }

    void on_su_done(NodeId n, std::uint64_t tag)
    {
        auto& x = su_[n];
        if (!x || x->tag != tag)
        {
            throw InvariantViolation("exchange completed twice");
        }
        auto& r = rt_[n];
        OutcomeRecord rec;
        if (x->sr)
        {
            rec = register_outcome(r.queue, x->bytes, x->acked, now(), t_.retry_limit);
            if (x->acked)
            {
                ++reuse_.successes;
                r.cs.on_success();
                r.cs.granted();
            }
        }
        else
        {
            rec = ack_and_retry(r.queue, x->bytes, x->acked, r.cs, now(), t_.retry_limit);
        }
        record(n, rec, x->bytes, x->acked);
        r.in_exchange = false;
        const bool rearm = x->sr && mu_[x->donor] && mu_[x->donor]->tag == x->donor_tag && r.queue.has_sendable();
        const NodeId donor = x->donor;
        x.reset();
        if (rearm)
        {
            arm_reuse(n, donor, now());
        }
        refresh_all();
    }

    // ---- accounting ----------------------------------------------------

    void record(NodeId sta, const OutcomeRecord& rec, std::size_t bytes, bool ok)
    {
        auto& c = rt_[sta].counters;
        if (ok && now() >= warmup_ && now() <= duration_)
        {
            c.delivered_bits_measured += static_cast<std::uint64_t>(bytes) * 8;
        }
        if (!rec.packet)
        {
            return;
        }
        const Packet& p = *rec.packet;
        const bool measured = p.arrival_time >= warmup_;
        if (rec.outcome == TxOutcome::Delivered)
        {
            ++c.delivered;
            if (measured)
            {
                samples_.push_back(LatencySample{sta, p.cls, to_seconds(p.arrival_time),
                                                 to_seconds(*p.delivered_time - p.arrival_time), p.retries});
            }
        }
        else if (rec.outcome == TxOutcome::Dropped)
        {
            ++c.dropped;
            c.dropped_measured += measured ? 1 : 0;
        }
    }

    RunResult finish()
    {
        RunResult res;
        res.mode = mode_;
        res.seed = seed_;
        res.config_hash = config_hash(cfg_);
        res.measured_s = std::max(0.0, cfg_.duration_s - cfg_.warmup_s);
        res.samples = std::move(samples_);
        res.events = queue_.dispatched();
        res.txops = txops_;
        res.reuse = reuse_;
        for (const auto& nd : scen_.nodes)
        {
            if (nd.is_ap)
            {
                continue;
            }
            auto c = rt_[nd.id].counters;
            c.queued = rt_[nd.id].queue.size();
            if (c.generated != c.delivered + c.dropped + c.queued)
            {
                throw InvariantViolation("packet conservation violated at STA " + std::to_string(nd.id));
            }
            c.throughput_mbps =
                res.measured_s > 0 ? static_cast<double>(c.delivered_bits_measured) / res.measured_s / 1e6 : 0.0;
            res.stas.push_back(c);
        }
        return res;
    }

    const RunConfig& cfg_;
    Mode mode_;
    std::uint64_t seed_;
    Scenario scen_;
    MacTiming t_;
    SpatialReuseParams sr_;
    SimTime duration_;
    SimTime warmup_;

    EventQueue<Payload> queue_;
    MediumState medium_;
    std::map<TxId, TxInfo> txs_;
    std::vector<Reception> receptions_;
    std::vector<NodeRt> rt_;
    std::vector<std::optional<MuTxop>> mu_;
    std::vector<std::optional<SuExchange>> su_;
    std::vector<std::vector<NodeId>> members_;
    std::vector<NodeView> views_;
    std::optional<CoordinationSet> coord_;
    CsiCache csi_;

    TxId next_tx_{0};
    std::uint64_t next_tag_{0};
    std::uint64_t txops_{0};
    std::uint64_t ap_txops_{0};
    ReuseCounters reuse_{};
    std::vector<LatencySample> samples_;
};

} // namespace

RunResult run(const RunConfig& cfg, Mode mode, std::uint64_t seed)
{
    Engine engine(cfg, mode, seed);
    return engine.run();
}

std::vector<RunResult> run_seeds(const RunConfig& cfg, Mode mode, std::uint64_t first_seed, std::size_t count)
{
    std::vector<RunResult> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        out.push_back(run(cfg, mode, first_seed + i));
    }
    return out;
}

} // namespace cbfsim
